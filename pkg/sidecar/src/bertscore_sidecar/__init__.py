from .scoring import BertScoreBackend, ScoringBackend, SidecarConfig
from .server import handle_line, serve_stdio, serve_stream, serve_tcp

__version__ = "0.1.0"
