"""Entry point: load the model, then serve the wire protocol on stdio or TCP."""

from __future__ import annotations

import argparse
import sys

from .scoring import BertScoreBackend, SidecarConfig
from .server import serve_stdio, serve_tcp


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bertscore-sidecar",
        description="Serve BERTScore-style similarity over line-delimited JSON.",
    )
    parser.add_argument("--model", required=True, help="HF checkpoint id or local model directory")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--batch-size", type=int, default=16, dest="batch_size")
    parser.add_argument("--layer", type=int, default=None, help="hidden layer for embeddings")
    parser.add_argument("--rescale", type=float, default=None, metavar="BASELINE",
                        help="rescale scores as (x - BASELINE) / (1 - BASELINE)")
    parser.add_argument("--port", type=int, default=None, help="serve TCP on this port instead of stdio")
    parser.add_argument("--host", default="127.0.0.1")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = SidecarConfig(
        model=args.model,
        device=args.device,
        batch_size=args.batch_size,
        num_layers=args.layer,
        rescale=args.rescale is not None,
        baseline=args.rescale if args.rescale is not None else 0.0,
    )
    try:
        backend = BertScoreBackend(config)
    except Exception as exc:
        sys.stderr.write(f"error: cannot load model {config.model!r}: {exc}\n")
        return 1
    if args.port is not None:
        serve_tcp(backend, args.host, args.port)
    else:
        serve_stdio(backend)
    return 0


if __name__ == "__main__":
    sys.exit(main())
