"""scoregame: summary-scoring metrics, universal evasion attacks against them, and defences."""

from .combined import CombinedOutput, combine, evasion_success
from .defence import (
    AdjacencyParseProvider,
    DefenceThresholds,
    DefenceVerdict,
    ParseProvider,
    dependency_triple_f1,
    sanitize,
)
from .harness import (
    CorpusError,
    CorpusPair,
    SystemKind,
    SystemUnderTest,
    emit_report,
    lead3,
    load_corpus,
    load_predictions,
    run_evaluation,
    save_corpus,
    score_texts,
)
from .metrics import MeteorParams, MetricReport, aggregate, meteor, rouge_l, rouge_l_summary, rouge_n
from .rouge_attack import (
    AttackConfig,
    BagPredictorKind,
    WordBag,
    attack_rouge,
    bag_to_sequence,
    predict_bag,
)
from .similarity import (
    BridgeError,
    BridgeSimilarityScorer,
    MockSimilarityScorer,
    SimilarityScore,
    SimilarityScorer,
    batch_score,
    score_similarity,
)
from .text import NGramBag, TokenizerMode, TokenSequence, bag_intersection_size, lcs, ngram_bag, tokenize
from .trigger_search import (
    ALPHABET,
    EmulatorString,
    FitHistory,
    GaConfig,
    TriggerSearchError,
    fit_to_set,
    ga_optimize,
    validate_emulator,
)

__version__ = "0.1.0"
