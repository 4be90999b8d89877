"""Input-agnostic attack on lexical overlap metrics.

Predict which words a reference summary will contain, then stitch those words
back into a sequence by repeatedly copying the longest run of consecutive
"salient" tokens out of the document.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

from .text import TokenSequence, tokenize

MAX_WORD_COUNT = 2  # assume a summary repeats a word at most twice
DEFAULT_FREQUENCY_K = 40


def _load_stopwords() -> frozenset[str]:
    data = resources.files("scoregame.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in data.splitlines() if w.strip() and not w.startswith("#"))


STOPWORDS = _load_stopwords()


class BagPredictorKind(Enum):
    ORACLE = "oracle"
    FREQUENCY = "frequency"

    @classmethod
    def coerce(cls, kind: "BagPredictorKind | str") -> "BagPredictorKind":
        if isinstance(kind, BagPredictorKind):
            return kind
        return cls(str(kind).lower())


@dataclass(frozen=True)
class WordBag:
    """Predicted summary words; every count is 1 or 2."""

    counts: Mapping[str, int]

    def __post_init__(self):
        for token, count in self.counts.items():
            if not 1 <= count <= MAX_WORD_COUNT:
                raise ValueError(f"count for {token!r} must be 1 or {MAX_WORD_COUNT}, got {count}")

    @property
    def size(self) -> int:
        return sum(self.counts.values())

    def __bool__(self) -> bool:
        return bool(self.counts)


@dataclass(frozen=True)
class AttackConfig:
    """Run cutoff and predictor choice for the bag-to-sequence attack."""

    c_min: int = 3
    predictor: BagPredictorKind = BagPredictorKind.ORACLE
    frequency_k: int = DEFAULT_FREQUENCY_K

    def __post_init__(self):
        if self.c_min < 1:
            raise ValueError("c_min must be >= 1")
        if self.frequency_k < 1:
            raise ValueError("frequency_k must be >= 1")
        object.__setattr__(self, "predictor", BagPredictorKind.coerce(self.predictor))


@dataclass(frozen=True)
class SalientRun:
    """A copied block: ``tokens`` appear contiguously in the document at ``start``."""

    start: int
    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


def predict_bag(
    document: TokenSequence,
    reference: TokenSequence | None,
    kind: BagPredictorKind | str = BagPredictorKind.ORACLE,
    k: int = DEFAULT_FREQUENCY_K,
) -> WordBag:
    """Predict the reference word bag from the document.

    ``oracle`` peeks at the reference: count = min(reference count, document
    count, 2), i.e. the capped document/reference intersection. ``frequency``
    is reference-free: the k most frequent non-stopword document tokens,
    count 1 each (frequency ties broken by first occurrence).
    """
    kind = BagPredictorKind.coerce(kind)
    doc_counts = Counter(document.tokens)
    if kind is BagPredictorKind.ORACLE:
        if reference is None:
            raise ValueError("oracle predictor requires a reference")
        ref_counts = Counter(reference.tokens)
        counts = {}
        for token, ref_count in ref_counts.items():
            capped = min(ref_count, doc_counts.get(token, 0), MAX_WORD_COUNT)
            if capped > 0:
                counts[token] = capped
        return WordBag(counts)
    first_seen: dict[str, int] = {}
    for i, token in enumerate(document.tokens):
        first_seen.setdefault(token, i)
    candidates = [t for t in doc_counts if t not in STOPWORDS]
    candidates.sort(key=lambda t: (-doc_counts[t], first_seen[t]))
    return WordBag({t: 1 for t in candidates[:k]})


def _mark_salient(tokens: tuple[str, ...], remaining: Counter) -> list[bool]:
    """Flag tokens present in the remaining bag, reserving multiplicity left to
    right so a run never uses more copies of a word than the bag holds."""
    available = remaining.copy()
    flags = []
    for token in tokens:
        if available.get(token, 0) > 0:
            flags.append(True)
            available[token] -= 1
        else:
            flags.append(False)
    return flags


def _longest_run(flags: list[bool]) -> tuple[int, int]:
    """(start, length) of the longest True run; earliest wins ties; (0, 0) if none."""
    best_start, best_len = 0, 0
    i = 0
    n = len(flags)
    while i < n:
        if flags[i]:
            j = i
            while j < n and flags[j]:
                j += 1
            if j - i > best_len:
                best_start, best_len = i, j - i
            i = j
        else:
            i += 1
    return best_start, best_len


def select_salient_runs(document: TokenSequence, bag: WordBag, c_min: int) -> list[SalientRun]:
    """Iteratively pick the longest run of consecutive in-bag document tokens.

    Each accepted run is removed from the bag (saturating multiset
    difference); the loop stops when the bag empties or the longest run is
    shorter than ``c_min``. Salience is recomputed against the remaining bag
    every iteration, so a document position may be reused if the bag still
    wants more copies of its word.
    """
    if c_min < 1:
        raise ValueError("c_min must be >= 1")
    remaining = Counter(dict(bag.counts))
    runs: list[SalientRun] = []
    while +remaining:
        flags = _mark_salient(document.tokens, remaining)
        start, length = _longest_run(flags)
        if length < c_min:
            break
        run_tokens = document.tokens[start : start + length]
        runs.append(SalientRun(start, run_tokens))
        remaining -= Counter(run_tokens)
        remaining = +remaining
    return runs


def bag_to_sequence(document: TokenSequence, bag: WordBag, c_min: int) -> TokenSequence:
    """Concatenate the selected salient runs into one token sequence."""
    runs = select_salient_runs(document, bag, c_min)
    tokens: list[str] = []
    for run in runs:
        tokens.extend(run.tokens)
    return TokenSequence.from_tokens(tokens)


def attack_rouge(pair, config: AttackConfig = AttackConfig()) -> str:
    """Produce the attack string for a corpus pair (any object with
    ``document`` and ``reference`` text attributes).

    The document is tokenized in rouge mode, a word bag is predicted, and the
    salient runs are detokenized with single spaces between tokens. Each run
    is closed with a period, which is what gives the output its
    broken-sentence shape (rouge-mode tokenization discards the periods, so
    n-gram scores are unaffected).
    """
    document = tokenize(pair.document, "rouge")
    if config.predictor is BagPredictorKind.ORACLE:
        reference = tokenize(pair.reference, "rouge")
        bag = predict_bag(document, reference, config.predictor)
    else:
        bag = predict_bag(document, None, config.predictor, k=config.frequency_k)
    runs = select_salient_runs(document, bag, config.c_min)
    if not runs:
        return ""
    return ". ".join(" ".join(run.tokens) for run in runs) + "."
