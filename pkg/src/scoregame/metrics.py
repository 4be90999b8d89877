"""ROUGE-1/2/L F-measures, METEOR, and the arithmetic/geometric ROUGE aggregates."""

from __future__ import annotations

from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass

from .stem import porter_stem
from .text import TokenSequence, bag_intersection_size, lcs, ngram_bag


@dataclass(frozen=True)
class MeteorParams:
    """Harmonic-mean and fragmentation-penalty weights for METEOR.

    Defaults are the common toolkit settings: alpha=0.9 (recall-heavy mean),
    beta=3 (penalty exponent), gamma=0.5 (maximum penalty).
    """

    alpha: float = 0.9
    beta: float = 3.0
    gamma: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")


@dataclass
class MetricReport:
    """Per-pair or corpus-aggregated scores; absent metrics are None.

    ROUGE/METEOR values and the ROUGE means are fractions in [0, 1];
    similarity follows the scorer contract and may lie in [-1, 1].
    Scores are rendered x100 with two decimals in reports.
    """

    rouge1: float | None = None
    rouge2: float | None = None
    rougeL: float | None = None
    meteor: float | None = None
    similarity: float | None = None
    rouge_am: float | None = None
    rouge_gm: float | None = None

    def __post_init__(self):
        for name in ("rouge1", "rouge2", "rougeL", "meteor", "rouge_am", "rouge_gm"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")
        if self.similarity is not None and not -1.0 <= self.similarity <= 1.0:
            raise ValueError(f"similarity={self.similarity} outside [-1, 1]")
        if self.rouge_am is not None and self.rouge_gm is not None:
            if self.rouge_gm > self.rouge_am + 1e-12:
                raise ValueError("geometric mean cannot exceed arithmetic mean")


def rouge_n(cand: TokenSequence, ref: TokenSequence, n: int) -> float:
    """N-gram overlap F-measure: 2*|bag(n,cand) ^ bag(n,ref)| / (|bag(n,cand)| + |bag(n,ref)|).

    Both sequences should be tokenized in rouge mode. Returns 0.0 when both
    bags are empty (the zero-denominator convention).
    """
    b_cand = ngram_bag(cand, n)
    b_ref = ngram_bag(ref, n)
    denom = b_cand.size + b_ref.size
    if denom == 0:
        return 0.0
    return 2.0 * bag_intersection_size(b_cand, b_ref) / denom


def rouge_l(cand: TokenSequence, ref: TokenSequence) -> float:
    """LCS-based F-measure: 2*lcs(cand, ref) / (len(cand) + len(ref))."""
    denom = len(cand) + len(ref)
    if denom == 0:
        return 0.0
    return 2.0 * lcs(cand, ref) / denom


def _lcs_match_indices(a: tuple[str, ...], b: tuple[str, ...]) -> list[int]:
    """Indices into ``a`` of one optimal LCS alignment with ``b``.

    Ties during backtracking step toward the second sequence, mirroring the
    reference ROUGE package so summary-level scores reproduce published values.
    """
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    i, j = len(a), len(b)
    ids: list[int] = []
    while i > 0 and j > 0:
        if a[i - 1] == b[j - 1]:
            ids.append(i - 1)
            i -= 1
            j -= 1
        elif table[i][j - 1] > table[i - 1][j]:
            j -= 1
        else:
            i -= 1
    ids.reverse()
    return ids


def rouge_l_summary(cand_sents: Sequence[TokenSequence], ref: TokenSequence) -> float:
    """Summary-level ROUGE-L for multi-sentence candidates.

    Each candidate sentence is LCS-aligned against the full reference; matched
    tokens are summed with a double-count clamp (a token scores at most
    min(candidate count, reference count) across all sentences). With a
    single-sentence candidate this reduces to :func:`rouge_l`.
    """
    cand_len = sum(len(s) for s in cand_sents)
    denom = cand_len + len(ref)
    if denom == 0:
        return 0.0
    avail_cand = Counter()
    for sent in cand_sents:
        avail_cand.update(sent.tokens)
    avail_ref = Counter(ref.tokens)
    hits = 0
    for sent in cand_sents:
        for idx in _lcs_match_indices(sent.tokens, ref.tokens):
            token = sent.tokens[idx]
            if avail_cand[token] > 0 and avail_ref[token] > 0:
                hits += 1
                avail_cand[token] -= 1
                avail_ref[token] -= 1
    return 2.0 * hits / denom


def _match_stage(cand_left, ref_left, key):
    """Greedily pair remaining candidate tokens with the first remaining
    reference token that agrees under ``key``; returns (matches, cand_left, ref_left)."""
    matches = []
    ref_pool = list(ref_left)
    cand_rest = []
    for ci, cw in cand_left:
        hit = None
        for idx, (ri, rw) in enumerate(ref_pool):
            if key(cw) == key(rw):
                hit = idx
                matches.append((ci, ri))
                break
        if hit is None:
            cand_rest.append((ci, cw))
        else:
            del ref_pool[hit]
    return matches, cand_rest, ref_pool


def _count_chunks(matches: list[tuple[int, int]]) -> int:
    """Number of maximal runs of matches that are contiguous in both sequences."""
    chunks = 1
    for prev, curr in zip(matches, matches[1:]):
        if curr[0] != prev[0] + 1 or curr[1] != prev[1] + 1:
            chunks += 1
    return chunks


def meteor(cand: TokenSequence, ref: TokenSequence, params: MeteorParams = MeteorParams()) -> float:
    """Staged unigram-alignment score: exact matches first, then stem matches.

    Precision and recall are taken over matched unigrams; the harmonic mean is
    weighted by ``alpha`` and discounted by the fragmentation penalty
    gamma * (chunks / matches) ** beta. Sequences should be tokenized in
    meteor mode. Returns 0.0 when nothing matches.
    """
    cand_enum = list(enumerate(cand.tokens))
    ref_enum = list(enumerate(ref.tokens))
    if not cand_enum or not ref_enum:
        return 0.0
    exact, cand_enum, ref_enum = _match_stage(cand_enum, ref_enum, lambda w: w)
    stemmed, _, _ = _match_stage(cand_enum, ref_enum, porter_stem)
    matches = sorted(exact + stemmed)
    m = len(matches)
    if m == 0:
        return 0.0
    precision = m / len(cand)
    recall = m / len(ref)
    fmean = precision * recall / (params.alpha * precision + (1.0 - params.alpha) * recall)
    penalty = params.gamma * (_count_chunks(matches) / m) ** params.beta
    return fmean * (1.0 - penalty)


def aggregate(rouge1: float, rouge2: float, rougeL: float) -> tuple[float, float]:
    """Arithmetic and geometric means of the three ROUGE scores."""
    for value in (rouge1, rouge2, rougeL):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"rouge score {value} outside [0, 1]")
    am = (rouge1 + rouge2 + rougeL) / 3.0
    gm = (rouge1 * rouge2 * rougeL) ** (1.0 / 3.0)
    return am, gm
