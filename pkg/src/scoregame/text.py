"""Tokenization plus the n-gram bag and subsequence algebra shared by all metrics and attacks."""

from __future__ import annotations

import re
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum

# DP over token pairs is quadratic; refuse inputs that would blow up memory/time.
MAX_LCS_TOKENS = 10_000

_ROUGE_TOKEN = re.compile(r"[A-Za-z0-9]+")
# Word runs (unicode alphanumerics, underscore excluded) or any single non-space character.
_METEOR_TOKEN = re.compile(r"[^\W_]+|\S", re.UNICODE)
_RAW_TOKEN = re.compile(r"\S+")


class TokenizerMode(Enum):
    """Tokenizer profiles: ``rouge`` keeps ASCII alphanumeric runs only, ``meteor``
    splits punctuation into standalone tokens, ``raw`` splits on whitespace."""

    ROUGE = "rouge"
    METEOR = "meteor"
    RAW = "raw"

    @classmethod
    def coerce(cls, mode: "TokenizerMode | str") -> "TokenizerMode":
        if isinstance(mode, TokenizerMode):
            return mode
        return cls(str(mode).lower())


@dataclass(frozen=True)
class TokenSequence:
    """Lowercase tokens with per-token (start, end) byte offsets into the source text.

    Spans are non-overlapping and strictly increasing; they index into whatever
    text the sequence was built from (the original input for :func:`tokenize`,
    or the space-joined token text for synthesized sequences).
    """

    tokens: tuple[str, ...]
    spans: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.spans):
            raise ValueError("tokens and spans must have equal length")
        prev_end = -1
        for start, end in self.spans:
            if start >= end:
                raise ValueError(f"empty or inverted span ({start}, {end})")
            if start < prev_end:
                raise ValueError("spans must be non-overlapping and increasing")
            prev_end = end

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "TokenSequence":
        """Build a sequence from bare tokens, assigning spans as if joined by single spaces."""
        toks = tuple(str(t) for t in tokens)
        spans = []
        offset = 0
        for t in toks:
            nbytes = len(t.encode("utf-8"))
            spans.append((offset, offset + nbytes))
            offset += nbytes + 1
        return cls(toks, tuple(spans))

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __bool__(self) -> bool:
        return bool(self.tokens)

    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class NGramBag:
    """Multiset of n-grams: every key is an n-token tuple mapped to a positive count."""

    n: int
    counts: Mapping[tuple[str, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        for gram, count in self.counts.items():
            if len(gram) != self.n:
                raise ValueError(f"gram {gram!r} is not a {self.n}-gram")
            if count < 1:
                raise ValueError(f"count for {gram!r} must be positive")

    @property
    def size(self) -> int:
        return sum(self.counts.values())


def _char_to_byte_offsets(text: str) -> list[int]:
    """offsets[i] = byte offset of character i in UTF-8; offsets[len(text)] = total bytes."""
    if text.isascii():
        return list(range(len(text) + 1))
    offsets = [0] * (len(text) + 1)
    total = 0
    for i, ch in enumerate(text):
        offsets[i] = total
        total += len(ch.encode("utf-8"))
    offsets[len(text)] = total
    return offsets


def tokenize(text: str, mode: TokenizerMode | str = TokenizerMode.ROUGE) -> TokenSequence:
    """Split ``text`` into a lowercase :class:`TokenSequence` under the given mode.

    ``rouge`` keeps maximal ASCII alphanumeric runs and discards everything else
    (matching the reference ROUGE tokenizer, so strings without alphanumerics
    tokenize to nothing). ``meteor`` keeps words and emits each punctuation
    character as its own token. ``raw`` splits on whitespace and discards
    nothing. Empty input yields an empty sequence.
    """
    mode = TokenizerMode.coerce(mode)
    if mode is TokenizerMode.ROUGE:
        pattern = _ROUGE_TOKEN
    elif mode is TokenizerMode.METEOR:
        pattern = _METEOR_TOKEN
    else:
        pattern = _RAW_TOKEN
    tokens = []
    char_spans = []
    for m in pattern.finditer(text):
        tokens.append(m.group().lower())
        char_spans.append((m.start(), m.end()))
    offsets = _char_to_byte_offsets(text)
    spans = tuple((offsets[s], offsets[e]) for s, e in char_spans)
    return TokenSequence(tuple(tokens), spans)


def _tokens(seq: TokenSequence | Sequence[str]) -> tuple[str, ...]:
    if isinstance(seq, TokenSequence):
        return seq.tokens
    return tuple(seq)


def ngram_bag(seq: TokenSequence | Sequence[str], n: int) -> NGramBag:
    """Multiset of all contiguous n-token windows of ``seq``.

    The bag size is max(0, len(seq) - n + 1). ``n`` below 1 is rejected.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    tokens = _tokens(seq)
    counts = Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
    return NGramBag(n, dict(counts))


def bag_intersection_size(b1: NGramBag, b2: NGramBag) -> int:
    """Size of the multiset intersection: sum over grams of min(count1, count2)."""
    if b1.n != b2.n:
        raise ValueError(f"cannot intersect bags of different n ({b1.n} vs {b2.n})")
    if len(b1.counts) > len(b2.counts):
        b1, b2 = b2, b1
    return sum(min(count, b2.counts.get(gram, 0)) for gram, count in b1.counts.items())


def lcs(s1: TokenSequence | Sequence[str], s2: TokenSequence | Sequence[str]) -> int:
    """Length of a longest common subsequence of the two token sequences.

    Standard O(len1 * len2) dynamic programming; inputs longer than
    ``MAX_LCS_TOKENS`` are rejected to bound memory.
    """
    a, b = _tokens(s1), _tokens(s2)
    if len(a) > MAX_LCS_TOKENS or len(b) > MAX_LCS_TOKENS:
        raise ValueError(f"lcs input exceeds {MAX_LCS_TOKENS} tokens")
    if not a or not b:
        return 0
    if len(b) > len(a):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        best = 0
        for j, y in enumerate(b, start=1):
            if x == y:
                best = prev[j - 1] + 1
            else:
                best = max(prev[j], curr[j - 1])
            curr.append(best)
        prev = curr
    return prev[len(b)]
