"""Pluggable embedding-similarity scorers.

Two kinds share one contract: a deterministic mock built on hashed character
trigrams (self-contained, no model weights) and a line-delimited JSON bridge
to an external scoring process (child-process pipes or TCP).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import shlex
import socket
import subprocess
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

EMBED_DIM = 64
_HASH_KEY = b"scoregame-trigram-v1"  # fixed seed: embeddings are stable across runs and platforms


class BridgeError(RuntimeError):
    """Transport or protocol failure while talking to the external scorer."""


@dataclass(frozen=True)
class SimilarityScore:
    """Greedy-matching precision/recall and their harmonic-mean f1, each in [-1, 1]."""

    precision: float
    recall: float
    f1: float


class SimilarityScorer:
    """Common surface for similarity scorers; concrete kinds implement ``score``."""

    kind: str = "abstract"

    def score(self, candidate: str, reference: str) -> SimilarityScore:
        raise NotImplementedError

    def batch_score(self, pairs: list[tuple[str, str]]) -> list[SimilarityScore]:
        """Score pairs in order; equivalent to mapping ``score``. Atomic: any
        failing element raises and no partial result is returned."""
        for cand, ref in pairs:
            _check_inputs(cand, ref)
        return [self.score(cand, ref) for cand, ref in pairs]


def _check_inputs(candidate: str, reference: str):
    if not candidate:
        raise ValueError("candidate must be a non-empty string")
    if not reference:
        raise ValueError("reference must be a non-empty string")


@lru_cache(maxsize=262144)
def _token_vector(token: str) -> np.ndarray:
    """L2-normalized EMBED_DIM vector of hashed character-trigram counts.

    Tokens are padded with sentinels so even single-character tokens carry a
    trigram, which is what lets purely non-alphanumeric strings score.
    """
    padded = f"\x02{token}\x03"
    vec = np.zeros(EMBED_DIM, dtype=np.float64)
    for i in range(len(padded) - 2):
        tri = padded[i : i + 3].encode("utf-8")
        digest = hashlib.blake2b(tri, digest_size=4, key=_HASH_KEY).digest()
        vec[int.from_bytes(digest, "big") % EMBED_DIM] += 1.0
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    vec.flags.writeable = False
    return vec


@lru_cache(maxsize=4096)
def _text_matrix(text: str) -> np.ndarray:
    """Rows are token vectors; whitespace-only texts fall back to one whole-string token."""
    tokens = text.split() or [text]
    matrix = np.stack([_token_vector(t) for t in tokens])
    matrix.flags.writeable = False
    return matrix


class MockSimilarityScorer(SimilarityScorer):
    """Deterministic stand-in for a neural soft-overlap scorer.

    Tokens are embedded as hashed character-trigram count vectors and matched
    greedily by cosine: precision is the mean over candidate tokens of the
    best cosine against any reference token, recall the symmetric quantity,
    f1 their harmonic mean. Identical texts score exactly 1.0.
    """

    kind = "mock"

    def score(self, candidate: str, reference: str) -> SimilarityScore:
        _check_inputs(candidate, reference)
        cand = _text_matrix(candidate)
        ref = _text_matrix(reference)
        # round away float noise so identical tokens cos to exactly 1.0
        sim = np.clip(np.round(cand @ ref.T, 12), -1.0, 1.0)
        precision = float(sim.max(axis=1).mean())
        recall = float(sim.max(axis=0).mean())
        if precision + recall <= 0.0:
            return SimilarityScore(precision, recall, 0.0)
        f1 = 2.0 * precision * recall / (precision + recall)
        return SimilarityScore(precision, recall, f1)


class BridgeSimilarityScorer(SimilarityScorer):
    """Client for the line-delimited JSON wire protocol.

    Endpoints: ``tcp://HOST:PORT`` connects a socket; ``exec:COMMAND`` spawns
    a child process and speaks over its pipes. One request is in flight at a
    time per connection; concurrent callers are serialized by an internal
    lock. Transport failures raise :class:`BridgeError` and never fall back
    to the mock scorer.
    """

    kind = "bridge"

    def __init__(self, endpoint: str):
        self.endpoint = endpoint
        self._lock = threading.Lock()
        self._ids = itertools.count(1)
        self._proc: subprocess.Popen | None = None
        self._sock: socket.socket | None = None
        self._reader = None
        self._writer = None

    def _connect(self):
        if self._reader is not None:
            return
        try:
            if self.endpoint.startswith("tcp://"):
                host, _, port = self.endpoint[len("tcp://") :].rpartition(":")
                self._sock = socket.create_connection((host, int(port)), timeout=300)
                self._reader = self._sock.makefile("r", encoding="utf-8", newline="\n")
                self._writer = self._sock.makefile("w", encoding="utf-8", newline="\n")
            elif self.endpoint.startswith("exec:"):
                argv = shlex.split(self.endpoint[len("exec:") :])
                self._proc = subprocess.Popen(
                    argv,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    encoding="utf-8",
                    bufsize=1,
                )
                self._reader = self._proc.stdout
                self._writer = self._proc.stdin
            else:
                raise BridgeError(
                    f"unsupported endpoint {self.endpoint!r} (expected tcp://HOST:PORT or exec:COMMAND)"
                )
        except (OSError, ValueError) as exc:
            raise BridgeError(f"cannot reach scorer at {self.endpoint!r}: {exc}") from exc

    def score(self, candidate: str, reference: str) -> SimilarityScore:
        _check_inputs(candidate, reference)
        with self._lock:
            self._connect()
            request_id = next(self._ids)
            request = {
                "id": request_id,
                "op": "score",
                "candidate": candidate,
                "reference": reference,
            }
            try:
                self._writer.write(json.dumps(request, ensure_ascii=True) + "\n")
                self._writer.flush()
                line = self._reader.readline()
            except (OSError, ValueError) as exc:
                raise BridgeError(f"bridge transport failure: {exc}") from exc
            if not line:
                raise BridgeError("bridge closed the connection")
            try:
                reply = json.loads(line)
            except json.JSONDecodeError as exc:
                raise BridgeError(f"malformed bridge reply: {line!r}") from exc
            if reply.get("id") != request_id:
                raise BridgeError(f"bridge reply id {reply.get('id')} does not match request {request_id}")
            if "error" in reply:
                raise BridgeError(f"bridge error: {reply['error']}")
            try:
                return SimilarityScore(
                    float(reply["precision"]), float(reply["recall"]), float(reply["f1"])
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise BridgeError(f"incomplete bridge reply: {line!r}") from exc

    def close(self):
        for stream in (self._writer, self._reader):
            try:
                if stream is not None:
                    stream.close()
            except OSError:
                pass
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
        if self._proc is not None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        self._reader = self._writer = self._sock = self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


def score_similarity(scorer: SimilarityScorer, candidate: str, reference: str) -> SimilarityScore:
    return scorer.score(candidate, reference)


def batch_score(scorer: SimilarityScorer, pairs: list[tuple[str, str]]) -> list[SimilarityScore]:
    return scorer.batch_score(pairs)
