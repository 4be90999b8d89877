import json
import socket
import socketserver
import sys
import threading

import pytest
from hypothesis import given
from hypothesis import strategies as st

from scoregame.similarity import (
    BridgeError,
    BridgeSimilarityScorer,
    MockSimilarityScorer,
    SimilarityScore,
    batch_score,
    score_similarity,
)

words_st = st.text(alphabet=st.characters(whitelist_categories=("Ll",), max_codepoint=0x7F), min_size=1, max_size=8)
texts_st = st.lists(words_st, min_size=1, max_size=6).map(" ".join)


class TestMockScorer:
    def test_identical_texts_score_one(self):
        scorer = MockSimilarityScorer()
        assert scorer.score("the cat sat", "the cat sat").f1 == 1.0

    def test_no_shared_trigrams_scores_zero(self):
        assert MockSimilarityScorer().score("a b", "zz qq").f1 == 0.0

    def test_empty_inputs_rejected(self):
        scorer = MockSimilarityScorer()
        with pytest.raises(ValueError):
            scorer.score("", "x")
        with pytest.raises(ValueError):
            scorer.score("x", "")

    def test_whitespace_only_text_still_scores(self):
        scorer = MockSimilarityScorer()
        assert scorer.score("   ", "   ").f1 == 1.0

    @given(texts_st)
    def test_identity_one_for_any_text(self, text):
        assert MockSimilarityScorer().score(text, text).f1 == 1.0

    @given(texts_st, texts_st)
    def test_f1_symmetric(self, a, b):
        scorer = MockSimilarityScorer()
        assert scorer.score(a, b).f1 == scorer.score(b, a).f1

    @given(texts_st, texts_st)
    def test_deterministic_bit_exact(self, a, b):
        first = MockSimilarityScorer().score(a, b)
        second = MockSimilarityScorer().score(a, b)
        assert first == second

    @given(texts_st, texts_st)
    def test_f1_is_harmonic_mean(self, a, b):
        s = MockSimilarityScorer().score(a, b)
        if s.precision > 0 and s.recall > 0:
            expected = 2 * s.precision * s.recall / (s.precision + s.recall)
            assert abs(s.f1 - expected) < 1e-6

    def test_score_similarity_function(self):
        scorer = MockSimilarityScorer()
        assert score_similarity(scorer, "x y", "x y") == scorer.score("x y", "x y")


class TestBatchScore:
    def test_empty_batch(self):
        assert batch_score(MockSimilarityScorer(), []) == []

    def test_identical_pairs(self):
        scores = batch_score(MockSimilarityScorer(), [("x", "x"), ("x", "x")])
        assert [s.f1 for s in scores] == [1.0, 1.0]

    def test_matches_individual_calls(self):
        scorer = MockSimilarityScorer()
        pairs = [(f"alpha {i} beta", "gamma delta") for i in range(10)]
        assert batch_score(scorer, pairs) == [scorer.score(c, r) for c, r in pairs]

    def test_atomic_failure(self):
        scorer = MockSimilarityScorer()
        with pytest.raises(ValueError):
            batch_score(scorer, [("a", "b"), ("", "b")])


# A configurable wire-protocol peer used to exercise the bridge client.
SERVER_SCRIPT = r"""
import json, sys
mode = sys.argv[1] if len(sys.argv) > 1 else "ok"
for line in sys.stdin:
    req = json.loads(line)
    if mode == "ok":
        n = len(req["candidate"]) / (len(req["candidate"]) + len(req["reference"]))
        out = {"id": req["id"], "precision": n, "recall": n, "f1": n}
    elif mode == "error":
        out = {"id": req["id"], "error": "model exploded"}
    elif mode == "bad-id":
        out = {"id": req["id"] + 999, "precision": 0.5, "recall": 0.5, "f1": 0.5}
    elif mode == "garbage":
        sys.stdout.write("not json at all\n")
        sys.stdout.flush()
        continue
    elif mode == "close":
        break
    sys.stdout.write(json.dumps(out) + "\n")
    sys.stdout.flush()
"""


def make_exec_scorer(tmp_path, mode="ok"):
    script = tmp_path / "peer.py"
    script.write_text(SERVER_SCRIPT, encoding="utf-8")
    return BridgeSimilarityScorer(f"exec:{sys.executable} -u {script} {mode}")


class TestBridgeExec:
    def test_scores_round_trip(self, tmp_path):
        with make_exec_scorer(tmp_path) as scorer:
            s = scorer.score("aa", "bb")
            assert s == SimilarityScore(0.5, 0.5, 0.5)
            # ids advance; a second request still pairs correctly
            assert scorer.score("a", "bbb").f1 == pytest.approx(0.25)

    def test_error_reply_raises(self, tmp_path):
        with make_exec_scorer(tmp_path, "error") as scorer:
            with pytest.raises(BridgeError, match="model exploded"):
                scorer.score("a", "b")

    def test_id_mismatch_raises(self, tmp_path):
        with make_exec_scorer(tmp_path, "bad-id") as scorer:
            with pytest.raises(BridgeError, match="does not match"):
                scorer.score("a", "b")

    def test_malformed_reply_raises(self, tmp_path):
        with make_exec_scorer(tmp_path, "garbage") as scorer:
            with pytest.raises(BridgeError, match="malformed"):
                scorer.score("a", "b")

    def test_closed_stream_raises(self, tmp_path):
        with make_exec_scorer(tmp_path, "close") as scorer:
            with pytest.raises(BridgeError, match="closed"):
                scorer.score("a", "b")

    def test_no_silent_fallback_to_mock(self, tmp_path):
        # A dead endpoint must surface as an error, never a mock score.
        scorer = BridgeSimilarityScorer("exec:/nonexistent-binary-xyz")
        with pytest.raises(BridgeError):
            scorer.score("a", "b")

    def test_batch_failure_is_atomic(self, tmp_path):
        with make_exec_scorer(tmp_path, "error") as scorer:
            with pytest.raises(BridgeError):
                scorer.batch_score([("a", "b"), ("c", "d")])


class _TcpPeer(socketserver.StreamRequestHandler):
    def handle(self):
        for line in self.rfile:
            req = json.loads(line)
            reply = {"id": req["id"], "precision": 0.75, "recall": 0.25, "f1": 0.375}
            self.wfile.write((json.dumps(reply) + "\n").encode("utf-8"))
            self.wfile.flush()


class TestBridgeTcp:
    def test_scores_over_tcp(self):
        server = socketserver.ThreadingTCPServer(("127.0.0.1", 0), _TcpPeer)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            host, port = server.server_address
            with BridgeSimilarityScorer(f"tcp://{host}:{port}") as scorer:
                assert scorer.score("x", "y") == SimilarityScore(0.75, 0.25, 0.375)
        finally:
            server.shutdown()
            server.server_close()

    def test_unreachable_endpoint(self):
        # grab a port and close it so nothing listens there
        probe = socket.socket()
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
        probe.close()
        scorer = BridgeSimilarityScorer(f"tcp://127.0.0.1:{port}")
        with pytest.raises(BridgeError):
            scorer.score("a", "b")

    def test_unknown_scheme(self):
        with pytest.raises(BridgeError, match="unsupported endpoint"):
            BridgeSimilarityScorer("ftp://nope").score("a", "b")
