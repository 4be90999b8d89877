import json
import subprocess
import sys

import pytest
import torch

from bertscore_sidecar.scoring import BertScoreBackend, SidecarConfig


class TestTinyModelScoring:
    def test_identical_strings_score_one(self, tiny_backend):
        precision, recall, f1 = tiny_backend.score_pairs([("the cat sat", "the cat sat")])[0]
        assert f1 == pytest.approx(1.0, abs=1e-4)
        assert precision == pytest.approx(1.0, abs=1e-4)
        assert recall == pytest.approx(1.0, abs=1e-4)

    def test_protocol_identity_example(self, tiny_backend):
        from bertscore_sidecar.server import handle_line

        reply = json.loads(handle_line(
            json.dumps({"id": 1, "op": "score", "candidate": "a", "reference": "a"}),
            tiny_backend,
        ))
        assert reply["f1"] == pytest.approx(1.0, abs=1e-4)

    def test_deterministic(self, tiny_backend):
        first = tiny_backend.score_pairs([("the cat sat", "a dog ran fast")])
        second = tiny_backend.score_pairs([("the cat sat", "a dog ran fast")])
        assert first == second

    def test_f1_symmetric_under_swap(self, tiny_backend):
        a = tiny_backend.score_pairs([("the cat sat", "the dog ran")])[0]
        b = tiny_backend.score_pairs([("the dog ran", "the cat sat")])[0]
        assert a[2] == pytest.approx(b[2], abs=1e-6)
        assert a[0] == pytest.approx(b[1], abs=1e-6)

    def test_batching_matches_single_calls(self, tiny_model_dir):
        one = BertScoreBackend(SidecarConfig(model=tiny_model_dir, batch_size=1))
        many = BertScoreBackend(SidecarConfig(model=tiny_model_dir, batch_size=8))
        pairs = [("the cat sat", "a dog ran"), ("rain fell", "the storm"), ("mayor", "bridge town")]
        a = one.score_pairs(pairs)
        b = many.score_pairs(pairs)
        for (p1, r1, f1), (p2, r2, f2) in zip(a, b):
            assert f1 == pytest.approx(f2, abs=1e-5)

    def test_long_input_truncates_instead_of_crashing(self, tiny_backend):
        long_text = "cat " * 2000
        p, r, f1 = tiny_backend.score_pairs([(long_text, "the cat sat")])[0]
        assert -1.0 <= f1 <= 1.0

    def test_non_alphanumeric_strings_still_score(self, tiny_backend):
        p, r, f1 = tiny_backend.score_pairs([(".", "the cat sat on the mat")])[0]
        assert -1.0 <= f1 <= 1.0

    def test_rescaling_shifts_scores(self, tiny_model_dir):
        raw = BertScoreBackend(SidecarConfig(model=tiny_model_dir))
        rescaled = BertScoreBackend(
            SidecarConfig(model=tiny_model_dir, rescale=True, baseline=0.5)
        )
        pair = [("the cat sat", "the cat sat")]
        assert rescaled.score_pairs(pair)[0][2] == pytest.approx(raw.score_pairs(pair)[0][2], abs=1e-4)
        pair = [("rain", "bridge mayor town")]
        assert rescaled.score_pairs(pair)[0][0] < raw.score_pairs(pair)[0][0]

    def test_layer_out_of_range_rejected(self, tiny_model_dir):
        with pytest.raises(ValueError):
            BertScoreBackend(SidecarConfig(model=tiny_model_dir, num_layers=99))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SidecarConfig(model="x", batch_size=0)
        with pytest.raises(ValueError):
            SidecarConfig(model="x", rescale=True, baseline=1.0)


class TestGreedyMatchOracle:
    def test_matches_loop_implementation(self, tiny_backend):
        torch.manual_seed(3)
        cand_emb = torch.nn.functional.normalize(torch.randn(6, 32), dim=-1)
        ref_emb = torch.nn.functional.normalize(torch.randn(4, 32), dim=-1)
        cand_w = torch.tensor([0, 1, 1, 1, 1, 0])
        ref_w = torch.tensor([0, 1, 1, 0])
        p, r, f1 = tiny_backend._greedy_match(cand_emb, cand_w, ref_emb, ref_w)

        cand_rows = [i for i in range(6) if cand_w[i]]
        ref_rows = [j for j in range(4) if ref_w[j]]
        best_per_cand = [max(float(cand_emb[i] @ ref_emb[j]) for j in ref_rows) for i in cand_rows]
        best_per_ref = [max(float(cand_emb[i] @ ref_emb[j]) for i in cand_rows) for j in ref_rows]
        expected_p = sum(best_per_cand) / len(best_per_cand)
        expected_r = sum(best_per_ref) / len(best_per_ref)
        assert p == pytest.approx(expected_p, abs=1e-6)
        assert r == pytest.approx(expected_r, abs=1e-6)
        assert f1 == pytest.approx(2 * expected_p * expected_r / (expected_p + expected_r), abs=1e-6)

    def test_empty_masks_score_zero(self, tiny_backend):
        emb = torch.nn.functional.normalize(torch.randn(3, 32), dim=-1)
        assert tiny_backend._greedy_match(emb, torch.zeros(3), emb, torch.ones(3)) == (0.0, 0.0, 0.0)


class TestSubprocessIntegration:
    def test_cli_serves_over_pipes(self, tiny_model_dir):
        proc = subprocess.Popen(
            [sys.executable, "-m", "bertscore_sidecar.cli", "--model", tiny_model_dir],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            encoding="utf-8",
            bufsize=1,
        )
        try:
            requests = [
                {"id": 1, "op": "score", "candidate": "the cat sat", "reference": "the cat sat"},
                {"id": 2, "op": "score", "candidate": "rain", "reference": "storm"},
                {"id": 3, "op": "bogus"},
            ]
            for req in requests:
                proc.stdin.write(json.dumps(req) + "\n")
            proc.stdin.flush()
            replies = [json.loads(proc.stdout.readline()) for _ in requests]
        finally:
            proc.stdin.close()
            proc.wait(timeout=30)
        assert replies[0]["id"] == 1 and replies[0]["f1"] == pytest.approx(1.0, abs=1e-4)
        assert replies[1]["id"] == 2 and "f1" in replies[1]
        assert replies[2]["id"] == 3 and "error" in replies[2]

    def test_bad_model_path_exits_nonzero(self):
        result = subprocess.run(
            [sys.executable, "-m", "bertscore_sidecar.cli", "--model", "/no/such/model"],
            capture_output=True,
            timeout=120,
        )
        assert result.returncode == 1
        assert b"cannot load model" in result.stderr

    def test_primary_bridge_client_can_drive_the_sidecar(self, tiny_model_dir):
        scoregame = pytest.importorskip("scoregame")
        endpoint = f"exec:{sys.executable} -m bertscore_sidecar.cli --model {tiny_model_dir}"
        with scoregame.BridgeSimilarityScorer(endpoint) as scorer:
            score = scorer.score("the cat sat", "the cat sat")
            assert score.f1 == pytest.approx(1.0, abs=1e-4)
