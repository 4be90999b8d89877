"""BERTScore-style similarity: contextual token embeddings + greedy cosine matching."""

from __future__ import annotations

from dataclasses import dataclass

import torch

# Embedding layers known to work best for common checkpoints; anything else
# falls back to the model's final hidden layer.
KNOWN_LAYERS = {
    "roberta-large": 17,
    "roberta-base": 10,
    "bert-base-uncased": 9,
    "bert-large-uncased": 18,
    "distilbert-base-uncased": 5,
    "bert-base-multilingual-cased": 9,
}

MAX_TOKENS = 512


@dataclass(frozen=True)
class SidecarConfig:
    """Model identifier (HF id or local directory), device, batching, and rescaling.

    ``num_layers`` picks the hidden layer embeddings are taken from (known
    checkpoints get their standard layer, otherwise the last). ``rescale``
    applies (x - baseline) / (1 - baseline) with a user-supplied baseline,
    since raw greedy-matching scores cluster in a narrow high band.
    """

    model: str
    device: str = "cpu"
    batch_size: int = 16
    num_layers: int | None = None
    rescale: bool = False
    baseline: float = 0.0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.rescale and not 0.0 <= self.baseline < 1.0:
            raise ValueError("baseline must lie in [0, 1) when rescaling")


class ScoringBackend:
    """Interface the server loop talks to; returns (precision, recall, f1) triples."""

    def score_pairs(self, pairs: list[tuple[str, str]]) -> list[tuple[float, float, float]]:
        raise NotImplementedError


class BertScoreBackend(ScoringBackend):
    """Greedy soft-overlap scoring over transformer token embeddings.

    Both texts are encoded with special tokens; embeddings come from the
    configured hidden layer and are L2-normalized. Precision is the mean over
    candidate tokens of the best cosine against any reference token, recall
    the symmetric quantity, f1 their harmonic mean. Special and padding
    tokens get zero weight in the means, mirroring the public metric's
    default (uniform weights, no idf).
    """

    def __init__(self, config: SidecarConfig):
        from transformers import AutoModel, AutoTokenizer

        self.config = config
        self.tokenizer = AutoTokenizer.from_pretrained(config.model)
        self.model = AutoModel.from_pretrained(config.model, output_hidden_states=True)
        self.model.to(config.device)
        self.model.eval()
        if config.num_layers is not None:
            self.layer = config.num_layers
        else:
            self.layer = KNOWN_LAYERS.get(config.model, self.model.config.num_hidden_layers)
        if not 0 <= self.layer <= self.model.config.num_hidden_layers:
            raise ValueError(
                f"layer {self.layer} out of range for a "
                f"{self.model.config.num_hidden_layers}-layer model"
            )
        limit = self.tokenizer.model_max_length
        if not isinstance(limit, int) or limit > 100_000:
            limit = self.model.config.max_position_embeddings
        self.max_length = min(limit, MAX_TOKENS)

    def _embed(self, texts: list[str]) -> tuple[torch.Tensor, torch.Tensor]:
        """(embeddings, weights): normalized token vectors and 0/1 content-token masks."""
        encoded = self.tokenizer(
            texts,
            return_tensors="pt",
            padding=True,
            truncation=True,
            max_length=self.max_length,
        )
        encoded = {k: v.to(self.config.device) for k, v in encoded.items()}
        with torch.no_grad():
            output = self.model(**encoded)
        hidden = output.hidden_states[self.layer]
        hidden = torch.nn.functional.normalize(hidden, dim=-1)
        weights = encoded["attention_mask"].clone()
        special_ids = {
            tid for tid in (
                self.tokenizer.cls_token_id,
                self.tokenizer.sep_token_id,
                self.tokenizer.bos_token_id,
                self.tokenizer.eos_token_id,
                self.tokenizer.pad_token_id,
            ) if tid is not None
        }
        for tid in special_ids:
            weights = weights * (encoded["input_ids"] != tid).long()
        return hidden, weights

    def _rescale(self, value: float) -> float:
        if not self.config.rescale:
            return value
        return (value - self.config.baseline) / (1.0 - self.config.baseline)

    def score_pairs(self, pairs: list[tuple[str, str]]) -> list[tuple[float, float, float]]:
        results = []
        for start in range(0, len(pairs), self.config.batch_size):
            chunk = pairs[start : start + self.config.batch_size]
            texts = [t for pair in chunk for t in pair]
            embeddings, weights = self._embed(texts)
            for i in range(len(chunk)):
                cand_emb, cand_w = embeddings[2 * i], weights[2 * i]
                ref_emb, ref_w = embeddings[2 * i + 1], weights[2 * i + 1]
                results.append(self._greedy_match(cand_emb, cand_w, ref_emb, ref_w))
        return results

    def _greedy_match(self, cand_emb, cand_w, ref_emb, ref_w) -> tuple[float, float, float]:
        cand_idx = cand_w.nonzero(as_tuple=True)[0]
        ref_idx = ref_w.nonzero(as_tuple=True)[0]
        if len(cand_idx) == 0 or len(ref_idx) == 0:
            return 0.0, 0.0, 0.0
        sim = cand_emb[cand_idx] @ ref_emb[ref_idx].T
        precision = float(sim.max(dim=1).values.mean())
        recall = float(sim.max(dim=0).values.mean())
        precision, recall = self._rescale(precision), self._rescale(recall)
        if precision + recall <= 0.0:
            return precision, recall, 0.0
        f1 = 2.0 * precision * recall / (precision + recall)
        return precision, recall, f1
