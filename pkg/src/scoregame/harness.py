"""Corpus ingestion, baseline systems, experiment orchestration, and reports."""

from __future__ import annotations

import json
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .combined import combine
from .defence import DefenceThresholds, sanitize, split_sentences
from .metrics import MeteorParams, MetricReport, aggregate, meteor, rouge_l_summary, rouge_n
from .rouge_attack import AttackConfig, attack_rouge
from .similarity import SimilarityScorer
from .text import tokenize


class CorpusError(ValueError):
    """Malformed corpus or predictions file."""


@dataclass(frozen=True)
class CorpusPair:
    """One unit of work: a document, its reference summary, and a unique id."""

    id: str
    document: str
    reference: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("pair id must be non-empty")
        if not self.document or not self.reference:
            raise ValueError(f"pair {self.id!r}: document and reference must be non-empty")


def _load_jsonl(path: str | Path, fields: tuple[str, ...]) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"{path}:{lineno}: expected an object per line")
            missing = [f for f in fields if f not in record]
            if missing:
                raise CorpusError(f"{path}:{lineno}: missing field(s) {', '.join(missing)}")
            records.append(record)
    return records


def load_corpus(path: str | Path) -> list[CorpusPair]:
    """Read a line-delimited corpus (fields id/document/reference); duplicate ids are rejected."""
    pairs = []
    seen = set()
    for record in _load_jsonl(path, ("id", "document", "reference")):
        try:
            pair = CorpusPair(str(record["id"]), record["document"], record["reference"])
        except ValueError as exc:
            raise CorpusError(f"{path}: {exc}") from exc
        if pair.id in seen:
            raise CorpusError(f"{path}: duplicate id {pair.id!r}")
        seen.add(pair.id)
        pairs.append(pair)
    return pairs


def save_corpus(pairs: Sequence[CorpusPair], path: str | Path):
    with open(path, "w", encoding="utf-8") as handle:
        for pair in pairs:
            handle.write(
                json.dumps(
                    {"id": pair.id, "document": pair.document, "reference": pair.reference},
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_predictions(path: str | Path) -> dict[str, str]:
    """Read a line-delimited predictions file (fields id/prediction)."""
    predictions: dict[str, str] = {}
    for record in _load_jsonl(path, ("id", "prediction")):
        pid = str(record["id"])
        if pid in predictions:
            raise CorpusError(f"{path}: duplicate id {pid!r}")
        predictions[pid] = record["prediction"]
    return predictions


def save_predictions(predictions: Mapping[str, str], path: str | Path):
    with open(path, "w", encoding="utf-8") as handle:
        for pid, text in predictions.items():
            handle.write(json.dumps({"id": pid, "prediction": text}, ensure_ascii=False) + "\n")


def lead3(document: str) -> str:
    """First three sentences of the document (period/question/exclamation split)."""
    sentences = split_sentences(document)
    return " ".join(sentences[:3])


class SystemKind(Enum):
    LEAD3 = "lead3"
    ROUGE_ATTACK = "rouge_attack"
    COMBINED_ATTACK = "combined_attack"
    EXTERNAL_FILE = "external_file"


@dataclass
class SystemUnderTest:
    """A named prediction source to evaluate over a corpus."""

    name: str
    kind: SystemKind
    attack: AttackConfig = field(default_factory=AttackConfig)
    emulator: str | None = None
    predictions: Mapping[str, str] | None = None


@dataclass
class ReportRow:
    name: str
    report: MetricReport
    avg_rank: float | None = None
    flagged: int | None = None
    total: int = 0


@dataclass
class ReportTable:
    rows: list[ReportRow]
    defences_on: bool = False
    has_similarity: bool = False


def _predict(system: SystemUnderTest, pair: CorpusPair) -> tuple[str, str]:
    """(full text, text METEOR is scored on) for one system/pair."""
    if system.kind is SystemKind.LEAD3:
        text = lead3(pair.document)
        return text, text
    if system.kind is SystemKind.ROUGE_ATTACK:
        text = attack_rouge(pair, system.attack)
        return text, text
    if system.kind is SystemKind.COMBINED_ATTACK:
        if system.emulator is None:
            raise ValueError(f"system {system.name!r}: combined_attack requires an emulator")
        tail = attack_rouge(pair, system.attack)
        output = combine(system.emulator, tail)
        # The non-alphanumeric prefix is untokenizable material; METEOR is
        # scored on the tail, mirroring toolkits that drop what they cannot align.
        return output.full, output.rouge_part
    if system.predictions is None or pair.id not in system.predictions:
        raise CorpusError(f"system {system.name!r}: missing prediction for id {pair.id!r}")
    text = system.predictions[pair.id]
    return text, text


def score_texts(
    prediction: str,
    reference: str,
    scorer: SimilarityScorer | None = None,
    meteor_params: MeteorParams = MeteorParams(),
    meteor_text: str | None = None,
) -> MetricReport:
    """Score one prediction against one reference at the text level.

    ROUGE-1/2 are computed over whole-text token bags; ROUGE-L uses the
    summary-level LCS with the prediction split into sentences. METEOR is
    scored on ``meteor_text`` when given (combined attacks score their
    lexical tail only).
    """
    cand = tokenize(prediction, "rouge")
    ref = tokenize(reference, "rouge")
    r1 = rouge_n(cand, ref, 1)
    r2 = rouge_n(cand, ref, 2)
    cand_sents = [s for s in (tokenize(p, "rouge") for p in split_sentences(prediction)) if s]
    rl = rouge_l_summary(cand_sents, ref)
    m_text = prediction if meteor_text is None else meteor_text
    m = meteor(tokenize(m_text, "meteor"), tokenize(reference, "meteor"), meteor_params)
    similarity = None
    if scorer is not None:
        similarity = scorer.score(prediction, reference).f1 if prediction else 0.0
    am, gm = aggregate(r1, r2, rl)
    return MetricReport(r1, r2, rl, m, similarity, am, gm)


def _zero_report(with_similarity: bool) -> MetricReport:
    return MetricReport(0.0, 0.0, 0.0, 0.0, 0.0 if with_similarity else None, 0.0, 0.0)


def _average_ranks(values: Sequence[float]) -> list[float]:
    """Fractional ranks, 1 = highest value; ties share the mean of their ranks."""
    order = sorted(range(len(values)), key=lambda i: -values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j < len(order) and values[order[j]] == values[order[i]]:
            j += 1
        shared = (i + 1 + j) / 2.0
        for k in range(i, j):
            ranks[order[k]] = shared
        i = j
    return ranks


def run_evaluation(
    corpus: Sequence[CorpusPair],
    systems: Sequence[SystemUnderTest],
    scorer: SimilarityScorer | None = None,
    defences_on: bool = False,
    meteor_params: MeteorParams = MeteorParams(),
    thresholds: DefenceThresholds = DefenceThresholds(),
    workers: int = 1,
) -> ReportTable:
    """Score every system over the corpus and rank them.

    Per-system means of ROUGE-1/2/L, METEOR, and (when a scorer is given)
    similarity; the A.M./G.M. columns aggregate the three corpus-level ROUGE
    means. The rank column averages the per-metric ranks over geometric-mean
    ROUGE, METEOR, and similarity. With defences on, any prediction failing
    ``sanitize`` scores zero on every metric.
    """
    if not corpus:
        raise ValueError("corpus must be non-empty")
    rows = []
    for system in systems:
        predictions = [_predict(system, pair) for pair in corpus]

        def score_one(args):
            (full, meteor_text), pair = args
            if defences_on:
                verdict = sanitize(full, thresholds)
                if not verdict.passed:
                    return _zero_report(scorer is not None), True
            report = score_texts(full, pair.reference, scorer, meteor_params, meteor_text)
            return report, False

        work = list(zip(predictions, corpus))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                scored = list(pool.map(score_one, work))
        else:
            scored = [score_one(item) for item in work]

        n = len(scored)
        r1 = sum(r.rouge1 for r, _ in scored) / n
        r2 = sum(r.rouge2 for r, _ in scored) / n
        rl = sum(r.rougeL for r, _ in scored) / n
        m = sum(r.meteor for r, _ in scored) / n
        sim = sum(r.similarity for r, _ in scored) / n if scorer is not None else None
        am, gm = aggregate(r1, r2, rl)
        flagged = sum(1 for _, bad in scored if bad) if defences_on else None
        rows.append(
            ReportRow(
                name=system.name,
                report=MetricReport(r1, r2, rl, m, sim, am, gm),
                flagged=flagged,
                total=n,
            )
        )

    rank_columns = [[row.report.rouge_gm for row in rows], [row.report.meteor for row in rows]]
    if scorer is not None:
        rank_columns.append([row.report.similarity for row in rows])
    per_column_ranks = [_average_ranks(column) for column in rank_columns]
    for i, row in enumerate(rows):
        row.avg_rank = sum(ranks[i] for ranks in per_column_ranks) / len(per_column_ranks)
    return ReportTable(rows, defences_on=defences_on, has_similarity=scorer is not None)


def _fmt_score(value: float | None) -> str:
    return "" if value is None else f"{100.0 * value:.2f}"


def emit_report(table: ReportTable, fmt: str = "tsv") -> bytes:
    """Render the table deterministically; scores are percentages with two decimals."""
    header = ["System", "ROUGE-1", "ROUGE-2", "ROUGE-L", "ROUGE-A.M.", "ROUGE-G.M.", "METEOR"]
    if table.has_similarity:
        header.append("Similarity")
    header.append("AvgRank")
    if table.defences_on:
        header.append("Flagged")
    body = []
    for row in table.rows:
        r = row.report
        cells = [row.name, _fmt_score(r.rouge1), _fmt_score(r.rouge2), _fmt_score(r.rougeL),
                 _fmt_score(r.rouge_am), _fmt_score(r.rouge_gm), _fmt_score(r.meteor)]
        if table.has_similarity:
            cells.append(_fmt_score(r.similarity))
        cells.append("" if row.avg_rank is None else f"{row.avg_rank:.2f}")
        if table.defences_on:
            cells.append(f"{row.flagged}/{row.total}")
        body.append(cells)
    if fmt == "tsv":
        lines = ["\t".join(header)] + ["\t".join(cells) for cells in body]
    elif fmt == "markdown":
        lines = [
            "| " + " | ".join(header) + " |",
            "| " + " | ".join("---" for _ in header) + " |",
        ] + ["| " + " | ".join(cells) + " |" for cells in body]
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return ("\n".join(lines) + "\n").encode("utf-8")
