"""Command-line interface: score, attack, evaluate, defend."""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import os
import sys
from pathlib import Path

from .defence import DefenceThresholds, sanitize
from .harness import (
    CorpusError,
    SystemKind,
    SystemUnderTest,
    emit_report,
    load_corpus,
    load_predictions,
    run_evaluation,
    save_predictions,
)
from .rouge_attack import AttackConfig, attack_rouge
from .similarity import BridgeError, BridgeSimilarityScorer, MockSimilarityScorer
from .trigger_search import (
    GaConfig,
    fit_to_set,
    load_checkpoint,
    save_checkpoint,
    validate_emulator,
)

BRIDGE_ENV_VAR = "SCOREGAME_BRIDGE"


def _load_config_file(path: str | None) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    if path:
        if not Path(path).exists():
            raise FileNotFoundError(f"config file not found: {path}")
        parser.read(path, encoding="utf-8")
    return parser


def _section_overrides(parser: configparser.ConfigParser, section: str, cls):
    """Build kwargs for a dataclass from an INI section, coercing field types."""
    kwargs = {}
    if not parser.has_section(section):
        return kwargs
    fields = {f.name: f.type for f in dataclasses.fields(cls)}
    for key, raw in parser.items(section):
        if key not in fields:
            raise ValueError(f"unknown {section} option {key!r} in config file")
        kind = fields[key]
        if kind in ("int", int):
            kwargs[key] = int(raw)
        else:
            kwargs[key] = float(raw)
    return kwargs


def _ga_config(args, parser: configparser.ConfigParser) -> GaConfig:
    kwargs = _section_overrides(parser, "ga", GaConfig)
    for name, value in (
        ("max_generations", args.generations),
        ("population_size", args.population),
        ("fitness_threshold", args.threshold),
        ("seed", args.seed),
        ("genome_length", args.genome_length),
    ):
        if value is not None:
            kwargs[name] = value
    return GaConfig(**kwargs)


def _thresholds(parser: configparser.ConfigParser) -> DefenceThresholds:
    return DefenceThresholds(**_section_overrides(parser, "defence", DefenceThresholds))


def _scorer(bridge: str | None, use_mock: bool):
    endpoint = bridge or os.environ.get(BRIDGE_ENV_VAR)
    if endpoint:
        return BridgeSimilarityScorer(endpoint)
    if use_mock:
        return MockSimilarityScorer()
    return None


def _attack_config(args) -> AttackConfig:
    return AttackConfig(c_min=args.c_min, predictor=args.predictor, frequency_k=args.frequency_k)


def _write_output(data: bytes, out: str | None):
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)


def _cmd_score(args, config):
    corpus = load_corpus(args.corpus)
    predictions = load_predictions(args.predictions)
    system = SystemUnderTest(
        name=Path(args.predictions).stem, kind=SystemKind.EXTERNAL_FILE, predictions=predictions
    )
    scorer = _scorer(args.bridge, args.mock_similarity)
    table = run_evaluation(
        corpus, [system], scorer=scorer, defences_on=args.defend, thresholds=_thresholds(config)
    )
    _write_output(emit_report(table, args.format), args.out)
    return 0


def _cmd_attack_rouge(args, config):
    corpus = load_corpus(args.corpus)
    cfg = _attack_config(args)
    predictions = {pair.id: attack_rouge(pair, cfg) for pair in corpus}
    if args.out:
        save_predictions(predictions, args.out)
    else:
        for pid, text in predictions.items():
            sys.stdout.write(json.dumps({"id": pid, "prediction": text}, ensure_ascii=False) + "\n")
    return 0


def _cmd_attack_trigger(args, config):
    corpus = load_corpus(args.refs)
    references = [pair.reference for pair in corpus]
    scorer = _scorer(args.bridge, use_mock=True)
    ga = _ga_config(args, config)
    init = None
    if args.resume:
        init, _, _ = load_checkpoint(args.resume)
        if ga.genome_length != len(init.genome):
            ga = dataclasses.replace(ga, genome_length=len(init.genome))
    emulator, history = fit_to_set(references, scorer, ga, max_rounds=args.rounds, init=init)
    save_checkpoint(args.out, emulator, ga, history)
    stats = validate_emulator(emulator, references, scorer)
    sys.stderr.write(
        f"emulator ({len(emulator.genome)} chars) written to {args.out}; "
        f"f1 over {len(references)} refs: min={stats.min:.4f} mean={stats.mean:.4f} max={stats.max:.4f}\n"
    )
    return 0


def _cmd_attack_combined(args, config):
    from .combined import combine

    corpus = load_corpus(args.corpus)
    emulator, _, _ = load_checkpoint(args.emulator)
    cfg = _attack_config(args)
    predictions = {
        pair.id: combine(emulator, attack_rouge(pair, cfg)).full for pair in corpus
    }
    if args.out:
        save_predictions(predictions, args.out)
    else:
        for pid, text in predictions.items():
            sys.stdout.write(json.dumps({"id": pid, "prediction": text}, ensure_ascii=False) + "\n")
    return 0


def _cmd_evaluate(args, config):
    corpus = load_corpus(args.corpus)
    cfg = _attack_config(args)
    externals = {}
    for spec in args.external or []:
        name, _, path = spec.partition("=")
        if not path:
            raise ValueError(f"--external expects NAME=FILE, got {spec!r}")
        externals[name] = load_predictions(path)
    systems = []
    for name in args.systems.split(","):
        name = name.strip()
        if not name:
            continue
        if name == "lead3":
            systems.append(SystemUnderTest(name, SystemKind.LEAD3))
        elif name == "rouge_attack":
            systems.append(SystemUnderTest(name, SystemKind.ROUGE_ATTACK, attack=cfg))
        elif name == "combined_attack":
            if not args.emulator:
                raise ValueError("combined_attack requires --emulator FILE")
            emulator, _, _ = load_checkpoint(args.emulator)
            systems.append(
                SystemUnderTest(name, SystemKind.COMBINED_ATTACK, attack=cfg, emulator=emulator.genome)
            )
        elif name in externals:
            systems.append(
                SystemUnderTest(name, SystemKind.EXTERNAL_FILE, predictions=externals[name])
            )
        else:
            raise ValueError(
                f"unknown system {name!r}: expected lead3, rouge_attack, combined_attack, "
                "or a name given via --external"
            )
    scorer = _scorer(args.bridge, args.mock_similarity)
    table = run_evaluation(
        corpus, systems, scorer=scorer, defences_on=args.defend, thresholds=_thresholds(config)
    )
    _write_output(emit_report(table, args.format), args.out)
    return 0


def _cmd_defend(args, config):
    text = Path(args.text).read_text(encoding="utf-8")
    verdict = sanitize(text, _thresholds(config))
    sys.stdout.write(json.dumps(dataclasses.asdict(verdict), indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scoregame",
        description="Summary-scoring metrics, universal evasion attacks against them, and defences.",
    )
    parser.add_argument("--config", help="INI file with [ga] and [defence] overrides")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_bridge(p):
        p.add_argument("--bridge", help=f"similarity endpoint (tcp://HOST:PORT or exec:CMD); default ${BRIDGE_ENV_VAR}")

    def add_attack_flags(p):
        p.add_argument("--predictor", choices=["oracle", "frequency"], default="oracle")
        p.add_argument("--c-min", type=int, default=3, dest="c_min", help="minimum accepted salient-run length")
        p.add_argument("--frequency-k", type=int, default=40, dest="frequency_k")

    p = sub.add_parser("score", help="score a predictions file against corpus references")
    p.add_argument("--corpus", required=True)
    p.add_argument("--predictions", required=True)
    add_bridge(p)
    p.add_argument("--mock-similarity", action="store_true", help="use the built-in mock similarity scorer")
    p.add_argument("--defend", action="store_true", help="zero-score predictions that fail sanitization")
    p.add_argument("--format", choices=["tsv", "markdown"], default="tsv")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_score)

    attack = sub.add_parser("attack", help="generate attack outputs").add_subparsers(
        dest="attack_command", required=True
    )

    p = attack.add_parser("rouge", help="bag-to-sequence attack on lexical metrics")
    p.add_argument("--corpus", required=True)
    add_attack_flags(p)
    p.add_argument("--out", help="write predictions JSONL here instead of stdout")
    p.set_defaults(func=_cmd_attack_rouge)

    p = attack.add_parser("trigger", help="genetic search for a non-alphanumeric emulator")
    p.add_argument("--refs", required=True, help="corpus file whose references are the fitting set")
    p.add_argument("--generations", type=int)
    p.add_argument("--population", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--genome-length", type=int, dest="genome_length")
    p.add_argument("--rounds", type=int, default=5)
    p.add_argument("--resume", help="seed the search from an earlier checkpoint")
    add_bridge(p)
    p.add_argument("--out", required=True, help="checkpoint file for the optimized emulator")
    p.set_defaults(func=_cmd_attack_trigger)

    p = attack.add_parser("combined", help="emulator prefix + bag-to-sequence tail")
    p.add_argument("--corpus", required=True)
    p.add_argument("--emulator", required=True, help="checkpoint written by 'attack trigger'")
    add_attack_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_attack_combined)

    p = sub.add_parser("evaluate", help="rank systems over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--systems", required=True, help="comma list: lead3,rouge_attack,combined_attack,NAME")
    p.add_argument("--external", action="append", metavar="NAME=FILE", help="external predictions file")
    p.add_argument("--emulator", help="checkpoint for combined_attack")
    add_attack_flags(p)
    add_bridge(p)
    p.add_argument("--mock-similarity", action="store_true")
    p.add_argument("--defend", action="store_true")
    p.add_argument("--format", choices=["tsv", "markdown"], default="tsv")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("defend", help="run input sanitization over a text file")
    p.add_argument("--text", required=True)
    p.set_defaults(func=_cmd_defend)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config_file(args.config)
        return args.func(args, config)
    except (CorpusError, BridgeError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
