"""Black-box genetic search for a universal non-alphanumeric emulator string.

The genome is a fixed-length string over a non-alphanumeric alphabet; fitness
is the similarity scorer's f1 against a reference sentence. A fitting loop
re-optimizes against whichever reference the current emulator scores worst
on, so one string ends up imitating a whole set of natural sentences.
"""

from __future__ import annotations

import json
import string
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .similarity import SimilarityScorer

# Printable ASCII punctuation, space, and the control bytes 0x01-0x1f: the
# character classes seen in real scrambled-code triggers. 64 symbols total.
ALPHABET = "".join(chr(c) for c in range(0x01, 0x20)) + " " + string.punctuation
_ALPHABET_BYTES = np.frombuffer(ALPHABET.encode("ascii"), dtype=np.uint8)

DEFAULT_MAX_ROUNDS = 5


class TriggerSearchError(RuntimeError):
    """Scorer failure during a search; carries the history recorded so far."""

    def __init__(self, message: str, history: "FitHistory"):
        super().__init__(message)
        self.history = history


def _check_genome(genome: str):
    if not genome:
        raise ValueError("genome must be non-empty")
    for ch in genome:
        if ch.isalnum():
            raise ValueError(f"genome contains alphanumeric character {ch!r}")


@dataclass
class EmulatorString:
    """A candidate trigger: non-alphanumeric genome plus its last evaluated f1."""

    genome: str
    fitness: float | None = None

    def __post_init__(self):
        _check_genome(self.genome)


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 10
    max_generations: int = 2000
    fitness_threshold: float = 0.88
    genome_length: int = 512
    mutation_rate: float = 0.02
    crossover_rate: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.max_generations < 1:
            raise ValueError("max_generations must be >= 1")
        if self.genome_length < 1:
            raise ValueError("genome_length must be >= 1")
        for name in ("mutation_rate", "crossover_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass
class RoundRecord:
    """One fitting round: which reference was targeted and how far it got."""

    reference_index: int
    start_generation: int
    best_fitness: float
    min_over_set: float | None = None


@dataclass
class FitHistory:
    """Per-generation best fitness (concatenated across rounds) and per-round records."""

    best_fitness: list[float] = field(default_factory=list)
    rounds: list[RoundRecord] = field(default_factory=list)


@dataclass(frozen=True)
class EmulatorStats:
    """Per-reference f1 of one emulator plus min/mean/max aggregates."""

    scores: tuple[float, ...]
    min: float
    mean: float
    max: float


def _decode(genome_idx: np.ndarray) -> str:
    return _ALPHABET_BYTES[genome_idx].tobytes().decode("ascii")


def _encode(genome: str) -> np.ndarray:
    _check_genome(genome)
    lookup = {ch: i for i, ch in enumerate(ALPHABET)}
    try:
        return np.array([lookup[ch] for ch in genome], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"genome character {exc.args[0]!r} is outside the search alphabet") from exc


def _mutate(genome_idx: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Resample a Binomial(len, rate) number of positions uniformly from the alphabet."""
    out = genome_idx.copy()
    if rate <= 0.0:
        return out
    n_mut = rng.binomial(len(out), rate)
    if n_mut:
        positions = rng.choice(len(out), size=n_mut, replace=False)
        out[positions] = rng.integers(0, len(ALPHABET), size=n_mut)
    return out


def _crossover(
    p1: np.ndarray, p2: np.ndarray, rate: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    if len(p1) > 1 and rate > 0.0 and rng.random() < rate:
        point = int(rng.integers(1, len(p1)))
        return (
            np.concatenate([p1[:point], p2[point:]]),
            np.concatenate([p2[:point], p1[point:]]),
        )
    return p1.copy(), p2.copy()


def _tournament(fitness: list[float], rng: np.random.Generator) -> int:
    i, j = rng.integers(0, len(fitness), size=2)
    return int(i) if fitness[i] >= fitness[j] else int(j)


class _Evaluator:
    """Memoizing fitness evaluator; scorer failures surface as TriggerSearchError."""

    def __init__(self, scorer: SimilarityScorer, history: FitHistory):
        self.scorer = scorer
        self.history = history
        self._memo: dict[tuple[str, str], float] = {}

    def fitness(self, genome: str, reference: str) -> float:
        key = (genome, reference)
        if key not in self._memo:
            try:
                self._memo[key] = self.scorer.score(genome, reference).f1
            except Exception as exc:
                raise TriggerSearchError(f"scorer failed during search: {exc}", self.history) from exc
        return self._memo[key]


def _initial_population(
    config: GaConfig, init: EmulatorString | None, rng: np.random.Generator
) -> list[np.ndarray]:
    if init is None:
        return [
            rng.integers(0, len(ALPHABET), size=config.genome_length)
            for _ in range(config.population_size)
        ]
    seed_idx = _encode(init.genome)
    if len(seed_idx) != config.genome_length:
        raise ValueError(
            f"init genome length {len(seed_idx)} does not match configured {config.genome_length}"
        )
    population = [seed_idx.copy()]
    for _ in range(config.population_size - 1):
        population.append(_mutate(seed_idx, config.mutation_rate, rng))
    return population


def _run_ga(
    reference: str,
    evaluator: _Evaluator,
    config: GaConfig,
    init: EmulatorString | None,
    rng: np.random.Generator,
) -> EmulatorString:
    """One optimization round: selection, crossover, mutation with elitism.

    Appends the running best fitness to the evaluator's history after every
    generation; stops at the fitness threshold or the generation budget.
    """
    history = evaluator.history
    population = _initial_population(config, init, rng)
    best_genome = ""
    best_fitness = -np.inf
    for _ in range(config.max_generations):
        for genome_idx in population:
            genome = _decode(genome_idx)
            fit = evaluator.fitness(genome, reference)
            if fit > best_fitness:
                best_fitness = fit
                best_genome = genome
        history.best_fitness.append(best_fitness)
        if best_fitness >= config.fitness_threshold:
            break
        fitness = [evaluator.fitness(_decode(g), reference) for g in population]
        next_population = [_encode(best_genome)]
        while len(next_population) < config.population_size:
            p1 = population[_tournament(fitness, rng)]
            p2 = population[_tournament(fitness, rng)]
            c1, c2 = _crossover(p1, p2, config.crossover_rate, rng)
            next_population.append(_mutate(c1, config.mutation_rate, rng))
            if len(next_population) < config.population_size:
                next_population.append(_mutate(c2, config.mutation_rate, rng))
        population = next_population
    return EmulatorString(best_genome, best_fitness)


def ga_optimize(
    reference: str,
    scorer: SimilarityScorer,
    config: GaConfig = GaConfig(),
    init: EmulatorString | None = None,
) -> tuple[EmulatorString, FitHistory]:
    """Maximize similarity f1 against one reference sentence.

    Returns the best candidate ever evaluated plus the per-generation history.
    Deterministic for a fixed seed and deterministic scorer.
    """
    if not reference:
        raise ValueError("reference must be non-empty")
    history = FitHistory()
    evaluator = _Evaluator(scorer, history)
    rng = np.random.default_rng(config.seed)
    best = _run_ga(reference, evaluator, config, init, rng)
    history.rounds.append(
        RoundRecord(reference_index=0, start_generation=0, best_fitness=best.fitness)
    )
    return best, history


def validate_emulator(
    emulator: EmulatorString, references: list[str], scorer: SimilarityScorer
) -> EmulatorStats:
    """Score the emulator against every reference; the emulator is not mutated."""
    scores = tuple(s.f1 for s in scorer.batch_score([(emulator.genome, r) for r in references]))
    if not scores:
        raise ValueError("references must be non-empty")
    return EmulatorStats(scores, min(scores), sum(scores) / len(scores), max(scores))


def fit_to_set(
    references: list[str],
    scorer: SimilarityScorer,
    config: GaConfig = GaConfig(),
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    init: EmulatorString | None = None,
) -> tuple[EmulatorString, FitHistory]:
    """Fit one emulator to a whole reference set.

    Round 0 optimizes against a randomly chosen reference. Each later round
    scores the current emulator on every reference, stops early if the worst
    score already clears the threshold, and otherwise re-optimizes against
    the worst reference with the current emulator seeding the population.
    Returns the candidate with the best recorded min-over-set fitness (its
    ``fitness`` field holds that min). A single-reference set degenerates to
    exactly one :func:`ga_optimize` round. ``init`` seeds round 0's
    population, which is how checkpointed runs resume.
    """
    if not references:
        raise ValueError("references must be non-empty")
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    history = FitHistory()
    evaluator = _Evaluator(scorer, history)
    rng = np.random.default_rng(config.seed)

    def min_over_set(candidate: EmulatorString) -> float:
        return min(evaluator.fitness(candidate.genome, r) for r in references)

    if len(references) == 1:
        target_index = 0
        max_rounds = 1
    else:
        target_index = int(rng.integers(0, len(references)))
    current = init
    best_candidate = None
    best_min = -np.inf
    if init is not None:
        # a resumed run must never return something worse than its seed
        best_min = min_over_set(init)
        best_candidate = EmulatorString(init.genome, best_min)
    for round_number in range(max_rounds):
        if round_number > 0:
            scores = [evaluator.fitness(current.genome, r) for r in references]
            if min(scores) >= config.fitness_threshold:
                break
            target_index = int(np.argmin(scores))
        start_generation = len(history.best_fitness)
        current = _run_ga(references[target_index], evaluator, config, current, rng)
        current_min = min_over_set(current)
        history.rounds.append(
            RoundRecord(
                reference_index=target_index,
                start_generation=start_generation,
                best_fitness=current.fitness,
                min_over_set=current_min,
            )
        )
        if current_min > best_min:
            best_min = current_min
            best_candidate = EmulatorString(current.genome, current_min)
    return best_candidate, history


def save_checkpoint(
    path: str | Path, emulator: EmulatorString, config: GaConfig, history: FitHistory
):
    """Serialize emulator, config, and history as JSON (genome escapes to plain ASCII)."""
    payload = {
        "genome": emulator.genome,
        "fitness": emulator.fitness,
        "config": asdict(config),
        "history": {
            "best_fitness": history.best_fitness,
            "rounds": [asdict(r) for r in history.rounds],
        },
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=True, indent=2), encoding="utf-8")


def load_checkpoint(path: str | Path) -> tuple[EmulatorString, GaConfig, FitHistory]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    emulator = EmulatorString(payload["genome"], payload.get("fitness"))
    config = GaConfig(**payload["config"])
    hist = payload.get("history", {})
    history = FitHistory(
        best_fitness=list(hist.get("best_fitness", [])),
        rounds=[RoundRecord(**r) for r in hist.get("rounds", [])],
    )
    return emulator, config, history
