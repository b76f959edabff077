"""GreedyFool: black-box attack via priority-scored single-pixel units.

Pipeline: encode candidate perturbations as (x, y, r, g, b); run
differential evolution with the perturbation-priority fitness (confidence
shift per unit of perceptual loss, probing the oracle once per candidate);
rank the full evaluation archive; then greedily accumulate the ranked units
onto the benign image, re-probing after each one, until the oracle's
decision satisfies the goal.

Priorities are measured unit-by-unit against the pristine benign image and
the ranking is sorted once; the greedy phase never re-scores, so its only
oracle cost is one probe per applied unit.
"""

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import evolution, metrics
from .evolution import DeConfig, FitnessError, SearchBounds
from .images import PerturbationUnit, apply_unit, validate_image
from .metrics import ChannelWeights, DEFAULT_CHANNEL_WEIGHTS, DEFAULT_SD_FLOOR, PsTable
from .oracle import OracleError, ProbabilityVector

logger = logging.getLogger(__name__)

# Finite floor used for zero-cost candidates (unit equals the benign pixel):
# they keep the fitness total for the evolution loop but can never win the
# ranking, and the greedy phase never applies them.
SENTINEL_PRIORITY = -float(np.finfo(np.float64).max)


@dataclass(frozen=True)
class AttackGoal:
    """What counts as success, and the sign of the priority numerator.

    Non-targeted attacks probe the true label (any flip away succeeds);
    targeted attacks probe the target label and need the argmax to reach it.
    """

    mode: str
    true_label: int
    target_label: Optional[int] = None

    def __post_init__(self):
        if self.mode not in ("nontargeted", "targeted"):
            raise ValueError(f"mode must be 'nontargeted' or 'targeted', got {self.mode!r}")
        if self.true_label < 0:
            raise ValueError(f"true_label must be >= 0, got {self.true_label}")
        if self.mode == "targeted":
            if self.target_label is None:
                raise ValueError("targeted mode requires a target_label")
            if self.target_label == self.true_label:
                raise ValueError(
                    f"target_label must differ from true_label ({self.true_label})"
                )
            if self.target_label < 0:
                raise ValueError(f"target_label must be >= 0, got {self.target_label}")
        elif self.target_label is not None:
            raise ValueError("target_label is only valid in targeted mode")

    @property
    def zeta(self) -> float:
        """+1 when probing the true label, -1 when probing a target label."""
        return 1.0 if self.mode == "nontargeted" else -1.0

    @property
    def probe_label(self) -> int:
        return self.true_label if self.mode == "nontargeted" else self.target_label

    def satisfied_by(self, probs: ProbabilityVector) -> bool:
        top, _ = probs.top()
        if self.mode == "nontargeted":
            return top != self.true_label
        return top == self.target_label


@dataclass(frozen=True)
class CandidateRecord:
    """A scored candidate: the unit, its priority, and the oracle's
    probe-label probability after applying this unit alone."""

    unit: PerturbationUnit
    priority: float
    probe_probability: float


@dataclass(frozen=True)
class AppliedUnit:
    """One greedily applied unit as it appears in reports. Baseline attacks
    carry no ranking information, hence the optional fields."""

    unit: PerturbationUnit
    priority: Optional[float] = None
    probe_probability: Optional[float] = None


@dataclass
class AttackReport:
    """Outcome of one attack run, with perceptual and Lp metrics of the
    final image. ``oracle_calls`` is the exact number of predict() probes
    issued over the whole run. ``elapsed_seconds`` is excluded from any
    determinism guarantee."""

    method: str
    success: bool
    goal: AttackGoal
    applied: List[AppliedUnit]
    final_label: Optional[int]
    final_confidence: Optional[float]
    oracle_calls: int
    mul_factor_loss: float
    l0: int
    l2: float
    linf: int
    elapsed_seconds: float
    seed: Optional[int] = None
    population_size: Optional[int] = None
    generations: Optional[int] = None
    scale_factor: Optional[float] = None
    budget: Optional[int] = None
    error: Optional[str] = None
    adversarial: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        units = []
        for rec in self.applied:
            entry = {
                "x": rec.unit.x,
                "y": rec.unit.y,
                "r": rec.unit.r,
                "g": rec.unit.g,
                "b": rec.unit.b,
                "priority": None if rec.priority is None else float(rec.priority),
                "probe_probability": (
                    None if rec.probe_probability is None else float(rec.probe_probability)
                ),
            }
            units.append(entry)
        return {
            "schema_version": 1,
            "method": self.method,
            "success": bool(self.success),
            "goal": {
                "mode": self.goal.mode,
                "true_label": int(self.goal.true_label),
                "target_label": (
                    None if self.goal.target_label is None else int(self.goal.target_label)
                ),
            },
            "applied_units": units,
            "final_label": None if self.final_label is None else int(self.final_label),
            "final_confidence": (
                None if self.final_confidence is None else float(self.final_confidence)
            ),
            "oracle_calls": int(self.oracle_calls),
            "metrics": {
                "mul_factor_loss": float(self.mul_factor_loss),
                "l0": int(self.l0),
                "l2": float(self.l2),
                "linf": int(self.linf),
            },
            "elapsed_seconds": float(self.elapsed_seconds),
            "seed": None if self.seed is None else int(self.seed),
            "de": (
                None
                if self.population_size is None
                else {
                    "population_size": int(self.population_size),
                    "generations": int(self.generations),
                    "scale_factor": float(self.scale_factor),
                }
            ),
            "budget": None if self.budget is None else int(self.budget),
            "error": self.error,
        }


@dataclass(frozen=True)
class AttackConfig:
    """Bundle of everything an attack run needs besides image/goal/oracle."""

    de: DeConfig = DeConfig()
    weights: ChannelWeights = DEFAULT_CHANNEL_WEIGHTS
    sd_floor: float = DEFAULT_SD_FLOOR
    max_units: Optional[int] = None
    max_concurrency: int = 1

    def __post_init__(self):
        if self.max_units is not None and self.max_units < 0:
            raise ValueError(f"max_units must be >= 0, got {self.max_units}")
        if self.max_concurrency < 1:
            raise ValueError(f"max_concurrency must be >= 1, got {self.max_concurrency}")


def _check_goal_labels(goal: AttackGoal, probs: ProbabilityVector) -> None:
    num_classes = len(probs)
    for name, label in (("true_label", goal.true_label), ("target_label", goal.target_label)):
        if label is not None and label >= num_classes:
            raise ValueError(
                f"{name}={label} outside the oracle's {num_classes} classes"
            )


class _CountingOracle:
    """Thread-safe pass-through wrapper counting logical predict() probes."""

    def __init__(self, oracle):
        self._oracle = oracle
        self._lock = threading.Lock()
        self.calls = 0

    def predict(self, image):
        with self._lock:
            self.calls += 1
        return self._oracle.predict(image)


def _scored_probe(benign, unit, goal, baseline_probability, oracle, table, weights, sd_floor):
    """(priority, probe probability) for one unit.

    No-op units short-circuit to the sentinel without an oracle probe:
    their adversarial image is bitwise the benign image, so the probe
    probability is the baseline itself and the loss denominator is zero.
    """
    if unit.is_noop(benign):
        return SENTINEL_PRIORITY, float(baseline_probability)
    loss = metrics.integ_loss(benign, unit, weights=weights, table=table, sd_floor=sd_floor)
    perturbed = apply_unit(benign, unit)
    try:
        probs = oracle.predict(perturbed)
    except OracleError as exc:
        exc.unit = unit
        raise
    p_after = probs[goal.probe_label]
    priority = goal.zeta * (float(baseline_probability) - p_after) / loss.total
    return priority, p_after


def perturbation_priority(
    benign,
    unit: PerturbationUnit,
    goal: AttackGoal,
    baseline_probability: float,
    oracle,
    table: PsTable = None,
    weights: ChannelWeights = DEFAULT_CHANNEL_WEIGHTS,
    sd_floor: float = DEFAULT_SD_FLOOR,
) -> float:
    """Confidence shift per unit of perceptual loss for a single unit.

    ``baseline_probability`` must be the oracle's probe-label probability on
    the untouched benign image, computed once per attack. Positive values
    mean progress: for non-targeted goals the true-label confidence dropped,
    for targeted goals the target-label confidence rose. Units identical to
    the benign pixel return the sentinel minimum priority so they are never
    greedily selected. Oracle failures propagate with ``.unit`` attached.
    """
    priority, _ = _scored_probe(
        benign, unit, goal, baseline_probability, oracle, table, weights, sd_floor
    )
    return priority


def score_candidates(
    benign,
    goal: AttackGoal,
    de_config: DeConfig,
    oracle,
    table: PsTable = None,
    weights: ChannelWeights = DEFAULT_CHANNEL_WEIGHTS,
    sd_floor: float = DEFAULT_SD_FLOOR,
    baseline: ProbabilityVector = None,
    max_concurrency: int = 1,
) -> List[CandidateRecord]:
    """Score candidates by evolution and rank them.

    Runs the rand/1 loop with the priority fitness, collects the full trial
    archive, sorts it by priority descending (stable on ties), and keeps
    only the highest-priority unit per pixel coordinate. Oracle failures
    abort the run as a :class:`evolution.FitnessError` naming the offending
    position, with ``candidates_scored`` recording the progress made.
    """
    validate_image(benign)
    h, w = benign.shape[0], benign.shape[1]
    if baseline is None:
        baseline = oracle.predict(benign)
    _check_goal_labels(goal, baseline)
    baseline_probability = baseline[goal.probe_label]
    bounds = SearchBounds.for_image(h, w)
    probes = {}

    def fitness(position):
        unit = _position_to_unit(position)
        priority, p_after = _scored_probe(
            benign, unit, goal, baseline_probability, oracle, table, weights, sd_floor
        )
        probes[tuple(int(v) for v in position)] = p_after
        return priority

    try:
        if max_concurrency > 1:
            with ThreadPoolExecutor(max_workers=max_concurrency) as pool:
                result = evolution.run(de_config, bounds, fitness, map_fn=pool.map)
        else:
            result = evolution.run(de_config, bounds, fitness)
    except FitnessError as exc:
        exc.candidates_scored = len(probes)
        raise

    records = [
        CandidateRecord(
            unit=_position_to_unit(member.position),
            priority=member.fitness,
            probe_probability=probes[tuple(int(v) for v in member.position)],
        )
        for member in result.archive
    ]
    records.sort(key=lambda rec: rec.priority, reverse=True)
    ranked = []
    seen = set()
    for rec in records:
        key = (rec.unit.x, rec.unit.y)
        if key not in seen:
            seen.add(key)
            ranked.append(rec)
    return ranked


def _position_to_unit(position) -> PerturbationUnit:
    """Decode a search vector: coordinates are 1-based in the search space."""
    return PerturbationUnit(
        x=int(position[0]) - 1,
        y=int(position[1]) - 1,
        r=int(position[2]),
        g=int(position[3]),
        b=int(position[4]),
    )


def greedy_synthesize(
    benign,
    ranked: List[CandidateRecord],
    goal: AttackGoal,
    oracle,
    max_units: Optional[int] = None,
    table: PsTable = None,
    weights: ChannelWeights = DEFAULT_CHANNEL_WEIGHTS,
    sd_floor: float = DEFAULT_SD_FLOOR,
    initial_probs: ProbabilityVector = None,
    method: str = "greedyfool",
    started: float = None,
    seed: Optional[int] = None,
    de_config: DeConfig = None,
) -> AttackReport:
    """Accumulate ranked units until the goal flips the oracle's decision.

    Units are applied strictly in rank order, one probe per step; the
    applied set is always a prefix of the ranking. Stops with success as
    soon as the goal predicate holds (including before any unit, when the
    benign image already satisfies it), and with failure when the ranking
    is exhausted, ``max_units`` is reached, or the sentinel (no-op) region
    of the ranking begins. An oracle failure mid-loop yields a failure
    report carrying the units applied so far.
    """
    validate_image(benign)
    started = time.perf_counter() if started is None else started
    counter = oracle if isinstance(oracle, _CountingOracle) else _CountingOracle(oracle)
    limit = len(ranked) if max_units is None else min(max_units, len(ranked))

    def build(success, applied, current, probs, error=None):
        mfl = metrics.mul_factor_loss(
            benign, current, weights=weights, table=table, sd_floor=sd_floor
        )
        norms = metrics.lp_norms(benign, current)
        label, confidence = (None, None) if probs is None else probs.top()
        de = de_config
        return AttackReport(
            method=method,
            success=success,
            goal=goal,
            applied=applied,
            final_label=label,
            final_confidence=confidence,
            oracle_calls=counter.calls,
            mul_factor_loss=mfl,
            l0=norms.l0,
            l2=norms.l2,
            linf=norms.linf,
            elapsed_seconds=time.perf_counter() - started,
            seed=seed,
            population_size=None if de is None else de.population_size,
            generations=None if de is None else de.generations,
            scale_factor=None if de is None else de.scale_factor,
            error=error,
            adversarial=current,
        )

    current = benign.copy()
    applied: List[AppliedUnit] = []
    try:
        probs = initial_probs if initial_probs is not None else counter.predict(benign)
    except OracleError as exc:
        return build(False, applied, current, None, error=str(exc))
    if goal.satisfied_by(probs):
        return build(True, applied, current, probs)

    for rec in ranked[:limit]:
        if rec.priority == SENTINEL_PRIORITY:
            break
        current[rec.unit.y, rec.unit.x] = rec.unit.rgb
        applied.append(
            AppliedUnit(rec.unit, priority=rec.priority, probe_probability=rec.probe_probability)
        )
        try:
            probs = counter.predict(current)
        except OracleError as exc:
            return build(False, applied, current, probs, error=str(exc))
        if goal.satisfied_by(probs):
            return build(True, applied, current, probs)
    return build(False, applied, current, probs)


def attack(
    benign,
    goal: AttackGoal,
    config: AttackConfig,
    oracle,
    table: PsTable = None,
) -> AttackReport:
    """Full pipeline: baseline probe, candidate scoring, greedy synthesis.

    Deterministic for a fixed DE seed and a deterministic oracle. The
    reported ``oracle_calls`` counts every probe: the baseline, one per
    scored candidate (initial population plus the trial archive, minus
    short-circuited no-ops), and one per greedy step.
    """
    validate_image(benign)
    started = time.perf_counter()
    counter = _CountingOracle(oracle)
    baseline = counter.predict(benign)
    _check_goal_labels(goal, baseline)
    top, top_conf = baseline.top()
    if goal.mode == "nontargeted" and top != goal.true_label:
        logger.warning(
            "benign image is classified as %d (%.4f), not the declared true "
            "label %d; the non-targeted goal is already satisfied",
            top, top_conf, goal.true_label,
        )
    ranked = score_candidates(
        benign,
        goal,
        config.de,
        counter,
        table=table,
        weights=config.weights,
        sd_floor=config.sd_floor,
        baseline=baseline,
        max_concurrency=config.max_concurrency,
    )
    return greedy_synthesize(
        benign,
        ranked,
        goal,
        counter,
        max_units=config.max_units,
        table=table,
        weights=config.weights,
        sd_floor=config.sd_floor,
        initial_probs=baseline,
        started=started,
        seed=config.de.rng_seed,
        de_config=config.de,
    )


def random_baseline_attack(
    benign,
    goal: AttackGoal,
    oracle,
    budget: int,
    seed: Optional[int] = None,
    table: PsTable = None,
    weights: ChannelWeights = DEFAULT_CHANNEL_WEIGHTS,
    sd_floor: float = DEFAULT_SD_FLOOR,
) -> AttackReport:
    """Comparison stand-in: accumulate uniformly random units.

    Applies up to ``budget`` random units (uniform pixel, uniform color),
    one oracle probe per unit, stopping at the first success. Budget 0
    returns an immediate failure report without touching the oracle. Same
    report format as the main attack.
    """
    validate_image(benign)
    if budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget}")
    started = time.perf_counter()
    counter = _CountingOracle(oracle)
    current = benign.copy()
    applied: List[AppliedUnit] = []

    def build(success, probs, error=None):
        mfl = metrics.mul_factor_loss(
            benign, current, weights=weights, table=table, sd_floor=sd_floor
        )
        norms = metrics.lp_norms(benign, current)
        label, confidence = (None, None) if probs is None else probs.top()
        return AttackReport(
            method="random_baseline",
            success=success,
            goal=goal,
            applied=applied,
            final_label=label,
            final_confidence=confidence,
            oracle_calls=counter.calls,
            mul_factor_loss=mfl,
            l0=norms.l0,
            l2=norms.l2,
            linf=norms.linf,
            elapsed_seconds=time.perf_counter() - started,
            seed=seed,
            budget=budget,
            error=error,
            adversarial=current,
        )

    if budget == 0:
        return build(False, None)

    rng = np.random.default_rng(seed)
    h, w = benign.shape[0], benign.shape[1]
    try:
        probs = counter.predict(benign)
    except OracleError as exc:
        return build(False, None, error=str(exc))
    if goal.satisfied_by(probs):
        return build(True, probs)
    for _ in range(budget):
        unit = PerturbationUnit(
            x=int(rng.integers(0, w)),
            y=int(rng.integers(0, h)),
            r=int(rng.integers(0, 256)),
            g=int(rng.integers(0, 256)),
            b=int(rng.integers(0, 256)),
        )
        current[unit.y, unit.x] = unit.rgb
        applied.append(AppliedUnit(unit))
        try:
            probs = counter.predict(current)
        except OracleError as exc:
            return build(False, probs, error=str(exc))
        if goal.satisfied_by(probs):
            return build(True, probs)
    return build(False, probs)
