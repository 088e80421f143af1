"""Feasibility gating and cost/energy/time ranking of model-hardware pairs.

Given measured (model, hardware) records, this module applies hard
feasibility gates (VRAM fit, control frequency, budget caps) and sorts the
survivors by a single metric or by a composite of min-max normalized cost,
energy, and time.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from vlaperf.errors import InvalidInputError
from vlaperf.roofline import HardwareSpec, ModelSpec

# Multiplier on weight bytes to account for activations and runtime state
# when checking VRAM fit.
VRAM_OVERHEAD_FACTOR = 1.2


class RankingPolicy(Enum):
    TIME_PRIORITY = "time"
    COST_PRIORITY = "cost"
    ENERGY_PRIORITY = "energy"
    CE = "ce"
    CET = "cet"


COMPOSITE_POLICIES = (RankingPolicy.CE, RankingPolicy.CET)


@dataclass(frozen=True)
class MeasurementRecord:
    """One measured (model, hardware) pairing from the leaderboard data."""

    model: str
    hardware: str
    latency_ms: float
    energy_kj: float
    cost_usd: float
    score_pct: float  # task success, carried through opaquely
    precision: str = "bf16"

    def __post_init__(self):
        if self.latency_ms <= 0:
            raise InvalidInputError(f"{self.model}/{self.hardware}: latency_ms must be > 0")
        if self.energy_kj < 0:
            raise InvalidInputError(f"{self.model}/{self.hardware}: energy_kj must be >= 0")
        if self.cost_usd < 0:
            raise InvalidInputError(f"{self.model}/{self.hardware}: cost_usd must be >= 0")
        if not 0 <= self.score_pct <= 100:
            raise InvalidInputError(f"{self.model}/{self.hardware}: score_pct must be in [0, 100]")

    @property
    def frequency_hz(self) -> float:
        return 1000.0 / self.latency_ms


@dataclass(frozen=True)
class Constraint:
    """Deployment constraints; absent values impose no gate."""

    required_hz: float | None = None
    max_cost_usd: float | None = None
    max_energy_kj: float | None = None

    def __post_init__(self):
        for name in ("required_hz", "max_cost_usd", "max_energy_kj"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise InvalidInputError(f"constraint {name} must be > 0 when set")


@dataclass(frozen=True)
class CompositeWeights:
    cost: float = 1.0
    energy: float = 1.0
    time: float = 1.0

    def __post_init__(self):
        if min(self.cost, self.energy, self.time) < 0:
            raise InvalidInputError("composite weights must be non-negative")
        if self.cost + self.energy + self.time <= 0:
            raise InvalidInputError("at least one composite weight must be positive")


@dataclass(frozen=True)
class RankedEntry:
    hardware: str
    record: MeasurementRecord
    sort_key: float  # raw metric for single-metric modes, composite score otherwise


@dataclass(frozen=True)
class Exclusion:
    hardware: str
    reason: str  # "oom" | "frequency" | "cost" | "energy"
    detail: str


@dataclass(frozen=True)
class Recommendation:
    """Ordered feasible pairs plus machine-readable exclusions."""

    model: str
    policy: RankingPolicy
    entries: tuple[RankedEntry, ...]
    excluded: tuple[Exclusion, ...] = ()

    @property
    def feasible(self) -> bool:
        return bool(self.entries)

    @property
    def hardware_order(self) -> list[str]:
        return [e.hardware for e in self.entries]


def vram_feasible(m: ModelSpec, hw: HardwareSpec, overhead_factor: float = VRAM_OVERHEAD_FACTOR) -> bool:
    """Whether the model's weights (plus runtime overhead) fit in device memory."""
    return m.weight_bytes * overhead_factor <= hw.memory_bytes


def frequency_feasible(r: MeasurementRecord, required_hz: float) -> bool:
    """Whether the measured latency sustains the required control rate (boundary inclusive)."""
    if required_hz <= 0:
        raise InvalidInputError("required_hz must be > 0")
    return r.frequency_hz >= required_hz


def energy_from_power_trace(trace: Sequence[tuple[float, float]]) -> float:
    """Trapezoidal integral of a (seconds, watts) trace, in kJ."""
    if len(trace) < 2:
        raise InvalidInputError("power trace needs at least 2 samples")
    t = np.asarray([p[0] for p in trace], dtype=float)
    p = np.asarray([p[1] for p in trace], dtype=float)
    if np.any(np.diff(t) <= 0):
        raise InvalidInputError("power trace timestamps must be strictly increasing")
    if np.any(p < 0):
        raise InvalidInputError("power samples must be >= 0")
    return float(np.trapezoid(p, t)) / 1000.0


def _tie_break(entry: RankedEntry) -> tuple[float, float, str]:
    return (entry.sort_key, entry.record.cost_usd, entry.hardware)


def _metric(r: MeasurementRecord, policy: RankingPolicy) -> float:
    if policy is RankingPolicy.TIME_PRIORITY:
        return r.latency_ms
    if policy is RankingPolicy.COST_PRIORITY:
        return r.cost_usd
    if policy is RankingPolicy.ENERGY_PRIORITY:
        return r.energy_kj
    raise InvalidInputError(f"no single metric for policy {policy}")


def _normalize(values: np.ndarray) -> np.ndarray:
    """Min-max normalization into [0, 1]; a constant column normalizes to 0."""
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def apply_budget_gates(records: Iterable[MeasurementRecord], c: Constraint) -> tuple[list[MeasurementRecord], list[Exclusion]]:
    """Frequency / cost / energy gates; returns survivors and reasoned exclusions."""
    survivors: list[MeasurementRecord] = []
    excluded: list[Exclusion] = []
    for r in records:
        if c.required_hz is not None and not frequency_feasible(r, c.required_hz):
            excluded.append(Exclusion(
                r.hardware, "frequency",
                f"{r.frequency_hz:.2f} Hz < required {c.required_hz:g} Hz"))
        elif c.max_cost_usd is not None and r.cost_usd > c.max_cost_usd:
            excluded.append(Exclusion(
                r.hardware, "cost",
                f"${r.cost_usd:g} > budget ${c.max_cost_usd:g}"))
        elif c.max_energy_kj is not None and r.energy_kj > c.max_energy_kj:
            excluded.append(Exclusion(
                r.hardware, "energy",
                f"{r.energy_kj:g} kJ > budget {c.max_energy_kj:g} kJ"))
        else:
            survivors.append(r)
    return survivors, excluded


def rank(records: Sequence[MeasurementRecord], c: Constraint, policy: RankingPolicy,
         weights: CompositeWeights = CompositeWeights()) -> Recommendation:
    """Gate records on the constraint, then sort the survivors per the policy.

    Single-metric modes sort ascending on the raw metric.  CE/CET modes
    min-max normalize each metric over the feasible set and sort by the
    weighted sum of the normalized values (lower is better).  Ties break
    on lower cost, then hardware name.  An empty feasible set yields a
    Recommendation with no entries, not an exception.
    """
    if not records:
        raise InvalidInputError("rank requires a non-empty record list")
    model_names = {r.model for r in records}
    if len(model_names) > 1:
        raise InvalidInputError(f"rank requires records for a single model, got {sorted(model_names)}")
    model = records[0].model

    survivors, excluded = apply_budget_gates(records, c)
    if not survivors:
        return Recommendation(model, policy, (), tuple(excluded))

    if policy in COMPOSITE_POLICIES:
        cost = _normalize(np.asarray([r.cost_usd for r in survivors], dtype=float))
        energy = _normalize(np.asarray([r.energy_kj for r in survivors], dtype=float))
        score = weights.cost * cost + weights.energy * energy
        if policy is RankingPolicy.CET:
            time = _normalize(np.asarray([r.latency_ms for r in survivors], dtype=float))
            score = score + weights.time * time
        entries = [RankedEntry(r.hardware, r, float(s)) for r, s in zip(survivors, score)]
    else:
        entries = [RankedEntry(r.hardware, r, _metric(r, policy)) for r in survivors]

    entries.sort(key=_tie_break)
    return Recommendation(model, policy, tuple(entries), tuple(excluded))


def select_platform(m: ModelSpec, records: Sequence[MeasurementRecord],
                    hw_specs: dict[str, HardwareSpec], c: Constraint,
                    policy: RankingPolicy,
                    weights: CompositeWeights = CompositeWeights()) -> Recommendation:
    """Three-step platform selection: VRAM gate, then frequency/budget gates, then rank."""
    if not records:
        return Recommendation(m.name, policy, (), ())
    fitting: list[MeasurementRecord] = []
    excluded: list[Exclusion] = []
    for r in records:
        hw = hw_specs.get(r.hardware)
        if hw is None:
            raise InvalidInputError(f"record references unknown hardware {r.hardware!r}")
        if vram_feasible(m, hw):
            fitting.append(r)
        else:
            need = m.weight_bytes * VRAM_OVERHEAD_FACTOR / 1e9
            excluded.append(Exclusion(
                r.hardware, "oom",
                f"needs ~{need:.1f} GB, device has {hw.memory_bytes / 1e9:.0f} GB"))
    if not fitting:
        return Recommendation(m.name, policy, (), tuple(excluded))
    rec = rank(fitting, c, policy, weights)
    return Recommendation(rec.model, rec.policy, rec.entries, tuple(excluded) + rec.excluded)
