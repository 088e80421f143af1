"""Deterministic closed-loop latency simulation of the observe-infer-act cycle.

Phase durations come from roofline lower bounds plus a calibratable
per-invocation overhead; schedules model plain sequential execution,
cached denoising, backbone/expert overlap, or both combined.  The
simulator advances a virtual clock, so it models concurrency without
requiring any.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from vlaperf.dpcache import CacheConfig, cache_step_counts
from vlaperf.errors import CalibrationError, InvalidInputError
from vlaperf.fusion import NO_CONTENTION, ContentionModel, FusionSchedule
from vlaperf.leaderboard import MeasurementRecord
from vlaperf.roofline import (
    HardwareSpec,
    ModelSpec,
    PhaseProfile,
    operational_intensity,
    phase_latency_bound,
    ridge_point,
)


class ScheduleKind(Enum):
    SYNCHRONOUS = "synchronous"
    DP_CACHE = "dpcache"
    FUSED = "fused"
    FUSED_PLUS_CACHE = "fused+cache"


@dataclass(frozen=True)
class Schedule:
    kind: ScheduleKind
    cache: CacheConfig | None = None
    fusion: FusionSchedule | None = None

    def __post_init__(self):
        if self.kind in (ScheduleKind.DP_CACHE, ScheduleKind.FUSED_PLUS_CACHE) and self.cache is None:
            raise InvalidInputError(f"{self.kind.value} schedule requires a cache config")
        if self.kind in (ScheduleKind.FUSED, ScheduleKind.FUSED_PLUS_CACHE) and self.fusion is None:
            raise InvalidInputError(f"{self.kind.value} schedule requires a fusion schedule")

    @classmethod
    def synchronous(cls) -> "Schedule":
        return cls(ScheduleKind.SYNCHRONOUS)

    @classmethod
    def dp_cache(cls, cache: CacheConfig) -> "Schedule":
        return cls(ScheduleKind.DP_CACHE, cache=cache)

    @classmethod
    def fused(cls, fusion: FusionSchedule) -> "Schedule":
        return cls(ScheduleKind.FUSED, fusion=fusion)

    @classmethod
    def fused_plus_cache(cls, cache: CacheConfig, fusion: FusionSchedule) -> "Schedule":
        return cls(ScheduleKind.FUSED_PLUS_CACHE, cache=cache, fusion=fusion)


@dataclass(frozen=True)
class SimConfig:
    model: ModelSpec
    hardware: HardwareSpec
    schedule: Schedule
    n_cycles: int = 10
    overhead_s: float = 0.0  # per-invocation overhead, uniform across phases
    contention: ContentionModel = NO_CONTENTION

    def __post_init__(self):
        if self.n_cycles < 1:
            raise InvalidInputError("n_cycles must be >= 1")
        if self.overhead_s < 0:
            raise InvalidInputError("overhead_s must be >= 0")


@dataclass(frozen=True)
class CycleEvent:
    cycle: int
    worker: int
    phase: str
    start_s: float
    end_s: float
    staleness: int


@dataclass(frozen=True)
class SimReport:
    mean_latency_ms: float
    frequency_hz: float
    breakdown_ms: dict[str, float]
    utilization: dict[str, float]
    speedup_vs_synchronous: float
    events: tuple[CycleEvent, ...] = ()

    def to_doc(self) -> dict:
        return {
            "mean_latency_ms": self.mean_latency_ms,
            "frequency_hz": self.frequency_hz,
            "breakdown_ms": dict(self.breakdown_ms),
            "utilization": dict(self.utilization),
            "speedup_vs_synchronous": self.speedup_vs_synchronous,
        }


def utilization_proxy(phase: PhaseProfile, hw: HardwareSpec) -> float:
    """Compute-unit busy fraction proxied by the intensity-to-ridge ratio, capped at 1."""
    return min(1.0, operational_intensity(phase) / ridge_point(hw))


def _phase_times(cfg: SimConfig) -> dict[str, float]:
    return {ph.name: phase_latency_bound(ph, cfg.hardware, cfg.overhead_s)
            for ph in cfg.model.phases}


def _expert_time(cfg: SimConfig, times: dict[str, float]) -> float:
    """Action-expert phase time, reduced by the cache schedule when present."""
    expert = cfg.model.action_expert
    t_full = times[expert.name]
    if cfg.schedule.cache is None:
        return t_full
    t_steps = expert.invocations_per_cycle
    if t_steps < 2:
        raise InvalidInputError(
            f"cached schedule requires an iterative action expert; "
            f"{cfg.model.name} has {t_steps} invocation(s)")
    cache = cfg.schedule.cache
    computed, _ = cache_step_counts(t_steps, cache.segment, cache.period)
    return t_full * computed / t_steps


def _cycle_plan(cfg: SimConfig, cold_start: bool) -> list[tuple[int, str, float, float, int]]:
    """One cycle as (worker, phase, start, end, staleness) relative offsets."""
    times = _phase_times(cfg)
    expert = cfg.model.action_expert
    front = [(ph.name, times[ph.name]) for ph in cfg.model.frontend_phases]
    t_front = sum(t for _, t in front)
    t_ae = _expert_time(cfg, times)

    fused = cfg.schedule.kind in (ScheduleKind.FUSED, ScheduleKind.FUSED_PLUS_CACHE) and not cold_start
    spans: list[tuple[int, str, float, float, int]] = []
    if not fused:
        clock = 0.0
        for name, t in front:
            spans.append((0, name, clock, clock + t, 0))
            clock += t
        spans.append((0, expert.name, clock, clock + t_ae, 0))
        return spans

    fs = cfg.schedule.fusion
    assert fs is not None
    s, k = fs.stale_steps, fs.total_steps
    infl_vlm, infl_ae = cfg.contention.inflation()
    t_stale = (s / k) * t_ae * infl_ae
    t_front_infl = t_front * infl_vlm
    overlap_end = max(t_front_infl, t_stale)
    clock = 0.0
    for name, t in front:
        scaled = t * infl_vlm
        spans.append((0, name, clock, clock + scaled, 0))
        clock += scaled
    if s:
        spans.append((1, f"{expert.name}-stale", 0.0, t_stale, 1))
    spans.append((1, f"{expert.name}-fresh", overlap_end, overlap_end + (k - s) / k * t_ae, 0))
    return spans


def _mean_cycle_latency(cfg: SimConfig, emit_events: bool) -> tuple[float, tuple[CycleEvent, ...]]:
    fused = cfg.schedule.kind in (ScheduleKind.FUSED, ScheduleKind.FUSED_PLUS_CACHE)
    events: list[CycleEvent] = []
    latencies: list[float] = []
    clock = 0.0
    for cycle in range(cfg.n_cycles):
        cold = fused and cycle == 0
        plan = _cycle_plan(cfg, cold_start=cold)
        end = max(e for _, _, _, e, _ in plan)
        if fused and not cold:
            # On oversubscribed hardware overlap can lose to sequential
            # execution; a scheduler would then fall back, so floor there.
            sync_plan = _cycle_plan(cfg, cold_start=True)
            sync_end = max(e for _, _, _, e, _ in sync_plan)
            if end > sync_end:
                plan, end = sync_plan, sync_end
        if emit_events:
            events.extend(CycleEvent(cycle, w, ph, clock + s0, clock + e0, st)
                          for w, ph, s0, e0, st in plan)
        clock += end
        # Steady-state averages exclude the synchronous cold-start cycle.
        if not (cold and cfg.n_cycles > 1):
            latencies.append(end)
    return sum(latencies) / len(latencies), tuple(events)


def run_sim(cfg: SimConfig, emit_events: bool = False) -> SimReport:
    """Simulate the closed loop and report averaged latency, frequency, and utilization."""
    if cfg.schedule.fusion is not None:
        expert_steps = cfg.model.action_expert.invocations_per_cycle
        if cfg.schedule.fusion.total_steps != expert_steps:
            raise InvalidInputError(
                f"fusion schedule covers {cfg.schedule.fusion.total_steps} steps but the "
                f"action expert runs {expert_steps} per cycle")
    mean_s, events = _mean_cycle_latency(cfg, emit_events)

    sync_cfg = SimConfig(cfg.model, cfg.hardware, Schedule.synchronous(),
                         cfg.n_cycles, cfg.overhead_s, cfg.contention)
    sync_s, _ = _mean_cycle_latency(sync_cfg, False)

    times = _phase_times(cfg)
    breakdown = {name: t * 1000.0 for name, t in times.items()}
    utilization = {ph.name: utilization_proxy(ph, cfg.hardware) for ph in cfg.model.phases}
    mean_ms = mean_s * 1000.0
    return SimReport(
        mean_latency_ms=mean_ms,
        frequency_hz=1000.0 / mean_ms,
        breakdown_ms=breakdown,
        utilization=utilization,
        speedup_vs_synchronous=sync_s / mean_s,
        events=events,
    )


def calibrate_overheads(records: list[MeasurementRecord], model: ModelSpec,
                        hw: HardwareSpec) -> float:
    """Per-invocation overhead (seconds) that reconciles the roofline bound
    with the measured synchronous latency for (model, hardware).

    Raises CalibrationError when the measurement is below the lower bound.
    """
    matching = [r for r in records if r.model == model.name and r.hardware == hw.name]
    if not matching:
        raise InvalidInputError(f"no record for ({model.name}, {hw.name})")
    measured_s = sum(r.latency_ms for r in matching) / len(matching) / 1000.0
    lower_s = sum(phase_latency_bound(ph, hw) for ph in model.phases)
    total_invocations = sum(ph.invocations_per_cycle for ph in model.phases)
    # Tolerate rounding at the boundary; only a real gap is an error.
    if measured_s < lower_s * (1.0 - 1e-9):
        raise CalibrationError(
            f"measured {measured_s * 1000:.3f} ms is below the roofline lower bound "
            f"{lower_s * 1000:.3f} ms for ({model.name}, {hw.name})")
    return max(0.0, (measured_s - lower_s) / total_invocations)
