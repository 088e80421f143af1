"""Hardware and model descriptions plus roofline mathematics.

Accelerators are described by peak FP16/BF16 throughput, memory capacity,
and memory bandwidth; workloads by per-phase FLOP and byte traffic.  From
these we derive operational intensity, ridge points, compute- vs
memory-boundedness, attainable throughput, and latency lower bounds.

All quantities are stored in base SI units (FLOP/s, bytes, bytes/s,
seconds) and computed in double precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from vlaperf.errors import InvalidInputError

# FP16/BF16 TFLOP/s cutoffs separating the three producer tiers.  Chosen so
# that every bundled device lands in its published grouping.
BASIC_TIER_MAX_FLOPS = 20e12
STANDARD_TIER_MAX_FLOPS = 100e12

# Parameter-count threshold separating small and big consumer models.
BIG_MODEL_PARAM_THRESHOLD = 1e9


class HardwareTier(Enum):
    BASIC = "Basic"
    STANDARD = "Standard"
    ULTRA = "Ultra"


class ModelTier(Enum):
    SMALL = "Small"
    BIG = "Big"


class Boundedness(Enum):
    COMPUTE_BOUND = "ComputeBound"
    MEMORY_BOUND = "MemoryBound"


@dataclass(frozen=True)
class HardwareSpec:
    """An accelerator: peak throughput, memory, bandwidth, cost, power."""

    name: str
    peak_flops: float  # FLOP/s at FP16/BF16
    memory_bytes: float
    bandwidth: float  # bytes/s
    cost: float  # USD
    tdp: float | None = None  # watts

    def __post_init__(self):
        if self.peak_flops <= 0:
            raise InvalidInputError(f"{self.name}: peak_flops must be > 0")
        if self.bandwidth <= 0:
            raise InvalidInputError(f"{self.name}: bandwidth must be > 0")
        if self.memory_bytes <= 0:
            raise InvalidInputError(f"{self.name}: memory_bytes must be > 0")
        if self.cost < 0:
            raise InvalidInputError(f"{self.name}: cost must be >= 0")

    @property
    def tier(self) -> HardwareTier:
        return tier_hardware(self)


@dataclass(frozen=True)
class PhaseProfile:
    """FLOP and byte traffic for one invocation of an inference phase."""

    name: str
    flops_per_invocation: float
    bytes_per_invocation: float
    invocations_per_cycle: int = 1

    def __post_init__(self):
        if self.flops_per_invocation <= 0:
            raise InvalidInputError(f"{self.name}: flops_per_invocation must be > 0")
        if self.bytes_per_invocation <= 0:
            raise InvalidInputError(f"{self.name}: bytes_per_invocation must be > 0")
        if self.invocations_per_cycle < 1:
            raise InvalidInputError(f"{self.name}: invocations_per_cycle must be >= 1")


@dataclass(frozen=True)
class ModelSpec:
    """A policy model: parameter count, precision, phase profiles."""

    name: str
    param_count: float
    precision_bytes: float
    phases: tuple[PhaseProfile, ...]
    denoise_steps: int = 1

    def __post_init__(self):
        if self.param_count <= 0:
            raise InvalidInputError(f"{self.name}: param_count must be > 0")
        if not self.phases:
            raise InvalidInputError(f"{self.name}: phases must be non-empty")
        if self.denoise_steps < 1:
            raise InvalidInputError(f"{self.name}: denoise_steps must be >= 1")
        object.__setattr__(self, "phases", tuple(self.phases))

    @property
    def consumer_tier(self) -> ModelTier:
        return tier_model(self)

    @property
    def weight_bytes(self) -> float:
        return self.param_count * self.precision_bytes

    @property
    def action_expert(self) -> PhaseProfile:
        """The iterative back-end phase; by convention the last phase."""
        return self.phases[-1]

    @property
    def frontend_phases(self) -> tuple[PhaseProfile, ...]:
        """Everything ahead of the action expert (vision + backbone)."""
        return self.phases[:-1]


def ridge_point(hw: HardwareSpec) -> float:
    """Operational intensity at which compute and memory roofs meet (FLOPs/byte)."""
    return hw.peak_flops / hw.bandwidth


def operational_intensity(phase: PhaseProfile) -> float:
    """FLOPs executed per byte of memory traffic for one invocation."""
    return phase.flops_per_invocation / phase.bytes_per_invocation


def classify_boundedness(phase: PhaseProfile, hw: HardwareSpec) -> Boundedness:
    """Compute-bound iff intensity strictly exceeds the ridge point.

    A tie at the ridge is classified memory-bound (fixed, documented rule).
    """
    if operational_intensity(phase) > ridge_point(hw):
        return Boundedness.COMPUTE_BOUND
    return Boundedness.MEMORY_BOUND


def attainable_throughput(phase: PhaseProfile, hw: HardwareSpec) -> float:
    """Roofline throughput ceiling in FLOP/s: min(peak, intensity * bandwidth)."""
    return min(hw.peak_flops, operational_intensity(phase) * hw.bandwidth)


def phase_latency_bound(phase: PhaseProfile, hw: HardwareSpec, overhead: float = 0.0) -> float:
    """Lower-bound seconds for a full phase: the binding roof plus fixed overhead.

    `overhead` is per-invocation launch/framework overhead in seconds.
    """
    if overhead < 0:
        raise InvalidInputError("overhead must be >= 0")
    per_invocation = max(
        phase.flops_per_invocation / hw.peak_flops,
        phase.bytes_per_invocation / hw.bandwidth,
    )
    return phase.invocations_per_cycle * (per_invocation + overhead)


def tier_hardware(hw: HardwareSpec) -> HardwareTier:
    """Producer tier from peak FP16/BF16 throughput."""
    if hw.peak_flops < BASIC_TIER_MAX_FLOPS:
        return HardwareTier.BASIC
    if hw.peak_flops < STANDARD_TIER_MAX_FLOPS:
        return HardwareTier.STANDARD
    return HardwareTier.ULTRA


def tier_model(m: ModelSpec) -> ModelTier:
    """Consumer tier: Big iff strictly more than 1e9 parameters."""
    if m.param_count > BIG_MODEL_PARAM_THRESHOLD:
        return ModelTier.BIG
    return ModelTier.SMALL
