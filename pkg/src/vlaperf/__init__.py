"""Desk-scale performance toolkit for robot-policy inference.

Subpackages cover roofline characterization of inference phases,
cost/energy/time feasibility ranking of model-hardware pairs, a toy
diffusion-policy sampler with stable-segment caching, stale-feature
pipeline overlap, and a deterministic closed-loop latency simulator.
"""

from vlaperf.errors import CalibrationError, CatalogError, InvalidInputError, VlaperfError
from vlaperf.roofline import (
    Boundedness,
    HardwareSpec,
    HardwareTier,
    ModelSpec,
    ModelTier,
    PhaseProfile,
    attainable_throughput,
    classify_boundedness,
    operational_intensity,
    phase_latency_bound,
    ridge_point,
    tier_hardware,
    tier_model,
)
from vlaperf.leaderboard import (
    Constraint,
    MeasurementRecord,
    RankingPolicy,
    Recommendation,
    energy_from_power_trace,
    frequency_feasible,
    rank,
    select_platform,
    vram_feasible,
)
from vlaperf.catalog import Catalog, default_catalog, load_catalog

__version__ = "0.1.0"
