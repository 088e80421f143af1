"""Toy diffusion-policy sampler with stable-segment output caching.

A small seeded MLP stands in for the denoising network.  The sampler is
deterministic (noise-free) so runs are bit-reproducible: caching variants
can be checked for exact identity at S=1 and bounded deviation otherwise.

Offline profiling finds the contiguous range of steps where consecutive
network outputs change by less than a relative-L1 threshold; at runtime
the network is evaluated once per group of S steps inside that range and
its output broadcast to the remaining S-1 steps, while the per-step
schedule coefficients still apply everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from vlaperf.errors import InvalidInputError

DEFAULT_EPSILON = 0.05


@dataclass(frozen=True)
class DenoiserNet:
    """Seeded two-layer perceptron mapping (state, condition, step embedding) to a velocity."""

    action_dim: int
    condition_dim: int
    timestep_embed_dim: int
    hidden_dim: int
    seed: int
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    @classmethod
    def create(cls, action_dim: int = 32, condition_dim: int = 16,
               timestep_embed_dim: int = 8, hidden_dim: int = 256,
               seed: int = 0) -> "DenoiserNet":
        rng = np.random.default_rng(seed)
        in_dim = action_dim + condition_dim + timestep_embed_dim
        scale1 = 1.0 / math.sqrt(in_dim)
        scale2 = 1.0 / math.sqrt(hidden_dim)
        return cls(
            action_dim=action_dim,
            condition_dim=condition_dim,
            timestep_embed_dim=timestep_embed_dim,
            hidden_dim=hidden_dim,
            seed=seed,
            w1=rng.normal(0.0, scale1, (hidden_dim, in_dim)),
            b1=rng.normal(0.0, 0.1, hidden_dim),
            w2=rng.normal(0.0, scale2, (action_dim, hidden_dim)),
            b2=np.zeros(action_dim),
        )

    def timestep_embedding(self, step: int, total_steps: int) -> np.ndarray:
        """Sinusoidal embedding of the normalized step position."""
        tau = step / max(total_steps - 1, 1)
        freqs = 2.0 ** np.arange(self.timestep_embed_dim // 2)
        angles = math.pi * tau * freqs
        return np.concatenate([np.sin(angles), np.cos(angles)])

    def forward(self, x: np.ndarray, condition: np.ndarray, step: int,
                total_steps: int) -> np.ndarray:
        if x.shape != (self.action_dim,):
            raise InvalidInputError(f"state must have shape ({self.action_dim},)")
        if condition.shape != (self.condition_dim,):
            raise InvalidInputError(f"condition must have shape ({self.condition_dim},)")
        z = np.concatenate([x, condition, self.timestep_embedding(step, total_steps)])
        h = np.tanh(self.w1 @ z + self.b1)
        return self.w2 @ h + self.b2


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step update magnitudes for the deterministic sampler.

    The default profile is largest at both trajectory ends, so the
    middle of the trajectory settles into a stable segment.
    """

    total_steps: int
    step_sizes: np.ndarray

    @classmethod
    def create(cls, total_steps: int = 100, min_step: float = 0.01,
               max_step: float = 0.30) -> "NoiseSchedule":
        if total_steps < 1:
            raise InvalidInputError("total_steps must be >= 1")
        if not (0 < min_step <= max_step):
            raise InvalidInputError("need 0 < min_step <= max_step")
        k = np.arange(total_steps, dtype=float)
        shape = np.cos(math.pi * k / max(total_steps - 1, 1)) ** 2
        return cls(total_steps, min_step + (max_step - min_step) * shape)

    def __post_init__(self):
        if self.total_steps < 1:
            raise InvalidInputError("total_steps must be >= 1")
        if len(self.step_sizes) != self.total_steps:
            raise InvalidInputError("need one step size per step")
        if not np.all(np.isfinite(self.step_sizes)):
            raise InvalidInputError("step sizes must be finite")


@dataclass(frozen=True)
class StableSegment:
    """Half-open step range [start, end) where consecutive outputs stay within epsilon."""

    start: int
    end: int
    epsilon: float

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise InvalidInputError("need 0 <= start <= end")

    def __len__(self) -> int:
        return self.end - self.start

    def contains(self, step: int) -> bool:
        return self.start <= step < self.end


@dataclass(frozen=True)
class CacheConfig:
    """Cache period S and the profiled segment it applies to.

    S=4 means one network evaluation serves a group of 4 steps: the group
    leader is recomputed and the following 3 steps reuse its output.
    """

    period: int
    segment: StableSegment

    def __post_init__(self):
        if self.period < 1:
            raise InvalidInputError("cache period S must be >= 1")


@dataclass(frozen=True)
class DenoiseRun:
    """Result of one sampling run."""

    final_chunk: np.ndarray  # H x D action chunk
    computed_steps: int
    skipped_steps: int
    net_outputs: np.ndarray | None = None  # (T, action_dim) when profiled
    states: np.ndarray | None = None  # (T+1, action_dim) when profiled

    @property
    def total_steps(self) -> int:
        return self.computed_steps + self.skipped_steps


def l1_rel(x_curr: np.ndarray, x_next: np.ndarray) -> float:
    """Relative L1 distance |x_curr - x_next|_1 / |x_next|_1."""
    x_curr = np.asarray(x_curr, dtype=float)
    x_next = np.asarray(x_next, dtype=float)
    if x_curr.shape != x_next.shape:
        raise InvalidInputError("l1_rel requires equal shapes")
    denom = np.abs(x_next).sum()
    if denom == 0:
        raise InvalidInputError("l1_rel undefined for zero reference array")
    return float(np.abs(x_curr - x_next).sum() / denom)


def cache_step_counts(total_steps: int, segment: StableSegment, period: int) -> tuple[int, int]:
    """(computed, skipped) network evaluations under group-leader caching."""
    if period < 1:
        raise InvalidInputError("cache period S must be >= 1")
    if not 0 <= segment.start <= segment.end <= total_steps:
        raise InvalidInputError("segment must lie within [0, total_steps]")
    inside = len(segment)
    evaluated_inside = math.ceil(inside / period) if inside else 0
    skipped = inside - evaluated_inside
    return total_steps - skipped, skipped


def _initial_state(net: DenoiserNet, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(net.action_dim)


def _finalize(x: np.ndarray, chunk_shape: tuple[int, int] | None) -> np.ndarray:
    if chunk_shape is None:
        return x.copy()
    return x.reshape(chunk_shape)


def _check_finite(x: np.ndarray, step: int) -> None:
    if not np.all(np.isfinite(x)):
        raise InvalidInputError(f"non-finite state at step {step}; run aborted")


def denoise_full(condition: np.ndarray, sched: NoiseSchedule, net: DenoiserNet,
                 seed: int = 0, profile: bool = False,
                 chunk_shape: tuple[int, int] | None = None) -> DenoiseRun:
    """Run all T steps of the deterministic sampler.

    With profile=True the per-step network outputs and states are retained
    for offline stability analysis.
    """
    t_total = sched.total_steps
    x = _initial_state(net, seed)
    outputs = np.empty((t_total, net.action_dim)) if profile else None
    states = np.empty((t_total + 1, net.action_dim)) if profile else None
    if states is not None:
        states[0] = x
    for k in range(t_total):
        out = net.forward(x, condition, k, t_total)
        x = x - sched.step_sizes[k] * out
        _check_finite(x, k)
        if profile:
            outputs[k] = out
            states[k + 1] = x
    return DenoiseRun(_finalize(x, chunk_shape), computed_steps=t_total,
                      skipped_steps=0, net_outputs=outputs, states=states)


def denoise_cached(condition: np.ndarray, sched: NoiseSchedule, net: DenoiserNet,
                   cfg: CacheConfig, seed: int = 0,
                   chunk_shape: tuple[int, int] | None = None) -> DenoiseRun:
    """Run the sampler, broadcasting cached network outputs inside the stable segment.

    Every step still applies its own schedule coefficient; only the
    network evaluation is skipped on non-leader steps of each group.
    """
    t_total = sched.total_steps
    seg = cfg.segment
    if seg.end > t_total:
        raise InvalidInputError("cache segment exceeds schedule length")
    x = _initial_state(net, seed)
    cached_out: np.ndarray | None = None
    computed = 0
    skipped = 0
    for k in range(t_total):
        is_leader = not seg.contains(k) or (k - seg.start) % cfg.period == 0
        if is_leader:
            cached_out = net.forward(x, condition, k, t_total)
            computed += 1
        else:
            skipped += 1
        x = x - sched.step_sizes[k] * cached_out
        _check_finite(x, k)
    return DenoiseRun(_finalize(x, chunk_shape), computed_steps=computed,
                      skipped_steps=skipped)


def profile_stability(run: DenoiseRun, epsilon: float = DEFAULT_EPSILON) -> StableSegment:
    """Longest contiguous step range whose consecutive-output l1_rel stays below epsilon.

    Ties break toward the earliest start; an empty segment (start == end)
    means no step qualified.
    """
    if run.net_outputs is None:
        raise InvalidInputError("run was not profiled; rerun with profile=True")
    outputs = run.net_outputs
    n_diffs = len(outputs) - 1
    diffs = np.array([l1_rel(outputs[k], outputs[k + 1]) for k in range(n_diffs)])
    low = diffs < epsilon

    best_start, best_len = 0, 0
    run_start = None
    for k in range(n_diffs + 1):
        if k < n_diffs and low[k]:
            if run_start is None:
                run_start = k
        elif run_start is not None:
            length = k - run_start
            if length > best_len:
                best_start, best_len = run_start, length
            run_start = None
    if best_len == 0:
        return StableSegment(0, 0, epsilon)
    # A run of m qualifying diffs covers m+1 steps.
    return StableSegment(best_start, best_start + best_len + 1, epsilon)


def profile_signals(run: DenoiseRun, epsilon: float = DEFAULT_EPSILON) -> dict[str, np.ndarray]:
    """Per-step relative-L1 series for the profiled signals (output and state)."""
    if run.net_outputs is None or run.states is None:
        raise InvalidInputError("run was not profiled; rerun with profile=True")
    out = run.net_outputs
    st = run.states
    return {
        "model_output": np.array([l1_rel(out[k], out[k + 1]) for k in range(len(out) - 1)]),
        "noisy_input": np.array([l1_rel(st[k], st[k + 1]) for k in range(len(st) - 1)]),
    }


def deviation(full: DenoiseRun, cached: DenoiseRun) -> float:
    """Relative L2 distance between final action chunks (cached vs full)."""
    a = cached.final_chunk
    b = full.final_chunk
    if a.shape != b.shape:
        raise InvalidInputError("deviation requires equal chunk shapes")
    denom = np.linalg.norm(b)
    if denom == 0:
        return float(np.linalg.norm(a - b))
    return float(np.linalg.norm(a - b) / denom)
