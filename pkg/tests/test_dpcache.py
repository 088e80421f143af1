import math
from pathlib import Path

import numpy as np
import pytest

from vlaperf.dpcache import (
    CacheConfig,
    DenoiseRun,
    NoiseSchedule,
    StableSegment,
    cache_step_counts,
    denoise_cached,
    denoise_full,
    deviation,
    l1_rel,
    profile_stability,
)
from vlaperf.errors import InvalidInputError

GOLDEN = Path(__file__).parent / "data" / "golden_denoise_t100.npz"


class TestL1Rel:
    def test_identity(self):
        x = np.array([1.0, -2.0, 3.0])
        assert l1_rel(x, x) == 0.0

    def test_hand_computed(self):
        assert l1_rel(np.array([1.0, 2.0]), np.array([2.0, 2.0])) == pytest.approx(0.25)

    def test_zero_reference_rejected(self):
        with pytest.raises(InvalidInputError):
            l1_rel(np.array([1.0]), np.array([0.0]))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(InvalidInputError):
            l1_rel(np.ones(2), np.ones(3))


class TestDenoiseFull:
    def test_deterministic(self, reference_denoiser):
        net, sched, cond = reference_denoiser
        a = denoise_full(cond, sched, net, seed=1)
        b = denoise_full(cond, sched, net, seed=1)
        assert np.array_equal(a.final_chunk, b.final_chunk)

    def test_single_step(self, reference_denoiser):
        net, _, cond = reference_denoiser
        run = denoise_full(cond, NoiseSchedule.create(1), net, seed=1)
        assert run.computed_steps == 1
        assert run.skipped_steps == 0

    def test_golden_output(self, reference_full_run):
        golden = np.load(GOLDEN)["final_chunk"]
        assert np.array_equal(reference_full_run.final_chunk, golden)


def synthetic_run(diffs_low: range, total: int = 100, low: float = 0.01, high: float = 0.5):
    """Profiled run whose consecutive-output l1_rel is `low` exactly on diffs_low."""
    outputs = np.empty((total, 4))
    outputs[0] = 1.0
    for k in range(total - 1):
        step = low if k in diffs_low else high
        outputs[k + 1] = outputs[k] * (1.0 + step)
    # l1_rel(out_k, out_{k+1}) = step/(1+step): 0.0099 for low, 0.33 for high.
    return DenoiseRun(final_chunk=outputs[-1], computed_steps=total, skipped_steps=0,
                      net_outputs=outputs, states=None)


class TestProfileStability:
    def test_mid_trajectory_segment(self):
        # Low-change diffs for steps 20..79 -> segment [20, 80).
        run = synthetic_run(range(20, 79))
        seg = profile_stability(run, epsilon=0.1)
        assert (seg.start, seg.end) == (20, 80)

    def test_epsilon_zero_gives_empty_segment(self, reference_full_run):
        seg = profile_stability(reference_full_run, epsilon=0.0)
        assert len(seg) == 0

    def test_tie_breaks_earliest(self):
        run = synthetic_run(range(10, 20))
        # Add an equally long run later: diffs 40..49.
        for k in range(40, 50):
            run.net_outputs[k + 1] = run.net_outputs[k] * 1.01
        seg = profile_stability(run, epsilon=0.1)
        assert seg.start == 10

    def test_reference_config_has_contiguous_segment(self, reference_full_run):
        seg = profile_stability(reference_full_run)
        assert len(seg) >= 20
        assert seg.start > 0  # early steps are unstable by construction

    def test_scale_invariance(self, reference_full_run):
        scaled = DenoiseRun(reference_full_run.final_chunk,
                            reference_full_run.computed_steps,
                            reference_full_run.skipped_steps,
                            net_outputs=reference_full_run.net_outputs * 7.5,
                            states=None)
        a = profile_stability(reference_full_run)
        b = profile_stability(scaled)
        assert (a.start, a.end) == (b.start, b.end)

    def test_unprofiled_run_rejected(self, reference_denoiser):
        net, sched, cond = reference_denoiser
        run = denoise_full(cond, sched, net, seed=1)
        with pytest.raises(InvalidInputError):
            profile_stability(run)


class TestCacheStepCounts:
    def test_table_geometry_s4(self):
        computed, skipped = cache_step_counts(100, StableSegment(20, 80, 0.05), 4)
        assert (computed, skipped) == (55, 45)
        assert 100 / computed == pytest.approx(1.82, abs=0.01)

    def test_table_geometry_s8(self):
        computed, skipped = cache_step_counts(100, StableSegment(20, 80, 0.05), 8)
        assert (computed, skipped) == (48, 52)
        assert 100 / computed == pytest.approx(2.08, abs=0.01)

    def test_brute_force_enumeration(self):
        # skipped = |segment| - ceil(|segment| / S), for all S and segment sizes.
        total = 100
        for period in range(1, 17):
            for seg_len in range(0, total + 1):
                seg = StableSegment(0, seg_len, 0.0)
                computed, skipped = cache_step_counts(total, seg, period)
                assert skipped == seg_len - math.ceil(seg_len / period) if seg_len else skipped == 0
                assert computed + skipped == total

    def test_segment_out_of_range_rejected(self):
        with pytest.raises(InvalidInputError):
            cache_step_counts(50, StableSegment(20, 80, 0.0), 4)


class TestDenoiseCached:
    def test_s1_bit_identical(self, reference_denoiser, reference_full_run):
        net, sched, cond = reference_denoiser
        cfg = CacheConfig(1, StableSegment(20, 80, 0.05))
        run = denoise_cached(cond, sched, net, cfg, seed=1)
        assert np.array_equal(run.final_chunk, reference_full_run.final_chunk)
        assert run.skipped_steps == 0

    @pytest.mark.parametrize("period,computed,skipped", [(4, 55, 45), (8, 48, 52)])
    def test_run_counts_match_arithmetic(self, reference_denoiser, period, computed, skipped):
        net, sched, cond = reference_denoiser
        cfg = CacheConfig(period, StableSegment(20, 80, 0.05))
        run = denoise_cached(cond, sched, net, cfg, seed=1)
        assert (run.computed_steps, run.skipped_steps) == (computed, skipped)

    def test_zero_period_rejected(self):
        with pytest.raises(InvalidInputError):
            CacheConfig(0, StableSegment(0, 10, 0.05))

    def test_counts_non_increasing_in_period(self, reference_denoiser):
        net, sched, cond = reference_denoiser
        seg = StableSegment(20, 80, 0.05)
        computed = [denoise_cached(cond, sched, net, CacheConfig(s, seg), seed=1).computed_steps
                    for s in range(1, 17)]
        assert computed == sorted(computed, reverse=True)


class TestDeviation:
    def test_s1_zero(self, reference_denoiser, reference_full_run):
        net, sched, cond = reference_denoiser
        cached = denoise_cached(cond, sched, net, CacheConfig(1, StableSegment(20, 80, 0.05)), seed=1)
        assert deviation(reference_full_run, cached) == 0.0

    def test_s4_below_threshold(self, reference_denoiser, reference_full_run):
        net, sched, cond = reference_denoiser
        cached = denoise_cached(cond, sched, net, CacheConfig(4, StableSegment(20, 80, 0.05)), seed=1)
        assert deviation(reference_full_run, cached) < 0.10

    def test_monotone_in_period_on_reference_config(self, reference_denoiser, reference_full_run):
        net, sched, cond = reference_denoiser
        seg = StableSegment(0, 100, 0.05)
        devs = [deviation(reference_full_run,
                          denoise_cached(cond, sched, net, CacheConfig(s, seg), seed=1))
                for s in (1, 2, 4, 8, 100)]
        assert devs == sorted(devs)
        assert devs[-1] > devs[2]  # S=T strictly worse than S=4
