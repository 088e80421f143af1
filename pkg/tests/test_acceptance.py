"""End-to-end acceptance checks for the whole toolkit.

Each test prints a single PASS line when its criterion holds, so a
verbose run doubles as a one-page acceptance report.
"""

import time

import numpy as np
import pytest

from vlaperf.dpcache import (
    CacheConfig,
    DenoiserNet,
    NoiseSchedule,
    StableSegment,
    cache_step_counts,
    denoise_cached,
    denoise_full,
    deviation,
)
from vlaperf.fusion import (
    CONTENTION_PRESETS,
    FeatureCache,
    FusionPipeline,
    FusionSchedule,
    ToyVLM,
    predicted_speedup,
    synthetic_observation_stream,
)
from vlaperf.leaderboard import (
    Constraint,
    RankingPolicy,
    energy_from_power_trace,
    rank,
    select_platform,
)
from vlaperf.roofline import (
    Boundedness,
    PhaseProfile,
    classify_boundedness,
    operational_intensity,
    ridge_point,
)
from vlaperf.simulate import Schedule, SimConfig, calibrate_overheads, run_sim, utilization_proxy


def report(line: str) -> None:
    print(f"PASS {line}")


class TestRooflineNumerics:
    def test_criterion(self, catalog):
        hw = catalog.hardware
        assert ridge_point(hw["rtx4090"]) == pytest.approx(330.0, abs=0.5)
        assert ridge_point(hw["jetson-thor"]) == pytest.approx(945.05, abs=1.0)

        vlm_layer = PhaseProfile("vlm-layer", 185.1e9, 220e6, 1)
        assert operational_intensity(vlm_layer) == pytest.approx(841.36, abs=1.0)

        expert = catalog.models["pi0"].action_expert
        assert classify_boundedness(vlm_layer, hw["rtx4090"]) is Boundedness.COMPUTE_BOUND
        for device in ("rtx4090", "jetson-thor", "agx-orin"):
            assert classify_boundedness(expert, hw[device]) is Boundedness.MEMORY_BOUND
        report("roofline numerics: ridge points, layer intensity, boundedness split")


class TestLeaderboardOrderings:
    def test_criterion(self, catalog, pi0_records):
        expected = {
            RankingPolicy.TIME_PRIORITY: ["rtx4090", "jetson-thor", "b60-pro",
                                          "ascend-310p", "agx-orin"],
            RankingPolicy.COST_PRIORITY: ["b60-pro", "ascend-310p", "agx-orin",
                                          "jetson-thor", "rtx4090"],
            RankingPolicy.ENERGY_PRIORITY: ["jetson-thor", "agx-orin", "rtx4090",
                                            "ascend-310p", "b60-pro"],
        }
        for policy, order in expected.items():
            got = rank(pi0_records, Constraint(), policy).hardware_order
            assert got == order, f"{policy.value}: {got}"

        rec = select_platform(catalog.models["openvla"], catalog.records_for("openvla"),
                              catalog.hardware, Constraint(), RankingPolicy.TIME_PRIORITY)
        oom = [x.hardware for x in rec.excluded if x.reason == "oom"]
        assert oom == ["ascend-310b"]
        report("leaderboard orderings: time/cost/energy sorts and memory exclusion")


class TestDpCacheArithmeticAndSpeedup:
    def test_criterion(self):
        start = time.perf_counter()
        seg = StableSegment(20, 80, 0.05)
        assert cache_step_counts(100, seg, 4) == (55, 45)
        assert 100 / 55 == pytest.approx(1.82, abs=0.01)
        assert cache_step_counts(100, seg, 8) == (48, 52)
        assert 100 / 48 == pytest.approx(2.08, abs=0.01)

        # Wide hidden layer so network evaluation dominates per-step overhead.
        net = DenoiserNet.create(hidden_dim=2048, seed=0)
        sched = NoiseSchedule.create(100)
        cond = np.random.default_rng(42).standard_normal(net.condition_dim)
        def best_of(fn, reps=15):
            best = float("inf")
            for _ in range(reps):
                t0 = time.perf_counter()
                fn()
                best = min(best, time.perf_counter() - t0)
            return best

        full = denoise_full(cond, sched, net, seed=1)
        identical = denoise_cached(cond, sched, net, CacheConfig(1, seg), seed=1)
        assert np.array_equal(identical.final_chunk, full.final_chunk)

        cached = denoise_cached(cond, sched, net, CacheConfig(4, seg), seed=1)
        t_full = best_of(lambda: denoise_full(cond, sched, net, seed=1))
        t_cached = best_of(lambda: denoise_cached(cond, sched, net, CacheConfig(4, seg), seed=1))
        dev = deviation(full, cached)
        assert dev < 0.10
        assert t_full / t_cached >= 1.5
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0
        report(f"dp-cache: 55/45 and 48/52 step splits, S=1 identity, "
               f"{t_full / t_cached:.2f}x wall-clock, deviation {dev:.4f}")


class TestFusionCorrectnessAndSpeedup:
    def test_criterion(self):
        start = time.perf_counter()
        vlm = ToyVLM.create(seed=0)
        net = DenoiserNet.create(condition_dim=vlm.feature_dim, seed=1)
        obs = synthetic_observation_stream(1)[0]
        for s in range(11):
            pipe = FusionPipeline(vlm, net, FusionSchedule(10, s), workers=2)
            cache = FeatureCache(vlm.forward(obs), 0, 1)
            fused, trace, _ = pipe.fused_cycle(obs, cache, cycle=1)
            sync, _, _ = pipe.synchronous_cycle(obs, cycle=1)
            assert np.array_equal(fused, sync)
            trace.assert_ordering_safe()

        assert predicted_speedup(1.0, 2.0, FusionSchedule(10, 5)) == 1.5

        sched = FusionSchedule(10, 5)
        got = {name: predicted_speedup(1.0, 2.0, sched, cm)
               for name, cm in CONTENTION_PRESETS.items()}
        assert got["rtx4090"] > got["agx-orin"]
        assert got["agx-orin"] > max(got["b60-pro"], got["jetson-thor"])
        assert min(got["b60-pro"], got["jetson-thor"]) > got["ascend-310p"]
        assert got["ascend-310p"] == 1.0

        pipe = FusionPipeline(vlm, net, FusionSchedule(10, 5), workers=2,
                              vlm_delay_s=0.05, ae_step_delay_s=0.01)
        stream = synthetic_observation_stream(10)
        _, _, t_sync = pipe.run_stream(stream, fused=False)
        _, traces, t_fused = pipe.run_stream(stream, fused=True)
        for tr in traces:
            tr.assert_ordering_safe()
        measured = t_sync / t_fused
        assert measured >= 1.15
        elapsed = time.perf_counter() - start
        assert elapsed < 30.0
        report(f"fusion: bit-identity all s, ordering safety, 1.50 closed form, "
               f"preset ordering, {measured:.2f}x measured two-worker speedup")


class TestSimulatorRoundTrip:
    def test_criterion(self, catalog):
        pi0 = catalog.models["pi0"]
        for record in catalog.records_for("pi0"):
            hw = catalog.hardware[record.hardware]
            overhead = calibrate_overheads(list(catalog.records), pi0, hw)
            rep = run_sim(SimConfig(pi0, hw, Schedule.synchronous(), overhead_s=overhead))
            assert rep.mean_latency_ms == pytest.approx(record.latency_ms, abs=0.1), record.hardware

        vlm = pi0.phases[1]
        expert = pi0.action_expert
        for hw in catalog.hardware.values():
            assert utilization_proxy(vlm, hw) > utilization_proxy(expert, hw), hw.name
        assert utilization_proxy(expert, catalog.hardware["rtx4090"]) == pytest.approx(0.195, abs=0.005)
        report("simulator: calibrated round-trip within 0.1 ms on all five rows, "
               "utilization proxy ordering and 0.195 band")


class TestEnergyIntegration:
    def test_criterion(self):
        assert energy_from_power_trace([(0.0, 100.0), (10.0, 100.0)]) == 1.0
        assert energy_from_power_trace([(0.0, 0.0), (10.0, 100.0)]) == 0.5
        report("energy integration: 1.000 kJ constant trace, 0.500 kJ ramp trace")


class TestPropertySuites:
    def test_criterion(self):
        import subprocess
        import sys
        from pathlib import Path

        res = subprocess.run(
            [sys.executable, "-m", "pytest",
             str(Path(__file__).parent / "test_properties.py"), "-q",
             "--no-header", "-p", "no:cacheprovider"],
            capture_output=True, text=True)
        assert res.returncode == 0, res.stdout + res.stderr
        report("property suites: randomized invariants green "
               "(cache counts, ranking scaling, contention, roofline)")
