import pytest

from vlaperf.dpcache import CacheConfig, StableSegment
from vlaperf.errors import CalibrationError, InvalidInputError
from vlaperf.fusion import CONTENTION_PRESETS, FusionSchedule
from vlaperf.leaderboard import MeasurementRecord
from vlaperf.roofline import ModelSpec, PhaseProfile
from vlaperf.simulate import (
    Schedule,
    SimConfig,
    calibrate_overheads,
    run_sim,
    utilization_proxy,
)


@pytest.fixture(scope="module")
def one_two_model():
    """Backbone and expert in an exact 1:2 latency ratio on the rtx4090 profile."""
    return ModelSpec("one-two", 1e9, 2, (
        PhaseProfile("vlm-backbone", 330e9, 100e6, 1),   # 1 ms compute-bound
        PhaseProfile("action-expert", 66e9, 200e6, 10),  # 0.2 ms/step memory-bound
    ), denoise_steps=10)


class TestUtilizationProxy:
    def test_backbone_saturates_4090(self, catalog, rtx4090):
        backbone = catalog.models["pi0"].phases[1]
        assert utilization_proxy(backbone, rtx4090) == 1.0

    def test_expert_band_on_4090(self, catalog, rtx4090):
        expert = catalog.models["pi0"].action_expert
        assert utilization_proxy(expert, rtx4090) == pytest.approx(0.195, abs=0.005)

    def test_backbone_above_expert_everywhere(self, catalog):
        m = catalog.models["pi0"]
        for hw in catalog.hardware.values():
            assert utilization_proxy(m.phases[1], hw) > utilization_proxy(m.action_expert, hw)


class TestSynchronous:
    def test_breakdown_sums_to_latency(self, catalog, rtx4090):
        rep = run_sim(SimConfig(catalog.models["pi0"], rtx4090, Schedule.synchronous()))
        assert sum(rep.breakdown_ms.values()) == pytest.approx(rep.mean_latency_ms)

    def test_frequency_identity(self, catalog, rtx4090):
        rep = run_sim(SimConfig(catalog.models["pi0"], rtx4090, Schedule.synchronous()))
        assert rep.frequency_hz == pytest.approx(1000.0 / rep.mean_latency_ms)

    def test_expert_dominates_breakdown_two_to_one(self, catalog, rtx4090):
        rep = run_sim(SimConfig(catalog.models["pi0"], rtx4090, Schedule.synchronous()))
        ratio = rep.breakdown_ms["action-expert"] / rep.breakdown_ms["vlm-backbone"]
        assert ratio == pytest.approx(2.0, rel=0.01)


class TestDPCacheSchedule:
    def test_expert_steps_reduced(self, catalog, rtx4090):
        dp = catalog.models["diffusion-policy"]
        cfg = CacheConfig(4, StableSegment(20, 80, 0.05))
        cached = run_sim(SimConfig(dp, rtx4090, Schedule.dp_cache(cfg)))
        sync = run_sim(SimConfig(dp, rtx4090, Schedule.synchronous()))
        expert_sync = sync.breakdown_ms["action-expert"]
        gained = sync.mean_latency_ms - cached.mean_latency_ms
        assert gained == pytest.approx(expert_sync * 45 / 100, rel=1e-9)

    def test_one_step_expert_rejected(self, catalog, rtx4090):
        cfg = CacheConfig(4, StableSegment(0, 1, 0.05))
        with pytest.raises(InvalidInputError):
            run_sim(SimConfig(catalog.models["openvla"], rtx4090, Schedule.dp_cache(cfg)))


class TestFusedSchedule:
    def test_half_overlap_speedup(self, one_two_model, rtx4090):
        rep = run_sim(SimConfig(one_two_model, rtx4090,
                                Schedule.fused(FusionSchedule(10, 5)), n_cycles=5))
        assert rep.speedup_vs_synchronous == pytest.approx(1.5)

    def test_cold_start_excluded_from_mean(self, one_two_model, rtx4090):
        rep = run_sim(SimConfig(one_two_model, rtx4090,
                                Schedule.fused(FusionSchedule(10, 5)), n_cycles=2))
        # Steady-state cycle only: 2 ms, not the 3 ms cold start.
        assert rep.mean_latency_ms == pytest.approx(2.0)

    def test_mismatched_step_count_rejected(self, one_two_model, rtx4090):
        with pytest.raises(InvalidInputError):
            run_sim(SimConfig(one_two_model, rtx4090, Schedule.fused(FusionSchedule(7, 3))))

    def test_full_contention_floors_at_synchronous(self, one_two_model, rtx4090):
        rep = run_sim(SimConfig(one_two_model, rtx4090,
                                Schedule.fused(FusionSchedule(10, 5)), n_cycles=5,
                                contention=CONTENTION_PRESETS["ascend-310p"]))
        assert rep.speedup_vs_synchronous == pytest.approx(1.0)

    def test_event_log_emission(self, one_two_model, rtx4090):
        rep = run_sim(SimConfig(one_two_model, rtx4090,
                                Schedule.fused(FusionSchedule(10, 5)), n_cycles=3),
                      emit_events=True)
        assert rep.events
        stale = [e for e in rep.events if e.phase.endswith("-stale")]
        assert all(e.staleness == 1 for e in stale)
        for e in rep.events:
            assert e.start_s < e.end_s


class TestScheduleDominance:
    def test_ordering(self, catalog, rtx4090):
        dp = catalog.models["diffusion-policy"]
        cache = CacheConfig(4, StableSegment(20, 80, 0.05))
        fusion = FusionSchedule(100, 50)
        lat = {}
        lat["sync"] = run_sim(SimConfig(dp, rtx4090, Schedule.synchronous())).mean_latency_ms
        lat["cache"] = run_sim(SimConfig(dp, rtx4090, Schedule.dp_cache(cache))).mean_latency_ms
        lat["fused"] = run_sim(SimConfig(dp, rtx4090, Schedule.fused(fusion))).mean_latency_ms
        lat["both"] = run_sim(SimConfig(dp, rtx4090,
                                        Schedule.fused_plus_cache(cache, fusion))).mean_latency_ms
        assert lat["both"] <= lat["fused"] <= lat["sync"]
        assert lat["cache"] <= lat["sync"]


class TestCalibration:
    def test_zero_gap(self, one_two_model, rtx4090):
        lower_ms = run_sim(SimConfig(one_two_model, rtx4090, Schedule.synchronous())).mean_latency_ms
        record = MeasurementRecord("one-two", "rtx4090", lower_ms, 1.0, 1.0, 50.0)
        assert calibrate_overheads([record], one_two_model, rtx4090) == 0.0

    def test_linear_gap(self, one_two_model, rtx4090):
        lower_ms = run_sim(SimConfig(one_two_model, rtx4090, Schedule.synchronous())).mean_latency_ms
        record = MeasurementRecord("one-two", "rtx4090", lower_ms + 11.0, 1.0, 1.0, 50.0)
        overhead = calibrate_overheads([record], one_two_model, rtx4090)
        assert overhead * 11 == pytest.approx(11.0 / 1000.0)  # 11 invocations total

    @pytest.mark.parametrize("hw_name", ["rtx4090", "jetson-thor", "agx-orin", "b60-pro", "ascend-310p"])
    def test_round_trip_reproduces_measurements(self, catalog, hw_name):
        pi0 = catalog.models["pi0"]
        hw = catalog.hardware[hw_name]
        record = next(r for r in catalog.records_for("pi0") if r.hardware == hw_name)
        overhead = calibrate_overheads(list(catalog.records), pi0, hw)
        assert overhead >= 0
        rep = run_sim(SimConfig(pi0, hw, Schedule.synchronous(), overhead_s=overhead))
        assert rep.mean_latency_ms == pytest.approx(record.latency_ms, abs=0.1)

    def test_below_lower_bound_fails(self, catalog, rtx4090):
        pi0 = catalog.models["pi0"]
        record = MeasurementRecord("pi0", "rtx4090", 1.0, 1.0, 1.0, 50.0)
        with pytest.raises(CalibrationError, match="lower bound"):
            calibrate_overheads([record], pi0, rtx4090)

    def test_missing_record_rejected(self, catalog, rtx4090):
        with pytest.raises(InvalidInputError):
            calibrate_overheads([], catalog.models["pi0"], rtx4090)
