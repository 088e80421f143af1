"""Read-only HTTP service over a loaded catalog.

Every endpoint is a pure view of immutable catalog state; identical
requests return identical bodies, and the rank endpoint shares its code
path (and byte-exact serialization) with the CLI.
"""

from __future__ import annotations

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from vlaperf.catalog import Catalog
from vlaperf.errors import VlaperfError
from vlaperf.dpcache import CacheConfig, StableSegment
from vlaperf.fusion import CONTENTION_PRESETS, NO_CONTENTION, ContentionModel, FusionSchedule, predicted_speedup
from vlaperf.leaderboard import CompositeWeights, Constraint, RankingPolicy
from vlaperf.roofline import (
    attainable_throughput,
    classify_boundedness,
    operational_intensity,
    ridge_point,
)
from vlaperf.serialize import recommendation_to_doc, to_json_bytes
from vlaperf.simulate import Schedule, ScheduleKind, SimConfig, calibrate_overheads, run_sim, utilization_proxy
from vlaperf.catalog import hardware_to_doc, model_to_doc, record_to_doc


class ConstraintBody(BaseModel):
    required_hz: float | None = Field(default=None, gt=0)
    max_cost_usd: float | None = Field(default=None, gt=0)
    max_energy_kj: float | None = Field(default=None, gt=0)


class WeightsBody(BaseModel):
    cost: float = Field(default=1.0, ge=0)
    energy: float = Field(default=1.0, ge=0)
    time: float = Field(default=1.0, ge=0)


class RankBody(BaseModel):
    model: str
    policy: str = "time"
    constraint: ConstraintBody = ConstraintBody()
    weights: WeightsBody = WeightsBody()


class ScheduleBody(BaseModel):
    kind: str = "synchronous"
    cache_period: int | None = Field(default=None, ge=1)
    segment_start: int = Field(default=0, ge=0)
    segment_end: int = Field(default=0, ge=0)
    stale_steps: int | None = Field(default=None, ge=0)


class SimulateBody(BaseModel):
    model: str
    hardware: str
    schedule: ScheduleBody = ScheduleBody()
    n_cycles: int = Field(default=10, ge=1)
    calibrate: bool = True
    use_contention_preset: bool = True


class SpeedupBody(BaseModel):
    t_vlm_ms: float = Field(gt=0)
    t_ae_ms: float = Field(gt=0)
    stale_steps: int = Field(ge=0)
    total_steps: int = Field(ge=1)
    hardware: str | None = None  # selects a calibrated contention preset


def _not_found(detail: str) -> JSONResponse:
    return JSONResponse(status_code=404, content={"error": detail})


def _policy(name: str) -> RankingPolicy:
    try:
        return RankingPolicy(name)
    except ValueError:
        raise VlaperfError(f"unknown policy {name!r}; expected one of "
                           f"{[p.value for p in RankingPolicy]}")


def build_schedule(body: ScheduleBody, expert_steps: int) -> Schedule:
    try:
        kind = ScheduleKind(body.kind)
    except ValueError:
        raise VlaperfError(f"unknown schedule kind {body.kind!r}; expected one of "
                           f"{[k.value for k in ScheduleKind]}")
    cache = None
    fusion = None
    if kind in (ScheduleKind.DP_CACHE, ScheduleKind.FUSED_PLUS_CACHE):
        if body.cache_period is None:
            raise VlaperfError("schedule kind requires cache_period")
        cache = CacheConfig(body.cache_period,
                            StableSegment(body.segment_start, body.segment_end, 0.0))
    if kind in (ScheduleKind.FUSED, ScheduleKind.FUSED_PLUS_CACHE):
        stale = body.stale_steps if body.stale_steps is not None else expert_steps // 2
        fusion = FusionSchedule(expert_steps, stale)
    return Schedule(kind, cache=cache, fusion=fusion)


def simulate_request(cat: Catalog, body: SimulateBody) -> dict:
    """Shared behind CLI `simulate` and POST /api/simulate."""
    model = cat.models[body.model]
    hw = cat.hardware[body.hardware]
    overhead = 0.0
    if body.calibrate and cat.records_for(body.model):
        overhead = calibrate_overheads(list(cat.records), model, hw)
    contention = CONTENTION_PRESETS.get(hw.name, NO_CONTENTION) if body.use_contention_preset else NO_CONTENTION
    schedule = build_schedule(body.schedule, model.action_expert.invocations_per_cycle)
    cfg = SimConfig(model, hw, schedule, n_cycles=body.n_cycles,
                    overhead_s=overhead, contention=contention)
    doc = run_sim(cfg).to_doc()
    doc["overhead_ms_per_invocation"] = overhead * 1000.0
    return doc


def speedup_request(body: SpeedupBody) -> dict:
    cm = NO_CONTENTION
    if body.hardware is not None:
        if body.hardware not in CONTENTION_PRESETS:
            raise KeyError(body.hardware)
        cm = CONTENTION_PRESETS[body.hardware]
    sched = FusionSchedule(body.total_steps, body.stale_steps)
    ratio = predicted_speedup(body.t_vlm_ms / 1000.0, body.t_ae_ms / 1000.0, sched, cm)
    return {
        "speedup": ratio,
        "stale_steps": body.stale_steps,
        "total_steps": body.total_steps,
        "contention_preset": body.hardware,
    }


def create_app(cat: Catalog) -> FastAPI:
    app = FastAPI(title="vlaperf", docs_url=None, redoc_url=None)

    @app.exception_handler(VlaperfError)
    async def _domain_error(request: Request, exc: VlaperfError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/api/hardware")
    def get_hardware():
        return [
            {**hardware_to_doc(h),
             "tier": h.tier.value,
             "ridge_flops_per_byte": ridge_point(h)}
            for h in cat.hardware.values()
        ]

    @app.get("/api/models")
    def get_models():
        return [
            {**model_to_doc(m), "consumer_tier": m.consumer_tier.value}
            for m in cat.models.values()
        ]

    @app.get("/api/records")
    def get_records(model: str | None = Query(default=None)):
        records = cat.records_for(model) if model else list(cat.records)
        if model and not records:
            return _not_found(f"no records for model {model!r}")
        return [record_to_doc(r) for r in records]

    @app.post("/api/rank")
    def post_rank(body: RankBody):
        if not cat.records_for(body.model):
            return _not_found(f"no records for model {body.model!r}")
        constraint = Constraint(body.constraint.required_hz,
                                body.constraint.max_cost_usd,
                                body.constraint.max_energy_kj)
        weights = CompositeWeights(body.weights.cost, body.weights.energy, body.weights.time)
        rec = cat.recommend(body.model, constraint, _policy(body.policy), weights)
        return Response(content=to_json_bytes(recommendation_to_doc(rec)),
                        media_type="application/json")

    @app.get("/api/roofline")
    def get_roofline(hw: str, model: str | None = Query(default=None)):
        if hw not in cat.hardware:
            return _not_found(f"unknown hardware {hw!r}")
        device = cat.hardware[hw]
        doc: dict = {
            "hardware": device.name,
            "ridge_flops_per_byte": ridge_point(device),
            "peak_tflops": device.peak_flops / 1e12,
            "bandwidth_gb_s": device.bandwidth / 1e9,
            "points": [],
        }
        if model is not None:
            if model not in cat.models:
                return _not_found(f"unknown model {model!r}")
            for ph in cat.models[model].phases:
                doc["points"].append({
                    "phase": ph.name,
                    "intensity_flops_per_byte": operational_intensity(ph),
                    "attainable_tflops": attainable_throughput(ph, device) / 1e12,
                    "boundedness": classify_boundedness(ph, device).value,
                    "utilization_proxy": utilization_proxy(ph, device),
                })
        return doc

    @app.post("/api/simulate")
    def post_simulate(body: SimulateBody):
        if body.model not in cat.models:
            return _not_found(f"unknown model {body.model!r}")
        if body.hardware not in cat.hardware:
            return _not_found(f"unknown hardware {body.hardware!r}")
        return simulate_request(cat, body)

    @app.post("/api/speedup")
    def post_speedup(body: SpeedupBody):
        try:
            return speedup_request(body)
        except KeyError:
            return _not_found(f"no contention preset for hardware {body.hardware!r}")

    return app


def serve(cat: Catalog, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    uvicorn.run(create_app(cat), host=host, port=port)
