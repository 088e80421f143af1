"""Command-line surface for the toolkit.

Exit codes: 0 success, 1 validation error, 2 infeasible / no result.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from vlaperf import dpcache
from vlaperf.catalog import bundled_catalog_dir, ingest_power_csv, load_catalog
from vlaperf.errors import VlaperfError
from vlaperf.fusion import (
    CONTENTION_PRESETS,
    DenoiserNet,
    FusionPipeline,
    FusionSchedule,
    NO_CONTENTION,
    ToyVLM,
    predicted_speedup,
    synthetic_observation_stream,
    staleness_similarity_report,
)
from vlaperf.leaderboard import CompositeWeights, Constraint, RankingPolicy, energy_from_power_trace
from vlaperf.roofline import classify_boundedness, operational_intensity, ridge_point
from vlaperf.serialize import (
    events_to_log,
    recommendation_to_doc,
    recommendation_to_table,
    to_json_bytes,
    traces_to_events,
)
from vlaperf.server import ScheduleBody, SimulateBody, simulate_request
from vlaperf.simulate import utilization_proxy

EXIT_VALIDATION = 1
EXIT_INFEASIBLE = 2


@click.group()
@click.option("--catalog", "catalog_dir", type=click.Path(), default=None,
              help="Catalog directory (defaults to the bundled data).")
@click.option("--format", "fmt", type=click.Choice(["table", "doc"]), default="table")
@click.option("--seed", type=int, default=0)
@click.pass_context
def main(ctx, catalog_dir, fmt, seed):
    """Roofline, ranking, caching, and pipeline tools for policy inference."""
    ctx.ensure_object(dict)
    ctx.obj["catalog_dir"] = Path(catalog_dir) if catalog_dir else bundled_catalog_dir()
    ctx.obj["format"] = fmt
    ctx.obj["seed"] = seed


def _catalog(ctx):
    return load_catalog(ctx.obj["catalog_dir"])


def _emit_doc(doc: dict) -> None:
    sys.stdout.buffer.write(to_json_bytes(doc))


def _fail(exc: Exception, code: int = EXIT_VALIDATION):
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


@main.command()
@click.option("--hw", required=True)
@click.option("--model", "model_name", default=None)
@click.pass_context
def roofline(ctx, hw, model_name):
    """Ridge point and per-phase intensity / boundedness for a device."""
    try:
        cat = _catalog(ctx)
        if hw not in cat.hardware:
            raise VlaperfError(f"unknown hardware {hw!r}")
        device = cat.hardware[hw]
        doc = {
            "hardware": device.name,
            "tier": device.tier.value,
            "ridge_flops_per_byte": ridge_point(device),
            "points": [],
        }
        if model_name:
            if model_name not in cat.models:
                raise VlaperfError(f"unknown model {model_name!r}")
            for ph in cat.models[model_name].phases:
                doc["points"].append({
                    "phase": ph.name,
                    "intensity_flops_per_byte": operational_intensity(ph),
                    "boundedness": classify_boundedness(ph, device).value,
                    "utilization_proxy": utilization_proxy(ph, device),
                })
    except VlaperfError as exc:
        _fail(exc)
    if ctx.obj["format"] == "doc":
        _emit_doc(doc)
        return
    click.echo(f"{doc['hardware']} ({doc['tier']}): ridge {doc['ridge_flops_per_byte']:.2f} FLOPs/byte")
    for p in doc["points"]:
        click.echo(f"  {p['phase']:<14} I={p['intensity_flops_per_byte']:>8.2f}  "
                   f"{p['boundedness']:<12} util~{p['utilization_proxy']:.2f}")


@main.command()
@click.option("--model", "model_name", required=True)
@click.option("--policy", type=click.Choice([p.value for p in RankingPolicy]), default="time")
@click.option("--required-hz", type=float, default=None)
@click.option("--max-cost", type=float, default=None)
@click.option("--max-energy", type=float, default=None)
@click.option("--weights", nargs=3, type=float, default=(1.0, 1.0, 1.0),
              help="Cost, energy, time weights for composite policies.")
@click.pass_context
def rank(ctx, model_name, policy, required_hz, max_cost, max_energy, weights):
    """Gate and sort measured pairings for one model."""
    try:
        cat = _catalog(ctx)
        if not cat.records_for(model_name):
            raise VlaperfError(f"no records for model {model_name!r}")
        rec = cat.recommend(
            model_name,
            Constraint(required_hz, max_cost, max_energy),
            RankingPolicy(policy),
            CompositeWeights(*weights),
        )
    except VlaperfError as exc:
        _fail(exc)
    if ctx.obj["format"] == "doc":
        _emit_doc(recommendation_to_doc(rec))
    else:
        click.echo(recommendation_to_table(rec))
    if not rec.feasible:
        sys.exit(EXIT_INFEASIBLE)


@main.command()
@click.option("--model", "model_name", required=True)
@click.option("--hw", required=True)
@click.option("--schedule", "kind", default="synchronous",
              type=click.Choice(["synchronous", "dpcache", "fused", "fused+cache"]))
@click.option("--cache-s", type=int, default=4)
@click.option("--segment", nargs=2, type=int, default=(20, 80))
@click.option("--stale-steps", type=int, default=None)
@click.option("--cycles", type=int, default=10)
@click.option("--no-calibrate", is_flag=True)
@click.option("--trace-out", type=click.Path(), default=None,
              help="Write the per-cycle event log to this file.")
@click.pass_context
def simulate(ctx, model_name, hw, kind, cache_s, segment, stale_steps, cycles,
             no_calibrate, trace_out):
    """Closed-loop latency simulation under a chosen schedule."""
    try:
        cat = _catalog(ctx)
        if model_name not in cat.models:
            raise VlaperfError(f"unknown model {model_name!r}")
        if hw not in cat.hardware:
            raise VlaperfError(f"unknown hardware {hw!r}")
        body = SimulateBody(
            model=model_name, hardware=hw,
            schedule=ScheduleBody(kind=kind, cache_period=cache_s,
                                  segment_start=segment[0], segment_end=segment[1],
                                  stale_steps=stale_steps),
            n_cycles=cycles, calibrate=not no_calibrate)
        doc = simulate_request(cat, body)
        if trace_out:
            from vlaperf.server import build_schedule
            from vlaperf.simulate import SimConfig, Schedule, calibrate_overheads, run_sim
            model = cat.models[model_name]
            device = cat.hardware[hw]
            overhead = doc["overhead_ms_per_invocation"] / 1000.0
            cfg = SimConfig(model, device,
                            build_schedule(body.schedule, model.action_expert.invocations_per_cycle),
                            n_cycles=cycles, overhead_s=overhead,
                            contention=CONTENTION_PRESETS.get(hw, NO_CONTENTION))
            report = run_sim(cfg, emit_events=True)
            Path(trace_out).write_text(events_to_log(report.events))
    except VlaperfError as exc:
        _fail(exc)
    if ctx.obj["format"] == "doc":
        _emit_doc(doc)
        return
    click.echo(f"{model_name} on {hw} [{kind}]: {doc['mean_latency_ms']:.1f} ms "
               f"({doc['frequency_hz']:.2f} Hz), speedup {doc['speedup_vs_synchronous']:.2f}x")
    for name, ms in doc["breakdown_ms"].items():
        click.echo(f"  {name:<14} {ms:>8.2f} ms  util~{doc['utilization'][name]:.2f}")


@main.command("dpcache")
@click.option("--steps", type=int, default=100)
@click.option("--cache-s", type=int, default=4)
@click.option("--epsilon", type=float, default=dpcache.DEFAULT_EPSILON)
@click.pass_context
def dpcache_cmd(ctx, steps, cache_s, epsilon):
    """Profile the toy diffusion trajectory and run the cached sampler."""
    seed = ctx.obj["seed"]
    try:
        net = dpcache.DenoiserNet.create(seed=seed)
        sched = dpcache.NoiseSchedule.create(steps)
        cond = np.random.default_rng(seed + 1).standard_normal(net.condition_dim)
        full = dpcache.denoise_full(cond, sched, net, seed=seed, profile=True)
        segment = dpcache.profile_stability(full, epsilon)
        cfg = dpcache.CacheConfig(cache_s, segment)
        cached = dpcache.denoise_cached(cond, sched, net, cfg, seed=seed)
        series = dpcache.profile_signals(full, epsilon)["model_output"]
        doc = {
            "total_steps": steps,
            "epsilon": epsilon,
            "stable_segment": {"start": segment.start, "end": segment.end},
            "cache_period": cache_s,
            "computed_steps": cached.computed_steps,
            "skipped_steps": cached.skipped_steps,
            "step_reduction_ratio": steps / cached.computed_steps,
            "final_chunk_deviation": dpcache.deviation(full, cached),
            "l1_rel_series": [round(float(v), 6) for v in series],
        }
    except VlaperfError as exc:
        _fail(exc)
    if ctx.obj["format"] == "doc":
        _emit_doc(doc)
        return
    click.echo(f"stable segment [{segment.start}, {segment.end}) at epsilon {epsilon}")
    click.echo(f"S={cache_s}: computed {cached.computed_steps}, skipped {cached.skipped_steps} "
               f"({doc['step_reduction_ratio']:.2f}x step reduction)")
    click.echo(f"final-chunk deviation vs uncached: {doc['final_chunk_deviation']:.4f}")


@main.command()
@click.option("--cycles", type=int, default=10)
@click.option("--stale-steps", type=int, default=5)
@click.option("--total-steps", type=int, default=10)
@click.option("--workers", type=click.Choice(["1", "2"]), default="2")
@click.option("--vlm-delay-ms", type=float, default=30.0)
@click.option("--ae-step-delay-ms", type=float, default=6.0)
@click.option("--trace-out", type=click.Path(), default=None)
@click.pass_context
def fuse(ctx, cycles, stale_steps, total_steps, workers, vlm_delay_ms,
         ae_step_delay_ms, trace_out):
    """Run the two-worker toy pipeline and report measured overlap speedup."""
    seed = ctx.obj["seed"]
    try:
        sched = FusionSchedule(total_steps, stale_steps)
        vlm = ToyVLM.create(seed=seed)
        net = DenoiserNet.create(condition_dim=vlm.feature_dim, seed=seed + 1)
        pipe = FusionPipeline(vlm, net, sched, vlm_delay_s=vlm_delay_ms / 1000.0,
                              ae_step_delay_s=ae_step_delay_ms / 1000.0,
                              workers=int(workers), seed=seed)
        stream = synthetic_observation_stream(cycles, obs_dim=vlm.obs_dim, seed=seed)
        _, sync_traces, t_sync = pipe.run_stream(stream, fused=False)
        _, fused_traces, t_fused = pipe.run_stream(stream, fused=True)
        for tr in fused_traces:
            tr.assert_ordering_safe()
        similarity = staleness_similarity_report(stream, vlm)
        doc = {
            "cycles": cycles,
            "stale_steps": stale_steps,
            "total_steps": total_steps,
            "workers": int(workers),
            "synchronous_wall_s": t_sync,
            "fused_wall_s": t_fused,
            "measured_speedup": t_sync / t_fused,
            "predicted_zero_contention": predicted_speedup(
                vlm_delay_ms, ae_step_delay_ms * total_steps, sched),
            "feature_similarity": similarity,
        }
        if trace_out:
            Path(trace_out).write_text(events_to_log(traces_to_events(fused_traces)))
    except VlaperfError as exc:
        _fail(exc)
    if ctx.obj["format"] == "doc":
        _emit_doc(doc)
        return
    click.echo(f"synchronous {t_sync:.2f} s, fused {t_fused:.2f} s -> "
               f"{doc['measured_speedup']:.2f}x measured "
               f"(predicted {doc['predicted_zero_contention']:.2f}x, zero contention)")
    click.echo(f"adjacent-cycle feature similarity: "
               f"{similarity['mean_similarity']:.4f} +/- {similarity['std_similarity']:.4f}")


@main.command("ingest-power")
@click.argument("csv_path", type=click.Path())
@click.pass_context
def ingest_power(ctx, csv_path):
    """Integrate a t_s,power_w trace into task energy (kJ)."""
    try:
        trace = ingest_power_csv(csv_path)
        energy = energy_from_power_trace(trace)
    except VlaperfError as exc:
        _fail(exc)
    if ctx.obj["format"] == "doc":
        _emit_doc({"samples": len(trace), "duration_s": trace[-1][0] - trace[0][0],
                   "energy_kj": energy})
    else:
        click.echo(f"{energy:.4f} kJ over {trace[-1][0] - trace[0][0]:.1f} s "
                   f"({len(trace)} samples)")


@main.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
@click.pass_context
def serve_cmd(ctx, host, port):
    """Serve the read-only HTTP API over the catalog."""
    try:
        cat = _catalog(ctx)
    except VlaperfError as exc:
        _fail(exc)
    from vlaperf.server import serve

    serve(cat, host=host, port=port)


if __name__ == "__main__":
    main()
