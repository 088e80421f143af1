"""Shared structured-output forms used by both the CLI and the HTTP service.

The CLI `--format doc` output and the corresponding API response bodies
are produced by the same functions and serialized with the same JSON
settings, so they are byte-identical for identical inputs.
"""

from __future__ import annotations

import json

from vlaperf.fusion import CycleTrace
from vlaperf.leaderboard import Recommendation
from vlaperf.simulate import CycleEvent


def to_json_bytes(doc: dict) -> bytes:
    return json.dumps(doc, indent=2, sort_keys=True).encode() + b"\n"


def recommendation_to_doc(rec: Recommendation) -> dict:
    return {
        "model": rec.model,
        "policy": rec.policy.value,
        "feasible": rec.feasible,
        "entries": [
            {
                "rank": i + 1,
                "hardware": e.hardware,
                "sort_key": e.sort_key,
                "latency_ms": e.record.latency_ms,
                "energy_kj": e.record.energy_kj,
                "cost_usd": e.record.cost_usd,
                "score_pct": e.record.score_pct,
                "frequency_hz": e.record.frequency_hz,
            }
            for i, e in enumerate(rec.entries)
        ],
        "excluded": [
            {"hardware": x.hardware, "reason": x.reason, "detail": x.detail}
            for x in rec.excluded
        ],
    }


def recommendation_to_table(rec: Recommendation) -> str:
    lines = [f"model: {rec.model}   policy: {rec.policy.value}"]
    if not rec.feasible:
        lines.append("no feasible pair")
    else:
        header = f"{'#':>2}  {'hardware':<12} {'latency_ms':>10} {'freq_hz':>8} {'energy_kj':>9} {'cost_usd':>8} {'score_pct':>9}"
        lines.append(header)
        for i, e in enumerate(rec.entries):
            r = e.record
            lines.append(
                f"{i + 1:>2}  {e.hardware:<12} {r.latency_ms:>10.1f} {r.frequency_hz:>8.2f} "
                f"{r.energy_kj:>9.3f} {r.cost_usd:>8.0f} {r.score_pct:>9.1f}")
    for x in rec.excluded:
        lines.append(f" -  {x.hardware:<12} excluded ({x.reason}): {x.detail}")
    return "\n".join(lines)


# Event-log trace format: one record per line, fields in this order.
EVENT_LOG_FIELDS = ("cycle", "worker", "phase", "start_us", "end_us", "staleness_tag")


def events_to_log(events) -> str:
    """Serialize simulator or pipeline events to the line-oriented trace format."""
    lines = [",".join(EVENT_LOG_FIELDS)]
    for e in events:
        lines.append(f"{e.cycle},{e.worker},{e.phase},{e.start_s * 1e6:.1f},{e.end_s * 1e6:.1f},{e.staleness}")
    return "\n".join(lines) + "\n"


def traces_to_events(traces: list[CycleTrace]) -> list[CycleEvent]:
    events = []
    for tr in traces:
        for s in tr.spans:
            events.append(CycleEvent(s.cycle, s.worker, s.phase, s.start_s, s.end_s, s.staleness))
    return events
