"""Catalog ingestion: hardware, model, and measurement documents.

Catalogs are directories of human-diffable JSON files with explicit units
in every field name (peak_tflops, bandwidth_gb_s, latency_ms, ...).
Validation errors name the file, entry, and field.  A bundled catalog
holds the published device specs and measurement rows.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from vlaperf.errors import CatalogError, InvalidInputError
from vlaperf.leaderboard import MeasurementRecord
from vlaperf.roofline import HardwareSpec, ModelSpec, PhaseProfile

# Keys carrying commentary only; ignored by the parser.
_ANNOTATION_KEYS = {"notes"}


@dataclass(frozen=True)
class Catalog:
    hardware: dict[str, HardwareSpec]
    models: dict[str, ModelSpec]
    records: tuple[MeasurementRecord, ...]
    provenance: dict[str, str]  # file name -> sha256 of its content

    def records_for(self, model: str) -> list[MeasurementRecord]:
        return [r for r in self.records if r.model == model]

    def recommend(self, model: str, constraint, policy, weights=None):
        """Single code path behind both the CLI `rank` command and POST /api/rank.

        Applies the VRAM gate when the model's spec is in the catalog,
        then the constraint gates and the policy sort.
        """
        from vlaperf.leaderboard import CompositeWeights, Recommendation, rank, select_platform

        weights = weights or CompositeWeights()
        records = self.records_for(model)
        if not records:
            return Recommendation(model, policy, (), ())
        if model in self.models:
            return select_platform(self.models[model], records, self.hardware,
                                   constraint, policy, weights)
        return rank(records, constraint, policy, weights)


def _require(doc: dict, key: str, kind, where: str):
    if key not in doc:
        raise CatalogError(f"{where}: missing field {key!r}")
    value = doc[key]
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise CatalogError(f"{where}: field {key!r} must be {kind.__name__}, got {type(value).__name__}")
    return value


def _reject_unknown(doc: dict, allowed: set[str], where: str) -> None:
    unknown = set(doc) - allowed - _ANNOTATION_KEYS
    if unknown:
        raise CatalogError(f"{where}: unknown field(s) {sorted(unknown)}")


def hardware_from_doc(doc: dict, where: str) -> HardwareSpec:
    _reject_unknown(doc, {"name", "peak_tflops", "memory_gb", "bandwidth_gb_s", "cost_usd", "tdp_w"}, where)
    try:
        return HardwareSpec(
            name=_require(doc, "name", str, where),
            peak_flops=_require(doc, "peak_tflops", float, where) * 1e12,
            memory_bytes=_require(doc, "memory_gb", float, where) * 1e9,
            bandwidth=_require(doc, "bandwidth_gb_s", float, where) * 1e9,
            cost=_require(doc, "cost_usd", float, where),
            tdp=float(doc["tdp_w"]) if doc.get("tdp_w") is not None else None,
        )
    except InvalidInputError as exc:
        raise CatalogError(f"{where}: {exc}") from exc


def hardware_to_doc(hw: HardwareSpec) -> dict:
    doc = {
        "name": hw.name,
        "peak_tflops": hw.peak_flops / 1e12,
        "memory_gb": hw.memory_bytes / 1e9,
        "bandwidth_gb_s": hw.bandwidth / 1e9,
        "cost_usd": hw.cost,
    }
    if hw.tdp is not None:
        doc["tdp_w"] = hw.tdp
    return doc


def model_from_doc(doc: dict, where: str) -> ModelSpec:
    _reject_unknown(doc, {"name", "param_count", "precision_bytes", "denoise_steps", "phases"}, where)
    name = _require(doc, "name", str, where)
    phases_doc = _require(doc, "phases", list, where)
    phases = []
    for i, ph in enumerate(phases_doc):
        ph_where = f"{where}.phases[{i}]"
        if not isinstance(ph, dict):
            raise CatalogError(f"{ph_where}: phase must be an object")
        _reject_unknown(ph, {"name", "flops_gflops", "bytes_mb", "invocations"}, ph_where)
        try:
            phases.append(PhaseProfile(
                name=_require(ph, "name", str, ph_where),
                flops_per_invocation=_require(ph, "flops_gflops", float, ph_where) * 1e9,
                bytes_per_invocation=_require(ph, "bytes_mb", float, ph_where) * 1e6,
                invocations_per_cycle=_require(ph, "invocations", int, ph_where),
            ))
        except InvalidInputError as exc:
            raise CatalogError(f"{ph_where}: {exc}") from exc
    try:
        return ModelSpec(
            name=name,
            param_count=_require(doc, "param_count", float, where),
            precision_bytes=_require(doc, "precision_bytes", float, where),
            phases=tuple(phases),
            denoise_steps=_require(doc, "denoise_steps", int, where),
        )
    except InvalidInputError as exc:
        raise CatalogError(f"{where}: {exc}") from exc


def model_to_doc(m: ModelSpec) -> dict:
    return {
        "name": m.name,
        "param_count": m.param_count,
        "precision_bytes": m.precision_bytes,
        "denoise_steps": m.denoise_steps,
        "phases": [
            {
                "name": ph.name,
                "flops_gflops": ph.flops_per_invocation / 1e9,
                "bytes_mb": ph.bytes_per_invocation / 1e6,
                "invocations": ph.invocations_per_cycle,
            }
            for ph in m.phases
        ],
    }


def record_from_doc(doc: dict, where: str) -> MeasurementRecord:
    _reject_unknown(doc, {"model", "hardware", "latency_ms", "energy_kj", "cost_usd", "score_pct", "precision"}, where)
    try:
        return MeasurementRecord(
            model=_require(doc, "model", str, where),
            hardware=_require(doc, "hardware", str, where),
            latency_ms=_require(doc, "latency_ms", float, where),
            energy_kj=_require(doc, "energy_kj", float, where),
            cost_usd=_require(doc, "cost_usd", float, where),
            score_pct=_require(doc, "score_pct", float, where),
            precision=_require(doc, "precision", str, where),
        )
    except InvalidInputError as exc:
        raise CatalogError(f"{where}: {exc}") from exc


def record_to_doc(r: MeasurementRecord) -> dict:
    return {
        "model": r.model,
        "hardware": r.hardware,
        "latency_ms": r.latency_ms,
        "energy_kj": r.energy_kj,
        "cost_usd": r.cost_usd,
        "score_pct": r.score_pct,
        "precision": r.precision,
    }


def _load_json(path: Path) -> tuple[dict, str]:
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CatalogError(f"{path}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise CatalogError(f"{path}: top level must be an object")
    return doc, hashlib.sha256(raw).hexdigest()


def load_catalog(catalog_dir: str | Path) -> Catalog:
    """Load and cross-validate a catalog directory.

    Expects hardware.json and models.json plus any number of
    records*.json files; duplicate names and dangling references are
    rejected.
    """
    catalog_dir = Path(catalog_dir)
    if not catalog_dir.is_dir():
        raise CatalogError(f"{catalog_dir}: not a directory")

    provenance: dict[str, str] = {}
    hw_path = catalog_dir / "hardware.json"
    doc, digest = _load_json(hw_path)
    provenance[hw_path.name] = digest
    hardware: dict[str, HardwareSpec] = {}
    for i, entry in enumerate(doc.get("hardware", [])):
        hw = hardware_from_doc(entry, f"{hw_path.name}: hardware[{i}]")
        if hw.name in hardware:
            raise CatalogError(f"{hw_path.name}: duplicate hardware name {hw.name!r}")
        hardware[hw.name] = hw

    models: dict[str, ModelSpec] = {}
    models_path = catalog_dir / "models.json"
    if models_path.exists():
        doc, digest = _load_json(models_path)
        provenance[models_path.name] = digest
        for i, entry in enumerate(doc.get("models", [])):
            m = model_from_doc(entry, f"{models_path.name}: models[{i}]")
            if m.name in models:
                raise CatalogError(f"{models_path.name}: duplicate model name {m.name!r}")
            models[m.name] = m

    records: list[MeasurementRecord] = []
    for rec_path in sorted(catalog_dir.glob("records*.json")):
        doc, digest = _load_json(rec_path)
        provenance[rec_path.name] = digest
        for i, entry in enumerate(doc.get("records", [])):
            r = record_from_doc(entry, f"{rec_path.name}: records[{i}]")
            if r.hardware not in hardware:
                raise CatalogError(
                    f"{rec_path.name}: records[{i}] references unknown hardware {r.hardware!r}")
            if models and r.model not in models:
                raise CatalogError(
                    f"{rec_path.name}: records[{i}] references unknown model {r.model!r}")
            records.append(r)

    return Catalog(hardware, models, tuple(records), provenance)


def serialize_catalog(cat: Catalog) -> dict[str, dict]:
    """Normalized document form, keyed by file name."""
    docs: dict[str, dict] = {
        "hardware.json": {"hardware": [hardware_to_doc(h) for h in cat.hardware.values()]},
        "models.json": {"models": [model_to_doc(m) for m in cat.models.values()]},
        "records.json": {"records": [record_to_doc(r) for r in cat.records]},
    }
    return docs


def write_catalog(cat: Catalog, out_dir: str | Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, doc in serialize_catalog(cat).items():
        (out_dir / name).write_text(json.dumps(doc, indent=2) + "\n")


def bundled_catalog_dir() -> Path:
    return Path(resources.files("vlaperf") / "data")


def default_catalog() -> Catalog:
    """The bundled catalog: published device specs and measurement rows."""
    return load_catalog(bundled_catalog_dir())


def ingest_power_csv(path: str | Path) -> list[tuple[float, float]]:
    """Parse a `t_s,power_w` CSV into a power trace with line-precise errors."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise CatalogError(f"{path}: {exc}") from exc
    if not lines:
        raise CatalogError(f"{path}: empty file")
    reader = csv.reader(lines)
    header = next(reader)
    if [h.strip() for h in header] != ["t_s", "power_w"]:
        raise CatalogError(f"{path}: line 1: expected header 't_s,power_w'")
    trace: list[tuple[float, float]] = []
    prev_t: float | None = None
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 2:
            raise CatalogError(f"{path}: line {lineno}: expected 2 columns, got {len(row)}")
        try:
            t, p = float(row[0]), float(row[1])
        except ValueError:
            raise CatalogError(f"{path}: line {lineno}: malformed number") from None
        if prev_t is not None and t <= prev_t:
            raise CatalogError(f"{path}: line {lineno}: timestamps must be strictly increasing")
        if p < 0:
            raise CatalogError(f"{path}: line {lineno}: negative power")
        prev_t = t
        trace.append((t, p))
    if len(trace) < 2:
        raise CatalogError(f"{path}: need at least 2 samples")
    return trace
