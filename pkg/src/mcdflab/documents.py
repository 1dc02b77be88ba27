"""Machine-readable run artifacts.

One JSON document per solve, one JSON summary plus one CSV table per sweep.
Documents embed the resolved problem and solver settings and a schema
version string, and store the orbital state at full precision so a result
can be re-ingested as a warm start. Serialization is deterministic: sorted
keys, repr-exact floats, NaN encoded as null.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError
from .solver import Certificate, SolverReport, SplitState
from .sweep import SweepRecord, SweepResult

__all__ = [
    "RESULT_SCHEMA",
    "SWEEP_SCHEMA",
    "LoadedResult",
    "result_document",
    "sweep_document",
    "sweep_table",
    "dump_json",
    "write_text",
    "load_result",
]

RESULT_SCHEMA = "mcdf-result/1"
SWEEP_SCHEMA = "mcdf-sweep/1"


def _encode_array(arr: np.ndarray) -> dict:
    a = np.asarray(arr)
    return {
        "shape": list(a.shape),
        "re": np.ascontiguousarray(a.real).ravel().tolist(),
        "im": np.ascontiguousarray(a.imag).ravel().tolist(),
    }


def _decode_array(obj: dict) -> np.ndarray:
    shape = tuple(obj["shape"])
    re = np.asarray(obj["re"], dtype=float).reshape(shape)
    im = np.asarray(obj["im"], dtype=float).reshape(shape)
    return re + 1j * im


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dump_json(document: dict) -> str:
    return json.dumps(_sanitize(document), sort_keys=True, indent=2,
                      allow_nan=False) + "\n"


def write_text(path, text: str) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def _problem_block(report: SolverReport) -> dict:
    return {
        "n_particles": report.space.n_particles,
        "n_orbitals": report.space.n_orbitals,
        "box_length": report.basis.box_length,
        "mode_bound": report.basis.mode_bound,
        "c": report.basis.light_speed,
        "charges": list(report.nuc.charges),
        "positions": [list(p) for p in report.nuc.positions],
        "smearing": report.nuc.smearing,
    }


def _certificate_block(cert: Certificate) -> dict:
    return {
        "passed": cert.passed,
        "checks": [
            {"name": ch.name, "passed": ch.passed, "value": ch.value,
             "threshold": ch.threshold}
            for ch in cert.checks
        ],
    }


def result_document(report: SolverReport, certificate: Certificate,
                    seed: int = 0, multi_start: int = 1) -> dict:
    n = report.space.n_particles
    csq = report.basis.light_speed ** 2
    return {
        "schema": RESULT_SCHEMA,
        "problem": _problem_block(report),
        "solver": asdict(report.config),
        "run": {"seed": seed, "multi_start": multi_start},
        "status": report.status,
        "iterations": report.iterations,
        "energy": {
            "total": report.energy.total,
            "kinetic_rest": report.energy.kinetic_rest,
            "nuclear": report.energy.nuclear,
            "two_body": report.energy.two_body,
            "ci": report.ci_energy,
            "shifted": report.ci_energy - n * csq,
        },
        "residuals": {
            "df1": report.residual_df1,
            "df2": report.residual_df2,
            "grad_a": report.grad_a_norm,
            "grad_psi": report.grad_psi_norm,
        },
        "multiplier": {
            "asymmetry": report.multiplier.asymmetry,
            "window_low_min": float(np.min(report.multiplier.window_low)),
            "window_high_min": float(np.min(report.multiplier.window_high)),
            "band_radius": report.multiplier.band_radius,
        },
        "min_occ": report.min_occ,
        "certificate": _certificate_block(certificate),
        "state": {
            "a": _encode_array(report.state.a),
            "psi_plus": _encode_array(report.state.psi_plus),
            "psi_minus": _encode_array(report.state.psi_minus),
        },
    }


@dataclass(frozen=True)
class LoadedResult:
    document: dict
    state: SplitState

    @property
    def problem(self) -> dict:
        return self.document["problem"]

    @property
    def energy_total(self) -> float:
        return self.document["energy"]["total"]


def load_result(path) -> LoadedResult:
    """Read a result document back as a warm-start state."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"result file not found: {p}")
    try:
        document = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"result parse error in {p}: {exc}") from None
    if document.get("schema") != RESULT_SCHEMA:
        raise ConfigError(
            f"unsupported result schema {document.get('schema')!r} in {p}"
        )
    try:
        st = document["state"]
        state = SplitState(
            a=_decode_array(st["a"]),
            psi_plus=_decode_array(st["psi_plus"]),
            psi_minus=_decode_array(st["psi_minus"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed state block in {p}: {exc}") from None
    return LoadedResult(document=document, state=state)


def _record_row(rec: SweepRecord) -> dict:
    return {name: getattr(rec, name) for name in SweepRecord.FIELDS}


def sweep_document(sweep: SweepResult, problem: Optional[dict] = None,
                   solver: Optional[dict] = None, seed: int = 0) -> dict:
    doc = {
        "schema": SWEEP_SCHEMA,
        "run": {"seed": seed},
        "reference_energy": sweep.reference_energy,
        "gamma_floor": sweep.gamma_floor,
        "gap_monotone": sweep.gap_monotone,
        "fit": {
            "small_component_slope": sweep.fit_small_component_slope,
            "kinetic_balance_slope": sweep.fit_kinetic_balance_slope,
        },
        "n_certified": sweep.n_certified,
        "points": [
            {"record": _record_row(pt.record), "certified": pt.certified,
             "status": pt.status}
            for pt in sweep.points
        ],
    }
    if problem is not None:
        doc["problem"] = problem
    if solver is not None:
        doc["solver"] = solver
    return doc


def sweep_table(sweep: SweepResult) -> str:
    """Delimited table, one row per sweep record, columns as SweepRecord."""
    lines = [",".join(SweepRecord.FIELDS)]
    for rec in sweep.records:
        lines.append(",".join(repr(float(getattr(rec, name)))
                              for name in SweepRecord.FIELDS))
    return "\n".join(lines) + "\n"
