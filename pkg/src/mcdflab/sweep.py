"""Light-speed sweeps: relativistic solves against the nonrelativistic reference.

Each sweep runs the reference minimizer once for I^K, then solves the
relativistic problem at every c in increasing order, warm starting each point
from the previous converged state. Records carry the shifted energy, the gap
to I^K, small-component norms, the kinetic-balance residual, and multiplier
band data; failed points are flagged and filled with NaN so the sweep
continues.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .basis import PlaneWaveBasis, apply_pauli_gradient, lowdin_orthonormalize, project_spectral
from .ci import CISpace, retract_to_floor
from .errors import ConfigError, SolverFailure, SubcriticalLightSpeedError
from .mchf import MchfResult, embed_to_positive, minimize_mchf
from .meanfield import NuclearConfiguration
from .solver import (
    Certificate,
    SolverConfig,
    SolverReport,
    SplitState,
    certify_solution,
    outer_minimize,
)

__all__ = [
    "SweepRecord",
    "SweepPoint",
    "SweepResult",
    "OccupationPersistence",
    "small_component_norm",
    "kinetic_balance_residual",
    "reference_chain",
    "sweep_c",
    "occupation_persistence",
]


@dataclass(frozen=True)
class SweepRecord:
    """One sweep point. All norms are L2 norms of coefficient stacks."""

    c: float
    energy_shifted: float
    gap_to_IK: float
    small_component_norm: float
    kinetic_balance_residual: float
    lambda_band: float
    min_occ: float

    FIELDS = (
        "c",
        "energy_shifted",
        "gap_to_IK",
        "small_component_norm",
        "kinetic_balance_residual",
        "lambda_band",
        "min_occ",
    )


@dataclass
class SweepPoint:
    record: SweepRecord
    certified: bool
    status: str
    report: Optional[SolverReport] = None
    certificate: Optional[Certificate] = None


@dataclass
class SweepResult:
    points: list
    reference_energy: float
    gamma_floor: float
    gap_monotone: bool
    fit_small_component_slope: float
    fit_kinetic_balance_slope: float
    reference: Optional[MchfResult] = None

    @property
    def records(self) -> list:
        return [p.record for p in self.points]

    @property
    def n_certified(self) -> int:
        return sum(1 for p in self.points if p.certified)


def small_component_norm(psi_full: np.ndarray) -> float:
    """L2 norm of the lower 2-component block across all orbitals."""
    return float(np.sqrt(np.sum(np.abs(psi_full[..., 2:]) ** 2)))


def kinetic_balance_residual(psi_full: np.ndarray, basis: PlaneWaveBasis) -> float:
    """L2 deviation of the small components from (1/2c) L Phi, L = sigma.k."""
    phi = psi_full[..., :2]
    x = psi_full[..., 2:]
    balanced = apply_pauli_gradient(phi, basis) / (2.0 * basis.light_speed)
    return float(np.sqrt(np.sum(np.abs(x - balanced) ** 2)))


def reference_chain(space: CISpace, basis: PlaneWaveBasis, nuc: NuclearConfiguration,
                    config: Optional[SolverConfig] = None) -> list:
    """Warm-started chain of reference solves from K = N up to the target
    orbital count; the returned energies are nonincreasing."""
    results = []
    prev = None
    for k in range(space.n_particles, space.n_orbitals + 1):
        sub = CISpace(n_orbitals=k, n_particles=space.n_particles)
        prev = minimize_mchf(sub, basis, nuc, config, warm=prev)
        results.append(prev)
    return results


def _warm_state(space: CISpace, report: SolverReport, basis: PlaneWaveBasis,
                gamma_floor: float) -> SplitState:
    plus = lowdin_orthonormalize(project_spectral(report.psi_full, +1, basis))
    minus = project_spectral(report.psi_full, -1, basis)
    a = report.state.a
    if gamma_floor > 0.0:
        a = retract_to_floor(space, a, gamma_floor)
    return SplitState(a=a, psi_plus=plus, psi_minus=minus)


def _nan_record(c: float) -> SweepRecord:
    nan = float("nan")
    return SweepRecord(c=c, energy_shifted=nan, gap_to_IK=nan,
                       small_component_norm=nan, kinetic_balance_residual=nan,
                       lambda_band=nan, min_occ=nan)


def _loglog_slope(cs, values) -> float:
    pts = [(c, v) for c, v in zip(cs, values) if np.isfinite(v) and v > 0.0]
    if len(pts) < 2:
        return float("nan")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


def sweep_c(space: CISpace, c_values: Sequence[float], basis: PlaneWaveBasis,
            nuc: NuclearConfiguration, config: SolverConfig,
            reference: Optional[MchfResult] = None) -> SweepResult:
    """Run certified relativistic solves over an increasing list of light
    speeds, warm starting each from the previous solution.

    The reference energy I^K comes from the supplied reference result or a
    fresh warm-started chain. A failed point is recorded as NaN with its
    failure message and the next point falls back to the last good state.
    """
    cs = [float(c) for c in c_values]
    if len(cs) == 0:
        raise ConfigError("c_values must be nonempty")
    if any(b <= a for a, b in zip(cs, cs[1:])):
        raise ConfigError(f"c_values must be strictly increasing, got {cs}")
    if any(c <= 0 for c in cs):
        raise ConfigError(f"light speeds must be positive, got {cs}")

    if reference is None:
        reference = reference_chain(space, basis, nuc)[-1]
    i_k = reference.energy
    n = space.n_particles

    points = []
    last_good: Optional[SolverReport] = None
    for c in cs:
        basis_c = basis.with_light_speed(c)
        if last_good is None:
            init = embed_to_positive(space, reference, basis_c)
            if config.gamma_floor > 0.0:
                init = SplitState(
                    a=retract_to_floor(space, init.a, config.gamma_floor),
                    psi_plus=init.psi_plus,
                    psi_minus=init.psi_minus,
                )
        else:
            init = _warm_state(space, last_good, basis_c, config.gamma_floor)
        try:
            report = outer_minimize(space, init, config, basis_c, nuc)
        except (SolverFailure, SubcriticalLightSpeedError) as exc:
            points.append(SweepPoint(record=_nan_record(c), certified=False,
                                     status=f"failed: {exc}"))
            continue
        cert = certify_solution(report)
        shifted = report.ci_energy - n * c * c
        record = SweepRecord(
            c=c,
            energy_shifted=shifted,
            gap_to_IK=shifted - i_k,
            small_component_norm=small_component_norm(report.psi_full),
            kinetic_balance_residual=kinetic_balance_residual(report.psi_full, basis_c),
            lambda_band=report.multiplier.band_radius,
            min_occ=report.min_occ,
        )
        points.append(SweepPoint(record=record, certified=cert.passed,
                                 status=report.status, report=report,
                                 certificate=cert))
        last_good = report

    gaps = [p.record.gap_to_IK for p in points]
    finite = np.array([g for g in gaps if np.isfinite(g)])
    # flagged when the gap stops moving monotonically after the first two points
    monotone = True
    if finite.size >= 3:
        diffs = np.diff(finite)[1:]
        monotone = bool(np.all(diffs > 0) or np.all(diffs < 0))
    points_cert = [p for p in points if p.certified]
    slope_small = _loglog_slope([p.record.c for p in points_cert],
                                [p.record.small_component_norm for p in points_cert])
    slope_kb = _loglog_slope([p.record.c for p in points_cert],
                             [p.record.kinetic_balance_residual for p in points_cert])
    return SweepResult(
        points=points,
        reference_energy=i_k,
        gamma_floor=config.gamma_floor,
        gap_monotone=monotone,
        fit_small_component_slope=slope_small,
        fit_kinetic_balance_slope=slope_kb,
        reference=reference,
    )


@dataclass(frozen=True)
class OccupationPersistence:
    passed: bool
    gamma: float
    tail_min_occ: float
    message: str


def occupation_persistence(records: Sequence[SweepRecord], gamma: float) -> OccupationPersistence:
    """Check that the occupation floor stays strictly unsaturated at the
    largest swept light speeds."""
    if len(records) == 0:
        raise ConfigError("occupation persistence needs a nonempty sweep")
    tail = [r for r in records if np.isfinite(r.min_occ)][-2:]
    if not tail:
        return OccupationPersistence(
            passed=False, gamma=gamma, tail_min_occ=float("nan"),
            message="no finite sweep points to assess")
    tail_min = min(r.min_occ for r in tail)
    ok = tail_min > gamma
    msg = (f"min_occ {tail_min:.6g} > gamma {gamma:.6g} at the largest c"
           if ok else
           f"min_occ {tail_min:.6g} fails to clear gamma {gamma:.6g}")
    return OccupationPersistence(passed=ok, gamma=gamma, tail_min_occ=tail_min, message=msg)
