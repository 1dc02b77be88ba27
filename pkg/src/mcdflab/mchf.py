"""Nonrelativistic multiconfiguration Hartree-Fock reference.

Same plane-wave box and Coulomb data as the relativistic model, but with
2-spinor orbitals, kinetic energy |k|^2/2, no spectral splitting, and no
occupation constraint. Serves as the reference value I^K that the shifted
relativistic energies approach as the light speed grows, and provides the
initial state for the relativistic solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Optional

import numpy as np

from .basis import (
    PlaneWaveBasis,
    inner_product,
    lowdin_orthonormalize,
    project_spectral,
)
from .ci import CISpace, enumerate_determinants, fix_phase, gamma_matrix, min_occupation
from .energy import energy_mchf, gradient_psi, stationarity_report
from .errors import ConfigError, DegenerateGramError, SolverFailure
from .meanfield import NuclearConfiguration, ci_hamiltonian, one_body_matrix
from .solver import SolverConfig, SplitState, _span_kill, _stack_norm

__all__ = [
    "MchfResult",
    "minimize_mchf",
    "occupation_floor",
    "full_ci_oracle",
    "embed_to_positive",
]


@dataclass
class MchfResult:
    a: np.ndarray
    phi: np.ndarray
    energy: float
    min_occ: float
    residual: float
    iterations: int
    status: str


def _one_body_modes(basis: PlaneWaveBasis, nuc: NuclearConfiguration) -> np.ndarray:
    """Dense nonrelativistic one-body matrix over the 2-spinor mode basis."""
    n = basis.n_modes
    eye = np.eye(n)
    stack = np.zeros((2 * n, n, 2), dtype=complex)
    stack[:n, :, 0] = eye
    stack[n:, :, 1] = eye
    return one_body_matrix(stack, basis, nuc, relativistic=False)


def _initial_orbitals(space: CISpace, basis: PlaneWaveBasis,
                      nuc: NuclearConfiguration) -> np.ndarray:
    h = _one_body_modes(basis, nuc)
    _, vecs = np.linalg.eigh(h)
    n = basis.n_modes
    k = space.n_orbitals
    phi = np.zeros((k, n, 2), dtype=complex)
    for j in range(k):
        col = fix_phase(vecs[:, j])
        phi[j, :, 0] = col[:n]
        phi[j, :, 1] = col[n:]
    return lowdin_orthonormalize(phi)


def minimize_mchf(space: CISpace, basis: PlaneWaveBasis, nuc: NuclearConfiguration,
                  config: Optional[SolverConfig] = None,
                  warm: Optional[MchfResult] = None) -> MchfResult:
    """Minimize the nonrelativistic multiconfiguration energy over
    (a, Phi) in S x Sigma by the same alternating scheme as the
    relativistic outer loop, without the inner maximization.

    A warm start from a smaller orbital count embeds the previous solution,
    so energies are nonincreasing along a K -> K+1 chain.

    Alternating minimization converges linearly with a rate set by the
    coupling between weakly occupied orbitals and the CI vector, so the
    default iteration cap is generous.
    """
    cfg = config if config is not None else SolverConfig(
        energy_cap_enforced=False, max_iter_outer=6000)
    if warm is not None:
        phi = _embed_orbitals(space, warm, basis, nuc)
        a = _embed_ci(space, warm)
    else:
        phi = _initial_orbitals(space, basis, nuc)
        a = None

    h_ci = ci_hamiltonian(space, phi, basis, nuc, relativistic=False)
    if a is None:
        _, vecs = np.linalg.eigh(h_ci)
        a = fix_phase(vecs[:, 0])
    f_cur = float(energy_mchf(space, a, phi, basis, nuc))

    slack_scale = 32.0 * np.finfo(float).eps
    status = "max_iter"
    it = 0
    for it in range(1, cfg.max_iter_outer + 1):
        rep = stationarity_report(space, a, phi, basis, nuc, relativistic=False)
        if max(rep.residual_df1, rep.residual_df2) < cfg.tol_outer:
            status = "converged"
            break
        slack = slack_scale * (1.0 + abs(f_cur))
        progressed = False

        h_ci = ci_hamiltonian(space, phi, basis, nuc, relativistic=False)
        evals, evecs = np.linalg.eigh(h_ci)
        candidate = fix_phase(evecs[:, 0])
        e_ci = float(np.real(np.vdot(a, h_ci @ a)))
        if abs(e_ci - evals[0]) <= slack:
            # energy cannot tell a from the ground eigenvector; adopt the
            # eigenvector when it strictly reduces the CI residual
            res_old = np.linalg.norm(h_ci @ a - e_ci * a)
            e_cand = float(np.real(np.vdot(candidate, h_ci @ candidate)))
            res_new = np.linalg.norm(h_ci @ candidate - e_cand * candidate)
            if res_new < res_old:
                f_try = float(energy_mchf(space, candidate, phi, basis, nuc))
                if f_try <= f_cur + slack:
                    a, f_cur = candidate, f_try
        else:
            theta = 1.0
            while theta >= cfg.theta_min:
                mixed = (1.0 - theta) * a + theta * candidate
                nrm = np.linalg.norm(mixed)
                if nrm < 1e-10:
                    theta *= 0.5
                    continue
                a_try = mixed / nrm
                f_try = float(energy_mchf(space, a_try, phi, basis, nuc))
                if f_try <= f_cur + slack:
                    if f_cur - f_try > 4.0 * slack:
                        progressed = True
                    a, f_cur = a_try, f_try
                    break
                theta *= 0.5

        grad = gradient_psi(space, a, phi, basis, nuc, relativistic=False)
        gam = gamma_matrix(space, a)
        direction = _span_kill(_precondition_nr(grad, gam, basis), phi, basis)
        slope = float(np.real(np.sum(np.conj(grad) * direction)))
        if slope <= 0.0:
            direction = grad
            slope = _stack_norm(grad) ** 2
        step = 1.0
        while step >= cfg.step_min:
            try:
                phi_try = lowdin_orthonormalize(phi - step * direction)
            except DegenerateGramError:
                step *= 0.5
                continue
            f_try = float(energy_mchf(space, a, phi_try, basis, nuc))
            if f_try <= f_cur - 0.1 * step * slope or (
                step * slope < slack and f_try <= f_cur + slack
            ):
                if f_cur - f_try > 4.0 * slack:
                    progressed = True
                phi, f_cur = phi_try, f_try
                break
            step *= 0.5
        else:
            if not progressed:
                status = "stalled"
                break

    rep = stationarity_report(space, a, phi, basis, nuc, relativistic=False)
    residual = max(rep.residual_df1, rep.residual_df2)
    if status == "max_iter":
        raise SolverFailure(
            f"reference minimizer did not converge in {cfg.max_iter_outer} iterations "
            f"(residual {residual:.3e})"
        )
    if status == "stalled" and residual > 1e3 * cfg.tol_outer:
        raise SolverFailure(
            f"reference minimizer stalled far from stationarity (residual {residual:.3e})"
        )
    return MchfResult(
        a=a,
        phi=phi,
        energy=f_cur,
        min_occ=min_occupation(space, a),
        residual=residual,
        iterations=it,
        status=status,
    )


def _precondition_nr(grad: np.ndarray, gam: np.ndarray, basis: PlaneWaveBasis) -> np.ndarray:
    """Nonrelativistic analogue of the kinetic preconditioner: 1/(1 + |k|^2)."""
    scaled = grad / (1.0 + basis.ksq)[:, None]
    vals, vecs = np.linalg.eigh(gam)
    inv = (vecs / np.clip(vals, 1e-6, None)) @ vecs.conj().T
    return np.einsum("ij,j...->i...", inv, scaled)


def _embed_orbitals(space: CISpace, warm: MchfResult, basis: PlaneWaveBasis,
                    nuc: NuclearConfiguration) -> np.ndarray:
    k_old = warm.phi.shape[0]
    k_new = space.n_orbitals
    if k_new < k_old:
        raise ConfigError(f"cannot warm start from {k_old} orbitals down to {k_new}")
    if k_new == k_old:
        return warm.phi
    h = _one_body_modes(basis, nuc)
    _, vecs = np.linalg.eigh(h)
    n = basis.n_modes
    phi = np.zeros((k_new, n, 2), dtype=complex)
    phi[:k_old] = warm.phi
    col_idx = 0
    filled = k_old
    while filled < k_new:
        if col_idx >= vecs.shape[1]:
            raise ConfigError("one-body basis exhausted while extending the orbital set")
        col = vecs[:, col_idx]
        cand = np.zeros((1, n, 2), dtype=complex)
        cand[0, :, 0] = col[:n]
        cand[0, :, 1] = col[n:]
        overlap = inner_product(phi[:filled, None], cand[None, :], basis)
        residual = cand[0] - np.einsum("ij,i...->j...", overlap, phi[:filled])[0]
        nrm = np.sqrt(np.sum(np.abs(residual) ** 2))
        col_idx += 1
        if nrm < 1e-6:
            continue
        phi[filled] = residual / nrm
        filled += 1
    return lowdin_orthonormalize(phi)


def _embed_ci(space: CISpace, warm: MchfResult) -> np.ndarray:
    k_old = warm.phi.shape[0]
    index = {det: i for i, det in enumerate(
        enumerate_determinants(space.n_orbitals, space.n_particles))}
    a = np.zeros(space.n_determinants, dtype=complex)
    for i_old, det in enumerate(enumerate_determinants(k_old, space.n_particles)):
        a[index[det]] = warm.a[i_old]
    return a / np.linalg.norm(a)


def occupation_floor(space: CISpace, result: MchfResult) -> float:
    """Smallest occupation of the converged reference CI vector."""
    return min_occupation(space, result.a)


def _mode_tables(basis: PlaneWaveBasis):
    n_axis = basis.n_axis
    m = basis.mode_bound
    modes = basis.modes

    def wrap(d):
        return (d + m) % n_axis - m

    diff = wrap(modes[None, :, :] - modes[:, None, :])
    code = ((diff[..., 0] + m) * n_axis + (diff[..., 1] + m)) * n_axis + (diff[..., 2] + m)
    kw = (2.0 * np.pi / basis.box_length) * diff
    ksq_w = np.sum(kw**2, axis=-1)
    return code, ksq_w


def full_ci_oracle(n_particles: int, basis: PlaneWaveBasis,
                   nuc: NuclearConfiguration) -> float:
    """Exact ground-state energy of the nonrelativistic model in the full
    determinant space over all 2 * n_modes spin-orbitals.

    Implemented for one and two particles; the determinant count is guarded
    at 2e4. Plane-wave integrals are assembled analytically from momentum
    bookkeeping, so this path shares no quadrature code with the mean-field
    evaluators it checks.
    """
    n = basis.n_modes
    m_spin = 2 * n
    if n_particles < 1:
        raise ConfigError(f"particle count must be positive, got {n_particles}")
    if comb(m_spin, n_particles) > 20000:
        raise ConfigError(
            f"full determinant space has {comb(m_spin, n_particles)} elements, "
            f"beyond the 2e4 guard"
        )
    h_modes = _one_body_modes(basis, nuc)
    if n_particles == 1:
        return float(np.linalg.eigvalsh(h_modes)[0])
    if n_particles != 2:
        raise ConfigError(
            f"exact diagonalization implemented for 1 or 2 particles, got {n_particles}"
        )

    code, ksq_w = _mode_tables(basis)
    n_codes = basis.n_axis**3
    kernel = np.zeros(n_codes)
    flat_code = code.reshape(-1)
    flat_ksq = ksq_w.reshape(-1)
    pos = flat_ksq > 0.0
    vals = np.zeros_like(flat_ksq)
    vals[pos] = 4.0 * np.pi / (basis.volume * flat_ksq[pos])
    kernel[flat_code] = vals

    # spin-orbital p = spin * n + mode, matching the 2-spinor component layout
    spin = np.arange(m_spin) // n
    mode = np.arange(m_spin) % n
    h_so = h_modes

    pairs = [(p, q) for p in range(m_spin) for q in range(p + 1, m_spin)]
    n_det = len(pairs)
    pair_arr = np.array(pairs)
    p_idx, q_idx = pair_arr[:, 0], pair_arr[:, 1]

    # (pr|qs) = delta_{spin p,spin r} delta_{spin q,spin s}
    #           * [code(r-p) == code(q-s)] * kernel(code(r-p))
    def eri_arr(pp, rr, qq, ss):
        same = (spin[pp] == spin[rr]) & (spin[qq] == spin[ss])
        c1 = code[mode[pp], mode[rr]]
        c2 = code[mode[ss], mode[qq]]
        return np.where(same & (c1 == c2), kernel[c1], 0.0)

    ham = np.zeros((n_det, n_det), dtype=complex)
    for row in range(n_det):
        p, q = pairs[row]
        r, s = p_idx, q_idx
        elem = (
            h_so[p, r] * (q == s) + h_so[q, s] * (p == r)
            - h_so[p, s] * (q == r) - h_so[q, r] * (p == s)
            + eri_arr(p, r, q, s) - eri_arr(p, s, q, r)
        )
        ham[row, :] = elem
    return float(np.linalg.eigvalsh(ham)[0])


def embed_to_positive(space: CISpace, result: MchfResult,
                      basis: PlaneWaveBasis) -> SplitState:
    """Lift a reference solution into the relativistic split state: 2-spinors
    become upper components, the stack is projected onto the positive subspace
    and re-orthonormalized, and the negative block starts at zero."""
    k, n = result.phi.shape[0], basis.n_modes
    four = np.zeros((k, n, 4), dtype=complex)
    four[:, :, :2] = result.phi
    plus = lowdin_orthonormalize(project_spectral(four, +1, basis))
    return SplitState(
        a=result.a.copy(),
        psi_plus=plus,
        psi_minus=np.zeros_like(plus),
    )
