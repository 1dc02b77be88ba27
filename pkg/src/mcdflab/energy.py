"""Multiconfiguration energy, Riemannian gradients, and multiplier extraction.

Derivative convention: gradients are Wirtinger derivatives with respect to
conjugated coefficients, so for a curve x(t) with velocity v,
dE/dt = Re <grad, v> in the plain coefficient inner product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import (
    PlaneWaveBasis,
    gram_matrix,
    inner_product,
    lowdin_orthonormalize,
    to_grid,
)
from .ci import CISpace, gamma_matrix, min_occupation, pair_tensor
from .errors import NonOrthonormalError
from .meanfield import (
    FockOperator,
    NuclearConfiguration,
    ci_hamiltonian,
    coulomb_convolve,
    kinetic_apply,
    nuclear_potential_apply,
)

__all__ = [
    "EnergyBreakdown",
    "MultiplierMatrix",
    "StationarityReport",
    "energy",
    "energy_mchf",
    "normalize_g",
    "gradient_a",
    "gradient_psi",
    "lambda_matrix",
    "stationarity_report",
]

normalize_g = lowdin_orthonormalize


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic_rest: float
    nuclear: float
    two_body: float
    total: float


@dataclass(frozen=True)
class MultiplierMatrix:
    """Multiplier matrix Lambda with its window diagnostics.

    lam: Hermitian-symmetrized matrix <psi_i, (H psi)_j>;
    asymmetry: Frobenius norm of the skew part before symmetrization;
    window_low: eigenvalues of c^2 Gamma - Lambda;
    window_high: eigenvalues of Lambda - (c^2 - khat) Gamma.
    """

    lam: np.ndarray
    asymmetry: float
    window_low: np.ndarray
    window_high: np.ndarray
    khat: float

    @property
    def band_radius(self) -> float:
        """Spectral radius of Lambda - c^2 Gamma."""
        return float(np.max(np.abs(self.window_low)))


def _energy_terms(space: CISpace, a: np.ndarray, psi: np.ndarray,
                  basis: PlaneWaveBasis, nuc: NuclearConfiguration,
                  relativistic: bool) -> EnergyBreakdown:
    gam = gamma_matrix(space, a)
    t_psi = kinetic_apply(psi, basis, relativistic)
    t_mat = inner_product(psi[:, None], t_psi[None, :], basis)
    e_kin = float(np.real(np.sum(gam * t_mat)))
    if nuc.charges:
        v_psi = nuclear_potential_apply(psi, nuc, basis)
        v_mat = inner_product(psi[:, None], v_psi[None, :], basis)
        e_nuc = float(np.real(np.sum(gam * v_mat)))
    else:
        e_nuc = 0.0
    if space.n_particles >= 2:
        p2 = pair_tensor(space, a)
        psi_grid = to_grid(psi, basis)
        rho = np.einsum("i...c,j...c->ij...", np.conj(psi_grid), psi_grid)
        j_fields = coulomb_convolve(rho, basis)
        w_grid = np.einsum("ikjl,kl...->ij...", p2, j_fields)
        scale = basis.volume / basis.n_modes
        e_two = float(np.real(scale * np.sum(w_grid * rho)))
    else:
        e_two = 0.0
    return EnergyBreakdown(
        kinetic_rest=e_kin,
        nuclear=e_nuc,
        two_body=e_two,
        total=e_kin + e_nuc + e_two,
    )


def energy(space: CISpace, a: np.ndarray, psi: np.ndarray, basis: PlaneWaveBasis,
           nuc: NuclearConfiguration) -> EnergyBreakdown:
    """Relativistic multiconfiguration energy <Psi, (D_c Gamma + V Gamma + W) Psi>.

    psi need not be orthonormal; the value is the raw quadratic/quartic form.
    """
    return _energy_terms(space, a, psi, basis, nuc, relativistic=True)


def energy_mchf(space: CISpace, a: np.ndarray, phi: np.ndarray,
                basis: PlaneWaveBasis, nuc: NuclearConfiguration) -> float:
    """Nonrelativistic multiconfiguration energy on 2-spinor orbitals
    (kinetic term -Laplacian/2). Requires orthonormal orbitals."""
    _require_orthonormal(phi)
    return _energy_terms(space, a, phi, basis, nuc, relativistic=False).total


def _require_orthonormal(psi: np.ndarray, tol: float = 1e-8):
    defect = np.linalg.norm(gram_matrix(psi) - np.eye(psi.shape[0]))
    if defect > tol:
        raise NonOrthonormalError(
            f"orbital set is not orthonormal (Gram defect {defect:.3e})"
        )


def gradient_a(space: CISpace, a: np.ndarray, psi: np.ndarray, basis: PlaneWaveBasis,
               nuc: NuclearConfiguration, relativistic: bool = True) -> np.ndarray:
    """Sphere gradient of a -> E(a, psi): 2 (H_psi a - (a* H_psi a) a)."""
    h = ci_hamiltonian(space, psi, basis, nuc, relativistic)
    ha = h @ a
    value = np.real(np.vdot(a, ha))
    return 2.0 * (ha - value * a)


def _projected_fock(space: CISpace, a: np.ndarray, psi: np.ndarray,
                    basis: PlaneWaveBasis, nuc: NuclearConfiguration,
                    relativistic: bool):
    op = FockOperator(space, a, psi, basis, nuc, relativistic)
    h_psi = op.apply(psi)
    mixed = inner_product(psi[:, None], h_psi[None, :], basis)
    return h_psi, mixed


def gradient_psi(space: CISpace, a: np.ndarray, psi: np.ndarray, basis: PlaneWaveBasis,
                 nuc: NuclearConfiguration, relativistic: bool = True) -> np.ndarray:
    """Orbital gradient with the span projected out:

    2 [ (H psi)_j - sum_i <psi_i, (H psi)_j> psi_i ],

    exactly L2-orthogonal to span(psi). Requires orthonormal orbitals.
    """
    _require_orthonormal(psi)
    h_psi, mixed = _projected_fock(space, a, psi, basis, nuc, relativistic)
    span_part = np.einsum("ij,i...->j...", mixed, psi)
    return 2.0 * (h_psi - span_part)


def lambda_matrix(space: CISpace, a: np.ndarray, psi: np.ndarray, basis: PlaneWaveBasis,
                  nuc: NuclearConfiguration, relativistic: bool = True,
                  khat: float = 0.0) -> MultiplierMatrix:
    """Multiplier matrix <psi_i, (H psi)_j>, Hermitian-symmetrized, plus the
    spectral windows against c^2 Gamma. Requires orthonormal orbitals."""
    _require_orthonormal(psi)
    _, mixed = _projected_fock(space, a, psi, basis, nuc, relativistic)
    lam = 0.5 * (mixed + mixed.conj().T)
    asymmetry = float(np.linalg.norm(mixed - mixed.conj().T))
    gam = gamma_matrix(space, a)
    c2 = basis.light_speed**2
    window_low = np.linalg.eigvalsh(c2 * gam - lam)
    window_high = np.linalg.eigvalsh(lam - (c2 - khat) * gam)
    return MultiplierMatrix(
        lam=lam,
        asymmetry=asymmetry,
        window_low=window_low,
        window_high=window_high,
        khat=khat,
    )


@dataclass(frozen=True)
class StationarityReport:
    """Residuals of the two stationarity equations at (a, psi).

    residual_df1: L2 norm of H psi - psi Lambda over the orbital stack;
    residual_df2: norm of H_psi a - (a* H_psi a) a;
    ci_energy: a* H_psi a; min_occ: smallest occupation of a.
    """

    residual_df1: float
    residual_df2: float
    multiplier: MultiplierMatrix
    ci_energy: float
    min_occ: float


def stationarity_report(space: CISpace, a: np.ndarray, psi: np.ndarray,
                        basis: PlaneWaveBasis, nuc: NuclearConfiguration,
                        relativistic: bool = True, khat: float = 0.0) -> StationarityReport:
    _require_orthonormal(psi)
    h_psi, mixed = _projected_fock(space, a, psi, basis, nuc, relativistic)
    lam = 0.5 * (mixed + mixed.conj().T)
    asymmetry = float(np.linalg.norm(mixed - mixed.conj().T))
    gam = gamma_matrix(space, a)
    c2 = basis.light_speed**2
    mult = MultiplierMatrix(
        lam=lam,
        asymmetry=asymmetry,
        window_low=np.linalg.eigvalsh(c2 * gam - lam),
        window_high=np.linalg.eigvalsh(lam - (c2 - khat) * gam),
        khat=khat,
    )
    residual = h_psi - np.einsum("ij,i...->j...", lam, psi)
    df1 = float(np.sqrt(np.sum(np.abs(residual) ** 2)))
    h_ci = ci_hamiltonian(space, psi, basis, nuc, relativistic)
    ha = h_ci @ a
    value = float(np.real(np.vdot(a, ha)))
    df2 = float(np.linalg.norm(ha - value * a))
    return StationarityReport(
        residual_df1=df1,
        residual_df2=df2,
        multiplier=mult,
        ci_energy=value,
        min_occ=min_occupation(space, a),
    )
