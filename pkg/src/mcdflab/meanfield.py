"""Nuclear attraction, periodic Coulomb machinery, the mean-field matrix W,
the Fock operator, and the CI Hamiltonian matrix.

All pointwise products are evaluated on the (2m+1)^3 collocation grid; the
k=0 Coulomb coefficient is zero (uniform neutralizing background), so every
potential averages to zero over the box. Two-body integrals use chemists'
notation (ij|kl) = integral of conj(psi_i)psi_j (x) g(x-y) conj(psi_k)psi_l (y).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import pi

import numpy as np

from .basis import (
    PlaneWaveBasis,
    apply_dirac,
    from_grid,
    gram_matrix,
    inner_product,
    scalar_coeffs_to_grid,
    to_grid,
)
from .ci import CISpace, gamma_matrix, pair_tensor
from .errors import ConfigError, NonOrthonormalError

__all__ = [
    "NuclearConfiguration",
    "nuclear_potential_coeffs",
    "nuclear_potential_grid",
    "nuclear_potential_apply",
    "kinetic_apply",
    "pair_density",
    "coulomb_convolve",
    "w_matrix",
    "FockOperator",
    "fock_apply",
    "one_body_matrix",
    "two_body_tensor",
    "ci_hamiltonian",
    "kato_check",
    "KatoReport",
]


@dataclass(frozen=True)
class NuclearConfiguration:
    """Point (or Gaussian-smeared) nuclei inside the box.

    charges: positive charge per nucleus; positions: box coordinates in
    [0, L)^3; smearing: Gaussian width (0 = point charges).
    """

    charges: tuple
    positions: tuple
    smearing: float = 0.0

    def __post_init__(self):
        charges = tuple(float(z) for z in self.charges)
        positions = tuple(tuple(float(x) for x in p) for p in self.positions)
        if len(charges) != len(positions):
            raise ConfigError(
                f"{len(charges)} charges but {len(positions)} positions"
            )
        for z in charges:
            if not z > 0:
                raise ConfigError(f"nuclear charges must be positive, got {z}")
        for p in positions:
            if len(p) != 3:
                raise ConfigError(f"positions must be 3-vectors, got {p}")
        if self.smearing < 0:
            raise ConfigError(f"smearing must be nonnegative, got {self.smearing}")
        object.__setattr__(self, "charges", charges)
        object.__setattr__(self, "positions", positions)

    @property
    def total_charge(self) -> float:
        return float(sum(self.charges))


def nuclear_potential_coeffs(nuc: NuclearConfiguration, basis: PlaneWaveBasis) -> np.ndarray:
    """Fourier-series coefficients of V(x) = -sum_i Z_i g(x - z_i), with the
    periodic kernel g having coefficients 4*pi/(V|k|^2) and zero mean."""
    for p in nuc.positions:
        for x in p:
            if not (0.0 <= x < basis.box_length):
                raise ConfigError(
                    f"nucleus position {p} outside box [0, {basis.box_length})"
                )
    coeffs = np.zeros(basis.n_modes, dtype=complex)
    if not nuc.charges:
        return coeffs
    ksq = basis.ksq
    mask = ksq > 0
    structure = np.zeros(basis.n_modes, dtype=complex)
    for z, pos in zip(nuc.charges, nuc.positions):
        structure += z * np.exp(-1j * (basis.kvecs @ np.asarray(pos)))
    damp = np.exp(-0.5 * ksq * nuc.smearing**2)
    coeffs[mask] = -(4.0 * pi / (basis.volume * ksq[mask])) * structure[mask] * damp[mask]
    return coeffs


def nuclear_potential_grid(nuc: NuclearConfiguration, basis: PlaneWaveBasis) -> np.ndarray:
    """Real-space nuclear potential on the collocation grid."""
    vals = scalar_coeffs_to_grid(nuclear_potential_coeffs(nuc, basis), basis)
    # symmetric mode set and conjugate-even coefficients make this real
    return np.real(vals)


def nuclear_potential_apply(x: np.ndarray, nuc: NuclearConfiguration, basis: PlaneWaveBasis) -> np.ndarray:
    """Multiply a coefficient field by V(x) in real space."""
    if x.shape[-2] != basis.n_modes:
        raise ValueError(f"expected {basis.n_modes} modes, got shape {x.shape}")
    if not nuc.charges:
        return np.zeros_like(x, dtype=complex)
    v = nuclear_potential_grid(nuc, basis)
    return from_grid(to_grid(x, basis) * v[..., None], basis)


def kinetic_apply(x: np.ndarray, basis: PlaneWaveBasis, relativistic: bool) -> np.ndarray:
    """One-body kinetic term: free Dirac operator on 4-spinors, or the
    Laplacian multiplier |k|^2 / 2 on 2-spinors."""
    if relativistic:
        return apply_dirac(x, basis)
    if x.shape[-1] != 2 or x.shape[-2] != basis.n_modes:
        raise ValueError(f"expected trailing shape ({basis.n_modes}, 2), got {x.shape}")
    return 0.5 * basis.ksq[:, None] * x


def pair_density(x: np.ndarray, y: np.ndarray, basis: PlaneWaveBasis) -> np.ndarray:
    """Pointwise component contraction conj(x(r)) . y(r) on the grid."""
    if x.shape != y.shape:
        raise ValueError(f"field shapes differ: {x.shape} vs {y.shape}")
    return np.sum(np.conj(to_grid(x, basis)) * to_grid(y, basis), axis=-1)


def _coulomb_kernel_dft(basis: PlaneWaveBasis) -> np.ndarray:
    g = np.zeros(basis.n_modes)
    mask = basis.ksq > 0
    g[mask] = 4.0 * pi / basis.ksq[mask]
    nx = basis.n_axis
    return np.fft.ifftshift(g.reshape(nx, nx, nx))


def coulomb_convolve(rho: np.ndarray, basis: PlaneWaveBasis) -> np.ndarray:
    """Convolve a grid density with the periodic Coulomb kernel
    (Fourier multiplier 4*pi/|k|^2, zero at k=0)."""
    kernel = _coulomb_kernel_dft(basis)
    axes = (-3, -2, -1)
    return np.fft.ifftn(np.fft.fftn(rho, axes=axes) * kernel, axes=axes)


def _density_grids(psi_grid: np.ndarray) -> np.ndarray:
    # rho[i, j](x) = conj(psi_i(x)) . psi_j(x)
    return np.einsum("i...c,j...c->ij...", np.conj(psi_grid), psi_grid)


def w_matrix(space: CISpace, a: np.ndarray, psi: np.ndarray, basis: PlaneWaveBasis) -> np.ndarray:
    """Mean-field matrix of multiplication operators on the grid:

    W[i, j](x) = sum_{k,l} P[i,k,j,l] * (coulomb_convolve of rho_kl)(x),

    with P the pair tensor of `a`. Hermitian in the operator sense:
    W[i, j](x) = conj(W[j, i](x)) pointwise.
    """
    if psi.shape[0] != space.n_orbitals:
        raise ValueError(f"expected {space.n_orbitals} orbitals, got {psi.shape[0]}")
    p2 = pair_tensor(space, a)
    psi_grid = to_grid(psi, basis)
    j_fields = coulomb_convolve(_density_grids(psi_grid), basis)
    return np.einsum("ikjl,kl...->ij...", p2, j_fields)


class FockOperator:
    """H_{a,Psi} = (D_c + V) Gamma + 2 W, assembled once and applied to
    arbitrary orbital sets. The nonrelativistic variant replaces D_c with
    -Laplacian/2 on 2-spinors."""

    def __init__(self, space: CISpace, a: np.ndarray, psi: np.ndarray,
                 basis: PlaneWaveBasis, nuc: NuclearConfiguration,
                 relativistic: bool = True):
        self.space = space
        self.basis = basis
        self.relativistic = relativistic
        self.gamma = gamma_matrix(space, a)
        self.w_grid = w_matrix(space, a, psi, basis)
        self.v_grid = nuclear_potential_grid(nuc, basis) if nuc.charges else None

    def apply(self, phi: np.ndarray) -> np.ndarray:
        basis = self.basis
        one_body = kinetic_apply(phi, basis, self.relativistic)
        phi_grid = to_grid(phi, basis)
        if self.v_grid is not None:
            one_body = one_body + from_grid(phi_grid * self.v_grid[..., None], basis)
        out = np.einsum("ij,j...->i...", self.gamma, one_body)
        w_phi = np.einsum("ij...,j...c->i...c", self.w_grid, phi_grid)
        return out + 2.0 * from_grid(w_phi, basis)


def fock_apply(space: CISpace, a: np.ndarray, psi: np.ndarray, phi: np.ndarray,
               basis: PlaneWaveBasis, nuc: NuclearConfiguration,
               relativistic: bool = True) -> np.ndarray:
    """Apply the Fock operator built from (a, psi) to the orbital set phi."""
    return FockOperator(space, a, psi, basis, nuc, relativistic).apply(phi)


def one_body_matrix(psi: np.ndarray, basis: PlaneWaveBasis, nuc: NuclearConfiguration,
                    relativistic: bool = True) -> np.ndarray:
    """h[i, j] = <psi_i, (T + V) psi_j> with T the kinetic term."""
    tv = kinetic_apply(psi, basis, relativistic)
    if nuc.charges:
        tv = tv + nuclear_potential_apply(psi, nuc, basis)
    return inner_product(psi[:, None], tv[None, :], basis)


def two_body_tensor(psi: np.ndarray, basis: PlaneWaveBasis) -> np.ndarray:
    """Dense chemists' integrals (ij|kl) over the orbital set, shape (K,)*4."""
    k = psi.shape[0]
    psi_grid = to_grid(psi, basis)
    rho = _density_grids(psi_grid).reshape(k * k, -1)
    j_fields = coulomb_convolve(_density_grids(psi_grid), basis).reshape(k * k, -1)
    scale = basis.volume / basis.n_modes
    eri = scale * (rho @ j_fields.T)
    return eri.reshape(k, k, k, k)


def _excitation(det_i, det_j):
    """Orbitals unique to each determinant plus the parity of aligning the rest."""
    set_i, set_j = set(det_i), set(det_j)
    removed = sorted(set_i - set_j)
    added = sorted(set_j - set_i)
    parity = 0
    for p in removed:
        parity += det_i.index(p)
    for r in added:
        parity += det_j.index(r)
    sign = 1 if parity % 2 == 0 else -1
    return removed, added, sign


def _ci_matrix_general(space: CISpace, h: np.ndarray, eri: np.ndarray) -> np.ndarray:
    dets = [tuple(d) for d in space.determinants]
    nd = len(dets)
    out = np.zeros((nd, nd), dtype=complex)
    for col, det_j in enumerate(dets):
        for row, det_i in enumerate(dets):
            removed, added, sign = _excitation(det_i, det_j)
            n_diff = len(removed)
            if n_diff > 2:
                continue
            if n_diff == 0:
                val = sum(h[p, p] for p in det_i)
                val += sum(
                    eri[p, p, q, q] - eri[p, q, q, p]
                    for p, q in itertools.combinations(det_i, 2)
                )
            elif n_diff == 1:
                p, r = removed[0], added[0]
                val = h[p, r]
                for q in det_i:
                    if q == p:
                        continue
                    val += eri[p, r, q, q] - eri[p, q, q, r]
                val *= sign
            else:
                (p, q), (r, s) = removed, added
                val = sign * (eri[p, r, q, s] - eri[p, s, q, r])
            out[row, col] = val
    return out


def _ci_matrix_two_particle(space: CISpace, h: np.ndarray, eri: np.ndarray) -> np.ndarray:
    # closed form for N=2 with sorted determinants (p<q), (r<s):
    # <pq|H|rs> = h_pr d_qs + h_qs d_pr - h_ps d_qr - h_qr d_ps + (pr|qs) - (ps|qr)
    dets = space.determinants
    p, q = dets[:, 0][:, None], dets[:, 1][:, None]
    r, s = dets[:, 0][None, :], dets[:, 1][None, :]
    out = np.where(q == s, h[p, r], 0.0 + 0.0j)
    out += np.where(p == r, h[q, s], 0.0)
    out -= np.where(q == r, h[p, s], 0.0)
    out -= np.where(p == s, h[q, r], 0.0)
    out += eri[p, r, q, s] - eri[p, s, q, r]
    return out


def ci_hamiltonian(space: CISpace, psi: np.ndarray, basis: PlaneWaveBasis,
                   nuc: NuclearConfiguration, relativistic: bool = True) -> np.ndarray:
    """N-body Hamiltonian in the Slater-determinant basis (Slater-Condon rules).

    Requires an orthonormal orbital set; raises NonOrthonormalError otherwise.
    """
    k = space.n_orbitals
    if psi.shape[0] != k:
        raise ValueError(f"expected {k} orbitals, got {psi.shape[0]}")
    defect = np.linalg.norm(gram_matrix(psi) - np.eye(k))
    if defect > 1e-8:
        raise NonOrthonormalError(
            f"orbital set is not orthonormal (Gram defect {defect:.3e}); "
            "Slater-Condon assembly requires Gram = identity"
        )
    h = one_body_matrix(psi, basis, nuc, relativistic)
    eri = two_body_tensor(psi, basis)
    if space.n_particles == 2:
        return _ci_matrix_two_particle(space, h, eri)
    return _ci_matrix_general(space, h, eri)


@dataclass(frozen=True)
class KatoReport:
    lhs: float
    rhs: float
    satisfied: bool

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def kato_check(x: np.ndarray, nuc: NuclearConfiguration, basis: PlaneWaveBasis) -> KatoReport:
    """Compare |<psi, V psi>| against (Z pi / 2) <psi, sqrt(-Laplacian) psi>.

    Diagnostic only: the discrete periodic kernel may violate the continuum
    inequality by a small margin, which the report exposes.
    """
    nrm2 = float(np.real(inner_product(x, x, basis)))
    if nrm2 == 0.0:
        raise ValueError("kato_check requires a nonzero field")
    v_psi = nuclear_potential_apply(x, nuc, basis)
    lhs = abs(complex(inner_product(x, v_psi, basis)))
    momentum = float(np.real(np.sum(np.conj(x) * x * basis.knorm[:, None])))
    rhs = 0.5 * pi * nuc.total_charge * momentum
    return KatoReport(lhs=lhs, rhs=rhs, satisfied=lhs <= rhs)
