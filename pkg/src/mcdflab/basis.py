"""Periodic plane-wave spectral basis and free-particle operators.

Fields are arrays of Fourier coefficients over the mode set
k in (2*pi/L) * {-m..m}^3, stored in lexicographic mode order with the
spinor component as the trailing axis: shape (..., n_modes, ncomp).
Basis functions are box-normalized (exp(ik.x)/sqrt(V)), so the plain
coefficient inner product is the L2 inner product. Atomic units
throughout; the light speed c is a free parameter of the basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi, sqrt
from typing import Literal

import numpy as np

from .errors import ConfigError, DegenerateGramError

__all__ = [
    "PlaneWaveBasis",
    "apply_dirac",
    "apply_pauli_gradient",
    "project_spectral",
    "free_dirac_multiplier",
    "inner_product",
    "field_norm",
    "gram_matrix",
    "lowdin_orthonormalize",
    "to_grid",
    "from_grid",
    "scalar_coeffs_to_grid",
    "scalar_grid_to_coeffs",
    "random_field",
]

InnerKind = Literal["l2", "e", "c"]


@dataclass(frozen=True)
class PlaneWaveBasis:
    """Cubic box of side `box_length` with modes {-mode_bound..mode_bound}^3.

    Derived arrays are computed once and cached on the instance. Mode order
    is lexicographic in the integer triple (n1, n2, n3); this fixed order is
    what makes every downstream output bit-reproducible.
    """

    box_length: float
    mode_bound: int
    light_speed: float
    modes: np.ndarray = field(init=False, repr=False, compare=False)
    kvecs: np.ndarray = field(init=False, repr=False, compare=False)
    ksq: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.box_length > 0:
            raise ConfigError(f"box_length must be positive, got {self.box_length}")
        if self.mode_bound < 1 or int(self.mode_bound) != self.mode_bound:
            raise ConfigError(f"mode_bound must be a positive integer, got {self.mode_bound}")
        if not self.light_speed > 0:
            raise ConfigError(f"light_speed must be positive, got {self.light_speed}")
        m = self.mode_bound
        axis = np.arange(-m, m + 1)
        grids = np.meshgrid(axis, axis, axis, indexing="ij")
        modes = np.stack(grids, axis=-1).reshape(-1, 3)
        kvecs = (2.0 * pi / self.box_length) * modes
        ksq = np.sum(kvecs * kvecs, axis=1)
        for name, arr in (("modes", modes), ("kvecs", kvecs), ("ksq", ksq)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_axis(self) -> int:
        return 2 * self.mode_bound + 1

    @property
    def n_modes(self) -> int:
        return self.n_axis**3

    @property
    def volume(self) -> float:
        return self.box_length**3

    @property
    def knorm(self) -> np.ndarray:
        return np.sqrt(self.ksq)

    def with_light_speed(self, c: float) -> "PlaneWaveBasis":
        return PlaneWaveBasis(self.box_length, self.mode_bound, c)


def _sigma_dot_k(pair: np.ndarray, kvecs: np.ndarray) -> np.ndarray:
    # (sigma . k) on 2-component blocks, diagonal over modes
    k1, k2, k3 = kvecs[:, 0], kvecs[:, 1], kvecs[:, 2]
    u0, u1 = pair[..., 0], pair[..., 1]
    out = np.empty_like(pair)
    out[..., 0] = k3 * u0 + (k1 - 1j * k2) * u1
    out[..., 1] = (k1 + 1j * k2) * u0 - k3 * u1
    return out


def apply_dirac(x: np.ndarray, basis: PlaneWaveBasis) -> np.ndarray:
    """Free Dirac operator -i c (alpha . grad) + c^2 beta, block-diagonal over modes."""
    if x.shape[-1] != 4 or x.shape[-2] != basis.n_modes:
        raise ValueError(f"expected trailing shape ({basis.n_modes}, 4), got {x.shape}")
    c = basis.light_speed
    upper, lower = x[..., :2], x[..., 2:]
    out = np.empty_like(x, dtype=complex)
    out[..., :2] = c * c * upper + c * _sigma_dot_k(lower, basis.kvecs)
    out[..., 2:] = c * _sigma_dot_k(upper, basis.kvecs) - c * c * lower
    return out


def apply_pauli_gradient(x: np.ndarray, basis: PlaneWaveBasis) -> np.ndarray:
    """sigma . (-i grad) on 2-component fields: per mode, sigma . k."""
    if x.shape[-1] != 2 or x.shape[-2] != basis.n_modes:
        raise ValueError(f"expected trailing shape ({basis.n_modes}, 2), got {x.shape}")
    return _sigma_dot_k(x, basis.kvecs)


def free_dirac_multiplier(basis: PlaneWaveBasis) -> np.ndarray:
    """Per-mode eigenvalue sqrt(c^4 + c^2 |k|^2) of |D_c|."""
    c = basis.light_speed
    return np.sqrt(c**4 + c**2 * basis.ksq)


def project_spectral(x: np.ndarray, sign: int, basis: PlaneWaveBasis) -> np.ndarray:
    """Spectral projector onto the positive (+1) or negative (-1) part of D_c.

    P = (1 + sign * D_c / sqrt(c^4 + c^2 |k|^2)) / 2, applied mode by mode.
    """
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    lam = free_dirac_multiplier(basis)
    return 0.5 * (x + sign * apply_dirac(x, basis) / lam[:, None])


def _inner_weights(basis: PlaneWaveBasis, kind: InnerKind) -> np.ndarray:
    if kind == "l2":
        return np.ones(basis.n_modes)
    if kind == "e":
        return np.sqrt(1.0 + basis.ksq)
    if kind == "c":
        return np.sqrt(1.0 + basis.ksq / basis.light_speed**2)
    raise ValueError(f"unknown inner product kind {kind!r}")


def inner_product(x: np.ndarray, y: np.ndarray, basis: PlaneWaveBasis, kind: InnerKind = "l2"):
    """Inner product, conjugate-linear in the first argument.

    Sums over the mode and component axes; leading axes broadcast.
    kind: "l2" (plain), "e" (mode weight sqrt(1+|k|^2)),
    "c" (mode weight sqrt(1+|k|^2/c^2)).
    """
    w = _inner_weights(basis, kind)
    return np.sum(np.conj(x) * y * w[:, None], axis=(-2, -1))


def field_norm(x: np.ndarray, basis: PlaneWaveBasis, kind: InnerKind = "l2"):
    return np.sqrt(np.real(inner_product(x, x, basis, kind)))


def gram_matrix(psi: np.ndarray) -> np.ndarray:
    """Gram matrix G_ij = <psi_i, psi_j> (L2) of an orbital stack (K, n_modes, ncomp)."""
    flat = psi.reshape(psi.shape[0], -1)
    return flat.conj() @ flat.T


def lowdin_orthonormalize(psi: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    """Symmetric (Loewdin) orthonormalization psi -> G^(-1/2) applied on the span.

    Output spans the same space with Gram = identity. Raises DegenerateGramError
    when the Gram matrix has an eigenvalue at or below `floor`.
    """
    g = gram_matrix(psi)
    vals, vecs = np.linalg.eigh(g)
    if vals[0] <= floor:
        raise DegenerateGramError(float(vals[0]))
    t = (vecs * (1.0 / np.sqrt(vals))) @ vecs.conj().T
    # column convention: new orbital j = sum_i T_ij psi_i
    return np.einsum("ij,i...->j...", t, psi)


def to_grid(x: np.ndarray, basis: PlaneWaveBasis) -> np.ndarray:
    """Coefficients (..., n_modes, ncomp) -> values on the (2m+1)^3 grid.

    Values carry the 1/sqrt(V) normalization of the basis functions, so
    (V/n_grid) * sum over grid points reproduces L2 integrals exactly for
    products of two basis-limited fields.
    """
    nx = basis.n_axis
    lead = x.shape[:-2]
    ncomp = x.shape[-1]
    cube = x.reshape(*lead, nx, nx, nx, ncomp)
    cube = np.fft.ifftshift(cube, axes=(-4, -3, -2))
    vals = np.fft.ifftn(cube, axes=(-4, -3, -2))
    return vals * (basis.n_modes / sqrt(basis.volume))


def from_grid(vals: np.ndarray, basis: PlaneWaveBasis) -> np.ndarray:
    """Inverse of to_grid (exact round trip)."""
    nx = basis.n_axis
    lead = vals.shape[:-4]
    ncomp = vals.shape[-1]
    cube = np.fft.fftn(vals, axes=(-4, -3, -2))
    cube = np.fft.fftshift(cube, axes=(-4, -3, -2))
    coeffs = cube.reshape(*lead, nx**3, ncomp)
    return coeffs * (sqrt(basis.volume) / basis.n_modes)


def scalar_coeffs_to_grid(coeffs: np.ndarray, basis: PlaneWaveBasis) -> np.ndarray:
    """Fourier-series coefficients f_k (lexicographic, shape (..., n_modes)) ->
    values f(x_j) = sum_k f_k exp(ik.x_j) on the grid."""
    nx = basis.n_axis
    cube = coeffs.reshape(*coeffs.shape[:-1], nx, nx, nx)
    cube = np.fft.ifftshift(cube, axes=(-3, -2, -1))
    return np.fft.ifftn(cube, axes=(-3, -2, -1)) * basis.n_modes


def scalar_grid_to_coeffs(vals: np.ndarray, basis: PlaneWaveBasis) -> np.ndarray:
    """Grid values -> (aliased) Fourier-series coefficients, inverse of scalar_coeffs_to_grid."""
    nx = basis.n_axis
    cube = np.fft.fftn(vals, axes=(-3, -2, -1)) / basis.n_modes
    cube = np.fft.fftshift(cube, axes=(-3, -2, -1))
    return cube.reshape(*vals.shape[:-3], nx**3)


def random_field(basis: PlaneWaveBasis, ncomp: int, rng: np.random.Generator, shape=()) -> np.ndarray:
    """Complex standard-normal coefficient field(s) of shape (*shape, n_modes, ncomp)."""
    full = (*shape, basis.n_modes, ncomp)
    return rng.standard_normal(full) + 1j * rng.standard_normal(full)
