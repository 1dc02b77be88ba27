"""Configuration-interaction coefficient algebra.

A state of N fermions in K orbitals is stored two ways: as a vector `a`
over the C(K, N) sorted determinants (unit norm), and as the fully
antisymmetric tensor `alpha` of shape (K,)*N with
alpha[perm(I)] = sign(perm) * a_I / sqrt(N!). All reduced objects
(occupation matrix, pair tensor) are contractions of alpha.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial, sqrt

import numpy as np

from .errors import ConfigError, ConstraintInfeasibleError

__all__ = [
    "CISpace",
    "enumerate_determinants",
    "gamma_matrix",
    "pair_tensor",
    "min_occupation",
    "group_action",
    "reference_state",
    "retract_to_floor",
    "fix_phase",
]


def enumerate_determinants(n_orbitals: int, n_particles: int) -> list:
    """Sorted determinants as 1-based index tuples, lexicographic order."""
    return list(itertools.combinations(range(1, n_orbitals + 1), n_particles))


def fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate a global phase so the largest-magnitude entry is real positive."""
    idx = int(np.argmax(np.abs(vec)))
    pivot = vec[idx]
    if pivot == 0:
        return vec
    return vec * (np.conj(pivot) / abs(pivot))


@dataclass(frozen=True)
class CISpace:
    """Index bookkeeping for N fermions in K orbitals."""

    n_orbitals: int
    n_particles: int

    def __post_init__(self):
        if self.n_particles < 1:
            raise ConfigError(f"need at least one particle, got {self.n_particles}")
        if self.n_orbitals < self.n_particles:
            raise ConfigError(
                f"need n_orbitals >= n_particles, got K={self.n_orbitals}, N={self.n_particles}"
            )

    @property
    def n_determinants(self) -> int:
        return comb(self.n_orbitals, self.n_particles)

    @property
    def determinants(self) -> np.ndarray:
        """(ndets, N) array of 0-based sorted orbital indices."""
        dets = np.array(
            list(itertools.combinations(range(self.n_orbitals), self.n_particles)),
            dtype=np.intp,
        ).reshape(self.n_determinants, self.n_particles)
        return dets

    def expand(self, a: np.ndarray) -> np.ndarray:
        """Determinant vector -> antisymmetric tensor of shape (K,)*N."""
        if a.shape != (self.n_determinants,):
            raise ValueError(f"expected shape ({self.n_determinants},), got {a.shape}")
        n = self.n_particles
        alpha = np.zeros((self.n_orbitals,) * n, dtype=complex)
        dets = self.determinants
        scale = 1.0 / sqrt(factorial(n))
        for perm in itertools.permutations(range(n)):
            sign = _perm_sign(perm)
            cols = dets[:, perm]
            alpha[tuple(cols.T)] = sign * scale * a
        return alpha

    def contract(self, alpha: np.ndarray) -> np.ndarray:
        """Antisymmetric tensor -> determinant vector (inverse of expand)."""
        dets = self.determinants
        return sqrt(factorial(self.n_particles)) * alpha[tuple(dets.T)]


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def gamma_matrix(space: CISpace, a: np.ndarray) -> np.ndarray:
    """One-body reduced matrix Gamma_ij = N sum_rest conj(alpha_i,rest) alpha_j,rest."""
    alpha = space.expand(a)
    flat = alpha.reshape(space.n_orbitals, -1)
    return space.n_particles * (flat.conj() @ flat.T)


def pair_tensor(space: CISpace, a: np.ndarray) -> np.ndarray:
    """Two-body reduced tensor P[i, k, j, l] with row pair (i, k), column pair (j, l):

    P[(ik), (jl)] = (N(N-1)/2) sum_rest conj(alpha_{ik,rest}) alpha_{jl,rest}.
    """
    n, k = space.n_particles, space.n_orbitals
    if n < 2:
        return np.zeros((k, k, k, k), dtype=complex)
    alpha = space.expand(a)
    flat = alpha.reshape(k * k, -1)
    weight = 0.5 * n * (n - 1)
    mat = weight * (flat.conj() @ flat.T)
    return mat.reshape(k, k, k, k)


def min_occupation(space: CISpace, a: np.ndarray) -> float:
    """Smallest eigenvalue of the occupation matrix of `a`."""
    gam = gamma_matrix(space, a)
    return float(np.linalg.eigvalsh(gam)[0])


def group_action(space: CISpace, u: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Coefficient transport under the orbital rotation psi'_i = sum_j U_ij psi_j.

    Applies conj(U) to every tensor slot of alpha; this is the unique choice
    that leaves the N-body state invariant when orbitals and coefficients are
    rotated together, and it sends Gamma -> U Gamma U^dagger.
    """
    k = space.n_orbitals
    if u.shape != (k, k):
        raise ValueError(f"expected a ({k}, {k}) matrix, got {u.shape}")
    defect = np.linalg.norm(u.conj().T @ u - np.eye(k))
    if defect > 1e-10:
        raise ValueError(f"rotation is not unitary (defect {defect:.3e})")
    alpha = space.expand(a)
    uc = u.conj()
    for slot in range(space.n_particles):
        alpha = np.moveaxis(np.tensordot(uc, alpha, axes=([1], [slot])), 0, slot)
    return space.contract(alpha)


def reference_state(space: CISpace) -> np.ndarray:
    """A determinant vector maximizing the smallest occupation, for the
    (K, N) families with a known even-spreading construction.

    Covered: K == N (single determinant, floor 1), N == 1, N == 2
    (pairing, floor 2/K for even K and 0 for odd K), and their hole duals
    K - N == 1 and K - N == 2. Raises ConfigError outside these families.
    """
    k, n = space.n_orbitals, space.n_particles
    dets = enumerate_determinants(k, n)
    index = {det: i for i, det in enumerate(dets)}
    a = np.zeros(len(dets), dtype=complex)
    if n == k:
        a[0] = 1.0
        return a
    if n == 1:
        a[0] = 1.0
        return a
    if n == 2:
        pairs = [(2 * p + 1, 2 * p + 2) for p in range(k // 2)]
        for det in pairs:
            a[index[det]] = 1.0
        return a / np.linalg.norm(a)
    if k - n == 1:
        a[index[tuple(range(1, n + 1))]] = 1.0
        return a / np.linalg.norm(a)
    if k - n == 2:
        # hole dual of the two-particle pairing state
        full = set(range(1, k + 1))
        for p in range(k // 2):
            det = tuple(sorted(full - {2 * p + 1, 2 * p + 2}))
            a[index[det]] = 1.0
        return a / np.linalg.norm(a)
    raise ConfigError(
        f"no reference construction implemented for K={k}, N={n}; "
        "supported families: K==N, N==1, N==2, K-N==1, K-N==2"
    )


def retract_to_floor(space: CISpace, a: np.ndarray, floor: float) -> np.ndarray:
    """Move `a` the least distance along the mixing path toward the reference
    state until the smallest occupation reaches `floor`.

    Path: a(t) = normalize((1-t) a + t u) with u the reference state, phase
    aligned to `a`. Returns the first feasible point (a itself when already
    feasible). Raises ConfigError when floor >= N/K (impossible for any
    state: occupations sum to N) and ConstraintInfeasibleError when the
    reference construction cannot reach the requested floor.
    """
    k, n = space.n_orbitals, space.n_particles
    if floor <= 0:
        return a
    if floor >= n / k:
        raise ConfigError(
            f"occupation floor {floor} is impossible for K={k}, N={n}: "
            f"eigenvalues of the occupation matrix sum to N, so the floor is below N/K = {n / k}"
        )
    if min_occupation(space, a) >= floor:
        return a
    u = reference_state(space)
    best = min_occupation(space, u)
    if best < floor:
        raise ConstraintInfeasibleError(
            f"requested occupation floor {floor} exceeds the best achievable "
            f"floor {best:.6f} for K={k}, N={n}"
        )
    ov = np.vdot(u, a)
    if abs(ov) > 1e-12:
        u = u * (ov / abs(ov))

    def point(t: float) -> np.ndarray:
        v = (1.0 - t) * a + t * u
        nrm = np.linalg.norm(v)
        if nrm < 1e-12:
            v = (1.0 - t) * a + (t + 1e-9) * u
            nrm = np.linalg.norm(v)
        return v / nrm

    def feasible(t: float) -> bool:
        return min_occupation(space, point(t)) >= floor

    ts = np.linspace(0.0, 1.0, 33)
    hit = None
    for i in range(1, len(ts)):
        if feasible(float(ts[i])):
            hit = i
            break
    if hit is None:
        raise ConstraintInfeasibleError(
            f"mixing path never reached occupation floor {floor} for K={k}, N={n}"
        )
    lo, hi = float(ts[hit - 1]), float(ts[hit])
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return point(hi)
