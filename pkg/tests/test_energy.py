"""Energy values, gradients, and stationarity residuals."""

import numpy as np
import pytest

import oracles
from mcdflab.basis import (PlaneWaveBasis, inner_product,
                           lowdin_orthonormalize, project_spectral,
                           random_field)
from mcdflab.ci import CISpace
from mcdflab.energy import (energy, energy_mchf, gradient_a, gradient_psi,
                            lambda_matrix, stationarity_report)
from mcdflab.errors import NonOrthonormalError
from mcdflab.meanfield import NuclearConfiguration, ci_hamiltonian

C = 10.0
FD_STEP = 1e-5
FD_RTOL = 1e-6


@pytest.fixture()
def basis():
    return PlaneWaveBasis(box_length=2 * np.pi, mode_bound=1, light_speed=C)


@pytest.fixture()
def nuc():
    return NuclearConfiguration(charges=(2.0,), positions=((0.0, 0.0, 0.0),),
                                smearing=0.3)


NO_NUC = NuclearConfiguration(charges=(), positions=())


def _orthonormal(basis, k, ncomp, seed):
    rng = np.random.default_rng(seed)
    return lowdin_orthonormalize(random_field(basis, ncomp, rng, (k,)))


def _sphere(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return a / np.linalg.norm(a)


@pytest.mark.parametrize("sign", [1, -1])
def test_free_particle_branch_energies(basis, sign):
    space = CISpace(n_orbitals=1, n_particles=1)
    rng = np.random.default_rng(20)
    for mode in (2, 13, 17):
        x = np.zeros((basis.n_modes, 4), dtype=complex)
        x[mode] = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        x = project_spectral(x, sign, basis)
        nrm = np.linalg.norm(x)
        if nrm < 1e-12:
            continue
        x /= nrm
        lam = np.sqrt(C**4 + C**2 * basis.ksq[mode])
        got = energy(space, np.array([1.0 + 0j]), x[None], basis, NO_NUC).total
        assert got == pytest.approx(sign * lam, rel=1e-12)


def test_total_equals_ci_quadratic_form(basis, nuc):
    space = CISpace(n_orbitals=4, n_particles=2)
    psi = _orthonormal(basis, 4, 4, 21)
    a = _sphere(space.n_determinants, 22)
    got = energy(space, a, psi, basis, nuc).total
    h = ci_hamiltonian(space, psi, basis, nuc, relativistic=True)
    want = float(np.real(np.vdot(a, h @ a)))
    assert got == pytest.approx(want, rel=1e-9)


def test_energy_mchf_single_mode(basis):
    space = CISpace(n_orbitals=1, n_particles=1)
    phi = np.zeros((1, basis.n_modes, 2), dtype=complex)
    phi[0, 5, 0] = 1.0
    got = energy_mchf(space, np.array([1.0 + 0j]), phi, basis, NO_NUC)
    assert got == pytest.approx(0.5 * basis.ksq[5], rel=1e-12)


def test_energy_mchf_rejects_nonorthonormal(basis):
    space = CISpace(n_orbitals=1, n_particles=1)
    phi = np.zeros((1, basis.n_modes, 2), dtype=complex)
    phi[0, 5, 0] = 2.0
    with pytest.raises(NonOrthonormalError):
        energy_mchf(space, np.array([1.0 + 0j]), phi, basis, NO_NUC)


def test_energy_mchf_closed_shell_pairing(basis, nuc):
    # doubly occupied spatial orbital: no exchange between opposite spins,
    # so E = 2 h(phi) + J(phi) in terms of the scalar orbital alone
    rng = np.random.default_rng(23)
    coeffs = rng.standard_normal(basis.n_modes) + 1j * rng.standard_normal(
        basis.n_modes)
    coeffs /= np.linalg.norm(coeffs)
    phi = np.zeros((2, basis.n_modes, 2), dtype=complex)
    phi[0, :, 0] = coeffs
    phi[1, :, 1] = coeffs
    space = CISpace(n_orbitals=2, n_particles=2)
    got = energy_mchf(space, np.array([1.0 + 0j]), phi, basis, nuc)

    v_hat = oracles.nuclear_coeffs(basis, nuc)
    sub = oracles.diff_table(basis)
    h_one = 0.5 * np.sum(basis.ksq * np.abs(coeffs) ** 2)
    h_one += np.real(np.einsum("m,mn,n->", coeffs.conj(), v_hat[sub], coeffs))
    add = oracles.wrap_table(basis)
    rho_hat = np.einsum("m,dm->d", coeffs.conj(),
                        coeffs[add.T])  # add[d, m] indexed as [d][m]
    kern = oracles.coulomb_coeffs(basis)
    j_term = float(np.sum(kern * np.abs(rho_hat) ** 2))
    assert got == pytest.approx(2.0 * h_one + j_term, rel=1e-10)


def test_gradient_a_vanishes_at_eigenvector(basis, nuc):
    space = CISpace(n_orbitals=3, n_particles=2)
    psi = _orthonormal(basis, 3, 4, 24)
    h = ci_hamiltonian(space, psi, basis, nuc, relativistic=True)
    _, vecs = np.linalg.eigh(h)
    g = gradient_a(space, vecs[:, 0], psi, basis, nuc)
    assert np.linalg.norm(g) <= 1e-10


def test_gradient_a_finite_difference(basis, nuc):
    space = CISpace(n_orbitals=3, n_particles=2)
    psi = _orthonormal(basis, 3, 4, 25)
    a = _sphere(space.n_determinants, 26)
    rng = np.random.default_rng(27)
    t = rng.standard_normal(a.shape) + 1j * rng.standard_normal(a.shape)
    t -= np.real(np.vdot(a, t)) * a
    g = gradient_a(space, a, psi, basis, nuc)
    assert abs(np.real(np.vdot(a, g))) <= 1e-10

    def value(vec):
        vec = vec / np.linalg.norm(vec)
        return energy(space, vec, psi, basis, nuc).total

    fd = (value(a + FD_STEP * t) - value(a - FD_STEP * t)) / (2 * FD_STEP)
    predicted = float(np.real(np.vdot(t, g)))
    assert fd == pytest.approx(predicted, rel=FD_RTOL)


def test_gradient_psi_span_orthogonal(basis, nuc):
    space = CISpace(n_orbitals=3, n_particles=2)
    psi = _orthonormal(basis, 3, 4, 28)
    a = _sphere(space.n_determinants, 29)
    g = gradient_psi(space, a, psi, basis, nuc)
    overlaps = inner_product(psi[:, None], g[None, :], basis)
    assert np.abs(overlaps).max() <= 1e-10


@pytest.mark.parametrize("relativistic", [True, False])
def test_gradient_psi_finite_difference(basis, nuc, relativistic):
    space = CISpace(n_orbitals=3, n_particles=2)
    ncomp = 4 if relativistic else 2
    psi = _orthonormal(basis, 3, ncomp, 30 + ncomp)
    a = _sphere(space.n_determinants, 31)
    rng = np.random.default_rng(32)
    eta = random_field(basis, ncomp, rng, (3,))
    # restrict to directions orthogonal to the span so the retraction curve
    # has derivative exactly eta
    mix = inner_product(psi[:, None], eta[None, :], basis)
    eta = eta - np.einsum("ij,i...->j...", mix, psi)

    g = gradient_psi(space, a, psi, basis, nuc, relativistic)
    predicted = float(np.real(np.sum(inner_product(eta, g, basis))))

    def value(h):
        stack = lowdin_orthonormalize(psi + h * eta)
        terms = oracles.one_body_oracle(stack, basis, nuc, relativistic)
        eri = oracles.eri_oracle(stack, basis)
        hmat = oracles.ci_matrix_oracle(3, 2, terms, eri)
        return float(np.real(np.vdot(a, hmat @ a)))

    fd = (value(FD_STEP) - value(-FD_STEP)) / (2 * FD_STEP)
    assert fd == pytest.approx(predicted, rel=FD_RTOL)


def test_lambda_matrix_rest_mode(basis):
    space = CISpace(n_orbitals=1, n_particles=1)
    x = np.zeros((basis.n_modes, 4), dtype=complex)
    x[13, 0] = 1.0  # k = 0, upper spinor: positive branch at rest
    mult = lambda_matrix(space, np.array([1.0 + 0j]), x[None], basis, NO_NUC)
    assert mult.lam.shape == (1, 1)
    assert complex(mult.lam[0, 0]) == pytest.approx(C**2, rel=1e-12)
    assert mult.asymmetry <= 1e-12
    assert mult.window_low[0] == pytest.approx(0.0, abs=1e-9)


def test_stationarity_report_matches_solver(solved_m1, basis_m1, helium_nuc,
                                            helium_space):
    rep = solved_m1
    fresh = stationarity_report(helium_space, rep.state.a, rep.psi_full,
                                basis_m1, helium_nuc, True, rep.config.khat)
    assert fresh.residual_df1 == pytest.approx(rep.residual_df1, abs=1e-9)
    assert fresh.residual_df2 == pytest.approx(rep.residual_df2, abs=1e-9)
    assert fresh.ci_energy == pytest.approx(rep.ci_energy, rel=1e-12)
    assert fresh.multiplier.asymmetry <= 1e-9
    assert fresh.min_occ == pytest.approx(rep.min_occ, abs=1e-12)
