"""Potentials, mean fields, and the determinant-basis Hamiltonian."""

import numpy as np
import pytest

import oracles
from mcdflab.basis import (PlaneWaveBasis, apply_dirac, inner_product,
                           lowdin_orthonormalize, random_field,
                           scalar_coeffs_to_grid, to_grid)
from mcdflab.ci import CISpace
from mcdflab.energy import energy
from mcdflab.errors import ConfigError
from mcdflab.meanfield import (FockOperator, NuclearConfiguration,
                               ci_hamiltonian, coulomb_convolve, kato_check,
                               nuclear_potential_apply, one_body_matrix,
                               pair_density, two_body_tensor, w_matrix)

ATOL = 1e-12
C = 10.0


@pytest.fixture()
def basis():
    return PlaneWaveBasis(box_length=2 * np.pi, mode_bound=1, light_speed=C)


@pytest.fixture()
def nuc():
    return NuclearConfiguration(charges=(2.0,), positions=((0.0, 0.0, 0.0),),
                                smearing=0.3)


def _orthonormal(basis, k, ncomp, seed):
    rng = np.random.default_rng(seed)
    return lowdin_orthonormalize(random_field(basis, ncomp, rng, (k,)))


def test_nuclear_configuration_validation():
    with pytest.raises(ConfigError):
        NuclearConfiguration(charges=(1.0, 2.0), positions=((0.0, 0.0, 0.0),))
    with pytest.raises(ConfigError):
        NuclearConfiguration(charges=(-1.0,), positions=((0.0, 0.0, 0.0),))
    with pytest.raises(ConfigError):
        NuclearConfiguration(charges=(1.0,), positions=((0.0, 0.0),))
    with pytest.raises(ConfigError):
        NuclearConfiguration(charges=(1.0,), positions=((0.0, 0.0, 0.0),),
                             smearing=-0.1)


def test_nuclear_potential_empty_and_constant(basis):
    rng = np.random.default_rng(0)
    x = random_field(basis, 4, rng)
    empty = NuclearConfiguration(charges=(), positions=())
    assert np.all(nuclear_potential_apply(x, empty,
                                          basis) == 0) or np.linalg.norm(
        nuclear_potential_apply(x, empty, basis)) == 0

    # a constant field sees only the k = 0 kernel coefficient, which is zero
    const = np.zeros((basis.n_modes, 4), dtype=complex)
    const[13, 0] = 1.0
    z1 = NuclearConfiguration(charges=(1.0,), positions=((0.0, 0.0, 0.0),))
    coupling = complex(inner_product(const, nuclear_potential_apply(
        const, z1, basis), basis))
    assert abs(coupling) <= ATOL


def test_nuclear_potential_attractive_at_nucleus():
    basis = PlaneWaveBasis(box_length=2 * np.pi, mode_bound=3, light_speed=C)
    z1 = NuclearConfiguration(charges=(1.0,), positions=((0.0, 0.0, 0.0),))
    # Gaussian-envelope orbital concentrated at the nucleus
    x = np.zeros((basis.n_modes, 4), dtype=complex)
    x[:, 0] = np.exp(-0.25 * basis.ksq)
    val = float(np.real(inner_product(x, nuclear_potential_apply(x, z1, basis),
                                      basis)))
    assert val < 0.0


def test_nuclear_position_outside_box_rejected(basis, nuc):
    rng = np.random.default_rng(1)
    x = random_field(basis, 4, rng)
    bad = NuclearConfiguration(charges=(1.0,), positions=((7.0, 0.0, 0.0),))
    with pytest.raises(ConfigError):
        nuclear_potential_apply(x, bad, basis)


def test_nuclear_matrix_matches_mode_sum_oracle(basis, nuc):
    psi = _orthonormal(basis, 3, 4, 2)
    got = one_body_matrix(psi, basis, nuc, relativistic=True)
    want = oracles.one_body_oracle(psi, basis, nuc, True)
    assert np.linalg.norm(got - want) <= 1e-10 * np.linalg.norm(want)


def test_pair_density(basis):
    psi = _orthonormal(basis, 2, 4, 3)
    diag = pair_density(psi[0], psi[0], basis)
    assert np.all(np.abs(diag.imag) <= ATOL)
    assert np.all(diag.real >= -ATOL)
    scale = basis.volume / basis.n_modes
    off = scale * np.sum(pair_density(psi[0], psi[1], basis))
    assert abs(complex(off)) <= 1e-12
    total = scale * np.sum(diag)
    assert float(np.real(total)) == pytest.approx(1.0, abs=1e-12)


def test_coulomb_convolve(basis):
    zero = np.zeros(to_grid(np.zeros((basis.n_modes, 1), complex),
                            basis).shape[:-1])
    assert np.all(coulomb_convolve(zero, basis) == 0)

    # single nonzero mode picks up exactly its kernel multiplier
    coeffs = np.zeros(basis.n_modes, dtype=complex)
    coeffs[2] = 1.0
    wave = scalar_coeffs_to_grid(coeffs, basis)
    out = coulomb_convolve(wave, basis)
    mult = 4.0 * np.pi / basis.ksq[2]
    assert np.linalg.norm(out - mult * wave) <= 1e-10 * np.linalg.norm(
        mult * wave)

    rng = np.random.default_rng(4)
    rho = rng.standard_normal(zero.shape)
    quad = np.sum(rho * coulomb_convolve(rho, basis).real)
    assert quad >= -ATOL


def test_two_body_tensor_matches_mode_sum_oracle(basis):
    psi = _orthonormal(basis, 3, 4, 5)
    got = two_body_tensor(psi, basis)
    want = oracles.eri_oracle(psi, basis)
    assert np.linalg.norm(got - want) <= 1e-10 * (1.0 + np.linalg.norm(want))


def test_w_matrix_one_particle_vanishes(basis):
    space = CISpace(n_orbitals=2, n_particles=1)
    psi = _orthonormal(basis, 2, 4, 6)
    a = np.array([1.0, 0.0], dtype=complex)
    assert np.all(w_matrix(space, a, psi, basis) == 0)


def test_w_matrix_hermitian_grids(basis):
    space = CISpace(n_orbitals=3, n_particles=2)
    psi = _orthonormal(basis, 3, 4, 7)
    rng = np.random.default_rng(8)
    a = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    a /= np.linalg.norm(a)
    w = w_matrix(space, a, psi, basis)
    swapped = np.conj(np.swapaxes(w, 0, 1))
    assert np.linalg.norm(w - swapped) <= 1e-10 * (1.0 + np.linalg.norm(w))


def test_single_determinant_direct_exchange(basis):
    # <Psi, W Psi> for one determinant is sum_{i<j} (J_ij - K_ij)
    space = CISpace(n_orbitals=2, n_particles=2)
    psi = _orthonormal(basis, 2, 4, 9)
    a = np.array([1.0 + 0j])
    nuc0 = NuclearConfiguration(charges=(), positions=())
    e_two = energy(space, a, psi, basis, nuc0).two_body
    eri = oracles.eri_oracle(psi, basis)
    want = float(np.real(eri[0, 0, 1, 1] - eri[0, 1, 1, 0]))
    assert e_two == pytest.approx(want, abs=1e-12)


@pytest.mark.xfail(strict=True,
                   reason="the zero-mean periodic kernel admits negative "
                          "pair energies; see design notes")
def test_pair_energy_nonnegative(basis):
    space = CISpace(n_orbitals=4, n_particles=2)
    nuc0 = NuclearConfiguration(charges=(), positions=())
    rng = np.random.default_rng(10)
    psi = lowdin_orthonormalize(random_field(basis, 4, rng, (4,)))
    a = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    a /= np.linalg.norm(a)
    assert energy(space, a, psi, basis, nuc0).two_body >= 0.0


def test_pair_energy_negative_for_separated_orbitals(basis):
    # zero-mean kernel: two orbitals concentrated half a box apart couple
    # through the kernel's negative region
    L = basis.box_length
    env = np.exp(-0.5 * basis.ksq * 0.6**2)
    psi = np.zeros((2, basis.n_modes, 4), dtype=complex)
    psi[0, :, 0] = env
    psi[1, :, 0] = env * np.exp(-1j * (basis.kvecs @ np.array([L / 2] * 3)))
    psi = lowdin_orthonormalize(psi)
    space = CISpace(n_orbitals=2, n_particles=2)
    nuc0 = NuclearConfiguration(charges=(), positions=())
    assert energy(space, np.array([1.0 + 0j]), psi, basis, nuc0).two_body < 0.0


def test_fock_operator_free_particle_is_dirac(basis):
    space = CISpace(n_orbitals=1, n_particles=1)
    psi = _orthonormal(basis, 1, 4, 11)
    nuc0 = NuclearConfiguration(charges=(), positions=())
    op = FockOperator(space, np.array([1.0 + 0j]), psi, basis, nuc0)
    got = op.apply(psi)
    assert np.linalg.norm(got - apply_dirac(psi, basis)) <= 1e-10


def test_fock_operator_is_self_adjoint(basis, nuc):
    space = CISpace(n_orbitals=3, n_particles=2)
    psi = _orthonormal(basis, 3, 4, 12)
    rng = np.random.default_rng(13)
    a = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    a /= np.linalg.norm(a)
    op = FockOperator(space, a, psi, basis, nuc)
    x = random_field(basis, 4, rng, (3,))
    y = random_field(basis, 4, rng, (3,))
    lhs = complex(np.sum(inner_product(x, op.apply(y), basis)))
    rhs = complex(np.sum(inner_product(y, op.apply(x), basis)))
    assert lhs == pytest.approx(np.conj(rhs), abs=1e-10 * (1 + abs(lhs)))


def test_ci_hamiltonian_single_entry(basis, nuc):
    space = CISpace(n_orbitals=1, n_particles=1)
    psi = _orthonormal(basis, 1, 4, 14)
    h = ci_hamiltonian(space, psi, basis, nuc, relativistic=True)
    assert h.shape == (1, 1)
    want = one_body_matrix(psi, basis, nuc, relativistic=True)[0, 0]
    assert complex(h[0, 0]) == pytest.approx(complex(want), abs=1e-10)


@pytest.mark.parametrize("kn", [(2, 2), (3, 2), (4, 2), (3, 3)])
def test_ci_hamiltonian_matches_product_space_oracle(basis, nuc, kn):
    k, n = kn
    space = CISpace(n_orbitals=k, n_particles=n)
    psi = _orthonormal(basis, k, 4, 15 + k + n)
    got = ci_hamiltonian(space, psi, basis, nuc, relativistic=True)
    h1 = oracles.one_body_oracle(psi, basis, nuc, True)
    eri = oracles.eri_oracle(psi, basis)
    want = oracles.ci_matrix_oracle(k, n, h1, eri)
    assert np.abs(got - want).max() <= 1e-10 * (1.0 + np.abs(want).max())


def test_ci_hamiltonian_hermitian(basis, nuc):
    space = CISpace(n_orbitals=4, n_particles=2)
    psi = _orthonormal(basis, 4, 4, 16)
    h = ci_hamiltonian(space, psi, basis, nuc, relativistic=True)
    assert np.linalg.norm(h - h.conj().T) <= 1e-12 * (1.0 + np.linalg.norm(h))


def test_kato_bound(basis):
    empty = NuclearConfiguration(charges=(), positions=())
    rng = np.random.default_rng(17)
    x = random_field(basis, 4, rng)
    rep0 = kato_check(x, empty, basis)
    assert rep0.lhs == 0.0 and rep0.satisfied

    basis5 = PlaneWaveBasis(box_length=2 * np.pi, mode_bound=2, light_speed=C)
    z1 = NuclearConfiguration(charges=(1.0,), positions=((0.0, 0.0, 0.0),))
    for seed in range(5):
        y = random_field(basis5, 4, np.random.default_rng(100 + seed))
        rep = kato_check(y, z1, basis5)
        assert rep.satisfied
        assert rep.margin > 0.0
