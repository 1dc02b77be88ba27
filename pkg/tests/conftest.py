import numpy as np
import pytest

from mcdflab.basis import PlaneWaveBasis
from mcdflab.ci import CISpace
from mcdflab.meanfield import NuclearConfiguration
from mcdflab.mchf import embed_to_positive, occupation_floor
from mcdflab.solver import SolverConfig, outer_minimize
from mcdflab.sweep import reference_chain, sweep_c


@pytest.fixture(scope="session")
def basis_m1():
    return PlaneWaveBasis(box_length=2 * np.pi, mode_bound=1, light_speed=40.0)


@pytest.fixture(scope="session")
def helium_nuc():
    return NuclearConfiguration(charges=(2.0,), positions=((0.0, 0.0, 0.0),),
                                smearing=0.3)


@pytest.fixture(scope="session")
def helium_space():
    return CISpace(n_orbitals=4, n_particles=2)


@pytest.fixture(scope="session")
def mchf_chain(helium_space, basis_m1, helium_nuc):
    """Reference results for K = 2, 3, 4 on the 3^3 helium problem."""
    return reference_chain(helium_space, basis_m1, helium_nuc)


@pytest.fixture(scope="session")
def gamma_half(helium_space, mchf_chain):
    return 0.5 * occupation_floor(helium_space, mchf_chain[-1])


@pytest.fixture(scope="session")
def solved_m1(helium_space, basis_m1, helium_nuc, mchf_chain, gamma_half):
    """Certified-quality relativistic solve at c = 40 on the 3^3 problem."""
    cfg = SolverConfig(gamma_floor=gamma_half)
    init = embed_to_positive(helium_space, mchf_chain[-1], basis_m1)
    return outer_minimize(helium_space, init, cfg, basis_m1, helium_nuc)


@pytest.fixture(scope="session")
def sweep_m1(helium_space, basis_m1, helium_nuc, mchf_chain, gamma_half):
    cfg = SolverConfig(gamma_floor=gamma_half)
    return sweep_c(helium_space, (20.0, 40.0, 80.0), basis_m1, helium_nuc,
                   cfg, reference=mchf_chain[-1])
