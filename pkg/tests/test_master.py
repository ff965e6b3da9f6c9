import numpy as np
import pytest
from scipy.linalg import expm

from qstruct import master
from qstruct.damping import coherent_state
from qstruct.errors import StepSizeTooLarge


def coherent_dm(alpha, dim):
    psi = coherent_state(alpha, dim)
    return np.outer(psi, psi.conj())


def test_closed_limit_conserves_energy_and_is_unitary():
    dim = 30
    h = master.harmonic_hamiltonian(dim) + 0.05 * np.diag(np.arange(dim) ** 2)
    rho0 = coherent_dm(1.0, dim)
    ts = np.linspace(0, 2, 5)
    traj = master.integrate_qbm_master(rho0, 1.0, 0.0, 1.0, h, ts, decoherence=False)
    e0 = np.trace(h @ rho0).real
    for t, r in zip(ts, traj.states):
        assert abs(np.trace(h @ r).real - e0) < 1e-8
        u = expm(-1j * h * t)
        np.testing.assert_allclose(r, u @ rho0 @ u.conj().T, atol=1e-8)


def test_trace_preserved_with_all_terms():
    dim = 25
    traj = master.integrate_qbm_master(coherent_dm(1.0, dim), 1.0, 0.05, 2.0, master.harmonic_hamiltonian(dim),
                                       np.linspace(0, 1, 3))
    assert traj.max_trace_drift < 1e-8


def test_step_size_too_large():
    dim = 30
    with pytest.raises(StepSizeTooLarge):
        master.integrate_qbm_master(coherent_dm(1.0, dim), 1.0, 1.0, 100.0, master.harmonic_hamiltonian(dim),
                                    [0.0, 1.0], step=0.5)


def test_rejects_bad_parameters():
    with pytest.raises(ValueError):
        master.integrate_qbm_master(coherent_dm(0.5, 5), 1.0, -0.1, 1.0, np.eye(5), [0, 1])
    with pytest.raises(ValueError):
        master.integrate_qbm_master(coherent_dm(0.5, 5), 1.0, 0.1, 0.0, np.eye(5), [0, 1])


def test_position_wavefunctions_are_orthonormal():
    xs = np.linspace(-12, 12, 4001)
    phi = master.position_wavefunctions(xs, 12, mass=1.7, freq=0.6)
    gram = phi @ phi.T * (xs[1] - xs[0])
    np.testing.assert_allclose(gram, np.eye(12), atol=1e-10)


def test_position_element_of_vacuum():
    rho = np.zeros((10, 10))
    rho[0, 0] = 1
    val = master.position_element(rho, 0.3, -0.2)
    assert np.isclose(val, np.pi**-0.5 * np.exp(-(0.3**2 + 0.2**2) / 2))


def test_cat_coherence_rate_ratio():
    r1 = master.cat_coherence_rate(1.0)
    r2 = master.cat_coherence_rate(2.0)
    # pure position decoherence gives exp(-D d^2 t) with D = 2 m gamma k T = 1 and d = 2 sqrt(2) alpha
    assert abs(r1 - 8.0) / 8.0 < 0.05
    assert abs(r2 / r1 - 4) < 0.2


def test_gaussian_states_stay_gaussian():
    dim = 30
    traj = master.integrate_qbm_master(coherent_dm(1.0, dim), 1.0, 0.1, 1.0, master.harmonic_hamiltonian(dim),
                                       np.linspace(0, 1, 6))
    for r in traj.states:
        assert abs(master.fourth_cumulant(r)) < 1e-6
