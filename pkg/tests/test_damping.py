import math
import warnings

import numpy as np
import pytest

from qstruct import damping as dmp
from qstruct.correlations import mutual_information
from qstruct.errors import InvalidCoefficients, TruncationWarning
from qstruct.secondquant import build_fock_ops
from qstruct.tensor import DensityMatrix, random_density


def coherent_dm(alpha, dim):
    psi = dmp.coherent_state(alpha, dim)
    return np.outer(psi, psi.conj())


def low_fock_state(rng, dim=40, support=8):
    rho = np.zeros((dim, dim), dtype=complex)
    rho[:support, :support] = random_density(support, rng).matrix
    return rho


def lindblad_damping(rho, k, t, steps=4000):
    """RK4 oracle for ``drho/dt = k (2 a rho a^dag - {a^dag a, rho})``."""
    ops = build_fock_ops(rho.shape[0])
    a, ad, n = ops.a, ops.a_dag, ops.n

    def f(r):
        return k * (2 * a @ r @ ad - n @ r - r @ n)

    h = t / steps
    for _ in range(steps):
        k1 = f(rho)
        k2 = f(rho + h / 2 * k1)
        k3 = f(rho + h / 2 * k2)
        k4 = f(rho + h * k3)
        rho = rho + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return rho


# --- Kraus family and channel ----------------------------------------------------------


def test_kraus_at_time_zero_is_identity():
    ops = dmp.kraus_operators(0.5, 0.0, 6)
    assert len(ops) == 1
    np.testing.assert_array_equal(ops[0], np.eye(6))


def test_kraus_completeness():
    assert dmp.completeness_residual(dmp.kraus_operators(0.7, 1.0, 20)) < 1e-10


def test_kraus_list_truncates_small_tail():
    assert len(dmp.kraus_operators(1e-4, 1e-3, 30)) < 30


def test_kraus_rejects_bad_input():
    with pytest.raises(ValueError):
        dmp.kraus_operators(-1, 1, 5)
    with pytest.raises(ValueError):
        dmp.kraus_operators(1, 1, 1)


def test_full_damping_gives_vacuum(rng):
    out = dmp.apply_channel(low_fock_state(rng, 20), 1.0, 40.0)
    vac = np.zeros((20, 20))
    vac[0, 0] = 1
    np.testing.assert_allclose(out, vac, atol=1e-12)


def test_vacuum_is_fixed_point():
    vac = DensityMatrix(np.diag([1.0] + [0.0] * 9))
    out = dmp.apply_channel(vac, 0.3, 2.0)
    assert isinstance(out, DensityMatrix)
    np.testing.assert_allclose(out.matrix, vac.matrix, atol=1e-15)


def test_coherent_mean_position_contracts():
    rho = coherent_dm(1.0, 40)
    x0 = dmp.fock_moments(rho).x
    x1 = dmp.fock_moments(dmp.apply_channel(rho, 0.5, 1.0)).x
    assert np.isclose(x1, math.exp(-0.5) * x0, atol=1e-12)


def test_trace_preserved(rng):
    out = dmp.apply_channel(low_fock_state(rng, 30, 10), 0.4, 1.3)
    assert abs(np.trace(out) - 1) < 1e-10


def test_truncation_warning():
    with pytest.warns(TruncationWarning):
        dmp.apply_channel(coherent_dm(3.0, 10), 0.1, 0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        dmp.apply_channel(coherent_dm(0.5, 30), 0.1, 0.1)


def test_kraus_matches_master_equation(rng):
    rho = low_fock_state(rng, 20, 6)
    np.testing.assert_allclose(dmp.apply_channel(rho, 0.35, 1.7), lindblad_damping(rho, 0.35, 1.7), atol=1e-6)


def test_vacuum_fidelity_at_long_times():
    rho = coherent_dm(1.0, 40)
    for kt in (15.0, 20.0):
        out = dmp.apply_channel(rho, 0.5, kt / 0.5)
        assert out[0, 0].real >= 1 - 1e-6


# --- Heisenberg moments -----------------------------------------------------------------


def test_heisenberg_no_damping_unchanged():
    m = dmp.Moments(0.3, -0.2, 1.1, 0.9, 0.05)
    assert dmp.heisenberg_moments(m, 1.3, 0.7, 0.0, 5.0) == m


def test_heisenberg_long_time_limit():
    m = dmp.Moments(0.3, -0.2, 1.1, 0.9, 0.05)
    mass, w = 2.0, 0.5
    out = dmp.heisenberg_moments(m, mass, w, 1.0, 60.0)
    assert np.isclose(out.x2, 1 / (2 * mass * w))
    assert np.isclose(out.p2, mass * w / 2)
    assert np.isclose(out.uncertainty_product, 0.5)


def test_heisenberg_matches_kraus(rng):
    for _ in range(6):
        mass, w = rng.uniform(0.5, 2.0, 2)
        k, t = rng.uniform(0.1, 1.0), rng.uniform(0.0, 3.0)
        rho = low_fock_state(rng)
        m0 = dmp.fock_moments(rho, mass, w)
        got = dmp.fock_moments(dmp.apply_channel(rho, k, t), mass, w)
        np.testing.assert_allclose(got.as_array(), dmp.heisenberg_moments(m0, mass, w, k, t).as_array(), atol=1e-8)


# --- alternate structures of two modes ------------------------------------------------------


def test_mode_pair_validation():
    with pytest.raises(ValueError):
        dmp.ModePair(m1=-1.0)


def test_alt_coefficients_validation():
    with pytest.raises(InvalidCoefficients):
        dmp.AltCoefficients((1, 1), (1, 0), (1, 0), (0, 1))
    with pytest.raises(InvalidCoefficients):
        dmp.AltCoefficients((1, 0, 0), (0, 1), (1, 0), (0, 1))
    c = dmp.AltCoefficients.cm_relative(1.0, 3.0)
    assert c.admissibility_residual() < 1e-15


def test_identity_structure_is_minimal():
    pa, pb = dmp.asymptotic_uncertainty(dmp.ModePair(2.0, 0.5, 1.5, 0.7), dmp.AltCoefficients.identity())
    assert np.isclose(pa, 0.5) and np.isclose(pb, 0.5)


def test_cm_relative_equal_modes():
    pair = dmp.ModePair()
    c = dmp.AltCoefficients((0.5, 0.5), (1, -1), (1, 1), (0.5, -0.5))
    pa, pb = dmp.asymptotic_uncertainty(pair, c)
    assert abs(pa - 0.5) < 1e-9 and abs(pb - 0.5) < 1e-9
    assert abs(dmp.covariance_asymptotic(pair, c)) < 1e-9


def test_covariance_direct_readout():
    pair = dmp.ModePair(m1=2.0, w1=3.0)
    c = dmp.AltCoefficients((1, 0), (1, 0), (1, 0), (0, 1), validate=False)
    assert np.isclose(dmp.covariance_asymptotic(pair, c), 1 / (2 * 2.0 * 3.0))


def test_uncertainty_floor_for_random_structures(rng):
    pair = dmp.ModePair(1.0, 2.5, 0.7, 1.9)
    for _ in range(200):
        pa, pb = dmp.asymptotic_uncertainty(pair, dmp.AltCoefficients.random(rng))
        assert pa >= 0.5 - 1e-12 and pb >= 0.5 - 1e-12


def test_closed_forms_match_two_mode_simulation(rng):
    pair = dmp.ModePair(1.0, 2.0, 1.0, 1.5, 0.5, 0.5)
    cands = [dmp.AltCoefficients.random(rng) for _ in range(5)]
    for snap, c in zip(dmp.simulate_two_mode(pair, cands, 24.0), cands):
        pa, pb = dmp.asymptotic_uncertainty(pair, c)
        assert abs(snap.product_a - pa) < 1e-3
        assert abs(snap.product_b - pb) < 1e-3
        assert abs(snap.covariance - dmp.covariance_asymptotic(pair, c)) < 1e-3


def test_local_channels_keep_product_states(rng):
    d = 8
    a, b = low_fock_state(rng, d, 4), low_fock_state(rng, d, 4)
    rho = np.kron(a, b)
    rho = dmp.apply_local_channel(rho, dmp.kraus_operators(0.3, 1.0, d), (d, d), 0)
    rho = dmp.apply_local_channel(rho, dmp.kraus_operators(0.6, 1.0, d), (d, d), 1)
    assert abs(mutual_information(rho, (d, d))) < 1e-9
    np.testing.assert_allclose(rho, np.kron(dmp.apply_channel(a, 0.3, 1.0), dmp.apply_channel(b, 0.6, 1.0)),
                               atol=1e-14)


# --- preferred-structure scan ---------------------------------------------------------------


def test_scan_equal_modes_ties_identity_and_cm_relative(rng):
    generic = dmp.AltCoefficients.random(rng, "generic")
    scan = dmp.preferred_structure_scan(dmp.ModePair(), [dmp.AltCoefficients.identity(),
                                                         dmp.AltCoefficients.cm_relative(), generic])
    assert [e.label for e in scan[:2]] == ["identity", "cm-relative"]
    assert all(e.preferred and abs(e.score) < 1e-12 for e in scan[:2])
    assert scan[2].label == "generic" and scan[2].score > 0 and not scan[2].preferred


def test_scan_unequal_masses_breaks_cm_relative():
    c = dmp.AltCoefficients((0.5, 0.5), (1, -1), (1, 1), (0.5, -0.5), label="cm-equal")
    scan = dmp.preferred_structure_scan(dmp.ModePair(m1=1.0, m2=3.0), [c])
    assert scan[0].label == "identity"
    assert scan[1].score > 1e-3 and not scan[1].preferred


def test_scan_identity_only():
    scan = dmp.preferred_structure_scan(dmp.ModePair(), [dmp.AltCoefficients.identity()])
    assert len(scan) == 1 and scan[0].score == 0.0
