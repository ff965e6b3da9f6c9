import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qstruct import cv
from qstruct.errors import ConstraintViolated, DependentPairs, DimensionMismatch, NotPositiveDefinite


def random_model(n_env, rng, sign=1, system_frequency=1.5):
    masses = rng.uniform(0.5, 2.0, n_env)
    freqs = rng.uniform(0.5, 2.0, n_env)
    kappa = rng.uniform(0.05, 0.2, n_env) * np.sqrt(masses * freqs**2 * system_frequency**2 / n_env)
    return cv.CaldeiraLeggettModel(1.0, system_frequency, tuple(masses), tuple(freqs), tuple(kappa), sign)


# --- LCTs --------------------------------------------------------------------------


def test_cm_relative_two_equal_masses():
    s = cv.make_cm_relative([1.0, 1.0], [(0, 1)]).matrix
    np.testing.assert_allclose(s[0, :2], [0.5, 0.5])
    np.testing.assert_allclose(s[1, :2], [1.0, -1.0])
    np.testing.assert_allclose(s[2, 2:], [1.0, 1.0])
    np.testing.assert_allclose(s[3, 2:], [0.5, -0.5])


def test_cm_relative_three_particles_reduced_mass():
    lct = cv.make_cm_relative([1.0, 1.0, 1.0], [(0, 1), (0, 2)])
    lagr = cv.kinetic_mass_matrix(lct, [1.0, 1.0, 1.0])
    np.testing.assert_allclose(np.diag(lagr)[1:], [2 / 3, 2 / 3], atol=1e-14)
    assert np.isclose(lagr[0, 0], 3.0)


def test_cm_relative_is_canonical(rng):
    for n in (2, 3, 5, 9):
        masses = rng.uniform(0.1, 10, n)
        lct = cv.make_cm_relative(masses, cv.default_pairs(n - 1))
        assert cv.validate_canonical(lct) < 1e-12


def test_cm_relative_dependent_pairs():
    with pytest.raises(DependentPairs):
        cv.make_cm_relative([1, 1, 1], [(0, 1), (1, 0)])
    with pytest.raises(DependentPairs):
        cv.make_cm_relative([1, 1, 1], [(0, 1)])


def test_validate_canonical_examples():
    assert cv.validate_canonical(np.eye(4)) == 0.0
    s = np.array(cv.make_cm_relative([1.0, 1.0], [(0, 1)]).matrix)
    s[3] *= 2
    assert cv.validate_canonical(s) >= 1.0
    with pytest.raises(ValueError):
        cv.LinearCanonicalTransform(s)
    with pytest.raises(DimensionMismatch):
        cv.validate_canonical(np.eye(3))


@given(st.integers(min_value=1, max_value=4), st.integers(min_value=0, max_value=10_000))
@settings(max_examples=25, deadline=None)
def test_composition_and_inverse_are_canonical(n, seed):
    rng = np.random.default_rng(seed)
    a, b = cv.random_symplectic(n, rng), cv.random_symplectic(n, rng)
    assert cv.validate_canonical(a.compose(b)) < 1e-11
    np.testing.assert_allclose(a.inverse().matrix @ a.matrix, np.eye(2 * n), atol=1e-10)


# --- Hamiltonians ----------------------------------------------------------------------


def test_transform_two_body_pair_potential():
    k = 3.0
    h = cv.from_blocks(k * np.array([[1.0, -1.0], [-1.0, 1.0]]), np.eye(2))
    out = cv.transform_hamiltonian(h, cv.make_cm_relative([1.0, 1.0], [(0, 1)]))
    np.testing.assert_allclose(out.positions, np.diag([0.0, k]), atol=1e-14)
    np.testing.assert_allclose(out.momenta, np.diag([0.5, 2.0]), atol=1e-14)  # 1/M and 1/mu with mu = 1/2
    np.testing.assert_allclose(out.cross, 0, atol=1e-14)


def test_transform_identity_unchanged(rng):
    g = rng.normal(size=(4, 4))
    h = cv.QuadraticHamiltonian(g + g.T, rng.normal(size=4), 0.3)
    out = cv.transform_hamiltonian(h, cv.LinearCanonicalTransform(np.eye(4)))
    np.testing.assert_allclose(out.quadratic, h.quadratic)
    np.testing.assert_allclose(out.linear, h.linear)


def test_transform_dimension_mismatch():
    h = cv.from_blocks(np.eye(2), np.eye(2))
    with pytest.raises(DimensionMismatch):
        cv.transform_hamiltonian(h, cv.LinearCanonicalTransform(np.eye(6)))


def test_transform_preserves_normal_frequencies(rng):
    for _ in range(5):
        g = rng.normal(size=(3, 3))
        h = cv.from_blocks(g @ g.T + np.eye(3), np.diag(rng.uniform(0.5, 2, 3)))
        s = cv.random_symplectic(3, rng)
        out = cv.transform_hamiltonian(h, s)
        np.testing.assert_allclose(cv.normal_frequencies(out), cv.normal_frequencies(h), atol=1e-9)


def test_kinetic_energy_in_cm_relative_coordinates(rng):
    # sum p^2/2m -> P^2/2M + relative block whose velocity form has mu on the
    # diagonal and the mass-polarization entries -m_i m_j / M off it
    masses = rng.uniform(0.5, 3.0, 4)
    mtot = masses.sum()
    lct = cv.make_cm_relative(masses, cv.default_pairs(3))
    out = cv.transform_hamiltonian(cv.from_blocks(np.zeros((4, 4)), np.diag(1 / masses)), lct)
    assert np.isclose(out.momenta[0, 0], 1 / mtot, atol=1e-12)
    np.testing.assert_allclose(out.momenta[0, 1:], 0, atol=1e-12)
    lagr = np.linalg.inv(out.momenta[1:, 1:])
    env = masses[1:]
    mu = env * (mtot - env) / mtot
    np.testing.assert_allclose(np.diag(lagr), mu, atol=1e-12)
    off = lagr - np.diag(np.diag(lagr))
    expected = -np.outer(env, env) / mtot
    np.fill_diagonal(expected, 0)
    np.testing.assert_allclose(off, expected, atol=1e-12)
    np.testing.assert_allclose(cv.kinetic_mass_matrix(lct, masses)[1:, 1:], lagr, atol=1e-12)


def test_external_field_couples_cm_and_pair_potential_does_not(rng):
    masses = np.array([1.0, 2.0])
    lct = cv.make_cm_relative(masses, [(0, 1)])
    pair = cv.transform_hamiltonian(cv.from_blocks(np.array([[1.0, -1.0], [-1.0, 1.0]]), np.diag(1 / masses)), lct)
    np.testing.assert_allclose(pair.positions[0], 0, atol=1e-14)
    assert pair.positions[1, 1] > 0
    field = cv.transform_hamiltonian(cv.from_blocks(np.diag([1.0, 0.0]), np.diag(1 / masses)), lct)
    assert abs(field.positions[0, 1]) > 1e-3


# --- Caldeira-Leggett restructuring --------------------------------------------------------


def test_restructure_single_oscillator_cm_frequency():
    model = cv.CaldeiraLeggettModel(1.0, 0.0, (1.0,), (1.0,), (0.1,), 1)
    r = cv.caldeira_leggett_restructure(model)
    assert np.isclose(r.cm_harmonic / 2, 0.6)
    assert np.isclose(r.cm_frequency_sq, 0.6)


@pytest.mark.parametrize("n_env", [1, 2, 3, 5])
@pytest.mark.parametrize("sign", [1, -1])
def test_restructure_matches_direct_transform(n_env, sign, rng):
    model = random_model(n_env, rng, sign)
    direct = cv.transform_hamiltonian(model.hamiltonian(), cv.make_cm_relative(model.masses, cv.default_pairs(n_env)))
    formula = cv.caldeira_leggett_restructure(model).hamiltonian()
    np.testing.assert_allclose(formula.quadratic, direct.quadratic, atol=1e-10)


def test_restructure_uncoupled_couplings_and_polarization(rng):
    model = random_model(3, rng, system_frequency=0.0)
    free = cv.CaldeiraLeggettModel(model.system_mass, 0.0, model.env_masses, model.env_frequencies, (0.0,) * 3)
    r0 = cv.caldeira_leggett_restructure(free)
    r1 = cv.caldeira_leggett_restructure(model)
    omega = cv.inverse_map_coefficients(model.masses, cv.default_pairs(3))
    me, we = np.array(model.env_masses), np.array(model.env_frequencies)
    np.testing.assert_allclose(r0.couplings, omega[:, 1:] @ (me * we**2), atol=1e-13)
    np.testing.assert_allclose(r0.mass_polarization, r1.mass_polarization)


def test_restructure_constraint_violation():
    model = cv.CaldeiraLeggettModel(1.0, 0.0, (1.0,), (1.0,), (1.0,), -1)
    with pytest.raises(ConstraintViolated) as exc:
        cv.caldeira_leggett_restructure(model)
    assert "cm_harmonic_positive" in exc.value.which
    lax = cv.caldeira_leggett_restructure(model, strict=False)
    assert not lax.valid["cm_harmonic_positive"]


def test_restructure_self_polarization_toggle(rng):
    model = random_model(3, rng)
    kept = cv.caldeira_leggett_restructure(model)
    dropped = cv.caldeira_leggett_restructure(model, keep_self_polarization=False)
    np.testing.assert_allclose(np.diag(dropped.kinetic), 1 / dropped.reduced_masses)
    assert not np.allclose(np.diag(kept.kinetic), np.diag(dropped.kinetic))
    off = ~np.eye(3, dtype=bool)
    np.testing.assert_allclose(kept.kinetic[off], dropped.kinetic[off])


def test_restructure_rejects_inconsistent_omega(rng):
    model = random_model(2, rng)
    with pytest.raises(DimensionMismatch):
        cv.caldeira_leggett_restructure(model, np.zeros((2, 2)))
    with pytest.raises(ValueError):
        cv.caldeira_leggett_restructure(model, np.ones((2, 3)))


# --- normal modes and the pipeline -----------------------------------------------------------


def test_normal_modes_uncoupled():
    lct, lam = cv.normal_modes(cv.from_blocks(np.diag([1.0, 4.0]), np.eye(2)))
    np.testing.assert_allclose(lam, [1.0, 2.0])
    np.testing.assert_allclose(np.abs(lct.matrix), np.eye(4), atol=1e-12)


def test_normal_modes_coupled_pair():
    w2, c = 2.0, 0.5
    lct, lam = cv.normal_modes(cv.from_blocks(np.array([[w2, c], [c, w2]]), np.eye(2)))
    np.testing.assert_allclose(lam**2, [w2 - c, w2 + c], atol=1e-12)
    assert cv.validate_canonical(lct) < 1e-10


def test_normal_modes_diagonalize_general_block(rng):
    g = rng.normal(size=(4, 4))
    k = np.linalg.inv(np.diag(rng.uniform(0.5, 2, 4)) + 0.1 * (g + g.T) / 2)
    h = cv.from_blocks(g @ g.T + np.eye(4), k)
    lct, lam = cv.normal_modes(h)
    out = cv.transform_hamiltonian(h, lct)
    np.testing.assert_allclose(out.positions, np.diag(lam**2), atol=1e-10)
    np.testing.assert_allclose(out.momenta, np.eye(4), atol=1e-10)
    assert cv.validate_canonical(lct) < 1e-10


def test_normal_modes_not_positive_definite():
    with pytest.raises(NotPositiveDefinite):
        cv.normal_modes(cv.from_blocks(np.diag([1.0, -1.0]), np.eye(2)))


@pytest.mark.parametrize("n_env", [2, 4, 8])
def test_pipeline_decouples_environment(n_env, rng):
    model = random_model(n_env, rng)
    res = cv.full_qbm_pipeline(model)
    env = res.hamiltonian.positions[1:, 1:]
    np.testing.assert_allclose(env - np.diag(np.diag(env)), 0, atol=1e-10)
    np.testing.assert_allclose(res.hamiltonian.momenta[1:, 1:], np.eye(n_env), atol=1e-10)
    np.testing.assert_allclose(np.diag(env), res.env_frequencies**2, atol=1e-10)
    np.testing.assert_allclose(res.hamiltonian.positions[0, 1:], res.couplings, atol=1e-14)
    np.testing.assert_allclose(np.sort(cv.normal_frequencies(res.hamiltonian)),
                               np.sort(cv.normal_frequencies(model.hamiltonian())), atol=1e-8)
    direct = cv.transform_hamiltonian(model.hamiltonian(), res.total_lct)
    np.testing.assert_allclose(direct.quadratic, res.hamiltonian.quadratic, atol=1e-9)


def test_pipeline_uncoupled_uniform_model_has_no_coupling():
    # with kappa = 0 the relative coordinates feel the CM only through unequal
    # frequencies, so a uniform frequency gives sigma' = 0
    model = cv.CaldeiraLeggettModel(1.0, 1.3, (1.0, 2.0, 0.5), (1.3, 1.3, 1.3), (0.0, 0.0, 0.0))
    res = cv.full_qbm_pipeline(model)
    np.testing.assert_allclose(res.couplings, 0, atol=1e-12)
