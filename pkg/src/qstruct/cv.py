"""Linear canonical transformations and the Caldeira-Leggett restructuring.

Phase-space vectors are ordered ``(x_1, ..., x_n, p_1, ..., p_n)`` and the
symplectic form is ``J = [[0, I], [-I, 0]]``. Units are hbar = 1.

A quadratic Hamiltonian is stored as ``H = xi^T Q xi / 2 + l^T xi + c``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag, expm

from .errors import ConstraintViolated, DependentPairs, DimensionMismatch, NotPositiveDefinite

CANONICAL_TOL = 1e-10


def symplectic_form(n: int) -> np.ndarray:
    z = np.zeros((n, n))
    i = np.eye(n)
    return np.block([[z, i], [-i, z]])


def validate_canonical(lct) -> float:
    """``max |S J S^T - J|`` for an LCT or a raw even-dimensional matrix."""
    s = lct.matrix if isinstance(lct, LinearCanonicalTransform) else np.asarray(lct, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2:
        raise DimensionMismatch(f"need a square even-dimensional matrix, got {s.shape}")
    j = symplectic_form(s.shape[0] // 2)
    return float(np.max(np.abs(s @ j @ s.T - j)))


@dataclass(frozen=True)
class LinearCanonicalTransform:
    """Real symplectic matrix acting as ``xi_new = S @ xi_old``."""

    matrix: np.ndarray
    description: str = ""

    def __post_init__(self):
        s = np.array(self.matrix, dtype=float)
        res = validate_canonical(s)
        if res > CANONICAL_TOL * max(1.0, np.max(np.abs(s)) ** 2):
            raise ValueError(f"matrix is not symplectic (residual {res:.3e})")
        s.setflags(write=False)
        object.__setattr__(self, "matrix", s)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def compose(self, first: "LinearCanonicalTransform") -> "LinearCanonicalTransform":
        """``self ∘ first``: apply ``first`` and then ``self``."""
        return LinearCanonicalTransform(self.matrix @ first.matrix, f"{self.description} ∘ {first.description}")

    def inverse(self) -> "LinearCanonicalTransform":
        n = self.n_modes
        j = symplectic_form(n)
        # S^{-1} = -J S^T J for symplectic S
        return LinearCanonicalTransform(-j @ self.matrix.T @ j, f"inverse({self.description})")

    def position_block(self) -> np.ndarray:
        n = self.n_modes
        return self.matrix[:n, :n]


def point_transform(a: np.ndarray, description: str = "") -> LinearCanonicalTransform:
    """Canonical completion of the position map ``x_new = A x``: ``p_new = A^{-T} p``."""
    a = np.asarray(a, dtype=float)
    return LinearCanonicalTransform(block_diag(a, np.linalg.inv(a).T), description)


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 0.5) -> LinearCanonicalTransform:
    g = rng.normal(scale=scale, size=(2 * n, 2 * n))
    return LinearCanonicalTransform(expm(symplectic_form(n) @ (g + g.T) / 2), "random")


@dataclass(frozen=True)
class QuadraticHamiltonian:
    quadratic: np.ndarray
    linear: np.ndarray | None = None
    constant: float = 0.0

    def __post_init__(self):
        q = np.array(self.quadratic, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] % 2:
            raise DimensionMismatch(f"quadratic part must be 2n x 2n, got {q.shape}")
        if np.max(np.abs(q - q.T)) > 1e-12 * max(1.0, np.max(np.abs(q))):
            raise ValueError("quadratic part is not symmetric")
        q = (q + q.T) / 2
        lin = np.zeros(q.shape[0]) if self.linear is None else np.array(self.linear, dtype=float)
        if lin.shape != (q.shape[0],):
            raise DimensionMismatch("linear part has the wrong length")
        q.setflags(write=False)
        lin.setflags(write=False)
        object.__setattr__(self, "quadratic", q)
        object.__setattr__(self, "linear", lin)

    @property
    def n_modes(self) -> int:
        return self.quadratic.shape[0] // 2

    @property
    def positions(self) -> np.ndarray:
        n = self.n_modes
        return self.quadratic[:n, :n]

    @property
    def momenta(self) -> np.ndarray:
        n = self.n_modes
        return self.quadratic[n:, n:]

    @property
    def cross(self) -> np.ndarray:
        n = self.n_modes
        return self.quadratic[:n, n:]

    def dynamical_matrix(self) -> np.ndarray:
        """``J Q``: the generator of ``d xi / dt`` for the linear part."""
        return symplectic_form(self.n_modes) @ self.quadratic

    def energy(self, xi: np.ndarray) -> float:
        xi = np.asarray(xi, dtype=float)
        return float(xi @ self.quadratic @ xi / 2 + self.linear @ xi + self.constant)


def from_blocks(positions: np.ndarray, momenta: np.ndarray) -> QuadraticHamiltonian:
    return QuadraticHamiltonian(block_diag(positions, momenta))


def transform_hamiltonian(h: QuadraticHamiltonian, lct: LinearCanonicalTransform) -> QuadraticHamiltonian:
    """Rewrite ``h`` in the coordinates ``xi' = S xi``.

    ``Q' = S^{-T} Q S^{-1}`` and ``l' = S^{-T} l``.
    """
    if lct.matrix.shape != h.quadratic.shape:
        raise DimensionMismatch(f"LCT {lct.matrix.shape} vs Hamiltonian {h.quadratic.shape}")
    sinv = lct.inverse().matrix
    q = sinv.T @ h.quadratic @ sinv
    return QuadraticHamiltonian((q + q.T) / 2, sinv.T @ h.linear, h.constant)


def normal_frequencies_squared(h: QuadraticHamiltonian) -> np.ndarray:
    """Squared classical normal frequencies, ascending.

    For Hamiltonians without position-momentum cross terms this is the
    spectrum of ``K^{1/2} V K^{1/2}`` (negative entries flag instability);
    otherwise ``-(eigenvalues of J Q)^2`` is used.
    """
    if np.max(np.abs(h.cross), initial=0.0) == 0.0:
        kh = _sqrtm_psd(h.momenta)
        return np.sort(np.linalg.eigvalsh(kh @ h.positions @ kh))
    ev = np.linalg.eigvals(h.dynamical_matrix())
    w2 = np.sort((-(ev**2)).real)
    return w2[::2]


def normal_frequencies(h: QuadraticHamiltonian) -> np.ndarray:
    w2 = normal_frequencies_squared(h)
    if np.any(w2 < -1e-12):
        raise NotPositiveDefinite("Hamiltonian has unstable (imaginary-frequency) modes")
    return np.sqrt(np.clip(w2, 0, None))


def _sqrtm_psd(m: np.ndarray, inverse: bool = False) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.T) / 2)
    if np.any(w <= 0):
        raise NotPositiveDefinite("matrix is not positive definite")
    r = w ** (-0.5 if inverse else 0.5)
    return (v * r) @ v.T


# ---------------------------------------------------------------------------
# center of mass and relative coordinates


def _position_matrix(masses: np.ndarray, pairs: Sequence[tuple]) -> np.ndarray:
    n = masses.size
    a = np.zeros((n, n))
    a[0] = masses / masses.sum()
    for l, (i, j) in enumerate(pairs, start=1):
        a[l, i] += 1.0
        a[l, j] -= 1.0
    return a


def make_cm_relative(masses: Sequence[float], pairs: Sequence[tuple]) -> LinearCanonicalTransform:
    """Center of mass plus relative coordinates ``rho_l = x_i - x_j``.

    Output coordinates are ``(X_cm, rho_1, ..., rho_{N-1})`` followed by their
    conjugate momenta ``(P_cm, p_1, ...)``; the momentum rows are the unique
    canonical completion ``A^{-T}``. Pairs are 0-based particle indices.

    Raises:
        DependentPairs: if the differences do not span N-1 dimensions.
    """
    m = np.asarray(masses, dtype=float)
    if m.size < 2 or np.any(m <= 0):
        raise ValueError("need at least two positive masses")
    pairs = [tuple(int(v) for v in p) for p in pairs]
    if len(pairs) != m.size - 1:
        raise DependentPairs(f"need {m.size - 1} pairs, got {len(pairs)}")
    a = _position_matrix(m, pairs)
    if np.linalg.matrix_rank(a[1:]) < m.size - 1 or any(i == j for i, j in pairs):
        raise DependentPairs(f"pairs {pairs} are rank deficient")
    return point_transform(a, f"CM/R pairs={pairs}")


def inverse_map_coefficients(masses: Sequence[float], pairs: Sequence[tuple]) -> np.ndarray:
    """Coefficients ``w[l, a]`` of ``x_a = X_cm + sum_l w[l, a] rho_l``."""
    m = np.asarray(masses, dtype=float)
    a = make_cm_relative(m, pairs).position_block()
    ainv = np.linalg.inv(a)
    return ainv[:, 1:].T.copy()


def kinetic_mass_matrix(lct: LinearCanonicalTransform, masses: Sequence[float]) -> np.ndarray:
    """Velocity-form mass matrix: ``sum m_i xdot_i^2 / 2 = qdot^T L qdot / 2``.

    Only defined for point transformations (no position-momentum mixing).
    """
    n = lct.n_modes
    if np.max(np.abs(lct.matrix[:n, n:])) > 0 or np.max(np.abs(lct.matrix[n:, :n])) > 0:
        raise ValueError("kinetic_mass_matrix needs a point transformation")
    ainv = np.linalg.inv(lct.position_block())
    return ainv.T @ np.diag(np.asarray(masses, dtype=float)) @ ainv


# ---------------------------------------------------------------------------
# Caldeira-Leggett model


@dataclass(frozen=True)
class CaldeiraLeggettModel:
    """One particle bilinearly coupled to independent oscillators.

    ``H = p_S^2/2m_S + m_S w_S^2 x_S^2/2 + sum_i (p_i^2/2m_i + m_i w_i^2 x_i^2/2)
    + sign * x_S sum_i kappa_i x_i``; ``system_frequency = 0`` is a free particle.
    """

    system_mass: float
    system_frequency: float
    env_masses: tuple
    env_frequencies: tuple
    couplings: tuple
    coupling_sign: int = 1

    def __post_init__(self):
        for name in ("env_masses", "env_frequencies", "couplings"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        n = len(self.env_masses)
        if len(self.env_frequencies) != n or len(self.couplings) != n:
            raise DimensionMismatch("environment parameter tuples must have equal length")
        if self.system_mass <= 0 or any(m <= 0 for m in self.env_masses):
            raise ValueError("masses must be positive")
        if any(w <= 0 for w in self.env_frequencies):
            raise ValueError("environment frequencies must be positive")
        if self.coupling_sign not in (1, -1):
            raise ValueError("coupling_sign must be +1 or -1")

    @property
    def n_env(self) -> int:
        return len(self.env_masses)

    @property
    def masses(self) -> np.ndarray:
        return np.array((self.system_mass,) + self.env_masses)

    def hamiltonian(self) -> QuadraticHamiltonian:
        """Quadratic form in ``(x_S, x_1..x_N, p_S, p_1..p_N)``."""
        m = self.masses
        w = np.array((self.system_frequency,) + self.env_frequencies)
        v = np.diag(m * w**2)
        k = self.coupling_sign * np.array(self.couplings)
        v[0, 1:] = k
        v[1:, 0] = k
        return from_blocks(v, np.diag(1 / m))


def default_pairs(n_env: int) -> list:
    """``rho_i = x_{E_i} - x_S`` (particle 0 is the open system)."""
    return [(i, 0) for i in range(1, n_env + 1)]


@dataclass(frozen=True)
class RestructuredModel:
    """Coefficients of the Caldeira-Leggett Hamiltonian in CM + relative form.

    ``H = P^2/2M + cm_harmonic X^2/2 + p^T kinetic p/2 + rho^T positions rho/2
    + X sum_i sigma_i rho_i`` with ``positions[i, i] = mu_i nu_i^2``.
    Coupling signs are absorbed into ``sigma``.
    """

    total_mass: float
    cm_harmonic: float  # M Omega'^2
    reduced_masses: np.ndarray  # mu_i, velocity-form diagonal
    env_harmonic: np.ndarray  # mu_i nu_i^2
    couplings: np.ndarray  # sigma_i
    mass_polarization: np.ndarray  # C_ij, zero diagonal
    omega_i: np.ndarray  # Omega_i = sum_j kappa_j w_ij
    omega_ij: np.ndarray  # Omega_ij = sum_k m_k w_k^2 w_ik w_jk / 2
    positions: np.ndarray  # full rho-rho Hessian (includes V_E')
    kinetic: np.ndarray  # inverse mass matrix for relative momenta
    self_polarization_kept: bool
    valid: dict = field(default_factory=dict)

    @property
    def cm_frequency_sq(self) -> float:
        return self.cm_harmonic / self.total_mass

    @property
    def env_frequencies_sq(self) -> np.ndarray:
        return self.env_harmonic / self.reduced_masses

    def hamiltonian(self) -> QuadraticHamiltonian:
        """Quadratic form in ``(X, rho_1.., P, p_1..)``."""
        n = self.couplings.size
        v = np.zeros((n + 1, n + 1))
        v[0, 0] = self.cm_harmonic
        v[0, 1:] = v[1:, 0] = self.couplings
        v[1:, 1:] = self.positions
        k = np.zeros((n + 1, n + 1))
        k[0, 0] = 1 / self.total_mass
        k[1:, 1:] = self.kinetic
        return from_blocks(v, k)


def caldeira_leggett_restructure(
    model: CaldeiraLeggettModel,
    omega: np.ndarray | None = None,
    keep_self_polarization: bool = True,
    strict: bool = True,
) -> RestructuredModel:
    """Evaluate the CM/relative coefficients of a Caldeira-Leggett model.

    Args:
        model: the original S + E model.
        omega: inverse-map coefficients, shape ``(N, N + 1)``; column 0 is the
            open system, column ``j`` the ``j``-th oscillator. Defaults to the
            coefficients of :func:`default_pairs`.
        keep_self_polarization: keep the ``i = j`` mass-polarization part of
            the relative kinetic energy. ``False`` replaces the diagonal of the
            inverse mass matrix by ``1/mu_i``.
        strict: raise on a failed constraint instead of only flagging it.

    Raises:
        ConstraintViolated: ``M Omega'^2 > 0`` or some ``mu_i nu_i^2 > 0`` fails.
    """
    n = model.n_env
    masses = model.masses
    if omega is None:
        omega = inverse_map_coefficients(masses, default_pairs(n))
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (n, n + 1):
        raise DimensionMismatch(f"omega must have shape {(n, n + 1)}, got {omega.shape}")
    if np.max(np.abs(omega @ masses)) > 1e-10 * masses.sum():
        raise ValueError("omega is inconsistent with the center of mass (sum_a m_a w_la != 0)")

    s = model.coupling_sign
    kap = np.array(model.couplings)
    me = np.array(model.env_masses)
    we2 = np.array(model.env_frequencies) ** 2
    ms, ws2 = model.system_mass, model.system_frequency**2
    w_s = omega[:, 0]  # w_{iS}
    w_e = omega[:, 1:]  # w_{ij}

    total_mass = float(masses.sum())
    cm_harmonic = 2 * np.sum(s * kap + me * we2 / 2) + ms * ws2
    omega_i = w_e @ kap
    omega_ij = (w_e * (me * we2)) @ w_e.T / 2
    env_harmonic = 2 * (s * w_s * omega_i + (w_e**2) @ (me * we2) / 2) + ms * ws2 * w_s**2
    sigma = s * omega_i + s * w_s * kap.sum() + w_e @ (me * we2) + ms * ws2 * w_s
    cross = 2 * omega_ij + s * (np.outer(w_s, omega_i) + np.outer(omega_i, w_s)) + ms * ws2 * np.outer(w_s, w_s)
    positions = cross.copy()
    np.fill_diagonal(positions, env_harmonic)

    lagr = (omega * masses) @ omega.T
    reduced = np.diag(lagr).copy()
    polarization = -(lagr - np.diag(reduced))
    kinetic = np.linalg.inv(lagr)
    if not keep_self_polarization:
        np.fill_diagonal(kinetic, 1 / reduced)

    valid = {"cm_harmonic_positive": bool(cm_harmonic > 0)}
    for i, v in enumerate(env_harmonic):
        valid[f"env_harmonic_positive_{i}"] = bool(v > 0)
    if strict and not all(valid.values()):
        failed = [k for k, ok in valid.items() if not ok]
        raise ConstraintViolated(f"restructured model violates {failed}", failed)
    return RestructuredModel(
        total_mass=total_mass,
        cm_harmonic=float(cm_harmonic),
        reduced_masses=reduced,
        env_harmonic=env_harmonic,
        couplings=sigma,
        mass_polarization=polarization,
        omega_i=omega_i,
        omega_ij=omega_ij,
        positions=positions,
        kinetic=kinetic,
        self_polarization_kept=keep_self_polarization,
        valid=valid,
    )


def normal_modes(h: QuadraticHamiltonian):
    """Decouple ``p^T K p/2 + x^T V x/2`` into unit-mass normal oscillators.

    Two congruences: ``y = K^{-1/2} x`` makes the kinetic term ``pi^T pi/2``,
    then the eigenvectors ``O`` of ``K^{1/2} V K^{1/2}`` give ``Q = O^T y``.

    Returns:
        ``(lct, frequencies)`` with ``Q = lct`` applied to ``(x, p)`` and
        ascending frequencies ``lambda_i``.

    Raises:
        NotPositiveDefinite: if ``V`` (or ``K``) is not positive definite.
    """
    if np.max(np.abs(h.cross), initial=0.0) > 0:
        raise ValueError("normal_modes expects no position-momentum cross terms")
    kh = _sqrtm_psd(h.momenta)
    khinv = _sqrtm_psd(h.momenta, inverse=True)
    w2, o = np.linalg.eigh(kh @ h.positions @ kh)
    if np.any(w2 <= 0):
        raise NotPositiveDefinite(f"position block not positive definite (min eigenvalue {w2.min():.3e})")
    lct = LinearCanonicalTransform(block_diag(o.T @ khinv, o.T @ kh), "normal modes")
    return lct, np.sqrt(w2)


@dataclass(frozen=True)
class QbmPipelineResult:
    hamiltonian: QuadraticHamiltonian  # in (X, Q_1.., P, P_1..)
    restructured: RestructuredModel
    cm_lct: LinearCanonicalTransform
    normal_mode_lct: LinearCanonicalTransform  # acts on (X, rho, P, p)
    env_frequencies: np.ndarray
    couplings: np.ndarray  # sigma'_i, sign absorbed

    @property
    def total_lct(self) -> LinearCanonicalTransform:
        return self.normal_mode_lct.compose(self.cm_lct)


def full_qbm_pipeline(model: CaldeiraLeggettModel, omega: np.ndarray | None = None,
                      pairs: Sequence[tuple] | None = None) -> QbmPipelineResult:
    """S + E  ->  CM + relative  ->  CM + relative normal modes.

    The intermediate Hamiltonian is assembled from the restructuring
    coefficients; the final one has uncoupled unit-mass environment
    oscillators and a bilinear ``X sum sigma'_i Q_i`` coupling.
    """
    n = model.n_env
    pairs = default_pairs(n) if pairs is None else list(pairs)
    if omega is None:
        omega = inverse_map_coefficients(model.masses, pairs)
    restructured = caldeira_leggett_restructure(model, omega)
    h1 = restructured.hamiltonian()
    env = from_blocks(restructured.positions, restructured.kinetic)
    env_lct, freqs = normal_modes(env)
    aq = env_lct.matrix[:n, :n]
    ap = env_lct.matrix[n:, n:]
    full = LinearCanonicalTransform(block_diag(1.0, aq, 1.0, ap), "CM ⊕ normal modes")
    h2 = transform_hamiltonian(h1, full)
    sigma_prime = h2.positions[0, 1:].copy()
    return QbmPipelineResult(h2, restructured, make_cm_relative(model.masses, pairs), full, freqs, sigma_prime)
