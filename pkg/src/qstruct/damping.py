"""Amplitude damping of oscillators and asymptotics of alternate mode structures.

The channel ``drho/dt = k (2 a rho a^dag - {a^dag a, rho})`` has the Kraus
family ``K_n = sqrt(p^n / n!) exp(-k t N) a^n`` with ``p = 1 - exp(-2 k t)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidCoefficients, TruncationWarning
from .secondquant import build_fock_ops, quadratures
from .tensor import DensityMatrix

KRAUS_TAIL = 1e-12
TOP_LEVEL_WARN = 1e-8
ADMISSIBLE_TOL = 1e-9


def kraus_operators(k: float, t: float, dim: int) -> list:
    """Kraus family of the amplitude-damping channel on a ``dim``-level truncation.

    The list stops once an operator's norm falls below 1e-12 (or at ``n = dim-1``).
    Completeness holds on the whole truncated space since each ``|m>`` only
    feeds binomially into ``|m-n>``.
    """
    if k < 0 or t < 0 or dim < 2:
        raise ValueError("need k >= 0, t >= 0 and dim >= 2")
    ops = build_fock_ops(dim)
    p = -math.expm1(-2 * k * t)
    damp = np.diag(np.exp(-k * t * np.arange(dim)))
    out = []
    an = np.eye(dim, dtype=complex)
    for n in range(dim):
        kn = math.sqrt(p**n / math.factorial(n)) * damp @ an
        if n > 0 and np.linalg.norm(kn, 2) < KRAUS_TAIL:
            break
        out.append(kn)
        an = an @ ops.a
    return out


def completeness_residual(kraus: list) -> float:
    s = sum(k.conj().T @ k for k in kraus)
    return float(np.max(np.abs(s - np.eye(s.shape[0]))))


def apply_kraus(rho: np.ndarray, kraus: list) -> np.ndarray:
    return sum(k @ rho @ k.conj().T for k in kraus)


def apply_channel(rho, k: float, t: float):
    """Damp a single-mode Fock-basis state for time ``t``.

    Warns with :class:`TruncationWarning` if the top Fock level holds more than
    1e-8 population, since the truncated evolution is then unreliable.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    top = float(np.real(m[-1, -1]))
    if top > TOP_LEVEL_WARN:
        warnings.warn(f"top Fock level population {top:.2e} exceeds {TOP_LEVEL_WARN:g}", TruncationWarning,
                      stacklevel=2)
    out = apply_kraus(m, kraus_operators(k, t, m.shape[0]))
    return DensityMatrix(out) if isinstance(rho, DensityMatrix) else out


def apply_local_channel(rho: np.ndarray, kraus: list, dims, site: int) -> np.ndarray:
    """Apply a Kraus family acting on one factor of a multimode state."""
    dims = list(dims)
    n = len(dims)
    t = rho.reshape(dims + dims)
    out = np.zeros_like(t)
    for kop in kraus:
        a = np.moveaxis(np.tensordot(kop, t, axes=([1], [site])), 0, site)
        a = np.moveaxis(np.tensordot(a, kop.conj(), axes=([n + site], [1])), -1, n + site)
        out += a
    return out.reshape(rho.shape)


def coherent_state(alpha: complex, dim: int) -> np.ndarray:
    """Truncated coherent-state ket ``e^{-|alpha|^2/2} sum alpha^n / sqrt(n!) |n>``."""
    n = np.arange(dim)
    logs = np.array([0.5 * math.lgamma(j + 1) for j in n])
    amp = np.exp(-abs(alpha) ** 2 / 2 - logs) * np.power(complex(alpha), n)
    return amp


@dataclass(frozen=True)
class Moments:
    """First and second moments; ``xp`` is the symmetrized ``<(xp + px)/2>``."""

    x: float
    p: float
    x2: float
    p2: float
    xp: float = 0.0

    @property
    def var_x(self) -> float:
        return self.x2 - self.x**2

    @property
    def var_p(self) -> float:
        return self.p2 - self.p**2

    @property
    def uncertainty_product(self) -> float:
        return math.sqrt(max(self.var_x, 0.0) * max(self.var_p, 0.0))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.p, self.x2, self.p2, self.xp])


def fock_moments(rho, mass: float = 1.0, freq: float = 1.0) -> Moments:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    x, p = quadratures(build_fock_ops(m.shape[0]), mass, freq)
    x2 = _untruncated_square(x, m.shape[0], mass, freq, "x")
    p2 = _untruncated_square(p, m.shape[0], mass, freq, "p")

    def ev(op):
        return float(np.real(np.trace(m @ op)))

    return Moments(ev(x), ev(p), ev(x2), ev(p2), ev((x @ p + p @ x) / 2))


def _untruncated_square(q: np.ndarray, dim: int, mass: float, freq: float, which: str) -> np.ndarray:
    # q @ q loses the a a^dag contribution on the top level; build the square
    # from a^2, a^dag^2 and 2N + 1 directly so it is exact on the truncation.
    ops = build_fock_ops(dim)
    aa = ops.a @ ops.a
    core = 2 * ops.n + np.eye(dim)
    if which == "x":
        return (aa + aa.conj().T + core) / (2 * mass * freq)
    return mass * freq * (core - aa - aa.conj().T) / 2


def heisenberg_moments(initial: Moments, mass: float, freq: float, k: float, t: float,
                       hbar: float = 1.0) -> Moments:
    """Closed-form damped moments.

    ``x(t) = e^{-kt} x``; ``x^2(t) = e^{-2kt} x^2 + (hbar / 2 m w)(1 - e^{-2kt})``;
    ``p^2(t) = e^{-2kt} p^2 + (m w hbar / 2)(1 - e^{-2kt})``; the symmetrized
    cross moment decays as ``e^{-2kt}``.
    """
    e1 = math.exp(-k * t)
    e2 = e1 * e1
    g = -math.expm1(-2 * k * t)
    return Moments(
        x=e1 * initial.x,
        p=e1 * initial.p,
        x2=e2 * initial.x2 + hbar / (2 * mass * freq) * g,
        p2=e2 * initial.p2 + mass * freq * hbar / 2 * g,
        xp=e2 * initial.xp,
    )


# ---------------------------------------------------------------------------
# two uncoupled damped modes and alternate structures


@dataclass(frozen=True)
class ModePair:
    m1: float = 1.0
    m2: float = 1.0
    w1: float = 1.0
    w2: float = 1.0
    k1: float = 0.5
    k2: float = 0.5

    def __post_init__(self):
        if min(self.m1, self.m2, self.w1, self.w2, self.k1, self.k2) <= 0:
            raise ValueError("ModePair parameters must all be positive")

    @property
    def masses(self) -> np.ndarray:
        return np.array([self.m1, self.m2])

    @property
    def freqs(self) -> np.ndarray:
        return np.array([self.w1, self.w2])


@dataclass(frozen=True)
class AltCoefficients:
    """Structure ``A = (X_A, P_A)``, ``B = (xi_B, pi_B)`` built from two modes.

    ``X_A = alpha . x``, ``xi_B = beta . x``, ``P_A = gamma . p``,
    ``pi_B = delta . p``. Canonical pairs need ``sum alpha gamma = 1 =
    sum beta delta`` and ``sum alpha delta = 0 = sum beta gamma``, i.e.
    ``A_x A_p^T = I`` with rows ``(alpha, beta)`` and ``(gamma, delta)``.
    """

    alpha: tuple
    beta: tuple
    gamma: tuple
    delta: tuple
    label: str = ""
    validate: bool = field(default=True, compare=False)

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            v = tuple(float(c) for c in getattr(self, name))
            if len(v) != 2:
                raise InvalidCoefficients(f"{name} must have two entries")
            object.__setattr__(self, name, v)
        if self.validate:
            res = self.admissibility_residual()
            if res > ADMISSIBLE_TOL:
                raise InvalidCoefficients(f"coefficients are not canonical (residual {res:.3e})")

    @property
    def position_matrix(self) -> np.ndarray:
        return np.array([self.alpha, self.beta])

    @property
    def momentum_matrix(self) -> np.ndarray:
        return np.array([self.gamma, self.delta])

    def admissibility_residual(self) -> float:
        return float(np.max(np.abs(self.position_matrix @ self.momentum_matrix.T - np.eye(2))))

    @classmethod
    def identity(cls) -> "AltCoefficients":
        return cls((1, 0), (0, 1), (1, 0), (0, 1), label="identity")

    @classmethod
    def cm_relative(cls, m1: float = 1.0, m2: float = 1.0) -> "AltCoefficients":
        """Centre of mass ``X = (m1 x1 + m2 x2)/M`` and relative ``x1 - x2``."""
        mt = m1 + m2
        return cls((m1 / mt, m2 / mt), (1, -1), (1, 1), (m2 / mt, -m1 / mt), label="cm-relative")

    @classmethod
    def from_position_matrix(cls, ax: np.ndarray, label: str = "") -> "AltCoefficients":
        ap = np.linalg.inv(np.asarray(ax, dtype=float)).T
        return cls(tuple(ax[0]), tuple(ax[1]), tuple(ap[0]), tuple(ap[1]), label=label)

    @classmethod
    def random(cls, rng: np.random.Generator, label: str = "random") -> "AltCoefficients":
        while True:
            ax = rng.normal(size=(2, 2))
            if np.linalg.cond(ax) < 20:
                return cls.from_position_matrix(ax, label)


def _variances(pair: ModePair, vx: np.ndarray, vp: np.ndarray, c: AltCoefficients):
    a, b, g, d = (np.array(v) for v in (c.alpha, c.beta, c.gamma, c.delta))
    prod_a = math.sqrt(np.dot(a**2, vx) * np.dot(g**2, vp))
    prod_b = math.sqrt(np.dot(b**2, vx) * np.dot(d**2, vp))
    return prod_a, prod_b


def asymptotic_uncertainty(pair: ModePair, c: AltCoefficients, hbar: float = 1.0) -> tuple:
    """Long-time ``(dX_A dP_A, dxi_B dpi_B)``; both modes relax to their vacua.

    ``dX_A dP_A = hbar sqrt(sum alpha_i^2/(2 m_i w_i) * sum gamma_i^2 m_i w_i / 2)``
    and likewise with ``beta, delta`` for B.
    """
    _check(c)
    mw = pair.masses * pair.freqs
    return _variances(pair, hbar / (2 * mw), hbar * mw / 2, c)


def covariance_asymptotic(pair: ModePair, c: AltCoefficients, hbar: float = 1.0) -> float:
    """``C(inf) = sum_i alpha_i beta_i hbar / (2 m_i w_i)``."""
    _check(c)
    mw = pair.masses * pair.freqs
    return float(np.dot(np.array(c.alpha) * np.array(c.beta), hbar / (2 * mw)))


def _check(c: AltCoefficients) -> None:
    if c.validate and c.admissibility_residual() > ADMISSIBLE_TOL:
        raise InvalidCoefficients("coefficients are not canonical")


@dataclass(frozen=True)
class ScanEntry:
    label: str
    coefficients: AltCoefficients
    product_a: float
    product_b: float
    c_infinity: float
    score: float
    preferred: bool


def preferred_structure_scan(pair: ModePair, candidates: list, hbar: float = 1.0,
                             tol: float = 1e-9) -> list:
    """Rank candidate structures by long-time excess uncertainty plus ``|C(inf)|``.

    The identity structure is always included. Ties keep input order (identity first).
    """
    cands = list(candidates)
    if not any(_same(c, AltCoefficients.identity()) for c in cands):
        cands.insert(0, AltCoefficients.identity())
    entries = []
    for c in cands:
        pa, pb = asymptotic_uncertainty(pair, c, hbar)
        cinf = covariance_asymptotic(pair, c, hbar)
        score = (pa - hbar / 2) + (pb - hbar / 2) + abs(cinf)
        preferred = abs(pa - hbar / 2) <= tol and abs(pb - hbar / 2) <= tol and abs(cinf) <= tol
        entries.append(ScanEntry(c.label, c, pa, pb, cinf, score, preferred))
    order = sorted(range(len(entries)), key=lambda i: (round(entries[i].score, 12), i))
    return [entries[i] for i in order]


def _same(a: AltCoefficients, b: AltCoefficients) -> bool:
    return np.allclose(a.position_matrix, b.position_matrix) and np.allclose(a.momentum_matrix, b.momentum_matrix)


@dataclass(frozen=True)
class TwoModeSnapshot:
    product_a: float
    product_b: float
    covariance: float


def simulate_two_mode(pair: ModePair, coefficient_sets: list, t: float, dim: int = 16,
                      alphas=(0.6, -0.4j)) -> list:
    """Kraus-evolve a product of coherent states and read off structure moments.

    The two local channels act on the joint density matrix one factor at a
    time. Returns one :class:`TwoModeSnapshot` per coefficient set.
    """
    psi = np.kron(coherent_state(alphas[0], dim), coherent_state(alphas[1], dim))
    rho = np.outer(psi, psi.conj())
    for site, k in enumerate((pair.k1, pair.k2)):
        rho = apply_local_channel(rho, kraus_operators(k, t, dim), (dim, dim), site)
    eye = np.eye(dim)
    xs, ps = [], []
    for m, w, site in ((pair.m1, pair.w1, 0), (pair.m2, pair.w2, 1)):
        x, p = quadratures(build_fock_ops(dim), m, w)
        xs.append(np.kron(x, eye) if site == 0 else np.kron(eye, x))
        ps.append(np.kron(p, eye) if site == 0 else np.kron(eye, p))

    def ev(op):
        return float(np.real(np.trace(rho @ op)))

    def var(op):
        return ev(op @ op) - ev(op) ** 2

    out = []
    for c in coefficient_sets:
        xa = c.alpha[0] * xs[0] + c.alpha[1] * xs[1]
        pa = c.gamma[0] * ps[0] + c.gamma[1] * ps[1]
        xb = c.beta[0] * xs[0] + c.beta[1] * xs[1]
        pb = c.delta[0] * ps[0] + c.delta[1] * ps[1]
        cov = ev((xa @ xb + xb @ xa) / 2) - ev(xa) * ev(xb)
        out.append(TwoModeSnapshot(math.sqrt(var(xa) * var(pa)), math.sqrt(var(xb) * var(pb)), cov))
    return out
