"""Gaussian states on the (x..., p...) phase space and closed-system evolution.

Units have hbar = 1, so the vacuum of a unit oscillator has covariance ``I/2``
and the uncertainty relation reads ``sigma + (i/2) J >= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .cv import (
    CaldeiraLeggettModel,
    default_pairs,
    make_cm_relative,
    symplectic_form,
)

UNCERTAINTY_TOL = 1e-9


@dataclass(frozen=True)
class GaussianState:
    mean: np.ndarray
    covariance: np.ndarray
    validate: bool = field(default=True, compare=False)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (mean.size, mean.size) or mean.size % 2:
            raise ValueError("mean must have even length 2n and covariance shape (2n, 2n)")
        cov = (cov + cov.T) / 2
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        if self.validate:
            floor = np.linalg.eigvalsh(cov + 0.5j * symplectic_form(self.n_modes)).min()
            if floor < -UNCERTAINTY_TOL:
                raise ValueError(f"covariance violates the uncertainty relation (min eig {floor:.3e})")

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def marginal(self, modes) -> "GaussianState":
        modes = list(modes)
        idx = modes + [m + self.n_modes for m in modes]
        return GaussianState(self.mean[idx], self.covariance[np.ix_(idx, idx)], validate=False)

    def transformed(self, s: np.ndarray) -> "GaussianState":
        return GaussianState(s @ self.mean, s @ self.covariance @ s.T, validate=False)

    def symplectic_eigenvalues(self) -> np.ndarray:
        return symplectic_eigenvalues(self.covariance)

    def purity(self) -> float:
        return gaussian_purity(self.covariance)


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Sorted symplectic spectrum ``nu_k`` (each >= 1/2 for a physical state)."""
    n = cov.shape[0] // 2
    w = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ cov))
    return np.sort(w)[::2]


def gaussian_purity(cov: np.ndarray) -> float:
    """``tr rho^2 = 1 / (2^n sqrt(det sigma))``."""
    n = cov.shape[0] // 2
    return float(1.0 / (2**n * np.sqrt(np.linalg.det(cov))))


def oscillator_covariance(masses, freqs, temperature: float = 0.0) -> np.ndarray:
    """Product thermal covariance; ``temperature = 0`` gives the ground state.

    Each mode has ``<x^2> = coth(w/2T)/(2 m w)`` and ``<p^2> = m w coth(w/2T)/2``.
    """
    m = np.asarray(masses, dtype=float)
    w = np.asarray(freqs, dtype=float)
    if temperature > 0:
        c = 1.0 / np.tanh(w / (2 * temperature))
    else:
        c = np.ones_like(w)
    return np.diag(np.concatenate([c / (2 * m * w), c * m * w / 2]))


def evolution_matrix(quadratic: np.ndarray, t: float) -> np.ndarray:
    """Symplectic propagator ``exp(J Q t)`` of ``H = xi^T Q xi / 2``."""
    n = quadratic.shape[0] // 2
    return expm(symplectic_form(n) @ quadratic * t)


def ohmic_model(n_env: int = 16, gamma: float = 0.05, omega_cut: float = 2.0,
                system_mass: float = 1.0, system_frequency: float = 1.0,
                env_mass: float = 1.0, coupling_sign: int = 1) -> CaldeiraLeggettModel:
    """Caldeira-Leggett bath sampling an Ohmic density ``J(w) = 2 m_S gamma w``.

    Frequencies are equally spaced on ``(0, omega_cut]``. With spacing ``dw``,
    ``(pi/2) kappa_i^2 / (m_i w_i dw) = J(w_i)`` gives
    ``kappa_i^2 = (4/pi) m_i m_S gamma w_i^2 dw``.
    """
    if n_env < 1 or n_env > 64:
        raise ValueError("n_env must be in 1..64")
    dw = omega_cut / n_env
    w = dw * np.arange(1, n_env + 1)
    kappa = np.sqrt(4 / np.pi * env_mass * system_mass * gamma * w**2 * dw)
    return CaldeiraLeggettModel(system_mass, system_frequency, (env_mass,) * n_env,
                                tuple(w), tuple(kappa), coupling_sign)


@dataclass(frozen=True)
class DecoherenceTrace:
    times: list
    purity_S: list
    purity_Sprime: list
    positionVariance_S: list
    positionVariance_Sprime: list
    symplectic_floor: list

    @property
    def min_symplectic_floor(self) -> float:
        return float(min(self.symplectic_floor))


def parallel_decoherence_experiment(model: CaldeiraLeggettModel, omega=None, t_grid=None,
                                    temperature: float = 20.0) -> DecoherenceTrace:
    """Track S (the original particle) and S' (the total centre of mass).

    The total closed system evolves under its quadratic Hamiltonian. S starts
    in its own ground state and the environment in a thermal state. ``omega``
    optionally overrides the relative-coordinate pairing (a list of index pairs);
    only the centre-of-mass row matters for S'.

    Args:
        model: Caldeira-Leggett model (at most 64 environment modes).
        omega: optional relative-coordinate pairs, defaults to the star pairing.
        t_grid: sample times; defaults to ``linspace(0, 20, 81)``.
        temperature: environment temperature ``k_B T`` (hbar = 1).

    Returns:
        DecoherenceTrace sampled on ``t_grid``.
    """
    if model.n_env > 64:
        raise ValueError("at most 64 environment modes are supported")
    t_grid = np.linspace(0.0, 20.0, 81) if t_grid is None else np.asarray(t_grid, dtype=float)
    h = model.hamiltonian()
    n = model.n_env + 1
    sys_cov = oscillator_covariance([model.system_mass], [model.system_frequency])
    env_cov = oscillator_covariance(model.env_masses, model.env_frequencies, temperature)
    env_diag = np.diag(env_cov)
    cov0 = np.diag(np.concatenate([[sys_cov[0, 0]], env_diag[: n - 1],
                                   [sys_cov[1, 1]], env_diag[n - 1:]]))
    state0 = GaussianState(np.zeros(2 * n), cov0)

    pairs = default_pairs(model.n_env) if omega is None else omega
    cm = make_cm_relative(model.masses, pairs).matrix
    trace = {k: [] for k in ("purity_S", "purity_Sprime", "positionVariance_S",
                             "positionVariance_Sprime", "symplectic_floor")}
    for t in t_grid:
        st = state0.transformed(evolution_matrix(h.quadratic, float(t)))
        s = st.marginal([0])
        sp = st.transformed(cm).marginal([0])
        trace["purity_S"].append(s.purity())
        trace["purity_Sprime"].append(sp.purity())
        trace["positionVariance_S"].append(float(s.covariance[0, 0]))
        trace["positionVariance_Sprime"].append(float(sp.covariance[0, 0]))
        trace["symplectic_floor"].append(float(st.symplectic_eigenvalues().min()))
    return DecoherenceTrace(times=[float(t) for t in t_grid], **trace)
