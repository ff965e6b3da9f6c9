"""Markovian quantum Brownian motion master equation on a truncated Fock space.

``drho/dt = -i [H_S, rho] - i gamma [x, {p, rho}] - 2 m gamma k_B T [x, [x, rho]]``
with hbar = 1, integrated by fixed-step classic Runge-Kutta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermval

from .damping import coherent_state
from .errors import StepSizeTooLarge
from .secondquant import build_fock_ops, quadratures
from .tensor import DensityMatrix

DRIFT_TOL = 1e-6


@dataclass(frozen=True)
class QbmTrajectory:
    times: np.ndarray
    states: list  # complex matrices, one per time
    max_trace_drift: float


def qbm_generator(h_s: np.ndarray, x: np.ndarray, p: np.ndarray, mass: float, gamma: float,
                  temperature: float, dissipation: bool = True, decoherence: bool = True):
    d = 2 * mass * gamma * temperature

    def rhs(rho):
        out = -1j * (h_s @ rho - rho @ h_s)
        if dissipation and gamma:
            anti = p @ rho + rho @ p
            out = out - 1j * gamma * (x @ anti - anti @ x)
        if decoherence and d:
            xr = x @ rho - rho @ x
            out = out - d * (x @ xr - xr @ x)
        return out

    return rhs


def integrate_qbm_master(rho0, mass: float, gamma: float, temperature: float, h_s: np.ndarray,
                         t_grid, *, freq: float = 1.0, step: float = 1e-3, dissipation: bool = True,
                         decoherence: bool = True) -> QbmTrajectory:
    """Integrate the QBM master equation and sample it on ``t_grid``.

    Args:
        rho0: initial Fock-basis state (DensityMatrix or array).
        mass, gamma, temperature: particle mass, relaxation rate and ``k_B T``.
        h_s: system Hamiltonian in the same Fock basis.
        t_grid: increasing sample times starting at the initial time.
        freq: oscillator frequency defining the Fock basis quadratures.
        step: maximal RK4 step.
        dissipation, decoherence: switch the ``gamma [x, {p, .}]`` and
            ``[x, [x, .]]`` terms on or off.

    Raises:
        StepSizeTooLarge: if the trace drifts by more than 1e-6 or an entry
            exceeds the bound ``|rho_ij| <= 1`` by that much.
    """
    if gamma < 0 or temperature <= 0:
        raise ValueError("need gamma >= 0 and T > 0")
    rho = np.array(rho0.matrix if isinstance(rho0, DensityMatrix) else rho0, dtype=complex)
    ops = build_fock_ops(rho.shape[0])
    x, p = quadratures(ops, mass, freq)
    rhs = qbm_generator(np.asarray(h_s, dtype=complex), x, p, mass, gamma, temperature,
                        dissipation, decoherence)
    t_grid = np.asarray(t_grid, dtype=float)
    tr0 = np.trace(rho)
    states = [rho.copy()]
    worst = 0.0
    for t0, t1 in zip(t_grid[:-1], t_grid[1:]):
        n = max(1, math.ceil((t1 - t0) / step - 1e-12))
        h = (t1 - t0) / n
        for _ in range(n):
            k1 = rhs(rho)
            k2 = rhs(rho + h / 2 * k1)
            k3 = rhs(rho + h / 2 * k2)
            k4 = rhs(rho + h * k3)
            rho = rho + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            drift = abs(np.trace(rho) - tr0)
            worst = max(worst, drift)
            if not np.isfinite(drift) or drift > DRIFT_TOL or np.max(np.abs(rho)) > 1 + DRIFT_TOL:
                raise StepSizeTooLarge(f"trace drift {drift:.3e}, largest entry {np.max(np.abs(rho)):.3e} "
                                       f"in the step from t={t0:.4g} with step {h:.3g}")
        states.append(rho.copy())
    return QbmTrajectory(t_grid, states, float(worst))


def harmonic_hamiltonian(dim: int, freq: float = 1.0) -> np.ndarray:
    return freq * (build_fock_ops(dim).n + 0.5 * np.eye(dim))


def cat_state(alpha: float, dim: int) -> np.ndarray:
    """Normalized even cat ``|alpha> + |-alpha>`` (as a ket)."""
    psi = coherent_state(alpha, dim) + coherent_state(-alpha, dim)
    return psi / np.linalg.norm(psi)


def position_wavefunctions(xs, dim: int, mass: float = 1.0, freq: float = 1.0) -> np.ndarray:
    """Rows ``phi_n(x)`` of oscillator eigenfunctions, shape ``(dim, len(xs))``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    s = math.sqrt(mass * freq)
    y = s * xs
    out = np.empty((dim, xs.size))
    for n in range(dim):
        c = np.zeros(n + 1)
        c[n] = 1.0
        norm = math.sqrt(s) / math.sqrt(2.0**n * math.factorial(n) * math.sqrt(math.pi))
        out[n] = norm * hermval(y, c) * np.exp(-y * y / 2)
    return out


def position_element(rho: np.ndarray, x1: float, x2: float, mass: float = 1.0, freq: float = 1.0) -> complex:
    """``<x1| rho |x2>`` from the Fock-basis matrix."""
    phi = position_wavefunctions([x1, x2], rho.shape[0], mass, freq)
    return complex(phi[:, 0] @ rho @ phi[:, 1])


def cat_coherence_rate(alpha: float, dim: int = 30, mass: float = 1.0, gamma: float = 0.01,
                       temperature: float = 50.0, t_max: float = 0.05, n_samples: int = 11,
                       step: float = 1e-3) -> float:
    """Fitted exponential decay rate of ``|<x0|rho|-x0>|`` for a harmonic cat.

    The packets sit at ``x0 = +/- sqrt(2/(m w)) alpha``; the slope of the log
    coherence over ``[0, t_max]`` is returned (positive for decay).
    """
    psi = cat_state(alpha, dim)
    rho0 = np.outer(psi, psi.conj())
    ts = np.linspace(0.0, t_max, n_samples)
    traj = integrate_qbm_master(rho0, mass, gamma, temperature, harmonic_hamiltonian(dim), ts, step=step)
    x0 = math.sqrt(2.0 / mass) * alpha
    coh = np.array([abs(position_element(r, x0, -x0, mass)) for r in traj.states])
    slope = np.polyfit(ts, np.log(coh), 1)[0]
    return float(-slope)


def fourth_cumulant(rho: np.ndarray, mass: float = 1.0, freq: float = 1.0) -> float:
    """Fourth cumulant of the position distribution (0 for Gaussian states)."""
    x, _ = quadratures(build_fock_ops(rho.shape[0]), mass, freq)
    mom = [float(np.real(np.trace(rho @ np.linalg.matrix_power(x, j)))) for j in range(1, 5)]
    m1, m2, m3, m4 = mom
    return m4 - 4 * m3 * m1 - 3 * m2**2 + 12 * m2 * m1**2 - 6 * m1**4
