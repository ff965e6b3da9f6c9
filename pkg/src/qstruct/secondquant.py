"""Truncated Fock-space operators and second-quantization transforms.

Basis conventions (frozen):

* Fock space: ``|0>, |1>, ..., |dim-1>``; ``a|n> = sqrt(n)|n-1>``.
* Spin 1/2: index 0 is ``|up>`` (``S_z = +1/2``), index 1 is ``|down>``.
* Holstein-Primakoff: boson number ``n`` represents ``m = s - n``.
* Multi-spin spaces are row-major Kronecker products, spin 1 leftmost.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, InvalidSpec

SPEC_TOL = 1e-8


@dataclass(frozen=True)
class FockOps:
    a: np.ndarray
    a_dag: np.ndarray
    n: np.ndarray

    @property
    def dim(self) -> int:
        return self.a.shape[0]


def build_fock_ops(dim: int) -> FockOps:
    if dim < 2:
        raise ValueError("Fock truncation must be at least 2")
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    a_dag = a.conj().T.copy()
    # the number operator is stored as its exact diagonal; a_dag @ a agrees to roundoff
    return FockOps(a, a_dag, np.diag(np.arange(dim, dtype=float)).astype(complex))


def quadratures(ops: FockOps, mass: float = 1.0, freq: float = 1.0, hbar: float = 1.0):
    """Position and momentum matrices of an oscillator of given mass and frequency."""
    x = np.sqrt(hbar / (2 * mass * freq)) * (ops.a + ops.a_dag)
    p = 1j * np.sqrt(mass * freq * hbar / 2) * (ops.a_dag - ops.a)
    return x, p


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def low_subspace_residual(m: np.ndarray, target: np.ndarray, exclude_top: int = 1) -> float:
    """``max |m - target|`` with the top ``exclude_top`` Fock levels removed."""
    k = m.shape[0] - exclude_top
    return float(np.max(np.abs((m - target)[:k, :k])))


def boson_translate(ops: FockOps, theta: complex):
    """``a(theta) = a + theta``; returns ``(a(theta), a(theta)^dagger)``."""
    eye = np.eye(ops.dim)
    at = ops.a + theta * eye
    return at, at.conj().T


@dataclass(frozen=True)
class BogoliubovSpec:
    """Single-mode scalars ``u, v`` or multimode matrices ``u_ij, v_ij``."""

    u: complex | np.ndarray
    v: complex | np.ndarray

    def condition_residual(self, statistics: str = "boson") -> float:
        sign = -1.0 if statistics == "boson" else 1.0
        u = np.atleast_2d(np.asarray(self.u, dtype=complex))
        v = np.atleast_2d(np.asarray(self.v, dtype=complex))
        g = u @ u.conj().T + sign * (v @ v.conj().T)
        return float(np.max(np.abs(g - np.eye(g.shape[0]))))


@dataclass(frozen=True)
class BogoliubovResult:
    b: list
    b_dag: list
    residual: float  # (anti)commutator residual off the truncation boundary


def bogoliubov_apply(ops, spec: BogoliubovSpec, statistics: str = "boson") -> BogoliubovResult:
    """``b_i = sum_j (u_ij a_j + v_ij a_j^dagger)``.

    ``ops`` is a :class:`FockOps` (single mode) or a list of annihilation
    matrices acting on a common space (multimode).

    Raises:
        InvalidSpec: if ``sum_p (u_ip u_jp^* -/+ v_ip v_jp^*) = delta_ij`` fails
            by more than 1e-8.
    """
    if statistics not in ("boson", "fermion"):
        raise ValueError("statistics must be 'boson' or 'fermion'")
    res = spec.condition_residual(statistics)
    if res > SPEC_TOL:
        raise InvalidSpec(f"Bogoliubov condition violated by {res:.3e} for {statistics}s")
    modes = [ops.a] if isinstance(ops, FockOps) else list(ops)
    u = np.atleast_2d(np.asarray(spec.u, dtype=complex))
    v = np.atleast_2d(np.asarray(spec.v, dtype=complex))
    b = [sum(u[i, j] * modes[j] + v[i, j] * modes[j].conj().T for j in range(len(modes))) for i in range(u.shape[0])]
    b_dag = [x.conj().T for x in b]
    bracket = commutator if statistics == "boson" else anticommutator
    # single truncated boson mode: the top level carries the truncation artifact
    exclude = 1 if statistics == "boson" and isinstance(ops, FockOps) else 0
    eye = np.eye(modes[0].shape[0])
    worst = 0.0
    for i in range(len(b)):
        for j in range(len(b)):
            target = eye if i == j else 0 * eye
            worst = max(worst, low_subspace_residual(bracket(b[i], b_dag[j]), target, exclude))
    return BogoliubovResult(b, b_dag, worst)


@dataclass(frozen=True)
class SpinOps:
    z: np.ndarray
    plus: np.ndarray
    minus: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return (self.plus + self.minus) / 2

    @property
    def y(self) -> np.ndarray:
        return (self.plus - self.minus) / 2j


def holstein_primakoff(s: float, dim: int | None = None, hbar: float = 1.0) -> SpinOps:
    """Spin-``s`` operators built from a truncated boson.

    ``S_z = hbar (s - n)``, ``S_+ = hbar sqrt(2s - n) a``,
    ``S_- = hbar a^dagger sqrt(2s - n)``. The square root is taken entrywise on
    the (diagonal) argument.

    Raises:
        DomainError: if ``dim > 2s + 1``, where ``2s - n`` turns negative.
    """
    two_s = 2 * s
    if abs(two_s - round(two_s)) > 1e-12 or s <= 0:
        raise ValueError("s must be a positive half-integer")
    full = int(round(two_s)) + 1
    dim = full if dim is None else dim
    if dim > full:
        raise DomainError(f"dim {dim} reaches n > 2s = {two_s}: sqrt(2s - n) undefined")
    ops = build_fock_ops(dim)
    n = np.arange(dim, dtype=float)
    root = np.diag(np.sqrt(two_s - n))
    z = hbar * np.diag(s - n).astype(complex)
    plus = hbar * root @ ops.a
    minus = hbar * ops.a_dag @ root
    return SpinOps(z, plus, minus)


SZ = np.diag([0.5, -0.5]).astype(complex)
S_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)


def _embed(single: np.ndarray, site: int, n: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for k in range(n):
        out = np.kron(out, single if k == site else np.eye(2))
    return out


def spin_z(site: int, n: int) -> np.ndarray:
    return _embed(SZ, site, n)


def jordan_wigner(n_spins: int) -> list:
    """Fermion annihilators ``a_i = (-2)^{i-1} S_1z ... S_{(i-1)z} S_i-``.

    The string of ``-2 S_z`` factors is the parity ``(-1)^{n_j}`` of the
    preceding sites; ``a_j^dagger a_j - 1/2 = S_jz``.
    """
    if not 1 <= n_spins <= 10:
        raise ValueError("jordan_wigner supports 1..10 spins")
    ops = []
    for i in range(n_spins):
        string = np.array([[1.0 + 0j]])
        for k in range(n_spins):
            if k < i:
                f = -2 * SZ
            elif k == i:
                f = S_MINUS
            else:
                f = np.eye(2)
            string = np.kron(string, f)
        ops.append(string)
    return ops


def car_residual(ops: list) -> float:
    """Worst deviation from ``{a_i, a_j^dag} = delta_ij`` and ``{a_i, a_j} = 0``."""
    eye = np.eye(ops[0].shape[0])
    worst = 0.0
    for i, ai in enumerate(ops):
        for j, aj in enumerate(ops):
            target = eye if i == j else 0 * eye
            worst = max(worst, float(np.max(np.abs(anticommutator(ai, aj.conj().T) - target))))
            worst = max(worst, float(np.max(np.abs(anticommutator(ai, aj)))))
    return worst


def fourier_coefficients(n: int) -> np.ndarray:
    """``d[m, i] = sqrt(2/(N+1)) sin(k_m i)`` with ``k_m = m pi/(N+1)``, 1-based m, i."""
    idx = np.arange(1, n + 1)
    return np.sqrt(2 / (n + 1)) * np.sin(np.outer(idx, idx) * np.pi / (n + 1))


def fermion_fourier(n_spins: int, ops: list | None = None):
    """``beta_m = sum_i d_mi a_i``; returns ``(d, betas)``."""
    ops = jordan_wigner(n_spins) if ops is None else ops
    d = fourier_coefficients(n_spins)
    betas = [sum(d[m, i] * ops[i] for i in range(n_spins)) for m in range(n_spins)]
    return d, betas


# ---------------------------------------------------------------------------
# golden-matrix fixtures
#
# Plain text, one matrix per file:
#   line 1: "# qstruct complex matrix v1"
#   line 2: "<rows> <cols>"
#   then one line per row: re_0 im_0 re_1 im_1 ... with 17 significant digits.


def format_matrix(m: np.ndarray) -> str:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    lines = ["# qstruct complex matrix v1", f"{m.shape[0]} {m.shape[1]}"]
    for row in m:
        lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# qstruct complex matrix"):
        raise ValueError("not a qstruct matrix file")
    rows, cols = (int(v) for v in lines[1].split())
    data = np.array([[float(t) for t in ln.split()] for ln in lines[2 : 2 + rows]])
    if data.shape != (rows, 2 * cols):
        raise ValueError("matrix body does not match the declared shape")
    return data[:, 0::2] + 1j * data[:, 1::2]


def write_matrix(path, m: np.ndarray) -> None:
    Path(path).write_text(format_matrix(m))


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


def golden_matrices() -> dict:
    """Named builder outputs with dimension <= 4, used as regression fixtures."""
    out = {}
    for d in (2, 3, 4):
        ops = build_fock_ops(d)
        out[f"fock_a_{d}"] = ops.a
        out[f"fock_n_{d}"] = ops.n
    out["hp_half_plus"] = holstein_primakoff(0.5).plus
    hp = holstein_primakoff(1.5)
    out["hp_three_halves_plus"] = hp.plus
    out["hp_three_halves_z"] = hp.z
    for i, a in enumerate(jordan_wigner(2)):
        out[f"jw2_a{i + 1}"] = a
    out["fourier_d_4"] = fourier_coefficients(4)
    at, _ = boson_translate(build_fock_ops(3), 0.5 - 0.25j)
    out["translate_a_3"] = at
    return out
