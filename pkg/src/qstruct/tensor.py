"""Finite-dimensional states on tensor-product spaces and changes of factorization.

Index convention: Kronecker composition is row-major, so in a factorization
``dims = [d0, d1, ..., dk]`` the last factor's index runs fastest. Every
reshape in this package relies on that convention.

A *structure* is a tensor-product factorization of one Hilbert space. A change
of structure is a :class:`StructureMap`: a global unitary ``W`` whose columns
are the product basis of the new factors, plus the new factor dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Sequence

import numpy as np

from .errors import DimensionError, FactorizationMismatch, InvalidPartition

MAX_DIM = 4096
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = -1e-10
NORM_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureState:
    """Normalized state vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size > MAX_DIM:
            raise DimensionError(f"dimension {amps.size} exceeds {MAX_DIM}")
        if abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {np.linalg.norm(amps)!r} is not 1")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix.

    Negative eigenvalues down to ``POSITIVITY_TOL`` are accepted but never
    clipped; pass ``validate=False`` to hold trajectories of non-positive maps.
    """

    matrix: np.ndarray
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got {m.shape}")
        if m.shape[0] > MAX_DIM:
            raise DimensionError(f"dimension {m.shape[0]} exceeds {MAX_DIM}")
        if self.validate:
            herm = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
            if herm > HERMITIAN_TOL:
                raise ValueError(f"matrix not Hermitian (deviation {herm:.3e})")
            tr = np.trace(m).real
            if abs(tr - 1.0) > TRACE_TOL:
                raise ValueError(f"trace {tr!r} is not 1")
            lo = np.linalg.eigvalsh(m).min()
            if lo < POSITIVITY_TOL:
                raise ValueError(f"negative eigenvalue {lo:.3e}")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True)
class TensorFactorization:
    dims: tuple
    labels: tuple | None = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise FactorizationMismatch(f"factor dimensions must be positive: {dims}")
        object.__setattr__(self, "dims", dims)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(dims):
                raise FactorizationMismatch("one label per factor required")
            object.__setattr__(self, "labels", labels)

    @property
    def total(self) -> int:
        return prod(self.dims)

    def __len__(self):
        return len(self.dims)

    def check(self, dim: int) -> None:
        if self.total != dim:
            raise FactorizationMismatch(
                f"factor dims {self.dims} (product {self.total}) do not match dimension {dim}"
            )


@dataclass(frozen=True)
class StructureMap:
    """Global unitary whose columns span the new product basis."""

    global_unitary: np.ndarray
    new_factorization: TensorFactorization

    def __post_init__(self):
        w = np.asarray(self.global_unitary, dtype=complex)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionError("structure map needs a square unitary")
        dev = np.max(np.abs(w.conj().T @ w - np.eye(w.shape[0])))
        if dev > 1e-12:
            raise ValueError(f"global unitary deviates from unitarity by {dev:.3e}")
        self.new_factorization.check(w.shape[0])
        object.__setattr__(self, "global_unitary", _frozen(w))

    @property
    def dim(self) -> int:
        return self.global_unitary.shape[0]


def as_factorization(f) -> TensorFactorization:
    if isinstance(f, TensorFactorization):
        return f
    return TensorFactorization(tuple(f))


def _matrix(x) -> np.ndarray:
    if isinstance(x, DensityMatrix):
        return x.matrix
    if isinstance(x, PureState):
        return np.outer(x.amplitudes, x.amplitudes.conj())
    return np.asarray(x, dtype=complex)


# ---------------------------------------------------------------------------
# constructors


def ket(index: int, dim: int) -> PureState:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return PureState(v)


def product_ket(digits: Sequence[int], dims: Sequence[int]) -> PureState:
    """Computational basis ket ``|d0 d1 ...>`` in the row-major convention."""
    return ket(int(np.ravel_multi_index(tuple(digits), tuple(dims))), prod(dims))


def bell_states() -> dict:
    """The four two-qubit Bell vectors, keyed ``'psi-', 'psi+', 'phi+', 'phi-'``."""
    s = 1 / np.sqrt(2)
    return {
        "psi-": np.array([0, s, -s, 0], dtype=complex),
        "psi+": np.array([0, s, s, 0], dtype=complex),
        "phi+": np.array([s, 0, 0, s], dtype=complex),
        "phi-": np.array([s, 0, 0, -s], dtype=complex),
    }


def maximally_mixed(dim: int) -> DensityMatrix:
    return DensityMatrix(np.eye(dim) / dim)


def random_pure(dim: int, rng: np.random.Generator) -> PureState:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState(v / np.linalg.norm(v))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Hilbert-Schmidt (Ginibre) random density matrix."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    m = (m + m.conj().T) / 2
    return DensityMatrix(m / np.trace(m).real)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def swap_unitary(d1: int, d2: int) -> np.ndarray:
    """Permutation matrix sending ``|i>|j>`` to ``|j>|i>``."""
    n = d1 * d2
    u = np.zeros((n, n))
    for i in range(d1):
        for j in range(d2):
            u[j * d1 + i, i * d2 + j] = 1.0
    return u


def partial_swap(theta: float, d: int = 2) -> np.ndarray:
    """``exp(-i theta SWAP) = cos(theta) I - i sin(theta) SWAP`` on ``d x d``."""
    return np.cos(theta) * np.eye(d * d) - 1j * np.sin(theta) * swap_unitary(d, d)


def partial_swap_map(theta: float = np.pi / 4, d: int = 2) -> StructureMap:
    return StructureMap(partial_swap(theta, d), TensorFactorization((d, d)))


def local_map(*unitaries: np.ndarray) -> StructureMap:
    w = np.array([[1.0 + 0j]])
    for u in unitaries:
        w = np.kron(w, u)
    return StructureMap(w, TensorFactorization(tuple(u.shape[0] for u in unitaries)))


def identity_map(dims: Sequence[int]) -> StructureMap:
    return StructureMap(np.eye(prod(dims)), TensorFactorization(tuple(dims)))


# ---------------------------------------------------------------------------
# operations


def tensor_product(a, b):
    """Kronecker composition ``a ⊗ b`` of two states of the same kind."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.matrix, b.matrix), validate=a.validate and b.validate)
    if isinstance(a, (PureState, DensityMatrix)) or isinstance(b, (PureState, DensityMatrix)):
        raise TypeError("tensor_product operands must be of the same kind")
    return np.kron(np.asarray(a), np.asarray(b))


def ptrace_matrix(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of an arbitrary (not necessarily physical) operator."""
    dims = tuple(dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise IndexError(f"keep indices {keep} out of range for {n} factors")
    t = np.asarray(m).reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * n > len(letters):
        raise DimensionError("too many factors")
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for i in traced:
        col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    r = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    kd = prod(dims[i] for i in keep) if keep else 1
    return r.reshape(kd, kd)


def partial_trace(rho, f, keep: Sequence[int]):
    """Reduced operator on the factors listed in ``keep``.

    Accepts a :class:`DensityMatrix` (returns one) or a raw matrix (returns a
    matrix), so projected parts like ``Q rho`` can be traced too.

    Raises:
        FactorizationMismatch: if the factor dimensions do not multiply to
            the operator dimension.
    """
    f = as_factorization(f)
    m = _matrix(rho)
    f.check(m.shape[0])
    if not len(keep) and not isinstance(rho, DensityMatrix):
        return np.array([[np.trace(m)]])
    r = ptrace_matrix(m, f.dims, keep)
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(r, validate=rho.validate)
    return r


def permute_subsystems(psi, f, perm: Sequence[int]):
    """Reorder tensor factors: output factor ``k`` is input factor ``perm[k]``.

    Works on :class:`PureState` and :class:`DensityMatrix`.
    """
    f = as_factorization(f)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(len(f))):
        raise FactorizationMismatch(f"{perm} is not a permutation of {len(f)} factors")
    if isinstance(psi, PureState):
        f.check(psi.dim)
        t = psi.amplitudes.reshape(f.dims).transpose(perm)
        return PureState(t.reshape(-1))
    m = _matrix(psi)
    f.check(m.shape[0])
    n = len(f)
    t = m.reshape(f.dims + f.dims).transpose(perm + tuple(p + n for p in perm))
    out = t.reshape(m.shape)
    return DensityMatrix(out, validate=psi.validate) if isinstance(psi, DensityMatrix) else out


def inverse_permutation(perm: Sequence[int]) -> tuple:
    inv = [0] * len(perm)
    for k, p in enumerate(perm):
        inv[p] = k
    return tuple(inv)


def regroup(f, grouping: Sequence[Sequence[int]]) -> TensorFactorization:
    """Merge contiguous factor blocks, e.g. ``[[0, 1], [2]]`` on ``[2, 2, 2]``.

    Amplitudes are untouched by a regrouping; only the bookkeeping changes.
    """
    f = as_factorization(f)
    flat = [int(i) for block in grouping for i in block]
    if flat != list(range(len(f))) or any(len(b) == 0 for b in grouping):
        raise InvalidPartition(f"{grouping} is not a contiguous, exhaustive partition")
    dims = tuple(prod(f.dims[i] for i in block) for block in grouping)
    labels = None
    if f.labels is not None:
        labels = tuple("+".join(str(f.labels[i]) for i in block) for block in grouping)
    return TensorFactorization(dims, labels)


def refactorize(state, smap: StructureMap):
    """Components of ``state`` relative to the product basis of ``smap``.

    Pure states map to ``W^† psi``; density matrices to ``W^† rho W``.
    """
    w = smap.global_unitary
    if isinstance(state, PureState):
        smap.new_factorization.check(state.dim)
        return PureState(w.conj().T @ state.amplitudes)
    m = _matrix(state)
    smap.new_factorization.check(m.shape[0])
    out = w.conj().T @ m @ w
    if isinstance(state, DensityMatrix):
        return DensityMatrix((out + out.conj().T) / 2, validate=state.validate)
    return out


def restore(state, smap: StructureMap):
    """Inverse of :func:`refactorize`."""
    w = smap.global_unitary
    if isinstance(state, PureState):
        return PureState(w @ state.amplitudes)
    m = _matrix(state)
    out = w @ m @ w.conj().T
    return DensityMatrix(out, validate=state.validate) if isinstance(state, DensityMatrix) else out


@dataclass(frozen=True)
class BellExpansion:
    """``psi = sum_B |B>_{12} |v_B>_3`` with ``B`` in :data:`BELL_ORDER`."""

    labels: tuple
    residual_vectors: np.ndarray  # shape (4, 2): row B is |v_B>_3

    @property
    def weights(self) -> np.ndarray:
        return np.linalg.norm(self.residual_vectors, axis=1)

    def reconstruct(self) -> np.ndarray:
        bell = bell_states()
        return sum(np.kron(bell[b], v) for b, v in zip(self.labels, self.residual_vectors))


BELL_ORDER = ("psi-", "psi+", "phi+", "phi-")


def bell_expand(psi) -> BellExpansion:
    """Expand a 3-qubit state over the Bell basis of qubits 1 and 2.

    With ``|u_B> = 2 |v_B>`` this is the teleportation identity
    ``psi = 1/2 sum_B |B>_{12} |u_B>_3``.
    """
    amps = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
    if amps.size != 8:
        raise DimensionError(f"bell_expand needs 3 qubits (dim 8), got dim {amps.size}")
    block = amps.reshape(4, 2)
    bell = bell_states()
    vecs = np.array([bell[b].conj() @ block for b in BELL_ORDER])
    return BellExpansion(BELL_ORDER, vecs)
