"""Nakajima-Zwanzig projections ``P rho = tr_E rho (x) rho_E`` across two structures.

All operators are dense matrices on a bipartite space ``S (x) E``; the second
structure is given by a :class:`StructureMap` whose new factorization is read as
``S' (x) E'``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import FactorizationMismatch
from .tensor import DensityMatrix, StructureMap, TensorFactorization, as_factorization, ptrace_matrix


def _mat(x) -> np.ndarray:
    return x.matrix if isinstance(x, DensityMatrix) else np.asarray(x, dtype=complex)


@dataclass(frozen=True)
class NZProjector:
    factorization: TensorFactorization
    reference: DensityMatrix

    def __post_init__(self):
        f = as_factorization(self.factorization)
        if len(f.dims) != 2:
            raise FactorizationMismatch("NZ projector needs a bipartite factorization")
        ref = self.reference if isinstance(self.reference, DensityMatrix) else DensityMatrix(self.reference)
        if ref.dim != f.dims[1]:
            raise FactorizationMismatch(f"reference state has dim {ref.dim}, environment has {f.dims[1]}")
        object.__setattr__(self, "factorization", f)
        object.__setattr__(self, "reference", ref)

    def __call__(self, rho) -> np.ndarray:
        return nz_project(rho, self)


def nz_project(rho, proj: NZProjector) -> np.ndarray:
    """``P rho = tr_E(rho) (x) rho_E``; accepts any operator of matching size."""
    m = _mat(rho)
    if m.shape[0] != proj.factorization.total:
        raise FactorizationMismatch(f"operator dim {m.shape[0]} != {proj.factorization.total}")
    return np.kron(ptrace_matrix(m, proj.factorization.dims, [0]), proj.reference.matrix)


def complement(rho, proj: NZProjector) -> np.ndarray:
    """``Q rho = rho - P rho``."""
    return _mat(rho) - nz_project(rho, proj)


def trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def mapped_projection(rho, smap: StructureMap, proj: NZProjector) -> np.ndarray:
    """``P' rho = W [tr_E'(W^dag rho W) (x) rho_E'] W^dag`` in the original basis."""
    w = smap.global_unitary
    inner = w.conj().T @ _mat(rho) @ w
    if proj.factorization.dims != smap.new_factorization.dims:
        raise FactorizationMismatch("projector does not match the mapped factorization")
    return w @ nz_project(inner, proj) @ w.conj().T


def lemma61_witness(rho_s_family: Sequence, rho_e, smap: StructureMap) -> np.ndarray:
    """Distance of the new environment's marginal from its initial value.

    Each ``rho_S(t) (x) rho_E`` is re-factorized by ``smap``; returns
    ``d(t) = ||sigma_E'(t) - sigma_E'(0)||_tr``.
    """
    e = _mat(rho_e)
    dims = smap.new_factorization.dims
    if len(dims) != 2:
        raise FactorizationMismatch("lemma61_witness needs a bipartite new factorization")
    w = smap.global_unitary
    marg = []
    for rs in rho_s_family:
        total = np.kron(_mat(rs), e)
        if total.shape[0] != smap.dim:
            raise FactorizationMismatch("family and map dimensions differ")
        marg.append(ptrace_matrix(w.conj().T @ total @ w, dims, [1]))
    return np.array([trace_norm(m - marg[0]) for m in marg])


def lemma62_matrix(rho, proj: NZProjector, smap: StructureMap) -> np.ndarray:
    """``A = tr_E'`` of ``Q rho`` expressed in the mapped structure.

    ``A`` vanishes iff the original projection leaves no trace on the new
    open system; its trace is always zero because ``tr Q rho = 0``.
    """
    q = complement(rho, proj)
    w = smap.global_unitary
    return ptrace_matrix(w.conj().T @ q @ w, smap.new_factorization.dims, [0])


def lemma62_residual(rho, proj: NZProjector, smap: StructureMap) -> float:
    """Max-norm of :func:`lemma62_matrix`."""
    return float(np.max(np.abs(lemma62_matrix(rho, proj, smap))))


def lemma63_commutator(rho, p1: NZProjector, p2struct: tuple) -> float:
    """``||P P' rho - P' P rho||_tr`` with ``P'`` acting in the mapped structure."""
    smap, p2 = p2struct
    m = _mat(rho)
    pp = nz_project(mapped_projection(m, smap, p2), p1)
    qq = mapped_projection(nz_project(m, p1), smap, p2)
    return trace_norm(pp - qq)
