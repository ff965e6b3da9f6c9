"""Entropic correlation measures, with quantum discord as the centrepiece.

All entropies are in nats. Discord uses rank-1 projective measurements on the
measured factor, parametrized by a unitary on that factor (Bloch angles for a
qubit, a generalized Gell-Mann chart for dimensions 3 and 4), minimized by
multistart Nelder-Mead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from .errors import FactorizationMismatch, UnsupportedDimension
from .tensor import (
    DensityMatrix,
    PureState,
    StructureMap,
    TensorFactorization,
    as_factorization,
    ptrace_matrix,
    random_density,
    random_unitary,
    refactorize,
    tensor_product,
)

MAX_MEASURED_DIM = 4
DEGENERACY_GAP = 1e-8


def _mat(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    if isinstance(rho, PureState):
        return np.outer(rho.amplitudes, rho.amplitudes.conj())
    return np.asarray(rho, dtype=complex)


def _bipartite(f, dim: int) -> TensorFactorization:
    f = as_factorization(f)
    if len(f) != 2:
        raise FactorizationMismatch(f"expected a bipartite factorization, got {f.dims}")
    f.check(dim)
    return f


def entropy_of_spectrum(w: np.ndarray) -> float:
    w = np.asarray(w, dtype=float)
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)))


def vn_entropy(rho) -> float:
    """``-tr rho ln rho``; eigenvalues <= 0 contribute nothing."""
    return entropy_of_spectrum(np.linalg.eigvalsh(_mat(rho)))


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left_basis: np.ndarray  # columns
    right_basis: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        return np.einsum("i,ai,bi->ab", self.coefficients, self.left_basis, self.right_basis).reshape(-1)

    @property
    def rank(self) -> int:
        return int(np.sum(self.coefficients > 1e-12))

    def entanglement_entropy(self) -> float:
        return entropy_of_spectrum(self.coefficients**2)


def schmidt(psi: PureState, f) -> SchmidtDecomposition:
    """Schmidt form via SVD of the amplitude matrix; zero coefficients dropped."""
    amps = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
    f = _bipartite(f, amps.size)
    u, s, vh = np.linalg.svd(amps.reshape(f.dims), full_matrices=False)
    keep = s > 1e-15
    return SchmidtDecomposition(s[keep], u[:, keep], vh[keep].T)


def mutual_information(rho, f) -> float:
    m = _mat(rho)
    f = _bipartite(f, m.shape[0])
    ra = ptrace_matrix(m, f.dims, [0])
    rb = ptrace_matrix(m, f.dims, [1])
    return vn_entropy(ra) + vn_entropy(rb) - vn_entropy(m)


# ---------------------------------------------------------------------------
# measurement charts


def gell_mann(d: int) -> list:
    """Hermitian traceless generators of su(d), ``d**2 - 1`` of them."""
    mats = []
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1
            mats.append(s)
            a = np.zeros((d, d), dtype=complex)
            a[j, k] = -1j
            a[k, j] = 1j
            mats.append(a)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        mats.append(np.diag(diag * np.sqrt(2 / (l * (l + 1)))).astype(complex))
    return mats


def n_measurement_params(d: int) -> int:
    return 2 if d == 2 else d * d - 1


def measurement_basis(params: Sequence[float], d: int) -> np.ndarray:
    """Unitary whose columns are the rank-1 measurement directions."""
    params = np.asarray(params, dtype=float)
    if d == 1:
        return np.ones((1, 1), dtype=complex)
    if d == 2:
        th, ph = params
        c, s = np.cos(th / 2), np.sin(th / 2)
        e = np.exp(1j * ph)
        return np.array([[c, -s / e], [e * s, c]], dtype=complex)
    gens = gell_mann(d)
    return expm(1j * sum(p * g for p, g in zip(params, gens)))


def _random_params(d: int, rng: np.random.Generator) -> np.ndarray:
    if d == 2:
        return np.array([np.arccos(rng.uniform(-1, 1)), rng.uniform(0, 2 * np.pi)])
    return rng.uniform(-np.pi, np.pi, size=d * d - 1)


def conditional_entropy(m: np.ndarray, dims, measured: int, basis: np.ndarray) -> float:
    """``sum_i p_i S(rho_other|i)`` after measuring ``measured`` along ``basis``."""
    da, db = dims
    t = m.reshape(da, db, da, db)
    if measured == 1:
        # rho_i[a, a'] = sum_bb' conj(u[b, i]) t[a, b, a', b'] u[b', i]
        cond = np.einsum("bi,abcd,di->iac", basis.conj(), t, basis)
    else:
        cond = np.einsum("ai,abcd,ci->ibd", basis.conj(), t, basis)
    total = 0.0
    for block in cond:
        p = np.trace(block).real
        if p > 1e-15:
            total += p * vn_entropy((block + block.conj().T) / (2 * p))
    return total


@dataclass(frozen=True)
class OptimizerConfig:
    """Multistart Nelder-Mead settings for the discord minimization."""

    restarts: int = 32
    seed: int = 0
    fatol: float = 1e-9
    xatol: float = 1e-9
    maxiter: int = 4000
    reported_tolerance: float = 2e-6


@dataclass(frozen=True)
class _OptResult:
    value: float
    params: np.ndarray
    trace: list


def _minimize_conditional_entropy(m, dims, measured, cfg: OptimizerConfig) -> _OptResult:
    d = dims[measured]
    if d > MAX_MEASURED_DIM:
        raise UnsupportedDimension(f"measured factor dim {d} > {MAX_MEASURED_DIM}")
    if d == 1:
        return _OptResult(conditional_entropy(m, dims, measured, np.ones((1, 1))), np.zeros(0), [])

    def objective(x):
        return conditional_entropy(m, dims, measured, measurement_basis(x, d))

    rng = np.random.default_rng(cfg.seed)
    starts = [_random_params(d, rng) for _ in range(cfg.restarts)]
    trace = []
    for x0 in starts:
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"xatol": cfg.xatol, "fatol": cfg.fatol, "maxiter": cfg.maxiter},
        )
        trace.append((tuple(float(v) for v in res.x), float(res.fun)))
    # seed-ordered selection: first restart attaining the minimum wins
    best = min(range(len(trace)), key=lambda i: (trace[i][1], i))
    return _OptResult(trace[best][1], np.array(trace[best][0]), trace)


def classical_correlation(rho, f, measured: int = 1, cfg: OptimizerConfig | None = None) -> float:
    """``J = S(other) - min_Pi sum_i p_i S(other | i)``.

    Raises:
        UnsupportedDimension: if the measured factor has dimension above 4.
    """
    cfg = cfg or OptimizerConfig()
    m = _mat(rho)
    f = _bipartite(f, m.shape[0])
    res = _minimize_conditional_entropy(m, f.dims, measured, cfg)
    other = ptrace_matrix(m, f.dims, [1 - measured])
    return vn_entropy(other) - res.value


@dataclass(frozen=True)
class DiscordReport:
    mutual_information: float
    classical_correlation: float
    one_way_discord: float
    measured_factor: int
    optimizer_trace: list = field(repr=False)
    best_params: tuple = ()


def one_way_discord(rho, f, measured: int = 1, cfg: OptimizerConfig | None = None) -> DiscordReport:
    """Discord with the measurement performed on factor ``measured``."""
    cfg = cfg or OptimizerConfig()
    m = _mat(rho)
    f = _bipartite(f, m.shape[0])
    res = _minimize_conditional_entropy(m, f.dims, measured, cfg)
    mi = mutual_information(m, f)
    j = vn_entropy(ptrace_matrix(m, f.dims, [1 - measured])) - res.value
    return DiscordReport(mi, j, mi - j, measured, res.trace, tuple(res.params))


def two_way_discord(rho, f, cfg: OptimizerConfig | None = None) -> float:
    """``max`` of the two one-way discords."""
    a = one_way_discord(rho, f, 0, cfg).one_way_discord
    b = one_way_discord(rho, f, 1, cfg).one_way_discord
    return max(a, b)


def grid_conditional_entropy(rho, f, measured: int = 1, n_theta: int = 100, n_phi: int = 100):
    """Brute-force minimum over a Bloch-hemisphere grid (qubit measured side).

    ``theta`` spans ``[0, pi/2]`` inclusive and ``phi`` spans ``[0, 2 pi)``;
    antipodal directions give the same projective measurement.
    """
    m = _mat(rho)
    f = _bipartite(f, m.shape[0])
    if f.dims[measured] != 2:
        raise UnsupportedDimension("grid oracle is implemented for a qubit measured side")
    best = (np.inf, None)
    for th in np.linspace(0, np.pi / 2, n_theta):
        for ph in np.linspace(0, 2 * np.pi, n_phi, endpoint=False):
            v = conditional_entropy(m, f.dims, measured, measurement_basis((th, ph), 2))
            if v < best[0]:
                best = (v, (th, ph))
    return best


# ---------------------------------------------------------------------------
# zero-discord classification


def _herm_basis(d: int) -> list:
    return [np.eye(d, dtype=complex)] + gell_mann(d)


def _conditional_operators(m, dims, classical: int) -> list:
    """``tr_other[rho (1 ⊗ X)]`` for a Hermitian basis ``X`` of the other factor."""
    da, db = dims
    t = m.reshape(da, db, da, db)
    if classical == 0:
        return [np.einsum("abcd,db->ac", t, x) for x in _herm_basis(db)]
    return [np.einsum("abcd,ca->bd", t, x) for x in _herm_basis(da)]


def _block_residual(m, dims, classical: int, u: np.ndarray) -> float:
    """Largest entry of the off-diagonal blocks of ``rho`` in basis ``u``."""
    da, db = dims
    if classical == 0:
        w = np.kron(u, np.eye(db))
        off = ~np.eye(da, dtype=bool)[:, None, :, None]
    else:
        w = np.kron(np.eye(da), u)
        off = ~np.eye(db, dtype=bool)[None, :, None, :]
    t = (w.conj().T @ m @ w).reshape(da, db, da, db)
    return float(np.max(np.abs(t[np.broadcast_to(off, t.shape)]), initial=0.0))


def classical_basis(rho, f, classical: int = 0):
    """Candidate basis on factor ``classical`` for a classical-quantum form.

    Returns ``(u, degenerate)``. Primary route: eigenbasis of the marginal.
    When the marginal spectrum has gaps below ``DEGENERACY_GAP`` the eigenbasis
    is ambiguous, so a fixed generic combination of the conditional operators
    ``tr_other[rho (1 ⊗ X)]`` is diagonalized instead.
    """
    m = _mat(rho)
    f = _bipartite(f, m.shape[0])
    marg = ptrace_matrix(m, f.dims, [classical])
    w, u = np.linalg.eigh(marg)
    degenerate = bool(np.any(np.diff(w) < DEGENERACY_GAP)) if w.size > 1 else False
    if not degenerate:
        return u, False
    ops = _conditional_operators(m, f.dims, classical)
    coeffs = 1.0 / (np.arange(len(ops)) + np.sqrt(2.0))
    combo = marg + sum(c * (o + o.conj().T) / 2 for c, o in zip(coeffs, ops))
    _, u = np.linalg.eigh(combo)
    return u, True


@dataclass(frozen=True)
class ZeroDiscordClassification:
    classical_quantum: bool
    classical_classical: bool
    classical_factor: int
    residual_cq: float
    residual_cc: float
    degenerate_spectrum: bool
    basis_classical: np.ndarray = field(repr=False)
    basis_other: np.ndarray = field(repr=False)
    decomposition: list | None = field(default=None, repr=False)

    def reconstruct(self) -> np.ndarray:
        """Rebuild ``rho`` from the witness decomposition (``sum_k p_k |k><k| ⊗ rho_k``)."""
        if self.decomposition is None:
            raise ValueError("no witness decomposition: state is not classical-quantum")
        out = 0
        for p, vec, cond in self.decomposition:
            proj = np.outer(vec, vec.conj())
            out = out + p * (np.kron(proj, cond) if self.classical_factor == 0 else np.kron(cond, proj))
        return out


def classify_zero_discord(rho, f, tol: float = 1e-8, classical: int = 0) -> ZeroDiscordClassification:
    """Test for the classical-quantum and classical-classical forms.

    ``classical_quantum`` refers to ``sum_k p_k |k><k| ⊗ rho_k`` with the
    orthonormal ``|k>`` on factor ``classical``; ``classical_classical`` to a
    state diagonal in a product basis. Off-diagonal residuals are compared to
    ``tol``.
    """
    m = _mat(rho)
    f = _bipartite(f, m.shape[0])
    u, deg = classical_basis(m, f, classical)
    v, deg_other = classical_basis(m, f, 1 - classical)
    r_cq = _block_residual(m, f.dims, classical, u)
    r_other = _block_residual(m, f.dims, 1 - classical, v)
    w = np.kron(u, v) if classical == 0 else np.kron(v, u)
    t = w.conj().T @ m @ w
    r_cc = float(np.max(np.abs(t - np.diag(np.diag(t)))))
    cq = r_cq <= tol
    cc = cq and r_other <= tol and r_cc <= tol

    decomposition = None
    if cq:
        decomposition = []
        da, db = f.dims
        wk = np.kron(u, np.eye(db)) if classical == 0 else np.kron(np.eye(da), u)
        t4 = (wk.conj().T @ m @ wk).reshape(da, db, da, db)
        for k in range(f.dims[classical]):
            block = t4[k, :, k, :] if classical == 0 else t4[:, k, :, k]
            p = float(np.trace(block).real)
            if p > 1e-15:
                decomposition.append((p, u[:, k], block / p))
    res = ZeroDiscordClassification(cq, cc, classical, r_cq, r_cc, deg or deg_other, u, v, decomposition)
    if cq and np.max(np.abs(res.reconstruct() - m)) > max(tol, 10 * r_cq):
        return ZeroDiscordClassification(False, False, classical, r_cq, r_cc, res.degenerate_spectrum, u, v, None)
    return res


# ---------------------------------------------------------------------------
# relativity of discord


@dataclass(frozen=True)
class DiscordRelativityReport:
    discord_before: float  # two-way, original structure
    discord_after: float  # two-way, new structure
    one_way_after: float  # measured on factor 1 of the new structure
    mutual_information_after: float
    cc_condition_residual: float
    cq_condition_residual: float
    classification_after: ZeroDiscordClassification = field(repr=False)


def product_condition_residuals(rho_a, rho_b, smap: StructureMap, basis_a, basis_b):
    """Residuals of the diagonal-form conditions after a structure change.

    Writes every product eigenvector ``|k>|l>`` of ``rho_a ⊗ rho_b`` in the new
    product basis, ``|k l> = sum C^{kl}_{ab} |a b>``, and evaluates

    * cc: ``max |sum_kl p_kl C^{kl}_{ab} C^{kl*}_{a'b'}|`` over ``(a,b) != (a',b')``
    * cq: the same sum restricted to ``a != a'`` (all ``b, b'``).
    """
    pa, ua = np.linalg.eigh(_mat(rho_a))
    pb, ub = np.linalg.eigh(_mat(rho_b))
    da, db = len(pa), len(pb)
    new = np.kron(basis_a, basis_b)
    coeff = new.conj().T @ smap.global_unitary.conj().T @ np.kron(ua, ub)  # column kl
    weights = np.kron(pa, pb)
    s = np.einsum("k,ak,bk->ab", weights, coeff, coeff.conj())
    off = s - np.diag(np.diag(s))
    cc = float(np.max(np.abs(off)))
    s4 = s.reshape(da, db, da, db)
    mask = np.broadcast_to(~np.eye(da, dtype=bool)[:, None, :, None], s4.shape)
    cq = float(np.max(np.abs(s4[mask]), initial=0.0))
    return cc, cq


def discord_relativity_experiment(rho_a, rho_b, smap: StructureMap, cfg: OptimizerConfig | None = None,
                                  tol: float = 1e-8) -> DiscordRelativityReport:
    """Two-way discord of ``rho_a ⊗ rho_b`` before and after ``smap``."""
    cfg = cfg or OptimizerConfig()
    a = rho_a if isinstance(rho_a, DensityMatrix) else DensityMatrix(rho_a)
    b = rho_b if isinstance(rho_b, DensityMatrix) else DensityMatrix(rho_b)
    rho = tensor_product(a, b)
    if rho.dim != smap.dim:
        raise FactorizationMismatch(f"state dim {rho.dim} != map dim {smap.dim}")
    f0 = TensorFactorization((a.dim, b.dim))
    before = two_way_discord(rho, f0, cfg)
    after_state = refactorize(rho, smap)
    f1 = smap.new_factorization
    d0 = one_way_discord(after_state, f1, 0, cfg)
    d1 = one_way_discord(after_state, f1, 1, cfg)
    cls = classify_zero_discord(after_state, f1, tol)
    cc, cq = product_condition_residuals(a, b, smap, cls.basis_classical, cls.basis_other)
    return DiscordRelativityReport(
        discord_before=before,
        discord_after=max(d0.one_way_discord, d1.one_way_discord),
        one_way_after=d1.one_way_discord,
        mutual_information_after=d1.mutual_information,
        cc_condition_residual=cc,
        cq_condition_residual=cq,
        classification_after=cls,
    )


# ---------------------------------------------------------------------------
# random zero-discord states


def random_classical_quantum(dims, rng: np.random.Generator, classical: int = 0) -> np.ndarray:
    """``sum_k p_k |k><k| ⊗ rho_k`` in a random orthonormal basis of factor ``classical``."""
    dims = tuple(dims)
    u = random_unitary(dims[classical], rng)
    p = rng.dirichlet(np.ones(dims[classical]))
    out = 0
    for k in range(dims[classical]):
        proj = np.outer(u[:, k], u[:, k].conj())
        cond = random_density(dims[1 - classical], rng).matrix
        out = out + p[k] * (np.kron(proj, cond) if classical == 0 else np.kron(cond, proj))
    return out


def random_classical_classical(dims, rng: np.random.Generator) -> np.ndarray:
    """State diagonal in a random local product basis."""
    w = np.kron(random_unitary(dims[0], rng), random_unitary(dims[1], rng))
    p = rng.dirichlet(np.ones(dims[0] * dims[1]))
    return w @ np.diag(p) @ w.conj().T
