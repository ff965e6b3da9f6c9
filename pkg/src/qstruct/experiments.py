"""Registered reproducibility experiments.

Each experiment declares typed default parameters and returns metrics, boolean
pass flags and optional plot-ready series. The ``checks`` field names the
acceptance checks (see ``tests/test_acceptance.py``) that the experiment covers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import correlations as corr
from . import cv, damping, gaussian, master, projections, secondquant, tensor


@dataclass(frozen=True)
class Outcome:
    metrics: dict
    flags: dict
    series: dict | None = None


@dataclass(frozen=True)
class Experiment:
    experiment_id: str
    description: str
    anchor: str
    checks: tuple
    defaults: dict
    run: Callable[[dict, int], Outcome]


# ---------------------------------------------------------------------------


def _amplitude_damping(p: dict, seed: int) -> Outcome:
    dim, k = p["dim"], p["k"]
    psi = damping.coherent_state(p["alpha"], dim)
    rho = np.outer(psi, psi.conj())
    m0 = damping.fock_moments(rho, p["mass"], p["freq"])
    errs, series = [], {"t": [], "x": [], "p": [], "x2": [], "p2": []}
    for t in p["times"]:
        got = damping.fock_moments(damping.apply_channel(rho, k, t), p["mass"], p["freq"])
        want = damping.heisenberg_moments(m0, p["mass"], p["freq"], k, t)
        errs.append(float(np.max(np.abs(got.as_array() - want.as_array()))))
        for name, v in zip(("t", "x", "p", "x2", "p2"), (t, got.x, got.p, got.x2, got.p2)):
            series[name].append(float(v))
    late = damping.fock_moments(damping.apply_channel(rho, k, p["kt_final"] / k), p["mass"], p["freq"])
    prod = late.uncertainty_product
    return Outcome(
        {"max_moment_error": max(errs), "uncertainty_product_final": prod},
        {"moments_match": max(errs) <= 1e-8, "vacuum_floor": abs(prod - 0.5) <= 1e-4},
        series,
    )


def _cat_decoherence(p: dict, seed: int) -> Outcome:
    kw = dict(dim=p["dim"], gamma=p["gamma"], temperature=p["temperature"], t_max=p["t_max"],
              n_samples=p["n_samples"], step=p["step"])
    r1 = master.cat_coherence_rate(p["alpha"], **kw)
    r2 = master.cat_coherence_rate(2 * p["alpha"], **kw)
    ratio = r2 / r1
    return Outcome({"rate_d": r1, "rate_2d": r2, "rate_ratio": ratio},
                   {"ratio_is_four": abs(ratio - 4) <= 0.05 * 4})


def _discord_relativity(p: dict, seed: int) -> Outcome:
    cfg = corr.OptimizerConfig(restarts=p["restarts"], seed=seed)
    rho_a = np.diag([p["p_a"], 1 - p["p_a"]])
    rho_b = np.diag([p["p_b"], 1 - p["p_b"]])
    smap = tensor.partial_swap_map(p["theta"])
    rep = corr.discord_relativity_experiment(rho_a, rho_b, smap, cfg)
    after = tensor.refactorize(tensor.DensityMatrix(np.kron(rho_a, rho_b)), smap)
    f = smap.new_factorization
    opt = corr.one_way_discord(after, f, 1, cfg)
    h_grid, _ = corr.grid_conditional_entropy(after, f, 1, p["grid_theta"], p["grid_phi"])
    other = corr.vn_entropy(tensor.ptrace_matrix(after.matrix, f.dims, [0]))
    h_opt = other - opt.classical_correlation
    gap = abs(h_opt - h_grid)
    return Outcome(
        {"discord_before": rep.discord_before, "discord_after": rep.discord_after,
         "one_way_after": rep.one_way_after, "mutual_information_after": rep.mutual_information_after,
         "grid_gap": gap, "cc_condition_residual": rep.cc_condition_residual},
        {"zero_before": rep.discord_before <= 1e-6, "nonzero_after": rep.one_way_after >= 1e-3,
         "grid_agreement": gap <= 2e-6},
    )


def _nz_lemmas(p: dict, seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    smap = tensor.partial_swap_map(p["theta"])
    p1 = projections.NZProjector((2, 2), tensor.random_density(2, rng))
    p2 = projections.NZProjector((2, 2), tensor.random_density(2, rng))
    n62 = n63 = 0
    worst_trace = 0.0
    for _ in range(p["n_states"]):
        rho = tensor.random_density(4, rng)
        a = projections.lemma62_matrix(rho, p1, smap)
        worst_trace = max(worst_trace, abs(np.trace(a)))
        n62 += np.max(np.abs(a)) > p["threshold"]
        n63 += projections.lemma63_commutator(rho, p1, (smap, p2)) > p["threshold"]
    need = math.ceil(0.99 * p["n_states"])
    return Outcome(
        {"lemma62_nonzero_count": float(n62), "lemma63_nonzero_count": float(n63),
         "max_trace_identity": worst_trace},
        {"lemma62_generic": n62 >= need, "lemma63_generic": n63 >= need, "trace_identity": worst_trace <= 1e-10},
    )


def _qbm_parallel(p: dict, seed: int) -> Outcome:
    model = gaussian.ohmic_model(p["n_env"], p["gamma"], p["omega_cut"])
    ts = np.linspace(0.0, p["t_max"], p["n_times"])
    tr = gaussian.parallel_decoherence_experiment(model, None, ts, p["temperature"])
    metrics = {
        "purity_S_initial": tr.purity_S[0],
        "purity_S_min": min(tr.purity_S),
        "purity_Sprime_initial": tr.purity_Sprime[0],
        "purity_Sprime_min": min(tr.purity_Sprime),
        "symplectic_floor_min": tr.min_symplectic_floor,
    }
    flags = {
        "S_decoheres": metrics["purity_S_min"] < 0.999,
        "Sprime_decoheres": metrics["purity_Sprime_min"] < 0.999,
        "physical": metrics["symplectic_floor_min"] >= 0.5 - 1e-9,
    }
    series = {"t": tr.times, "purity_S": tr.purity_S, "purity_Sprime": tr.purity_Sprime,
              "positionVariance_S": tr.positionVariance_S, "positionVariance_Sprime": tr.positionVariance_Sprime}
    return Outcome(metrics, flags, series)


def random_cl_model(n_env: int, rng: np.random.Generator) -> cv.CaldeiraLeggettModel:
    """Harmonic S with random environment; couplings weak enough to stay stable."""
    masses = rng.uniform(0.5, 2.0, n_env)
    freqs = rng.uniform(0.5, 2.0, n_env)
    ms, ws = 1.0, 1.5
    kappa = rng.uniform(0.05, 0.2, n_env) * np.sqrt(masses * freqs**2 * ms * ws**2 / n_env)
    return cv.CaldeiraLeggettModel(ms, ws, tuple(masses), tuple(freqs), tuple(kappa), 1)


def _qbm_restructure(p: dict, seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    coef_err = coupling = freq_err = 0.0
    for n in p["n_env"]:
        model = random_cl_model(n, rng)
        pairs = cv.default_pairs(n)
        direct = cv.transform_hamiltonian(model.hamiltonian(), cv.make_cm_relative(model.masses, pairs))
        formula = cv.caldeira_leggett_restructure(model).hamiltonian()
        coef_err = max(coef_err, float(np.max(np.abs(direct.quadratic - formula.quadratic))))
        res = cv.full_qbm_pipeline(model)
        env = res.hamiltonian.positions[1:, 1:]
        coupling = max(coupling, float(np.max(np.abs(env - np.diag(np.diag(env))), initial=0.0)))
        before = np.sort(cv.normal_frequencies(model.hamiltonian()))
        after = np.sort(cv.normal_frequencies(res.hamiltonian))
        freq_err = max(freq_err, float(np.max(np.abs(before - after))))
    return Outcome(
        {"max_coefficient_error": coef_err, "max_env_coupling": coupling, "max_frequency_error": freq_err},
        {"coefficients_agree": coef_err <= 1e-10, "env_decoupled": coupling <= 1e-10,
         "frequencies_preserved": freq_err <= 1e-8},
    )


def _supplement_algebra(p: dict, seed: int) -> Outcome:
    n = p["n_spins"]
    jw = secondquant.car_residual(secondquant.jordan_wigner(n))
    _, betas = secondquant.fermion_fourier(n)
    ff = secondquant.car_residual(betas)
    try:
        secondquant.bogoliubov_apply(secondquant.build_fock_ops(4), secondquant.BogoliubovSpec(1.0, 1.0))
        rejected = False
    except secondquant.InvalidSpec:
        rejected = True
    hp = secondquant.holstein_primakoff(0.5)
    pauli = float(np.max(np.abs(secondquant.commutator(hp.x, hp.y) - 1j * hp.z)))
    d = p["fock_dim"]
    ops = secondquant.build_fock_ops(d)
    target = np.diag([1.0] * (d - 1) + [-(d - 1.0)])
    trunc = float(np.max(np.abs(secondquant.commutator(ops.a, ops.a_dag) - target)))
    return Outcome(
        {"jw_car_residual": jw, "fourier_car_residual": ff, "hp_pauli_residual": pauli,
         "truncated_commutator_residual": trunc},
        {"jw_car": jw < 1e-12, "fourier_car": ff < 1e-12, "bogoliubov_rejects": rejected,
         "hp_pauli": pauli == 0.0, "truncation_pattern": trunc < 1e-12},
    )


def _two_mode(p: dict, seed: int) -> Outcome:
    pair = damping.ModePair(p["m1"], p["m2"], p["w1"], p["w2"], p["k"], p["k"])
    c = damping.AltCoefficients(tuple(p["alpha"]), tuple(p["beta"]), tuple(p["gamma"]), tuple(p["delta"]),
                                label="configured")
    pa, pb = damping.asymptotic_uncertainty(pair, c)
    cinf = damping.covariance_asymptotic(pair, c)
    rng = np.random.default_rng(seed)
    cands = [damping.AltCoefficients.random(rng, f"random-{i}") for i in range(p["n_random"])]
    snaps = damping.simulate_two_mode(pair, cands, p["kt"] / p["k"], p["dim"])
    err = 0.0
    for s, cc in zip(snaps, cands):
        a, b = damping.asymptotic_uncertainty(pair, cc)
        err = max(err, abs(s.product_a - a), abs(s.product_b - b),
                  abs(s.covariance - damping.covariance_asymptotic(pair, cc)))
    scan = damping.preferred_structure_scan(pair, [c] + cands)
    return Outcome(
        {"product_A": pa, "product_B": pb, "C_infinity": cinf, "max_simulation_error": err,
         "preferred_count": float(sum(e.preferred for e in scan))},
        {"uncertainty_floor": min(pa, pb) >= 0.5 - 1e-12, "simulation_agrees": err <= 1e-3},
    )


def _zero_discord(p: dict, seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    dims, n, tol = (2, 2), p["n_states"], p["tol"]
    wrong_cq = wrong_cc = wrong_ent = 0
    for _ in range(n):
        r = corr.classify_zero_discord(corr.random_classical_quantum(dims, rng), dims, tol)
        wrong_cq += not r.classical_quantum
        r = corr.classify_zero_discord(corr.random_classical_classical(dims, rng), dims, tol)
        wrong_cc += not (r.classical_quantum and r.classical_classical)
        psi = tensor.random_pure(4, rng)
        r = corr.classify_zero_discord(psi.density(), dims, tol)
        wrong_ent += r.classical_quantum or r.classical_classical
    total = wrong_cq + wrong_cc + wrong_ent
    return Outcome(
        {"misclassified_cq": float(wrong_cq), "misclassified_cc": float(wrong_cc),
         "misclassified_entangled": float(wrong_ent)},
        {"no_misclassification": total == 0},
    )


_REGISTRY = [
    Experiment("amplitude-damping", "Kraus evolution of a coherent state against closed-form damped moments",
               "damped Heisenberg moments and the vacuum uncertainty floor", ("C1",),
               {"dim": 40, "alpha": 1.0, "mass": 1.0, "freq": 1.0, "k": 0.5, "times": [0.1, 1.0, 5.0],
                "kt_final": 15.0}, _amplitude_damping),
    Experiment("cat-decoherence", "Master-equation coherence decay of cat states at separations d and 2d",
               "position-space decoherence term of the QBM master equation", ("C9",),
               {"dim": 30, "alpha": 1.0, "gamma": 0.01, "temperature": 50.0, "t_max": 0.05, "n_samples": 11,
                "step": 1e-3}, _cat_decoherence),
    Experiment("discord-relativity", "Discord of a product state before and after a partial-swap structure change",
               "relativity of quantum correlations", ("C4",),
               {"p_a": 0.3, "p_b": 0.4, "theta": math.pi / 4, "restarts": 32, "grid_theta": 100, "grid_phi": 100},
               _discord_relativity),
    Experiment("nz-lemmas", "Projection residuals across two structures for random two-qubit states",
               "incompatibility of Nakajima-Zwanzig projections in two structures", ("C6",),
               {"n_states": 100, "threshold": 1e-6, "theta": math.pi / 4}, _nz_lemmas),
    Experiment("qbm-parallel-decoherence", "Purity of S and of the total centre of mass in a closed Ohmic bath",
               "parallel occurrence of decoherence", ("C8",),
               {"n_env": 16, "gamma": 0.05, "omega_cut": 2.0, "temperature": 20.0, "t_max": 20.0, "n_times": 81},
               _qbm_parallel),
    Experiment("qbm-restructure", "Centre-of-mass/relative restructuring and normal modes of the QBM model",
               "restructured Caldeira-Leggett Hamiltonian", ("C7",),
               {"n_env": [2, 4, 8]}, _qbm_restructure),
    Experiment("supplement-algebra", "Algebra checks for JW, fermion Fourier, Bogoliubov, HP and Fock builders",
               "second-quantization transforms", ("C10",),
               {"n_spins": 4, "fock_dim": 5}, _supplement_algebra),
    Experiment("two-mode-asymptotics", "Long-time uncertainty and covariance of alternate two-mode structures",
               "preferred structure of two damped modes", ("C2", "C3"),
               {"m1": 1.0, "m2": 1.0, "w1": 1.0, "w2": 1.0, "k": 0.5, "alpha": [0.5, 0.5], "beta": [1.0, -1.0],
                "gamma": [1.0, 1.0], "delta": [0.5, -0.5], "n_random": 20, "kt": 12.0, "dim": 16}, _two_mode),
    Experiment("zero-discord-classifier", "Zero-discord classification of random states with known answers",
               "zero-discord conditions", ("C5",),
               {"n_states": 50, "tol": 1e-8}, _zero_discord),
]

REGISTRY = {e.experiment_id: e for e in sorted(_REGISTRY, key=lambda e: e.experiment_id)}


def defaults_for(experiment_id: str) -> dict:
    return dict(REGISTRY[experiment_id].defaults)


def list_experiments() -> str:
    lines = [f"{e.experiment_id}\t{e.description} [anchor: {e.anchor}; checks: {','.join(e.checks)}]"
             for e in REGISTRY.values()]
    return "\n".join(lines) + "\n"


def execute(experiment_id: str, params: dict, seed: int) -> Outcome:
    return REGISTRY[experiment_id].run(params, seed)
