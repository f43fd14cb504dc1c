"""Numerical verifiers for the matrix-product and spectral-radius inequalities.

Every check returns a :class:`CheckReport`. Randomised suites draw only
inputs that satisfy the stated preconditions of the inequality they test,
and compare with a relative slack of :data:`RTOL` on the bounding side.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dynamics import (
    discriminant,
    exact_risk_trace,
    power_lognorm,
    sgd_lower_bound,
    spectral_norm,
    spectral_radius,
    theorem2_bound,
    theorem2_log_bias_bound,
    transfer_matrix,
)
from .problem import QuadraticProblem, counterexample_instance, excess_risk
from .schedules import Schedule, constant_schedule, min_feasible_T, step_decay_schedule, theorem_step_decay

__all__ = [
    "RTOL",
    "LEMMA_CONSTANT",
    "CheckReport",
    "check_power_norm_bound",
    "check_product_monotonicity",
    "check_combined_bound",
    "check_stage_contraction",
    "check_aux_inequalities",
    "check_spectral_radius",
    "check_theorem1",
    "check_theorem2",
    "power_norm_suite",
    "product_monotonicity_suite",
    "combined_bound_suite",
    "stage_contraction_suite",
    "spectral_radius_suite",
    "theorem1_suite",
    "theorem2_suite",
    "SUITES",
    "run_suites",
]

RTOL = 1e-9
SIGN_TOL = 1e-12
LEMMA_CONSTANT = 8.0
# constant quoted by a secondary version of the power-norm inequality
ALT_LEMMA_CONSTANT = 32.0


@dataclass
class CheckReport:
    name: str
    trials: int
    failures: int
    worst_witness: dict | None = None
    status: str = "pass"
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.status != "not-applicable":
            self.status = "pass" if self.failures == 0 else "fail"

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_jsonable)

    @classmethod
    def not_applicable(cls, name: str, reason: str, **witness) -> CheckReport:
        return cls(name, 0, 0, witness or None, "not-applicable", [reason])


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x))


def _merge(name: str, reports: Sequence[CheckReport]) -> CheckReport:
    applicable = [r for r in reports if r.status != "not-applicable"]
    if not applicable:
        return CheckReport.not_applicable(name, "no applicable trials")
    worst = max(applicable, key=lambda r: (r.worst_witness or {}).get("ratio", -math.inf))
    notes = sorted({n for r in applicable for n in r.notes})
    return CheckReport(name, sum(r.trials for r in applicable), sum(r.failures for r in applicable),
                       worst.worst_witness, notes=notes)


# --- batched 2x2 helpers ------------------------------------------------------------

def _tmats(beta, el):
    beta = np.asarray(beta, dtype=np.float64)
    el = np.asarray(el, dtype=np.float64)
    out = np.zeros(np.broadcast(beta, el).shape + (2, 2))
    out[..., 0, 0] = 1.0 + beta - el
    out[..., 0, 1] = -beta
    out[..., 1, 0] = 1.0
    return out


def _rho(beta, el):
    a = 1.0 + beta - el
    disc = a * a - 4.0 * beta
    return np.where(disc >= 0, 0.5 * (np.abs(a) + np.sqrt(np.maximum(disc, 0.0))), np.sqrt(beta)), disc


def _fro(P):
    return np.sqrt(np.sum(P * P, axis=(-2, -1)))


def _batched_power(M, k):
    """``M[i]^k[i]`` by repeated multiplication."""
    k = np.asarray(k)
    P = np.broadcast_to(np.eye(2), M.shape).copy()
    out = np.empty_like(P)
    for step in range(1, int(k.max()) + 1):
        P = P @ M
        hit = k == step
        out[hit] = P[hit]
    return out


def _bound_factor(k, disc, constant):
    with np.errstate(divide="ignore"):
        alt = np.where(disc == 0, np.inf, constant / np.sqrt(np.abs(disc)))
    return np.minimum(constant * k, alt)


def _witness(idx, ratio, **cols) -> dict:
    w = {name: (float(v[idx]) if np.ndim(v) else float(v)) for name, v in cols.items()}
    w["ratio"] = float(ratio[idx])
    return w


# --- power norm -------------------------------------------------------------------

def _power_norm_eval(beta, el, k, constant):
    beta, el, k = np.atleast_1d(beta).astype(float), np.atleast_1d(el).astype(float), np.atleast_1d(k)
    rho, disc = _rho(beta, el)
    lhs = _fro(_batched_power(_tmats(beta, el), k))
    rhs = _bound_factor(k, disc, constant) * rho**k
    ratio = lhs / rhs
    return lhs, rhs, ratio, disc


def _power_norm_report(name, beta, el, k, constant) -> CheckReport:
    lhs, rhs, ratio, disc = _power_norm_eval(beta, el, k, constant)
    fails = lhs > rhs * (1 + RTOL)
    i = int(np.argmax(ratio))
    rep = CheckReport(name, lhs.size, int(fails.sum()),
                      _witness(i, ratio, beta=beta, eta_lambda=el, k=k, lhs=lhs, rhs=rhs, disc=disc))
    if rep.failures and constant == LEMMA_CONSTANT:
        _, _, alt_ratio, _ = _power_norm_eval(beta, el, k, ALT_LEMMA_CONSTANT)
        if np.all(alt_ratio <= 1 + RTOL):
            rep.notes.append("fails with constant 8 but holds with constant 32")
    return rep


def check_power_norm_bound(beta: float, eta_lambda: float, k: int, constant: float = LEMMA_CONSTANT) -> CheckReport:
    """``||T^k||_F <= min(c k, c / sqrt|disc|) rho^k`` for one real-regime matrix."""
    name = "power_norm"
    if not (0.25 <= beta < 1 and k >= 1 and 0 <= eta_lambda <= (1 - math.sqrt(beta)) ** 2):
        return CheckReport.not_applicable(name, "needs beta in [1/4, 1), k >= 1 and real eigenvalues",
                                          beta=beta, eta_lambda=eta_lambda, k=k)
    return _power_norm_report(name, beta, eta_lambda, k, constant)


def power_norm_suite(trials: int = 10_000, seed: int = 0, constant: float = LEMMA_CONSTANT,
                     max_k: int = 200) -> CheckReport:
    rng = np.random.default_rng([seed, 1])
    beta = rng.uniform(0.25, 1.0, trials)
    # half the draws concentrate near the real/complex boundary where 1/sqrt|disc| blows up
    u = np.where(rng.random(trials) < 0.5, rng.random(trials), 1 - rng.random(trials) ** 4)
    el = u * (1 - np.sqrt(beta)) ** 2
    k = rng.integers(1, max_k + 1, trials)
    return _power_norm_report("power_norm", beta, el, k, constant)


# --- product monotonicity -------------------------------------------------------------

def _product_mono_eval(beta, el, deltas):
    """``deltas`` has shape (N, k). Returns lhs, rhs, worst sign violation per row."""
    deltas = np.atleast_2d(np.asarray(deltas, dtype=np.float64))
    N, k = deltas.shape
    base = _tmats(beta, el)
    P = np.broadcast_to(np.eye(2), (N, 2, 2)).copy()
    sign_viol = np.zeros(N)
    for i in range(k):
        F = np.broadcast_to(base, (N, 2, 2)).copy()
        F[:, 0, 0] += deltas[:, i]
        P = P @ F
        scale = np.maximum(1.0, np.max(np.abs(P), axis=(1, 2)))
        viol = np.maximum(np.max(-P[:, :, 0], axis=1), np.max(P[:, :, 1], axis=1)) / scale
        sign_viol = np.maximum(sign_viol, viol)
    lhs = _fro(P)
    dmax = deltas.max(axis=1)
    Fm = np.broadcast_to(base, (N, 2, 2)).copy()
    Fm[:, 0, 0] += dmax
    rhs = _fro(_batched_power(Fm, np.full(N, k)))
    return lhs, rhs, sign_viol


def _product_mono_report(name, beta, el, deltas) -> CheckReport:
    lhs, rhs, sign_viol = _product_mono_eval(beta, el, deltas)
    fails = (lhs > rhs * (1 + RTOL)) | (sign_viol > SIGN_TOL)
    ratio = lhs / rhs
    i = int(np.argmax(ratio + (sign_viol > SIGN_TOL)))
    w = _witness(i, ratio, lhs=lhs, rhs=rhs, sign_violation=sign_viol)
    w.update(beta=float(beta), eta_lambda=float(el), deltas=np.atleast_2d(deltas)[i].tolist())
    return CheckReport(name, lhs.size, int(fails.sum()), w)


def check_product_monotonicity(beta: float, eta_lambda: float, deltas: Sequence[float]) -> CheckReport:
    """``||prod (T + diag(d_i, 0))||_F <= ||(T + diag(max d, 0))^k||_F`` plus sign structure.

    Every partial product must keep a nonnegative first column and a
    nonpositive second column (tolerance relative to the largest entry).
    """
    name = "product_monotonicity"
    if discriminant(transfer_matrix(eta_lambda, 1.0, beta)) < 0 or len(deltas) == 0 or min(deltas) < 0:
        return CheckReport.not_applicable(name, "needs real eigenvalues and nonnegative deltas",
                                          beta=beta, eta_lambda=eta_lambda)
    return _product_mono_report(name, beta, eta_lambda, [list(deltas)])


def product_monotonicity_suite(trials: int = 1_000, seed: int = 0, max_k: int = 6) -> CheckReport:
    reports = []
    grid = np.round(np.arange(6) * 0.01, 10)
    for k in range(1, max_k + 1):
        deltas = np.array(list(itertools.product(grid, repeat=k)))
        reports.append(_product_mono_report("product_monotonicity", 0.25, 0.2, deltas))
    rng = np.random.default_rng([seed, 2])
    for _ in range(trials):
        beta = rng.uniform(0.0, 1.0)
        el = rng.uniform(0.0, (1 - math.sqrt(beta)) ** 2)
        k = int(rng.integers(1, 31))
        deltas = rng.uniform(0.0, rng.uniform(0.0, 0.5), (1, k))
        reports.append(_product_mono_report("product_monotonicity", beta, el, deltas))
    return _merge("product_monotonicity", reports)


# --- combined product bound -------------------------------------------------------------

def check_combined_bound(segment: Sequence[tuple[float, float]], beta: float,
                         constant: float = LEMMA_CONSTANT) -> CheckReport:
    """``||T_1 ... T_k||_2 <= min(c k, c / sqrt|disc_k|) rho(T_k)^k`` for a decaying segment."""
    name = "combined_bound"
    etas = np.array([e for e, _ in segment], dtype=float)
    lams = np.array([l for _, l in segment], dtype=float)
    if len(segment) == 0 or not 0.25 <= beta < 1:
        return CheckReport.not_applicable(name, "needs a nonempty segment and beta in [1/4, 1)")
    if np.any(np.diff(etas) > 0) or np.any(lams != lams[0]):
        return CheckReport.not_applicable(name, "needs nonincreasing step sizes on one eigenvalue")
    mats = [transfer_matrix(e, l, beta) for e, l in segment]
    last = mats[-1]
    disc = discriminant(last)
    if disc < 0:
        return CheckReport.not_applicable(name, "last matrix must have real eigenvalues")
    P = np.eye(2)
    for m in mats:
        P = P @ m.matrix
    k = len(mats)
    lhs = spectral_norm(P)
    factor = constant * k if disc == 0 else min(constant * k, constant / math.sqrt(disc))
    rhs = factor * spectral_radius(last) ** k
    witness = {"beta": beta, "k": k, "eta_first": etas[0], "eta_last": etas[-1], "lam": lams[0],
               "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs}
    return CheckReport(name, 1, int(lhs > rhs * (1 + RTOL)), witness)


def combined_bound_suite(trials: int = 1_000, seed: int = 0, constant: float = LEMMA_CONSTANT) -> CheckReport:
    rng = np.random.default_rng([seed, 3])
    reports = []
    for _ in range(trials):
        beta = rng.uniform(0.25, 1.0)
        el_last = rng.uniform(0.0, (1 - math.sqrt(beta)) ** 2)
        n_stages = int(rng.integers(1, 5))
        factor = rng.uniform(1.0, 10.0)
        rates = np.minimum(el_last * factor ** np.arange(n_stages - 1, -1, -1.0), 1.0)
        lengths = rng.integers(1, 60, n_stages)
        segment = [(float(r), 1.0) for r, n in zip(rates, lengths) for _ in range(int(n))]
        reports.append(check_combined_bound(segment, beta, constant))
    return _merge("combined_bound", reports)


# --- stage contraction ----------------------------------------------------------------

def check_stage_contraction(beta: float, eta_lambda: float, K: int, T: int, kappa: float) -> CheckReport:
    """``||T^K||_2 <= 1`` for a complex-regime stage of length ``K >= sqrt(kappa) ln(8T)``."""
    name = "stage_contraction"
    want_beta = (1 - 1 / math.sqrt(kappa)) ** 2
    if not math.isclose(beta, want_beta, rel_tol=1e-12):
        return CheckReport.not_applicable(name, "beta must equal (1 - 1/sqrt(kappa))^2", beta=beta, kappa=kappa)
    if not eta_lambda > (1 - math.sqrt(beta)) ** 2:
        return CheckReport.not_applicable(name, "eta*lambda must be in the complex-eigenvalue regime",
                                          eta_lambda=eta_lambda)
    if K < math.sqrt(kappa) * math.log(8 * T):
        return CheckReport.not_applicable(name, "stage shorter than sqrt(kappa) ln(8T)", K=K, T=T)
    B, log_s = power_lognorm(transfer_matrix(eta_lambda, 1.0, beta).matrix, K)
    log_norm = log_s + math.log(spectral_norm(B))
    scalar = math.log(8 * K) + 0.5 * K * math.log(beta)
    w = {"beta": beta, "eta_lambda": eta_lambda, "K": K, "T": T, "kappa": kappa,
         "log_norm": log_norm, "norm": math.exp(log_norm), "scalar_bound": math.exp(scalar),
         "ratio": math.exp(log_norm)}
    fail = log_norm > math.log1p(RTOL)
    rep = CheckReport(name, 1, int(fail), w)
    if scalar <= 0 and fail:
        rep.notes.append("scalar bound 8K beta^(K/2) <= 1 but matrix norm exceeds 1")
    return rep


def stage_contraction_suite(kappas=(4, 16, 64), Ts=(100, 10_000), n_eta: int = 64) -> CheckReport:
    reports = []
    for kappa in kappas:
        beta = (1 - 1 / math.sqrt(kappa)) ** 2
        lo = (1 - math.sqrt(beta)) ** 2
        for T in Ts:
            k_min = math.ceil(math.sqrt(kappa) * math.log(8 * T))
            Ks = sorted({k for k in (k_min, k_min + 1, 2 * k_min, 5 * k_min, T) if k_min <= k <= T})
            for el in np.linspace(lo, 1.0, n_eta + 1)[1:]:
                for K in Ks:
                    reports.append(check_stage_contraction(beta, float(el), K, T, kappa))
    return _merge("stage_contraction", reports)


# --- auxiliary scalar inequalities --------------------------------------------------------

def check_aux_inequalities(grid_size: int = 10_000) -> CheckReport:
    """``sqrt(1 - x) <= 1 - x/2`` on [0, 1] and ``(1 - 1/x)^x <= 1/e`` on [1, 1e6]."""
    x = np.linspace(0.0, 1.0, grid_size)
    lhs1, rhs1 = np.sqrt(1 - x), 1 - x / 2
    y = np.geomspace(1.0, 1e6, grid_size)
    with np.errstate(divide="ignore"):
        lhs2 = np.where(y == 1, 0.0, np.exp(y * np.log1p(-1 / y)))
    rhs2 = np.full_like(y, math.exp(-1))
    fails = int(np.sum(lhs1 > rhs1 * (1 + RTOL)) + np.sum(lhs2 > rhs2 * (1 + RTOL)))
    r1, r2 = lhs1 / rhs1, lhs2 / rhs2
    if r1.max() >= r2.max():
        i = int(np.argmax(r1))
        w = {"inequality": "sqrt(1-x) <= 1-x/2", "x": x[i], "lhs": lhs1[i], "rhs": rhs1[i], "ratio": r1[i]}
    else:
        i = int(np.argmax(r2))
        w = {"inequality": "(1-1/x)^x <= 1/e", "x": y[i], "lhs": lhs2[i], "rhs": rhs2[i], "ratio": r2[i]}
    return CheckReport("aux_inequalities", 2 * grid_size, fails, {k: float(v) if not isinstance(v, str) else v
                                                                 for k, v in w.items()})


# --- spectral radius formula ------------------------------------------------------------

def check_spectral_radius(beta, eta_lambda, atol: float = 1e-10) -> CheckReport:
    """Closed-form spectral radius against ``numpy.linalg.eigvals``; ``sqrt(beta)`` exactly when complex."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    el = np.atleast_1d(np.asarray(eta_lambda, dtype=float))
    closed = np.array([spectral_radius(transfer_matrix(e, 1.0, b)) for b, e in zip(beta, el)])
    numeric = np.max(np.abs(np.linalg.eigvals(_tmats(beta, el))), axis=-1)
    _, disc = _rho(beta, el)
    err = np.abs(closed - numeric)
    complex_exact = np.where(disc < 0, closed == np.sqrt(beta), True)
    fails = (err > atol) | ~complex_exact
    i = int(np.argmax(err))
    w = {"beta": beta[i], "eta_lambda": el[i], "closed_form": closed[i], "eigensolver": numeric[i],
         "abs_error": err[i], "ratio": err[i] / atol}
    return CheckReport("spectral_radius", beta.size, int(fails.sum()), {k: float(v) for k, v in w.items()})


def spectral_radius_suite(trials: int = 10_000, seed: int = 0, grid: int = 200) -> CheckReport:
    rng = np.random.default_rng([seed, 4])
    beta = rng.uniform(0.0, 1.0, trials)
    el = rng.uniform(0.0, 1.0, trials)
    formula = check_spectral_radius(beta, el)
    # monotone in eta*lambda on fixed-beta grids
    mono_fail = 0
    worst = 0.0
    for b in np.linspace(0.01, 0.99, 34):
        xs = np.linspace(1e-6, 1.0, grid)
        rho = np.array([spectral_radius(transfer_matrix(x, 1.0, b)) for x in xs])
        inc = np.diff(rho)
        worst = max(worst, float(inc.max()))
        mono_fail += int(np.sum(inc > 1e-15))
    rep = CheckReport("spectral_radius", formula.trials + 34 * (grid - 1), formula.failures + mono_fail,
                      formula.worst_witness)
    rep.worst_witness = dict(rep.worst_witness, max_increase_along_grid=worst)
    return rep


# --- theorem checks -----------------------------------------------------------------

def check_theorem1(kappa: float, L: float, c0: float, schedules: Sequence[Schedule]) -> CheckReport:
    """Exact SGD risk on the hard instance stays above ``gap/2 exp(-8T/kappa)``."""
    problem, w0 = counterexample_instance(kappa, L, c0)
    gap = excess_risk(problem, w0)
    for s in schedules:
        if s.max_rate > 2.0 / L:
            raise ValueError(f"schedule uses rate {s.max_rate} above 2/L = {2.0 / L}")
    fails = 0
    worst = None
    for s in schedules:
        trace = exact_risk_trace(problem, s, 0.0, 1, w0, record_every=s.T)
        bound = sgd_lower_bound(gap, kappa, s.T)
        log_risk = float(trace.log_bias_risk[-1])
        log_bound = math.log(0.5 * gap) - 8.0 * s.T / kappa if gap > 0 else -math.inf
        # risk >= bound with relative slack, compared in log space
        ok = log_risk >= log_bound + math.log1p(-RTOL)
        fails += not ok
        ratio = math.exp(log_bound - log_risk) if math.isfinite(log_risk) else math.inf
        w = {"T": s.T, "rates": list(s.stage_rates), "lengths": list(s.stage_lengths), "risk": trace.final[2],
             "log_risk": log_risk, "bound": bound, "log_bound": log_bound, "gap": gap, "ratio": ratio}
        if worst is None or ratio > worst["ratio"]:
            worst = w
    return CheckReport("theorem1", len(schedules), fails, worst)


def theorem2_problem(kappa: float, d: int, sigma2: float, gap: float, L: float = 1.0
                     ) -> tuple[QuadraticProblem, np.ndarray]:
    """Spectrum ``{L, mu}`` plus ``d - 2`` log-spaced interior values; start at excess risk ``gap``."""
    if d < 2:
        raise ValueError("need d >= 2 to realise the condition number")
    lam = np.geomspace(L, L / kappa, d)
    lam[0], lam[-1] = L, L / kappa
    problem = QuadraticProblem(lam, sigma2)
    w0 = np.full(d, math.sqrt(2 * gap / lam.sum()))
    return problem, w0


def check_theorem2(kappa: float, C: float, T: int, d: int, sigma2: float, M: int, w0_gap: float,
                   L: float = 1.0) -> CheckReport:
    """Exact bias and variance of the step-decay heavy ball stay below the closed-form bounds."""
    name = "theorem2"
    _, report = theorem_step_decay(kappa, L, T, C)
    if not report.feasible:
        return CheckReport.not_applicable(name, "schedule infeasible", violated=report.violated, T=T)
    schedule, _ = theorem_step_decay(kappa, L, T, C)
    problem, w0 = theorem2_problem(kappa, d, sigma2, w0_gap, L)
    trace = exact_risk_trace(problem, schedule, report.beta, M, w0, record_every=T)
    bias_bound, var_bound = theorem2_bound(problem, T, C, M, gap=w0_gap)
    log_bias = float(trace.log_bias_risk[-1])
    log_bias_bound = theorem2_log_bias_bound(problem.kappa, T, C, w0_gap)
    var = float(trace.variance_risk[-1])
    bias_ok = log_bias <= log_bias_bound + math.log1p(RTOL) or log_bias == -math.inf
    var_ok = var <= var_bound * (1 + RTOL)
    w = {"kappa": kappa, "C": C, "T": T, "d": d, "sigma2": sigma2, "M": M, "gap": w0_gap,
         "beta": report.beta, "n_stages": report.n, "K": report.K,
         "bias_risk": trace.final[0], "log_bias_risk": log_bias, "bias_bound": bias_bound,
         "log_bias_bound": log_bias_bound, "variance_risk": var, "variance_bound": var_bound,
         "ratio": max(var / var_bound if var_bound > 0 else (0.0 if var == 0 else math.inf),
                      math.exp(min(log_bias - log_bias_bound, 700)) if math.isfinite(log_bias) else 0.0)}
    return CheckReport(name, 2, int(not bias_ok) + int(not var_ok), w)


def theorem1_suite(kappa: float = 8.0, L: float = 1.0, c0: float = 1.0, Ts=(8, 32, 128)) -> CheckReport:
    reports = []
    for T in Ts:
        schedules = [constant_schedule(2.0 / L, T), constant_schedule(1.0 / L, T),
                     step_decay_schedule(1.0 / L, 0.1, 4, T)]
        reports.append(check_theorem1(kappa, L, c0, schedules))
    return _merge("theorem1", reports)


def theorem2_suite(kappa: float = 4.0, C: float = 2.0, d: int = 2, sigma2: float = 1.0) -> CheckReport:
    T = min_feasible_T(kappa, C)
    reports = [check_theorem2(kappa, C, T, d, sigma2, M, 1.0) for M in (1, 16)]
    reports.append(check_theorem2(kappa, C, T, d, 0.0, 1, 1.0))
    return _merge("theorem2", reports)


# --- registry -------------------------------------------------------------------------

SUITES: dict[str, Callable[..., CheckReport]] = {
    "power_norm": lambda seed, trials, constant: power_norm_suite(trials or 10_000, seed, constant),
    "product_monotonicity": lambda seed, trials, constant: product_monotonicity_suite(trials or 1_000, seed),
    "combined_bound": lambda seed, trials, constant: combined_bound_suite(trials or 1_000, seed, constant),
    "stage_contraction": lambda seed, trials, constant: stage_contraction_suite(),
    "aux_inequalities": lambda seed, trials, constant: check_aux_inequalities(trials or 10_000),
    "spectral_radius": lambda seed, trials, constant: spectral_radius_suite(trials or 10_000, seed),
    "theorem1": lambda seed, trials, constant: theorem1_suite(),
    "theorem2": lambda seed, trials, constant: theorem2_suite(),
}


def run_suites(names: Sequence[str], seed: int = 0, trials: int | None = None,
               constant: float = LEMMA_CONSTANT, threads: int = 1) -> list[CheckReport]:
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown checks {unknown}; valid: {sorted(SUITES)}")
    jobs = [lambda n=n: SUITES[n](seed, trials, constant) for n in names]
    if threads <= 1:
        return [job() for job in jobs]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: job(), jobs))
