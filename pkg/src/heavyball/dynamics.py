"""Per-eigencomponent heavy-ball dynamics.

Each eigencomponent ``j`` of the extended deviation ``(w_t - w*, w_{t-1} - w*)``
evolves by the 2x2 transfer matrix ``[[1 + beta - eta_t lambda_j, -beta], [1, 0]]``.
The expected excess risk splits exactly into a bias part (the mean pair pushed
through the matrices) and a variance part (the second moment of the injected
noise), so both are propagated here in closed form rather than sampled.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numba
import numpy as np

from .problem import QuadraticProblem, excess_risk
from .schedules import Schedule, theorem_requirements

__all__ = [
    "TransferMatrix",
    "transfer_matrix",
    "discriminant",
    "spectral_radius",
    "rho_upper_bound",
    "spectral_norm",
    "product_matrix",
    "product_norm",
    "power_lognorm",
    "MomentState",
    "RiskTrace",
    "exact_risk_trace",
    "InfeasibleScheduleError",
    "theorem2_bound",
    "theorem2_log_bias_bound",
    "sgd_lower_bound",
    "UNDERFLOW_CLAMP",
]

UNDERFLOW_CLAMP = 1e-300


@dataclass(frozen=True)
class TransferMatrix:
    eta: float
    lam: float
    beta: float

    @property
    def a(self) -> float:
        """Top-left entry ``1 + beta - eta * lambda``."""
        return 1.0 + self.beta - self.eta * self.lam

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, -self.beta], [1.0, 0.0]])

    @property
    def trace(self) -> float:
        return self.a

    @property
    def det(self) -> float:
        return self.beta


def transfer_matrix(eta: float, lam: float, beta: float) -> TransferMatrix:
    if not eta >= 0 or not lam > 0:
        raise ValueError(f"need eta >= 0 and lambda > 0, got eta={eta}, lambda={lam}")
    if not 0 <= beta < 1:
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    return TransferMatrix(float(eta), float(lam), float(beta))


def discriminant(T: TransferMatrix) -> float:
    return T.a * T.a - 4.0 * T.beta


def spectral_radius(T: TransferMatrix) -> float:
    disc = discriminant(T)
    if disc >= 0:
        return 0.5 * (abs(T.a) + math.sqrt(disc))
    return math.sqrt(T.beta)


def rho_upper_bound(T: TransferMatrix) -> float:
    """``1 - eta lambda / 2 - eta lambda / (4 (1 - sqrt(beta)))``, real regime only."""
    if discriminant(T) < 0:
        raise ValueError("bound only holds when the transfer matrix has real eigenvalues")
    x = T.eta * T.lam
    return 1.0 - x / 2.0 - x / (4.0 * (1.0 - math.sqrt(T.beta)))


def spectral_norm(A: np.ndarray) -> float:
    """Largest singular value of a 2x2 matrix, in closed form."""
    (a, b), (c, d) = np.asarray(A, dtype=np.float64)
    # sum of two nonnegative terms, so no cancellation near repeated singular values
    return 0.5 * (math.hypot(a + d, b - c) + math.hypot(a - d, b + c))


def product_matrix(matrices: Sequence[TransferMatrix | np.ndarray]) -> np.ndarray:
    """Left-to-right product ``A_1 A_2 ... A_k``."""
    if len(matrices) == 0:
        raise ValueError("empty product; pass an explicit identity instead")
    out = np.eye(2)
    for M in matrices:
        out = out @ (M.matrix if isinstance(M, TransferMatrix) else np.asarray(M, dtype=np.float64))
    return out


def product_norm(matrices: Sequence[TransferMatrix | np.ndarray], norm: str = "2") -> float:
    P = product_matrix(matrices)
    if norm == "2":
        return spectral_norm(P)
    if norm == "fro":
        return float(np.linalg.norm(P, "fro"))
    raise ValueError(f"unknown norm {norm!r}")


def power_lognorm(A: np.ndarray, k: int) -> tuple[np.ndarray, float]:
    """``A^k`` as ``(B, s)`` with ``A^k = exp(s) * B`` and ``max|B| = 1``.

    Repeated squaring with renormalisation after every product, so powers
    whose entries over- or underflow in double precision stay representable.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    result, log_r = np.eye(2), 0.0
    base, log_b = np.asarray(A, dtype=np.float64).copy(), 0.0
    while k:
        if k & 1:
            result = result @ base
            log_r += log_b
            result, log_r = _renorm(result, log_r)
        k >>= 1
        if k:
            base = base @ base
            log_b *= 2
            base, log_b = _renorm(base, log_b)
    return result, log_r


def _renorm(B: np.ndarray, log_s: float) -> tuple[np.ndarray, float]:
    m = float(np.max(np.abs(B)))
    if m == 0.0 or not math.isfinite(m):
        return B, log_s
    return B / m, log_s + math.log(m)


# --- exact risk recursion ----------------------------------------------------------

@numba.njit(cache=True)
def _risk_kernel(lam, dev, q, beta, rates, lengths, record_every, out_t, out_bias, out_bias_log, out_var,
                 m_out, e_out, s_out):
    d = lam.size
    m1 = dev.copy()
    m2 = dev.copy()
    expo = np.zeros(d, dtype=np.int64)
    s11 = np.zeros(d)
    s12 = np.zeros(d)
    s22 = np.zeros(d)
    ln2 = math.log(2.0)
    t = 0
    slot = 0
    for stage in range(rates.size):
        eta = rates[stage]
        for _ in range(lengths[stage]):
            if t % record_every == 0:
                out_t[slot] = t
                out_bias[slot] = _bias(lam, m1, expo)
                out_bias_log[slot] = _bias_log(lam, m1, expo, ln2)
                out_var[slot] = _var(lam, s11)
                slot += 1
            for j in range(d):
                a = 1.0 + beta - eta * lam[j]
                b = -beta
                n1 = a * m1[j] + b * m2[j]
                m2[j] = m1[j]
                m1[j] = n1
                big = max(abs(m1[j]), abs(m2[j]))
                if big != 0.0 and (big < 1e-150 or big > 1e150):
                    fr, ex = math.frexp(big)
                    sc = math.ldexp(1.0, -ex)
                    m1[j] *= sc
                    m2[j] *= sc
                    expo[j] += ex
                x11 = s11[j]
                x12 = s12[j]
                x22 = s22[j]
                s11[j] = a * a * x11 + 2.0 * a * b * x12 + b * b * x22 + eta * eta * q[j]
                s12[j] = a * x11 + b * x12
                s22[j] = x11
            t += 1
    out_t[slot] = t
    out_bias[slot] = _bias(lam, m1, expo)
    out_bias_log[slot] = _bias_log(lam, m1, expo, ln2)
    out_var[slot] = _var(lam, s11)
    slot += 1
    for j in range(d):
        m_out[j, 0] = m1[j]
        m_out[j, 1] = m2[j]
        e_out[j] = expo[j]
        s_out[j, 0] = s11[j]
        s_out[j, 1] = s12[j]
        s_out[j, 2] = s22[j]
    return slot


@numba.njit(cache=True)
def _bias(lam, m1, expo):
    acc = 0.0
    for j in range(lam.size):
        x = math.ldexp(m1[j], expo[j]) if expo[j] != 0 else m1[j]
        acc += lam[j] * x * x
    return 0.5 * acc


@numba.njit(cache=True)
def _bias_log(lam, m1, expo, ln2):
    # log of 1/2 sum_j lam_j (m1_j 2^e_j)^2, summed in log space
    d = lam.size
    best = -np.inf
    for j in range(d):
        if m1[j] != 0.0:
            v = math.log(0.5 * lam[j]) + 2.0 * math.log(abs(m1[j])) + 2.0 * expo[j] * ln2
            if v > best:
                best = v
    if best == -np.inf:
        return best
    acc = 0.0
    for j in range(d):
        if m1[j] != 0.0:
            v = math.log(0.5 * lam[j]) + 2.0 * math.log(abs(m1[j])) + 2.0 * expo[j] * ln2
            acc += math.exp(v - best)
    return best + math.log(acc)


@numba.njit(cache=True)
def _var(lam, s11):
    acc = 0.0
    for j in range(lam.size):
        acc += lam[j] * s11[j]
    return 0.5 * acc


@dataclass(frozen=True)
class MomentState:
    """Per-component first and second moments of the extended deviation.

    ``mean[j]`` is ``(E[w_t - w*], E[w_{t-1} - w*])_j`` equal to
    ``mean_scaled[j] * 2**mean_exponent[j]`` (kept split to survive underflow).
    ``covariance[j]`` holds ``(S11, S12, S22)`` of the noise-driven part.
    """

    mean_scaled: np.ndarray
    mean_exponent: np.ndarray
    covariance: np.ndarray

    @property
    def mean(self) -> np.ndarray:
        return np.ldexp(self.mean_scaled, self.mean_exponent[:, None].astype(np.int32))

    def second_moment(self) -> np.ndarray:
        """``E[x x^T]`` per component, shape ``(d, 2, 2)``."""
        m = self.mean
        c = self.covariance
        cov = np.stack([np.stack([c[:, 0], c[:, 1]], -1), np.stack([c[:, 1], c[:, 2]], -1)], -2)
        return cov + m[:, :, None] * m[:, None, :]

    def is_valid(self, rtol: float = 1e-12) -> bool:
        """Second moment and covariance both PSD up to ``rtol * trace``."""
        c = self.covariance
        cov = np.stack([np.stack([c[:, 0], c[:, 1]], -1), np.stack([c[:, 1], c[:, 2]], -1)], -2)
        for mats in (cov, self.second_moment()):
            ev = np.linalg.eigvalsh(mats)
            tr = np.trace(mats, axis1=1, axis2=2)
            if np.any(ev[:, 0] < -rtol * np.maximum(tr, 1e-300)):
                return False
        return True


@dataclass
class RiskTrace:
    """Expected excess risk at the recorded iterations.

    ``log_bias_risk`` is the natural log of the bias term computed without
    underflow; ``bias_risk`` is its exponential with values below
    :data:`UNDERFLOW_CLAMP` set to zero (``underflow`` records whether that
    happened anywhere).
    """

    iterations: np.ndarray
    bias_risk: np.ndarray
    variance_risk: np.ndarray
    log_bias_risk: np.ndarray
    underflow: bool = False
    final_state: MomentState | None = field(default=None, repr=False)

    @property
    def total_risk(self) -> np.ndarray:
        return self.bias_risk + self.variance_risk

    def at(self, t: int) -> tuple[float, float, float]:
        idx = np.searchsorted(self.iterations, t)
        if idx >= self.iterations.size or self.iterations[idx] != t:
            raise KeyError(f"iteration {t} was not recorded")
        return float(self.bias_risk[idx]), float(self.variance_risk[idx]), float(self.total_risk[idx])

    @property
    def final(self) -> tuple[float, float, float]:
        return float(self.bias_risk[-1]), float(self.variance_risk[-1]), float(self.total_risk[-1])

    def to_csv(self, fh=None, stride: int = 1) -> str | None:
        own = fh is None
        fh = io.StringIO() if own else fh
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "bias_risk", "variance_risk", "total_risk"])
        total = self.total_risk
        keep = list(range(0, self.iterations.size, stride))
        if keep[-1] != self.iterations.size - 1:
            keep.append(self.iterations.size - 1)
        for i in keep:
            w.writerow([int(self.iterations[i]), repr(float(self.bias_risk[i])),
                        repr(float(self.variance_risk[i])), repr(float(total[i]))])
        return fh.getvalue() if own else None


def exact_risk_trace(
    problem: QuadraticProblem,
    schedule: Schedule,
    beta: float,
    M: int = 1,
    w0=None,
    *,
    horizon: int | None = None,
    record_every: int = 1,
) -> RiskTrace:
    """Exact expected bias and variance risk of heavy ball under Gaussian noise.

    Starts from ``v_0 = 0`` (so ``w_{-1} = w_0``). ``w0`` defaults to
    ``w_star + 1``. Records iterations ``0, record_every, 2 * record_every, ...``
    and always the final one.
    """
    if not 0 <= beta < 1:
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    if int(M) != M or M < 1:
        raise ValueError(f"batch size must be a positive integer, got {M}")
    if record_every < 1:
        raise ValueError("record_every must be positive")
    if horizon is not None and horizon != schedule.T:
        raise ValueError(f"schedule has {schedule.T} iterations but horizon {horizon} was requested")
    w0 = problem.w_star + 1.0 if w0 is None else np.asarray(w0, dtype=np.float64)
    if w0.shape != (problem.d,):
        raise ValueError(f"w0 has shape {w0.shape}, expected ({problem.d},)")
    lam = np.ascontiguousarray(problem.eigenvalues, dtype=np.float64)
    dev = np.ascontiguousarray(w0 - problem.w_star, dtype=np.float64)
    # sigma^2 / M first, so a batch of M is bit-identical to sigma^2 -> sigma^2 / M
    q = (problem.sigma2 / M) * lam
    rates = np.array(schedule.stage_rates, dtype=np.float64)
    lengths = np.array(schedule.stage_lengths, dtype=np.int64)
    n_slots = schedule.T // record_every + 2
    out_t = np.zeros(n_slots, dtype=np.int64)
    out_b = np.zeros(n_slots)
    out_bl = np.zeros(n_slots)
    out_v = np.zeros(n_slots)
    m_out = np.zeros((problem.d, 2))
    e_out = np.zeros(problem.d, dtype=np.int64)
    s_out = np.zeros((problem.d, 3))
    used = _risk_kernel(lam, dev, q, float(beta), rates, lengths, int(record_every),
                        out_t, out_b, out_bl, out_v, m_out, e_out, s_out)
    out_t, bias, out_bl, out_v = out_t[:used], out_b[:used], out_bl[:used], out_v[:used]
    tiny = (bias < UNDERFLOW_CLAMP) & (out_bl > -np.inf)
    bias[tiny] = 0.0
    return RiskTrace(out_t, bias, out_v, out_bl, bool(tiny.any()), MomentState(m_out, e_out, s_out))


# --- closed-form bounds ------------------------------------------------------------

class InfeasibleScheduleError(ValueError):
    def __init__(self, violated: Iterable[str]):
        self.violated = list(violated)
        super().__init__(f"schedule requirements violated: {', '.join(self.violated)}")


def _check_feasible(kappa: float, T: int, C: float):
    if kappa < 4:
        raise InfeasibleScheduleError(["kappa>=4"])
    reqs = theorem_requirements(kappa, T, C)
    violated = [k for k, ok in reqs.items() if not ok]
    if violated:
        raise InfeasibleScheduleError(violated)


def theorem2_log_bias_bound(kappa: float, T: int, C: float, gap: float) -> float:
    """Natural log of the bias bound; ``-inf`` when ``gap == 0``."""
    if gap == 0:
        return -math.inf
    logc = (math.log(T) + 0.5 * math.log(kappa)) / math.log(C)
    expo = 15 * math.log(2) + 2 * math.log(T) + 2 * math.log(kappa) - 2 * T / (math.sqrt(kappa) * logc)
    return math.log(gap) + expo


def theorem2_bound(problem: QuadraticProblem, T: int, C: float, M: int = 1, gap: float | None = None,
                   w0=None) -> tuple[float, float]:
    """Closed-form bias and variance bounds for step-decay heavy ball.

    ``gap`` is ``f(w0) - f(w*)``; give it directly or via ``w0``.
    """
    kappa = problem.kappa
    _check_feasible(kappa, T, C)
    if gap is None:
        if w0 is None:
            raise ValueError("pass gap or w0")
        gap = excess_risk(problem, w0)
    with np.errstate(under="ignore"):
        bias = math.exp(theorem2_log_bias_bound(kappa, T, C, gap)) if gap > 0 else 0.0
    logc = (math.log(T) + 0.5 * math.log(kappa)) / math.log(C)
    ln_term = 6 * math.log(2) + 4 * math.log(T)
    var = 4096 * C**2 * problem.d * problem.sigma2 / (M * T) * ln_term**2 * logc**2
    return bias, var


def sgd_lower_bound(f0_gap: float, kappa: float, T: int) -> float:
    """``(f0_gap / 2) exp(-8 T / kappa)``."""
    if kappa < 4:
        raise ValueError("kappa must be >= 4")
    return 0.5 * f0_gap * math.exp(-8.0 * T / kappa)
