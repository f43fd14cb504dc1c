"""Piecewise-constant learning-rate schedules."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Schedule",
    "TheoremScheduleReport",
    "constant_schedule",
    "step_decay_schedule",
    "theorem_step_decay",
    "theorem_requirements",
    "req_var_T_lhs",
    "min_feasible_T",
    "aux_h",
    "schedule_from_dict",
    "load_schedule",
]


@dataclass(frozen=True)
class Schedule:
    """Stage ``l`` runs ``stage_lengths[l]`` iterations at ``stage_rates[l]``."""

    stage_rates: tuple[float, ...]
    stage_lengths: tuple[int, ...]

    def __post_init__(self):
        rates = tuple(float(r) for r in self.stage_rates)
        lengths = tuple(int(k) for k in self.stage_lengths)
        if len(rates) == 0 or len(rates) != len(lengths):
            raise ValueError("stage_rates and stage_lengths must be nonempty and of equal length")
        if any(not (r > 0 and math.isfinite(r)) for r in rates):
            raise ValueError(f"stage rates must be finite and positive: {rates}")
        if any(k < 1 for k in lengths):
            raise ValueError(f"stage lengths must be positive: {lengths}")
        object.__setattr__(self, "stage_rates", rates)
        object.__setattr__(self, "stage_lengths", lengths)

    @property
    def T(self) -> int:
        return sum(self.stage_lengths)

    @property
    def n_stages(self) -> int:
        return len(self.stage_rates)

    @property
    def stage_starts(self) -> tuple[int, ...]:
        return tuple(np.concatenate([[0], np.cumsum(self.stage_lengths)[:-1]]).tolist())

    def eta_at(self, t: int) -> float:
        if not 0 <= t < self.T:
            raise IndexError(f"iteration {t} outside schedule of length {self.T}")
        for rate, start, length in zip(self.stage_rates, self.stage_starts, self.stage_lengths):
            if t < start + length:
                return rate
        raise AssertionError("unreachable")

    def etas(self) -> np.ndarray:
        """The full per-iteration rate sequence, length ``T``."""
        return np.repeat(np.array(self.stage_rates), self.stage_lengths)

    @property
    def max_rate(self) -> float:
        return max(self.stage_rates)

    def to_dict(self) -> dict:
        return {"kind": "stages", "rates": list(self.stage_rates), "lengths": list(self.stage_lengths)}


def constant_schedule(eta: float, T: int) -> Schedule:
    return Schedule((eta,), (T,))


def step_decay_schedule(eta0: float, gamma: float, n: int, T: int) -> Schedule:
    """``n`` stages of ``T // n`` steps, the last one taking the remainder.

    Stage ``l`` (1-based) uses ``eta0 * gamma**(l - 1)``.
    """
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if n < 1:
        raise ValueError("n must be positive")
    if T < n:
        raise ValueError(f"T={T} is shorter than the number of stages n={n}")
    K = T // n
    lengths = [K] * (n - 1) + [T - K * (n - 1)]
    rates = [eta0 * gamma**ell for ell in range(n)]
    return Schedule(tuple(rates), tuple(lengths))


# --- theorem-compliant step decay ------------------------------------------------

def _log_c(x_log: float, C: float) -> float:
    """``log_C`` of a number given by its natural log."""
    return x_log / math.log(C)


def req_var_T_lhs(T: float, C: float) -> float:
    """Left side of the iteration-count requirement.

    ``T / (ln(2^14 T^8) * ln(2^6 T^4) * log_C(T^2))``, evaluated in log form
    so large ``T`` never overflows.
    """
    lnT = math.log(T)
    denom = (14 * math.log(2) + 8 * lnT) * (6 * math.log(2) + 4 * lnT) * _log_c(2 * lnT, C)
    if denom <= 0:
        return -math.inf if T > 0 else math.nan
    return T / denom


def aux_h(T: float, kappa: float, C: float) -> float:
    """``4 ln(2^6 T^4) log_C(T sqrt(kappa))``."""
    lnT = math.log(T)
    return 4.0 * (6 * math.log(2) + 4 * lnT) * _log_c(lnT + 0.5 * math.log(kappa), C)


def theorem_requirements(kappa: float, T: int, C: float) -> dict[str, bool]:
    """Evaluate the four schedule requirements for ``(kappa, T, C)``.

    ``req_var_eta_1`` and ``req_var_k_l`` hold by construction of
    :func:`theorem_step_decay`; they are listed so the report is complete.
    """
    req_C = 1 < C <= T * math.sqrt(kappa)
    return {
        "req_C": bool(req_C),
        "req_var_eta_1": True,
        "req_var_k_l": bool(T >= 1 and req_C),
        "req_var_T": bool(T > 1 and req_var_T_lhs(T, C) >= 2 * C * math.sqrt(kappa)),
    }


@dataclass(frozen=True)
class TheoremScheduleReport:
    C: float
    K: int
    n: int
    beta: float
    feasible: bool
    h: float
    violated: list[str] = field(default_factory=list)
    requirements: dict[str, bool] = field(default_factory=dict)
    kappa: float = 0.0
    L: float = 0.0
    T: int = 0
    rounding: str = "n = ceil(log_C(T sqrt(kappa))), K = floor(T / n), remainder appended to last stage"

    def to_dict(self) -> dict:
        return asdict(self)


def theorem_step_decay(kappa: float, L: float, T: int, C: float) -> tuple[Schedule, TheoremScheduleReport]:
    """Step decay with momentum ``(1 - 1/sqrt(kappa))^2`` and rates ``C^-(l-1) / L``.

    Infeasible ``T`` is reported, not raised, so exploratory runs below the
    threshold still get a usable schedule. An out-of-range ``C`` raises.
    """
    if not kappa >= 4:
        raise ValueError(f"kappa must be >= 4, got {kappa}")
    if not L > 0:
        raise ValueError("L must be positive")
    if T < 1:
        raise ValueError("T must be positive")
    if not 1 < C <= T * math.sqrt(kappa):
        raise ValueError(f"decay factor C={C} must satisfy 1 < C <= T sqrt(kappa) = {T * math.sqrt(kappa)}")
    beta = (1.0 - 1.0 / math.sqrt(kappa)) ** 2
    n = max(1, math.ceil(_log_c(math.log(T) + 0.5 * math.log(kappa), C) - 1e-12))
    n = min(n, T)
    K = T // n
    lengths = [K] * (n - 1) + [T - K * (n - 1)]
    rates = [1.0 / L / C**ell for ell in range(n)]
    reqs = theorem_requirements(kappa, T, C)
    violated = [name for name, ok in reqs.items() if not ok]
    report = TheoremScheduleReport(
        C=float(C), K=K, n=n, beta=beta, feasible=not violated,
        h=aux_h(T, kappa, C) if T > 1 else math.nan,
        violated=violated, requirements=reqs, kappa=float(kappa), L=float(L), T=int(T),
    )
    return Schedule(tuple(rates), tuple(lengths)), report


def min_feasible_T(kappa: float, C: float) -> int:
    """Smallest integer ``T`` meeting the iteration-count requirement.

    The left side is increasing for ``T`` past a small threshold, so doubling
    from ``T = 2`` brackets the crossing and bisection finds it.
    """
    if not C > 1:
        raise ValueError("C must exceed 1")
    rhs = 2 * C * math.sqrt(kappa)

    def ok(T: int) -> bool:
        return req_var_T_lhs(T, C) >= rhs

    hi = 2
    while not ok(hi):
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


# --- JSON surface -----------------------------------------------------------------

def schedule_from_dict(data: dict, *, T: int | None = None, L: float | None = None, kappa: float | None = None) -> Schedule:
    """Build a schedule from its JSON description.

    Kinds: ``constant`` (eta, T), ``step`` (eta0, gamma, n, T), ``theorem``
    (kappa, L, T, C) and ``stages`` (rates, lengths). ``T``/``L``/``kappa``
    keyword arguments fill fields the file leaves out.
    """
    kind = data.get("kind")
    fields = {k: v for k, v in data.items() if k != "kind"}
    if T is not None:
        fields.setdefault("T", T)
    allowed = {
        "constant": {"eta", "T"},
        "step": {"eta0", "gamma", "n", "T"},
        "theorem": {"kappa", "L", "T", "C"},
        "stages": {"rates", "lengths"},
    }
    if kind not in allowed:
        raise ValueError(f"unknown schedule kind {kind!r}; expected one of {sorted(allowed)}")
    if kind == "stages":
        fields.pop("T", None)
    if kind == "theorem":
        if L is not None:
            fields.setdefault("L", L)
        if kappa is not None:
            fields.setdefault("kappa", kappa)
    extra = set(fields) - allowed[kind]
    missing = allowed[kind] - set(fields)
    if extra:
        raise ValueError(f"unknown fields for {kind} schedule: {sorted(extra)}")
    if missing:
        raise ValueError(f"missing fields for {kind} schedule: {sorted(missing)}")
    if kind == "constant":
        return constant_schedule(float(fields["eta"]), int(fields["T"]))
    if kind == "step":
        return step_decay_schedule(float(fields["eta0"]), float(fields["gamma"]), int(fields["n"]), int(fields["T"]))
    if kind == "theorem":
        sched, _ = theorem_step_decay(float(fields["kappa"]), float(fields["L"]), int(fields["T"]), float(fields["C"]))
        return sched
    return Schedule(tuple(fields["rates"]), tuple(fields["lengths"]))


def load_schedule(path: str | Path, **kwargs) -> Schedule:
    with open(path) as fh:
        return schedule_from_dict(json.load(fh), **kwargs)
