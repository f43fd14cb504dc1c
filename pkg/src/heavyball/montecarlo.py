"""Sampled SGD / heavy-ball runs under Gaussian minibatch noise.

Each replication owns an independent PCG64 stream spawned from one
``numpy.random.SeedSequence``; replications are simulated side by side as
rows of one array, so results do not depend on how work is split.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import exact_risk_trace
from .problem import NoiseKind, NoiseModel, QuadraticProblem
from .schedules import Schedule, constant_schedule

__all__ = [
    "RunConfig",
    "EmpiricalRisk",
    "run_shb",
    "run_sgd",
    "default_checkpoints",
    "TargetNotReached",
    "iterations_to_target",
    "RaceResult",
    "race",
]

_CHUNK = 256


def default_checkpoints(T: int, n: int = 100) -> list[int]:
    """``0`` plus ``n`` geometrically spaced iterations up to ``T``."""
    pts = np.unique(np.round(np.geomspace(1, T, n)).astype(int)) if T >= 1 else np.array([], int)
    return [0, *pts.tolist()]


@dataclass(frozen=True)
class RunConfig:
    problem: QuadraticProblem
    schedule: Schedule
    beta: float = 0.0
    noise: NoiseModel = field(default_factory=NoiseModel)
    w0: np.ndarray | None = None
    seed: int = 0
    replications: int = 1
    checkpoints: tuple[int, ...] | None = None

    def __post_init__(self):
        if not 0 <= self.beta < 1:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        if self.replications < 1:
            raise ValueError("replications must be positive")
        w0 = self.problem.w_star + 1.0 if self.w0 is None else np.asarray(self.w0, dtype=np.float64)
        if w0.shape != (self.problem.d,):
            raise ValueError(f"w0 has shape {w0.shape}, expected ({self.problem.d},)")
        object.__setattr__(self, "w0", w0)
        T = self.schedule.T
        ck = default_checkpoints(T) if self.checkpoints is None else sorted(set(int(c) for c in self.checkpoints))
        if not ck or ck[0] < 0 or ck[-1] > T:
            raise ValueError(f"checkpoints must lie in [0, {T}]")
        object.__setattr__(self, "checkpoints", tuple(ck))


@dataclass
class EmpiricalRisk:
    checkpoints: np.ndarray
    mean: np.ndarray
    se: np.ndarray
    n: int
    trajectory: np.ndarray | None = field(default=None, repr=False)

    def to_csv(self, fh=None) -> str | None:
        own = fh is None
        fh = io.StringIO() if own else fh
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["checkpoint", "mean", "se", "n"])
        for c, m, s in zip(self.checkpoints, self.mean, self.se):
            w.writerow([int(c), repr(float(m)), repr(float(s)), self.n])
        return fh.getvalue() if own else None

    def to_dict(self) -> dict:
        return {"checkpoints": self.checkpoints.tolist(), "mean": self.mean.tolist(),
                "se": self.se.tolist(), "n": self.n}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _streams(seed: int, reps: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(reps)]


def _simulate(config: RunConfig, momentum: bool, keep_trajectory: bool, threads: int):
    problem = config.problem
    lam, w_star = problem.eigenvalues, problem.w_star
    scales = config.noise.scales(problem)
    noisy = config.noise.kind is not NoiseKind.NONE and problem.sigma2 > 0
    beta = config.beta
    etas = config.schedule.etas()
    T = etas.size
    reps = config.replications
    gens = _streams(config.seed, reps)
    ck = np.array(config.checkpoints)
    ck_slot = {int(c): i for i, c in enumerate(ck)}
    w = np.tile(config.w0, (reps, 1))
    v = np.zeros_like(w)
    risks = np.empty((reps, ck.size))
    traj = np.empty((ck.size, reps, problem.d)) if keep_trajectory else None

    def record(t):
        i = ck_slot.get(t)
        if i is None:
            return
        diff = w - w_star
        risks[:, i] = 0.5 * (diff * diff) @ lam
        if traj is not None:
            traj[i] = w

    def draw(n_steps):
        def block(g):
            return g.standard_normal((n_steps, problem.d))
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                blocks = list(pool.map(block, gens))
        else:
            blocks = [block(g) for g in gens]
        return np.stack(blocks, axis=1) * scales

    record(0)
    for start in range(0, T, _CHUNK):
        stop = min(start + _CHUNK, T)
        noise = draw(stop - start) if noisy else None
        for t in range(start, stop):
            eta = etas[t]
            g = lam * (w - w_star)
            if noise is not None:
                g = g - noise[t - start]
            if momentum:
                v = beta * v + eta * g
                w = w - v
            else:
                w = w - eta * g
            record(t + 1)
    # shifted by the first replication so identical draws give an exact mean and zero spread
    shifted = risks - risks[0]
    mean = risks[0] + shifted.mean(axis=0)
    se = shifted.std(axis=0, ddof=1) / math.sqrt(reps) if reps > 1 else np.zeros(ck.size)
    return EmpiricalRisk(ck, mean, se, reps, traj)


def run_shb(config: RunConfig, *, keep_trajectory: bool = False, threads: int = 1) -> EmpiricalRisk:
    """Heavy ball ``v <- beta v + eta g``, ``w <- w - v`` from ``v_0 = 0``."""
    return _simulate(config, True, keep_trajectory, threads)


def run_sgd(config: RunConfig, *, keep_trajectory: bool = False, threads: int = 1) -> EmpiricalRisk:
    """Plain minibatch SGD ``w <- w - eta g``; ``config.beta`` is ignored."""
    return _simulate(config, False, keep_trajectory, threads)


# --- iteration races ------------------------------------------------------------------

class TargetNotReached(RuntimeError):
    def __init__(self, horizon: int):
        self.horizon = horizon
        super().__init__(f"target not reached within {horizon} iterations")


def iterations_to_target(problem: QuadraticProblem, method: str, schedule: Schedule, beta: float,
                         target_ratio: float, w0=None) -> int:
    """First ``t`` with ``risk(t) / risk(0) <= target_ratio`` on a noiseless problem."""
    if problem.sigma2 != 0:
        raise ValueError("iterations_to_target is a bias-only race; use sigma2 = 0")
    if not 0 < target_ratio <= 1:
        raise ValueError("target_ratio must lie in (0, 1]")
    if method not in ("sgd", "shb"):
        raise ValueError(f"method must be 'sgd' or 'shb', got {method!r}")
    trace = exact_risk_trace(problem, schedule, 0.0 if method == "sgd" else beta, 1, w0)
    if trace.log_bias_risk[0] == -math.inf:
        raise ValueError("initial risk is zero; the ratio is undefined")
    # compare in log space so the race works below the double-precision floor
    log_ratio = trace.log_bias_risk - trace.log_bias_risk[0]
    hit = np.flatnonzero(log_ratio <= math.log(target_ratio))
    if hit.size == 0:
        raise TargetNotReached(schedule.T)
    return int(trace.iterations[hit[0]])


@dataclass(frozen=True)
class RaceResult:
    kappa: float
    t_sgd: int | None
    t_shb: int | None
    horizon: int

    @property
    def ratio(self) -> float:
        if self.t_sgd is None or self.t_shb is None:
            return math.nan
        if self.t_shb == 0:
            return math.inf if self.t_sgd else 1.0
        return self.t_sgd / self.t_shb


def race(kappa: float, target_ratio: float, L: float = 1.0, horizon: int | None = None) -> RaceResult:
    """SGD (``eta = 1/L``) against heavy ball (``beta = (1 - 1/sqrt(kappa))^2``, ``eta = 1/L``).

    The problem has spectrum ``{L, L/kappa}``, no noise and starts at ``w* + 1``.
    """
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    problem = QuadraticProblem([L, L / kappa] if kappa > 1 else [L], 0.0)
    if horizon is None:
        horizon = int(math.ceil(kappa * max(math.log(1.0 / target_ratio), 1.0))) + 16
    schedule = constant_schedule(1.0 / L, horizon)
    beta = (1 - 1 / math.sqrt(kappa)) ** 2
    out = {}
    for method in ("sgd", "shb"):
        try:
            out[method] = iterations_to_target(problem, method, schedule, beta, target_ratio)
        except TargetNotReached:
            out[method] = None
    return RaceResult(float(kappa), out["sgd"], out["shb"], horizon)
