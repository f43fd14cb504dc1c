"""libsvm ingestion and the minibatch ridge-regression grid search.

The ridge harness runs SGD and heavy ball with true per-sample gradients of
``(1/n)||Xw - Y||^2 + alpha ||w||^2``. Every grid point for one seed is
advanced in lockstep as a row of a weight matrix, sharing the sample order
and the start point.
"""

from __future__ import annotations

import csv
import io
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .problem import ridge_to_quadratic
from .schedules import constant_schedule, step_decay_schedule

__all__ = [
    "LibsvmParseError",
    "SparseDataset",
    "parse_libsvm",
    "load_libsvm",
    "serialize_libsvm",
    "RidgeExperimentConfig",
    "RidgeRun",
    "RidgeResult",
    "run_ridge_experiment",
    "synthetic_adult_like",
    "A4A_FEATURES",
]

A4A_FEATURES = 123
_PAIR = re.compile(r"^(\d+):(\S+)$")


class LibsvmParseError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass(frozen=True)
class SparseDataset:
    """Rows of ``(indices, values)`` with 0-based indices, plus real labels."""

    n_features: int
    rows: tuple[tuple[np.ndarray, np.ndarray], ...]
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.float64).reshape(-1)
        if labels.size != len(self.rows):
            raise ValueError(f"{labels.size} labels for {len(self.rows)} rows")
        for idx, val in self.rows:
            if idx.size and (idx[0] < 0 or idx[-1] >= self.n_features or np.any(np.diff(idx) <= 0)):
                raise ValueError("row indices must be strictly increasing and within n_features")
            if not np.all(np.isfinite(val)):
                raise ValueError("feature values must be finite")
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return len(self.rows)

    def with_n_features(self, n_features: int) -> SparseDataset:
        seen = max((int(idx[-1]) + 1 for idx, _ in self.rows if idx.size), default=0)
        if n_features < seen:
            raise ValueError(f"n_features={n_features} is below the largest index present ({seen})")
        return SparseDataset(n_features, self.rows, self.labels)

    def to_dense(self) -> tuple[np.ndarray, np.ndarray]:
        X = np.zeros((self.n_samples, self.n_features))
        for i, (idx, val) in enumerate(self.rows):
            X[i, idx] = val
        return X, self.labels.copy()


def parse_libsvm(stream: TextIO | Iterable[str], n_features: int | None = None) -> SparseDataset:
    """Parse ``<label> <idx>:<val> ...`` lines; text after ``#`` is ignored.

    File indices are 1-based. ``n_features`` defaults to the largest index
    seen; an explicit value must cover every index.
    """
    rows, labels = [], []
    max_index = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise LibsvmParseError(lineno, f"nonnumeric label {tokens[0]!r}") from None
        if not math.isfinite(label):
            raise LibsvmParseError(lineno, f"label {tokens[0]!r} is not finite")
        idx, val = [], []
        for tok in tokens[1:]:
            m = _PAIR.match(tok)
            if m is None:
                raise LibsvmParseError(lineno, f"malformed pair {tok!r}; expected <index>:<value>")
            k = int(m.group(1))
            try:
                v = float(m.group(2))
            except ValueError:
                raise LibsvmParseError(lineno, f"nonnumeric value in {tok!r}") from None
            if k < 1:
                raise LibsvmParseError(lineno, f"index {k} < 1")
            if idx and k - 1 <= idx[-1]:
                raise LibsvmParseError(lineno, f"nonincreasing index {k} after {idx[-1] + 1}")
            if not math.isfinite(v):
                raise LibsvmParseError(lineno, f"value in {tok!r} is not finite")
            idx.append(k - 1)
            val.append(v)
        if idx:
            max_index = max(max_index, idx[-1] + 1)
        rows.append((np.array(idx, dtype=np.int64), np.array(val, dtype=np.float64)))
        labels.append(label)
    if n_features is None:
        n_features = max_index
    elif n_features < max_index:
        raise ValueError(f"n_features={n_features} but the file uses index {max_index}")
    return SparseDataset(n_features, tuple(rows), np.array(labels))


def load_libsvm(path, n_features: int | None = None) -> SparseDataset:
    with open(path) as fh:
        return parse_libsvm(fh, n_features)


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() and abs(x) < 2**53 else repr(float(x))


def serialize_libsvm(dataset: SparseDataset) -> str:
    """Inverse of :func:`parse_libsvm` up to whitespace and number spelling."""
    out = io.StringIO()
    for (idx, val), y in zip(dataset.rows, dataset.labels):
        pairs = " ".join(f"{int(k) + 1}:{_fmt(v)}" for k, v in zip(idx, val))
        out.write(f"{_fmt(y)} {pairs}".rstrip() + "\n")
    return out.getvalue()


# --- ridge experiment -----------------------------------------------------------------

@dataclass(frozen=True)
class RidgeExperimentConfig:
    """Grid-search settings; defaults follow the published ridge grid."""

    alpha: float = 1e-3
    batch_sizes: tuple[int, ...] = (512, 128, 32, 8)
    epochs: int = 100
    eta0_grid: tuple[float, ...] = (1.0, 0.1, 0.01, 0.001)
    gamma_grid: tuple[float, ...] = (1 / 2, 1 / 4, 1 / 8)
    n_stage_grid: tuple[int, ...] = (2, 3, 4, 5)
    beta: float = 0.9
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    n_features: int | None = A4A_FEATURES

    def __post_init__(self):
        for name in ("batch_sizes", "eta0_grid", "gamma_grid", "n_stage_grid", "seeds"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise ValueError(f"{name} must be nonempty")
            object.__setattr__(self, name, vals)
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if any(int(m) != m or m < 1 for m in self.batch_sizes):
            raise ValueError("batch sizes must be positive integers")
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if any(not 0 < g < 1 for g in self.gamma_grid):
            raise ValueError("decay factors must lie in (0, 1)")
        if any(n < 1 for n in self.n_stage_grid):
            raise ValueError("stage counts must be positive")
        if not 0 <= self.beta < 1:
            raise ValueError("beta must lie in [0, 1)")


@dataclass(frozen=True)
class RidgeRun:
    method: str
    schedule: str
    M: int
    seed: int
    best_eta0: float
    best_gamma: float | None
    best_n: int | None
    final_gap: float


@dataclass
class RidgeResult:
    runs: list[RidgeRun]
    f_star: float
    T: dict[int, int] = field(default_factory=dict)

    def summary(self) -> list[dict]:
        """Mean and sample std (``ddof=1``) of the best gap over seeds."""
        groups: dict[tuple, list[float]] = {}
        for r in self.runs:
            groups.setdefault((r.method, r.schedule, r.M), []).append(r.final_gap)
        out = []
        for (method, schedule, M), gaps in groups.items():
            g = np.array(gaps)
            std = float(g.std(ddof=1)) if g.size > 1 else 0.0
            out.append({"method": method, "schedule": schedule, "M": M, "n_seeds": g.size,
                        "mean_gap": float(g.mean()), "std_gap": std})
        return out

    def lookup(self, method: str, schedule: str, M: int) -> dict:
        for row in self.summary():
            if (row["method"], row["schedule"], row["M"]) == (method, schedule, M):
                return row
        raise KeyError((method, schedule, M))

    def runs_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["method", "schedule", "M", "seed", "best_eta0", "best_gamma", "best_n", "final_gap"])
        for r in self.runs:
            w.writerow([r.method, r.schedule, r.M, r.seed, r.best_eta0,
                        "" if r.best_gamma is None else r.best_gamma,
                        "" if r.best_n is None else r.best_n, repr(r.final_gap)])
        return out.getvalue()

    def summary_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["method", "schedule", "M", "n_seeds", "mean_gap", "std_gap"])
        for row in self.summary():
            w.writerow([row["method"], row["schedule"], row["M"], row["n_seeds"],
                        repr(row["mean_gap"]), repr(row["std_gap"])])
        return out.getvalue()


def _grid(config: RidgeExperimentConfig, T: int):
    """Every (schedule kind, eta0, gamma, n) point with its per-step rates."""
    points, rates = [], []
    for eta0 in config.eta0_grid:
        points.append(("constant", eta0, None, None))
        rates.append(constant_schedule(eta0, T).etas())
    for eta0 in config.eta0_grid:
        for gamma in config.gamma_grid:
            for n in config.n_stage_grid:
                points.append(("step_decay", eta0, gamma, min(n, T)))
                rates.append(step_decay_schedule(eta0, gamma, min(n, T), T).etas())
    return points, np.stack(rates, axis=1)


# rows past this norm are declared divergent and frozen at +inf loss
_BLOWUP = 1e100


def _run_seed(X, Y, alpha, f_star, config, M, seed):
    n, d = X.shape
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    w0 = rng.uniform(-1.0, 1.0, size=d)
    order = np.concatenate([rng.permutation(n) for _ in range(config.epochs)])
    N = order.size
    T = math.ceil(N / M)
    points, rates = _grid(config, T)
    P = len(points)
    betas = np.array([0.0] * P + [config.beta] * P)
    etas = np.concatenate([rates, rates], axis=1)
    W = np.tile(w0, (2 * P, 1))
    V = np.zeros_like(W)
    alive = np.ones(2 * P, dtype=bool)
    for t in range(T):
        batch = order[t * M:(t + 1) * M]
        Xb, Yb = X[batch], Y[batch]
        resid = W @ Xb.T - Yb
        G = (2.0 / batch.size) * resid @ Xb + 2.0 * alpha * W
        V = betas[:, None] * V + etas[t][:, None] * G
        W = W - V
        if t % 64 == 63 or t == T - 1:
            with np.errstate(invalid="ignore", over="ignore"):
                bad = ~np.isfinite(W).all(axis=1) | (np.abs(W).max(axis=1) > _BLOWUP)
            if bad.any():
                alive &= ~bad
                W[bad] = 0.0
                V[bad] = 0.0
    R = W @ X.T - Y
    loss = (R * R).sum(axis=1) / n + alpha * (W * W).sum(axis=1)
    gaps = np.where(alive, loss - f_star, np.inf)
    runs = []
    for m_i, method in enumerate(("sgd", "shb")):
        block = gaps[m_i * P:(m_i + 1) * P]
        for kind in ("constant", "step_decay"):
            cand = [i for i, p in enumerate(points) if p[0] == kind]
            best = min(cand, key=lambda i: block[i])
            _, eta0, gamma, n_st = points[best]
            runs.append(RidgeRun(method, kind, int(M), int(seed), float(eta0), gamma, n_st, float(block[best])))
    return T, runs


def run_ridge_experiment(dataset: SparseDataset, config: RidgeExperimentConfig = RidgeExperimentConfig(),
                         *, threads: int = 1) -> RidgeResult:
    """Grid-search SGD and heavy ball under constant and step-decay rates.

    Each epoch is a fresh permutation; the epochs are concatenated and cut
    into ``ceil(epochs * n / M)`` batches, the last of which may be short.
    Divergent grid points report ``inf`` and are never selected.
    """
    if dataset.n_samples == 0:
        raise ValueError("dataset is empty")
    if config.n_features is not None and config.n_features != dataset.n_features:
        dataset = dataset.with_n_features(config.n_features)
    X, Y = dataset.to_dense()
    ridge = ridge_to_quadratic(X, Y, config.alpha)
    jobs = [(M, s) for M in config.batch_sizes for s in config.seeds]

    def work(job):
        return _run_seed(X, Y, config.alpha, ridge.f_star, config, *job)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outs = list(pool.map(work, jobs))
    else:
        outs = [work(j) for j in jobs]
    runs = [r for _, rs in outs for r in rs]
    T = {M: t for (M, _), (t, _) in zip(jobs, outs)}
    return RidgeResult(runs, ridge.f_star, T)


# --- synthetic stand-in ----------------------------------------------------------------

# one-hot group widths of the binarized census data behind the a-series files
_ADULT_GROUPS = (5, 8, 5, 16, 5, 7, 14, 6, 5, 2, 2, 2, 5, 41)


def synthetic_adult_like(n_samples: int = 4781, seed: int = 0) -> SparseDataset:
    """Random one-hot census-style data with the a4a shape.

    Fourteen categorical groups cover 123 binary features, so every row has
    fourteen ones. Category frequencies are skewed and labels in ``{-1, +1}``
    come from a sparse logistic model. Use it when the real file is absent.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    offsets = np.concatenate([[0], np.cumsum(_ADULT_GROUPS)[:-1]])
    cols = []
    for width, off in zip(_ADULT_GROUPS, offsets):
        p = rng.dirichlet(np.full(width, 0.7))
        cols.append(off + rng.choice(width, size=n_samples, p=p))
    idx = np.stack(cols, axis=1)
    weights = rng.normal(0.0, 1.0, size=sum(_ADULT_GROUPS))
    score = weights[idx].sum(axis=1)
    score = (score - score.mean()) / score.std() * 1.5 - 1.2
    labels = np.where(rng.random(n_samples) < 1 / (1 + np.exp(-score)), 1.0, -1.0)
    rows = tuple((np.array(r, dtype=np.int64), np.ones(len(r))) for r in idx)
    return SparseDataset(sum(_ADULT_GROUPS), rows, labels)
