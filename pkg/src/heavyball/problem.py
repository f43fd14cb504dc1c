"""Quadratic objectives expressed in the Hessian eigenbasis.

A problem is described by the spectrum of ``H``, the noise scale ``sigma2``
and the optimum ``w_star``. Everything downstream (schedules aside) works
coordinate-wise in this basis, so ``H`` is never stored as a dense matrix.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "QuadraticProblem",
    "NoiseKind",
    "NoiseModel",
    "LeastSquaresParams",
    "RidgeProblem",
    "excess_risk",
    "counterexample_instance",
    "ridge_to_quadratic",
    "effective_sigma2",
    "load_problem",
]


@dataclass(frozen=True)
class QuadraticProblem:
    """``f(w) = 1/2 (w - w*)^T diag(eigenvalues) (w - w*) + f(w*)``.

    Attributes:
        eigenvalues: Hessian spectrum, strictly positive and nonincreasing.
        sigma2: Noise scale; per-step noise covariance is ``sigma2 * H / M``.
        w_star: Optimum in eigen-coordinates. Defaults to the origin.
    """

    eigenvalues: np.ndarray
    sigma2: float = 0.0
    w_star: np.ndarray | None = None

    def __post_init__(self):
        lam = np.array(self.eigenvalues, dtype=np.float64).reshape(-1)
        if lam.size == 0:
            raise ValueError("eigenvalues must be nonempty")
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
            raise ValueError("eigenvalues must be finite and strictly positive")
        if np.any(np.diff(lam) > 0):
            raise ValueError("eigenvalues must be nonincreasing")
        if not (self.sigma2 >= 0 and math.isfinite(self.sigma2)):
            raise ValueError(f"sigma2 must be a finite nonnegative number, got {self.sigma2}")
        if self.w_star is None:
            w = np.zeros_like(lam)
        else:
            w = np.array(self.w_star, dtype=np.float64).reshape(-1)
            if w.shape != lam.shape:
                raise ValueError(f"w_star has dimension {w.size}, expected {lam.size}")
        lam.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "w_star", w)
        object.__setattr__(self, "sigma2", float(self.sigma2))

    @property
    def d(self) -> int:
        return self.eigenvalues.size

    @property
    def L(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def mu(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def kappa(self) -> float:
        return self.L / self.mu

    def with_sigma2(self, sigma2: float) -> QuadraticProblem:
        return QuadraticProblem(self.eigenvalues, sigma2, self.w_star)

    @classmethod
    def from_dict(cls, data: dict) -> QuadraticProblem:
        unknown = set(data) - {"eigenvalues", "sigma2", "w_star"}
        if unknown:
            raise ValueError(f"unknown problem fields: {sorted(unknown)}")
        if "eigenvalues" not in data:
            raise ValueError("problem description needs 'eigenvalues'")
        return cls(data["eigenvalues"], data.get("sigma2", 0.0), data.get("w_star"))

    def to_dict(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "sigma2": self.sigma2,
            "w_star": self.w_star.tolist(),
        }


def load_problem(path: str | Path) -> QuadraticProblem:
    with open(path) as fh:
        return QuadraticProblem.from_dict(json.load(fh))


def excess_risk(problem: QuadraticProblem, w) -> float:
    """Return ``1/2 sum_j lambda_j (w_j - w*_j)^2``."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (problem.d,):
        raise ValueError(f"w has shape {w.shape}, expected ({problem.d},)")
    diff = w - problem.w_star
    return 0.5 * float(np.dot(problem.eigenvalues, diff * diff))


class NoiseKind(enum.Enum):
    NONE = "none"
    ANISOTROPIC_GAUSSIAN = "anisotropic_gaussian"


@dataclass(frozen=True)
class NoiseModel:
    """Minibatch gradient noise in eigen-coordinates.

    The mean of ``M`` per-sample noises is drawn in one shot as a Gaussian
    with independent coordinates of variance ``sigma2 * lambda_j / M``.
    """

    kind: NoiseKind = NoiseKind.ANISOTROPIC_GAUSSIAN
    batch_size: int = 1

    def __post_init__(self):
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            raise ValueError(f"batch_size must be a positive integer, got {self.batch_size}")

    def scales(self, problem: QuadraticProblem) -> np.ndarray:
        """Per-coordinate standard deviations of one minibatch noise draw."""
        if self.kind is NoiseKind.NONE:
            return np.zeros(problem.d)
        return np.sqrt(problem.sigma2 / self.batch_size * problem.eigenvalues)

    def sample(self, problem: QuadraticProblem, rng: np.random.Generator, size=None) -> np.ndarray:
        shape = (problem.d,) if size is None else (*np.atleast_1d(size), problem.d)
        if self.kind is NoiseKind.NONE:
            return np.zeros(shape)
        return rng.standard_normal(shape) * self.scales(problem)


@dataclass(frozen=True)
class LeastSquaresParams:
    alpha: float
    kappa_tilde: float
    sigma_tilde2: float

    def __post_init__(self):
        if self.alpha < 0 or self.sigma_tilde2 < 0:
            raise ValueError("alpha and sigma_tilde2 must be nonnegative")
        if self.kappa_tilde < 1:
            raise ValueError("kappa_tilde must be >= 1")


def effective_sigma2(p: LeastSquaresParams) -> float:
    """Noise level a least-squares problem induces: ``2 (alpha^2 (kappa~ - 1) + sigma~^2)``."""
    return 2.0 * (p.alpha**2 * (p.kappa_tilde - 1.0) + p.sigma_tilde2)


def counterexample_instance(kappa: float, L: float, c0: float) -> tuple[QuadraticProblem, np.ndarray]:
    """Hard instance for SGD: ``H = diag(L, mu, ..., mu)`` with ``mu = L / kappa``.

    The dimension is the smallest integer ``d >= kappa + 1`` and the start
    point has every coordinate equal to ``c0``. There is no noise and the
    optimum is the origin.
    """
    if not kappa >= 4:
        raise ValueError(f"kappa must be >= 4, got {kappa}")
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    mu = L / kappa
    d = math.ceil(kappa + 1)
    lam = np.full(d, mu)
    lam[0] = L
    return QuadraticProblem(lam, 0.0), np.full(d, float(c0))


@dataclass(frozen=True)
class RidgeProblem:
    """Ridge loss ``(1/n)||Xw - Y||^2 + alpha ||w||^2`` and its eigen-rotation.

    ``H = U diag(eigenvalues) U^T`` with eigenvalues sorted nonincreasing.
    ``quadratic`` is the same objective in eigen-coordinates ``z = U^T w``.
    """

    hessian: np.ndarray
    b: np.ndarray
    w_star: np.ndarray
    f_star: float
    eigenvalues: np.ndarray
    rotation: np.ndarray
    alpha: float
    quadratic: QuadraticProblem = field(repr=False)

    def loss(self, X, Y, w) -> float:
        r = X @ w - Y
        return float(r @ r) / X.shape[0] + self.alpha * float(w @ w)

    def to_eigen(self, w) -> np.ndarray:
        return self.rotation.T @ w

    def from_eigen(self, z) -> np.ndarray:
        return self.rotation @ z


def ridge_to_quadratic(X, Y, alpha: float) -> RidgeProblem:
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64).reshape(-1)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"X must be a nonempty 2-D array, got shape {X.shape}")
    if Y.shape[0] != X.shape[0]:
        raise ValueError(f"Y has {Y.shape[0]} entries, X has {X.shape[0]} rows")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    n, p = X.shape
    gram = X.T @ X
    xty = X.T @ Y
    hessian = 2.0 / n * gram + 2.0 * alpha * np.eye(p)
    b = 2.0 / n * xty
    eigvals, U = np.linalg.eigh(hessian)
    order = np.argsort(eigvals)[::-1]
    eigvals, U = eigvals[order], U[:, order]
    # eigh can return tiny negative values for a singular Gram matrix
    if eigvals[-1] <= eigvals[0] * p * np.finfo(float).eps * 10:
        raise ValueError("Hessian is singular (alpha = 0 with rank-deficient X^T X); optimum is not unique")
    w_star = np.linalg.solve(gram + n * alpha * np.eye(p), xty)
    r = X @ w_star - Y
    f_star = float(r @ r) / n + alpha * float(w_star @ w_star)
    quad = QuadraticProblem(eigvals, 0.0, U.T @ w_star)
    return RidgeProblem(hessian, b, w_star, f_star, eigvals, U, float(alpha), quad)
