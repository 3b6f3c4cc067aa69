"""RBF-kernel SVM trained with sequential minimal optimization, one-vs-one."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ..errors import ConvergenceWarning, ShapeError
from .common import Dataset, ScalerParams

_MIN_ALPHA = 1e-8  # below this a multiplier is not a support vector


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * ||a - b||^2) for every row pair."""
    sq = (
        (A**2).sum(axis=1)[:, None]
        + (B**2).sum(axis=1)[None, :]
        - 2.0 * A @ B.T
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


@dataclass
class PairClassifier:
    """Binary machine for one class pair (lo, hi); +1 means lo."""

    lo: int
    hi: int
    sv: np.ndarray
    coef: np.ndarray  # alpha * y for the kept support vectors
    bias: float

    def decision(self, X: np.ndarray, gamma: float) -> np.ndarray:
        return rbf_kernel(X, self.sv, gamma) @ self.coef + self.bias


@dataclass
class SvmModel:
    kind = "svm"
    label_names: list[str]
    gamma: float
    C: float
    pairs: list[PairClassifier]
    n_features: int
    scaler: ScalerParams | None = None
    convergence_warnings: list[str] = field(default_factory=list)

    @property
    def n_classes(self) -> int:
        return len(self.label_names)

    def votes(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ShapeError(
                f"model expects {self.n_features} features, got {X.shape[1]}"
            )
        counts = np.zeros((len(X), self.n_classes))
        for pair in self.pairs:
            d = pair.decision(X, self.gamma)
            counts[d >= 0, pair.lo] += 1
            counts[d < 0, pair.hi] += 1
        return counts

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        counts = self.votes(X)
        return counts / counts.sum(axis=1, keepdims=True)


def _smo(K, y, C, tol, max_passes, rng):
    """Simplified SMO on a precomputed kernel; returns (alpha, bias, converged)."""
    n = len(y)
    alpha = np.zeros(n)
    b = 0.0
    err = -y.astype(np.float64)  # f(x) - y with all-zero alphas
    for _ in range(max_passes):
        changed = 0
        for i in range(n):
            r = y[i] * err[i]
            if not ((r < -tol and alpha[i] < C) or (r > tol and alpha[i] > 0)):
                continue
            j = int(np.argmax(np.abs(err - err[i])))
            if j == i:
                j = int(rng.integers(n - 1))
                j += j >= i
            if y[i] != y[j]:
                lo = max(0.0, alpha[j] - alpha[i])
                hi = min(C, C + alpha[j] - alpha[i])
            else:
                lo = max(0.0, alpha[i] + alpha[j] - C)
                hi = min(C, alpha[i] + alpha[j])
            eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
            if lo == hi or eta >= 0:
                continue
            aj = np.clip(alpha[j] - y[j] * (err[i] - err[j]) / eta, lo, hi)
            if abs(aj - alpha[j]) < 1e-10:
                continue
            ai = alpha[i] + y[i] * y[j] * (alpha[j] - aj)
            di, dj = y[i] * (ai - alpha[i]), y[j] * (aj - alpha[j])
            b1 = b - err[i] - di * K[i, i] - dj * K[i, j]
            b2 = b - err[j] - di * K[i, j] - dj * K[j, j]
            if 0 < ai < C:
                new_b = b1
            elif 0 < aj < C:
                new_b = b2
            else:
                new_b = 0.5 * (b1 + b2)
            err += di * K[i] + dj * K[j] + (new_b - b)
            alpha[i], alpha[j], b = ai, aj, new_b
            changed += 1
        if changed == 0:
            return alpha, b, True
    return alpha, b, False


def svm_fit(
    dataset: Dataset,
    C: float = 1.0,
    tol: float = 1e-3,
    max_passes: int = 10000,
    seed: int = 0,
    scaler: ScalerParams | None = None,
) -> SvmModel:
    """One-vs-one RBF SVM over an already-scaled dataset.

    gamma follows the 'scale' convention: 1 / (n_features * variance of all
    training values). Pairs that hit the pass cap carry a warning instead of
    failing.
    """
    X, y = dataset.X, dataset.y
    var = float(X.var())
    gamma = 1.0 / (X.shape[1] * var) if var > 0 else 1.0
    rng = np.random.default_rng(seed)

    pairs = []
    notes = []
    for lo, hi in combinations(range(len(dataset.label_names)), 2):
        mask = (y == lo) | (y == hi)
        Xp = X[mask]
        yp = np.where(y[mask] == lo, 1.0, -1.0)
        K = rbf_kernel(Xp, Xp, gamma)
        alpha, bias, converged = _smo(K, yp, C, tol, max_passes, rng)
        if not converged:
            msg = f"pair ({lo},{hi}) hit the {max_passes}-pass cap"
            warnings.warn(msg, ConvergenceWarning)
            notes.append(msg)
        keep = alpha > _MIN_ALPHA
        pairs.append(
            PairClassifier(
                lo=lo,
                hi=hi,
                sv=Xp[keep].copy(),
                coef=(alpha * yp)[keep],
                bias=float(bias),
            )
        )
    return SvmModel(
        label_names=list(dataset.label_names),
        gamma=gamma,
        C=C,
        pairs=pairs,
        n_features=X.shape[1],
        scaler=scaler,
        convergence_warnings=notes,
    )
