"""Dataset container, scaling, splitting, metrics, and the Adam update."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyDataset, InvalidRange, ShapeError, StratifyError


@dataclass
class Dataset:
    """Feature matrix with integer labels; meta rows are optional."""

    X: np.ndarray
    y: np.ndarray
    label_names: list[str]
    meta: list | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or len(self.X) != len(self.y):
            raise ShapeError("X must be 2-D with one label per row")
        if len(self.y) and (self.y.min() < 0 or self.y.max() >= len(self.label_names)):
            raise ShapeError("labels out of range of label_names")

    def __len__(self) -> int:
        return len(self.y)

    def subset(self, idx) -> "Dataset":
        meta = [self.meta[i] for i in idx] if self.meta is not None else None
        return Dataset(self.X[idx], self.y[idx], list(self.label_names), meta)


@dataclass
class ScalerParams:
    """Per-feature min/max captured from the training split."""

    mins: np.ndarray
    maxs: np.ndarray


def minmax_fit(X: np.ndarray) -> ScalerParams:
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        raise EmptyDataset("cannot fit a scaler on no rows")
    return ScalerParams(mins=X.min(axis=0), maxs=X.max(axis=0))


def minmax_apply(params: ScalerParams, X: np.ndarray) -> np.ndarray:
    """Map to (x - min) / (max - min); constant features go to 0. Values
    outside the training range are not clamped."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != len(params.mins):
        raise ShapeError(
            f"scaler has {len(params.mins)} features, data has {X.shape[1]}"
        )
    span = params.maxs - params.mins
    out = np.zeros_like(X)
    np.divide(X - params.mins, span, out=out, where=span > 0)
    return out


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def stratified_split(
    y: np.ndarray, fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-class shuffle-and-cut; returns (train_idx, validation_idx).

    Validation takes round(fraction * class_count) rows per class, at least
    one and at most class_count - 1.
    """
    if not 0.0 < fraction < 1.0:
        raise InvalidRange("validation fraction must sit in (0, 1)")
    y = np.asarray(y, dtype=np.int64)
    rng = np.random.default_rng(seed)
    train, val = [], []
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if len(idx) < 2:
            raise StratifyError(f"class {cls} has {len(idx)} row(s), need >= 2")
        idx = rng.permutation(idx)
        n_val = min(max(1, _round_half_up(fraction * len(idx))), len(idx) - 1)
        val.append(idx[:n_val])
        train.append(idx[n_val:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(val))


@dataclass
class TrainConfig:
    epochs: int = 20
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    early_stop_patience: int = 5
    lr_reduce_factor: float = 0.5
    lr_reduce_patience: int = 3
    validation_fraction: float = 0.2

    def __post_init__(self):
        if min(self.epochs, self.batch_size) < 1 or self.learning_rate <= 0:
            raise InvalidRange("epochs, batch size, and learning rate must be positive")
        if not 0.0 < self.validation_fraction < 1.0:
            raise InvalidRange("validation_fraction must sit in (0, 1)")
        if self.early_stop_patience < 1 or self.lr_reduce_patience < 1:
            raise InvalidRange("patience values must be positive")
        if not 0.0 < self.lr_reduce_factor < 1.0:
            raise InvalidRange("lr_reduce_factor must sit in (0, 1)")


@dataclass
class EvalReport:
    """Confusion matrix plus the derived per-class and overall metrics."""

    label_names: list[str]
    confusion: np.ndarray  # [true, predicted]
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    accuracy: float

    def to_dict(self) -> dict:
        return {
            "labels": list(self.label_names),
            "confusion": self.confusion.tolist(),
            "precision": self.precision.tolist(),
            "recall": self.recall.tolist(),
            "f1": self.f1.tolist(),
            "support": self.support.tolist(),
            "accuracy": self.accuracy,
        }


def report_from_predictions(
    y_true: np.ndarray, y_pred: np.ndarray, label_names: list[str]
) -> EvalReport:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if len(y_true) == 0:
        raise EmptyDataset("cannot evaluate on no rows")
    n = len(label_names)
    confusion = np.zeros((n, n), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)

    tp = np.diag(confusion).astype(np.float64)
    col = confusion.sum(axis=0).astype(np.float64)
    row = confusion.sum(axis=1).astype(np.float64)
    precision = np.divide(tp, col, out=np.zeros(n), where=col > 0)
    recall = np.divide(tp, row, out=np.zeros(n), where=row > 0)
    pr = precision + recall
    f1 = np.divide(2 * precision * recall, pr, out=np.zeros(n), where=pr > 0)
    accuracy = float(tp.sum() / confusion.sum())

    support = confusion.sum(axis=1)
    assert int(support.sum()) == len(y_true)
    assert np.isclose(accuracy, np.trace(confusion) / confusion.sum())
    return EvalReport(
        label_names=list(label_names),
        confusion=confusion,
        precision=precision,
        recall=recall,
        f1=f1,
        support=support,
        accuracy=accuracy,
    )


def evaluate(model, X_scaled: np.ndarray, y: np.ndarray) -> EvalReport:
    """Score a trained model on already-scaled rows."""
    proba = model.predict_proba(np.atleast_2d(X_scaled))
    return report_from_predictions(y, np.argmax(proba, axis=1), model.label_names)


def predict(model, x: np.ndarray) -> np.ndarray:
    """Class probabilities for one scaled feature vector."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != model.n_features:
        raise ShapeError(f"model expects {model.n_features} features, got {x.shape[1]}")
    proba = model.predict_proba(x)
    return proba[0] if single else proba


@dataclass
class AdamState:
    """First/second moment accumulators, one pair per parameter tensor."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def for_params(cls, params) -> "AdamState":
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
        )


def adam_step(
    params,
    grads,
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
):
    """One bias-corrected Adam update, in place on params and state."""
    state.t += 1
    c1 = 1.0 - beta1**state.t
    c2 = 1.0 - beta2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return params, state


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(proba: np.ndarray, y: np.ndarray) -> float:
    """Mean negative log-likelihood of the true classes."""
    return float(-np.mean(np.log(proba[np.arange(len(y)), y] + 1e-12)))
