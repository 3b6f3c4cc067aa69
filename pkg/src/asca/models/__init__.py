"""Classifier families sharing one fit/predict contract."""

from .common import (
    AdamState,
    Dataset,
    EvalReport,
    ScalerParams,
    TrainConfig,
    adam_step,
    cross_entropy,
    evaluate,
    minmax_apply,
    minmax_fit,
    predict,
    report_from_predictions,
    softmax,
    stratified_split,
)
from .nets import CnnModel, LstmModel, MlpModel, cnn_fit, lstm_fit, mlp_fit
from .persist import load_model, save_model
from .svm import SvmModel, rbf_kernel, svm_fit

FIT_BY_KIND = {
    "svm": svm_fit,
    "dnn": mlp_fit,
    "rnn": lstm_fit,
    "cnn": cnn_fit,
}

CLASSIFIER_KINDS = ("svm", "dnn", "rnn", "cnn")


def fit_classifier(kind: str, dataset, config=None, scaler=None):
    """Train any classifier kind on an already-scaled dataset."""
    config = config or TrainConfig()
    if kind == "svm":
        return svm_fit(dataset, seed=config.seed, scaler=scaler)
    return FIT_BY_KIND[kind](dataset, config, scaler=scaler)

__all__ = [
    "AdamState",
    "CLASSIFIER_KINDS",
    "CnnModel",
    "Dataset",
    "EvalReport",
    "FIT_BY_KIND",
    "fit_classifier",
    "LstmModel",
    "MlpModel",
    "ScalerParams",
    "SvmModel",
    "TrainConfig",
    "adam_step",
    "cnn_fit",
    "cross_entropy",
    "evaluate",
    "load_model",
    "lstm_fit",
    "minmax_apply",
    "minmax_fit",
    "mlp_fit",
    "predict",
    "rbf_kernel",
    "report_from_predictions",
    "save_model",
    "softmax",
    "stratified_split",
    "svm_fit",
]
