"""Manifest ingestion, the experiment grid, and paper-style report tables.

A dataset row is one 1-second chunk; splits happen at file level so chunks
of a single recording never straddle train and validation.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .audio_io import chunk_clip, read_wav
from .errors import IngestError, LabelError
from .features import extract_features
from .filters import (
    AmplitudeGateSpec,
    ButterworthSpec,
    amplitude_gate,
    apply_filter,
    butter_design,
)
from .models import (
    CLASSIFIER_KINDS,
    Dataset,
    EvalReport,
    TrainConfig,
    evaluate,
    fit_classifier,
    load_model,
    minmax_apply,
    minmax_fit,
    save_model,
    stratified_split,
)
from .synth import MANIFEST_COLUMNS, MOVEMENTS, WORKFLOWS, derive_seed

__all__ = [
    "RecordingMeta",
    "ExperimentSpec",
    "ExperimentResult",
    "AXIS_VALUES",
    "load_manifest",
    "run_experiment",
    "render_report",
    "results_to_jsonl",
    "save_model",
    "load_model",
]

FILTER_MODES = ("none", "amplitude", "lowpass")

AXIS_VALUES = {
    "baseline": (None,),
    "move_distance": (2.0, 5.0, 10.0, 25.0, 50.0),
    "speed": (25.0, 50.0, 75.0, 100.0),
    "mic_distance": (30.0, 50.0, 100.0),
    "workflow": (None,),
}


@dataclass
class RecordingMeta:
    """Per-file annotation carried onto every chunk cut from it."""

    label_kind: str
    label: str
    speed_mm_s: float
    move_distance_mm: float
    mic_distance_cm: float
    seed: int | None = None
    source: str = ""

    def __post_init__(self):
        if self.label_kind == "movement":
            valid = MOVEMENTS
        elif self.label_kind == "workflow":
            valid = WORKFLOWS
        else:
            raise LabelError(f"unknown label kind {self.label_kind!r}")
        if self.label not in valid:
            raise LabelError(f"bad {self.label_kind} label {self.label!r}")
        if min(self.speed_mm_s, self.move_distance_mm, self.mic_distance_cm) <= 0:
            raise LabelError(f"{self.source}: numeric metadata must be positive")


@dataclass(frozen=True)
class ExperimentSpec:
    """One pass over the grid: which axis, classifiers, filter, and seed."""

    axis: str = "baseline"
    classifiers: tuple = CLASSIFIER_KINDS
    filter_mode: str = "none"
    train: TrainConfig = field(default_factory=TrainConfig)
    seed: int = 0
    axis_values: tuple | None = None
    validation_fraction: float = 0.2

    def __post_init__(self):
        if self.axis not in AXIS_VALUES:
            raise LabelError(f"unknown experiment axis {self.axis!r}")
        if self.filter_mode not in FILTER_MODES:
            raise LabelError(f"unknown filter mode {self.filter_mode!r}")
        for kind in self.classifiers:
            if kind not in CLASSIFIER_KINDS:
                raise LabelError(f"unknown classifier {kind!r}")

    @property
    def values(self) -> tuple:
        return self.axis_values if self.axis_values is not None else AXIS_VALUES[self.axis]


@dataclass
class ExperimentResult:
    axis: str
    axis_value: float | None
    classifier: str
    report: EvalReport
    n_train: int
    n_validation: int
    seed: int
    scaler: object = None  # kept for leakage checks, not serialized

    def to_dict(self) -> dict:
        d = {
            "axis": self.axis,
            "axis_value": self.axis_value,
            "classifier": self.classifier,
            "n_train": self.n_train,
            "n_validation": self.n_validation,
            "seed": self.seed,
        }
        d.update(self.report.to_dict())
        return d


def _ingest_filter(mode: str, gate: AmplitudeGateSpec | None,
                   butter: ButterworthSpec | None):
    if mode == "none":
        return lambda clip: clip
    if mode == "amplitude":
        spec = gate or AmplitudeGateSpec()
        return lambda clip: amplitude_gate(clip, spec)
    sos_cache = {}

    def lowpass(clip):
        sr = clip.sample_rate_hz
        if sr not in sos_cache:
            sos_cache[sr] = butter_design(butter or ButterworthSpec(), sr)
        return apply_filter(clip, sos_cache[sr])

    return lowpass


def read_manifest_rows(path) -> list[RecordingMeta]:
    """Parse manifest.csv into per-file metadata (paths stay relative)."""
    path = Path(path)
    if not path.exists():
        raise IngestError(f"manifest {path} does not exist")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(MANIFEST_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise IngestError(f"{path}: manifest lacks columns {sorted(missing)}")
        rows = []
        for i, rec in enumerate(reader):
            try:
                rows.append(
                    RecordingMeta(
                        label_kind=rec["label_kind"],
                        label=rec["label"],
                        speed_mm_s=float(rec["speed_mm_s"]),
                        move_distance_mm=float(rec["move_distance_mm"]),
                        mic_distance_cm=float(rec["mic_distance_cm"]),
                        seed=int(rec["seed"]) if rec["seed"] else None,
                        source=rec["path"],
                    )
                )
            except ValueError as exc:
                raise IngestError(f"{path} row {i}: {exc}") from exc
    if not rows:
        raise IngestError(f"{path}: manifest holds no rows")
    kinds = {r.label_kind for r in rows}
    if len(kinds) > 1:
        raise LabelError(f"{path}: manifest mixes label kinds {sorted(kinds)}")
    return rows


def load_manifest(
    path,
    filter_mode: str = "none",
    gate: AmplitudeGateSpec | None = None,
    butter: ButterworthSpec | None = None,
) -> Dataset:
    """Read every referenced file, filter, chunk, and featurize.

    One dataset row per chunk; the row label indexes the canonical label
    list for the manifest's kind.
    """
    path = Path(path)
    rows = read_manifest_rows(path)
    base = path.parent
    for i, meta in enumerate(rows):
        if not (base / meta.source).exists():
            raise IngestError(f"{path} row {i}: missing audio file {meta.source}")

    label_names = list(MOVEMENTS if rows[0].label_kind == "movement" else WORKFLOWS)
    apply_mode = _ingest_filter(filter_mode, gate, butter)
    X, y, meta_rows = [], [], []
    for meta in rows:
        clip = apply_mode(read_wav(base / meta.source))
        for chunk in chunk_clip(clip, parent_id=meta.source):
            X.append(extract_features(chunk).values)
            y.append(label_names.index(meta.label))
            meta_rows.append(meta)
    return Dataset(np.array(X), np.array(y), label_names, meta=meta_rows)


def _select_rows(dataset: Dataset, axis: str, value) -> np.ndarray:
    kind = "workflow" if axis == "workflow" else "movement"
    idx = [i for i, m in enumerate(dataset.meta) if m.label_kind == kind]
    if axis == "move_distance":
        idx = [i for i in idx if dataset.meta[i].move_distance_mm == value]
    elif axis == "speed":
        idx = [i for i in idx if dataset.meta[i].speed_mm_s == value]
    elif axis == "mic_distance":
        idx = [i for i in idx if dataset.meta[i].mic_distance_cm == value]
    return np.array(idx, dtype=np.int64)


def _file_level_split(sub: Dataset, fraction: float, seed: int):
    """Stratify over source files, then expand to their chunks."""
    files = []
    file_of_row = []
    file_label = []
    index_of = {}
    for m in sub.meta:
        if m.source not in index_of:
            index_of[m.source] = len(files)
            files.append(m.source)
            file_label.append(sub.y[len(file_of_row)])
        file_of_row.append(index_of[m.source])
    file_of_row = np.array(file_of_row)
    train_files, val_files = stratified_split(np.array(file_label), fraction, seed)
    train_rows = np.flatnonzero(np.isin(file_of_row, train_files))
    val_rows = np.flatnonzero(np.isin(file_of_row, val_files))
    return train_rows, val_rows


def _compact_labels(sub: Dataset) -> Dataset:
    """Drop absent classes so every label is populated."""
    present = sorted(set(sub.y.tolist()))
    if len(present) == len(sub.label_names):
        return sub
    remap = {old: new for new, old in enumerate(present)}
    return Dataset(
        sub.X,
        np.array([remap[v] for v in sub.y]),
        [sub.label_names[i] for i in present],
        meta=sub.meta,
    )


def run_experiment(spec: ExperimentSpec, dataset: Dataset) -> list[ExperimentResult]:
    """Fit and score every classifier at every axis value.

    Per cell: select rows, split at file level, fit the scaler on the
    training rows only, train, and evaluate on validation chunks.
    """
    if dataset.meta is None:
        raise IngestError("experiment needs per-row metadata; load via load_manifest")
    results = []
    for vi, value in enumerate(spec.values):
        rows = _select_rows(dataset, spec.axis, value)
        if len(rows) == 0:
            raise IngestError(f"axis {spec.axis}={value} selects no rows")
        sub = _compact_labels(dataset.subset(rows))
        split_seed = derive_seed(spec.seed, vi, 0)
        train_rows, val_rows = _file_level_split(
            sub, spec.validation_fraction, split_seed
        )
        scaler = minmax_fit(sub.X[train_rows])
        train = Dataset(
            minmax_apply(scaler, sub.X[train_rows]), sub.y[train_rows], sub.label_names
        )
        X_val = minmax_apply(scaler, sub.X[val_rows])
        y_val = sub.y[val_rows]
        for ki, kind in enumerate(spec.classifiers):
            fit_seed = derive_seed(spec.seed, vi, ki + 1)
            config = replace(spec.train, seed=fit_seed)
            model = fit_classifier(kind, train, config, scaler=scaler)
            results.append(
                ExperimentResult(
                    axis=spec.axis,
                    axis_value=value,
                    classifier=kind,
                    report=evaluate(model, X_val, y_val),
                    n_train=len(train_rows),
                    n_validation=len(val_rows),
                    seed=fit_seed,
                    scaler=scaler,
                )
            )
    return results


def percent(x: float) -> int:
    """Round half up to integer percent, as the published tables do."""
    return int(np.floor(100.0 * x + 0.5))


def _table_for_value(results: list[ExperimentResult]) -> str:
    labels = results[0].report.label_names
    kinds = [r.classifier.upper() for r in results]
    kind_tag = "W" if results[0].axis == "workflow" else "M"
    width = max(max(len(s) for s in labels), len("Accuracy")) + 2

    lines = [f"{kind_tag} = {'Workflow' if kind_tag == 'W' else 'Movement'}, "
             "P = Precision, R = Recall"]
    head1 = " " * width + "".join(f"{k:^12}" for k in kinds)
    head2 = " " * width + "".join(f"{'P':>6}{'R':>6}" for _ in kinds)
    lines += [head1, head2]
    for ci, label in enumerate(labels):
        cells = "".join(
            f"{percent(r.report.precision[ci]):>5}%{percent(r.report.recall[ci]):>5}%"
            for r in results
        )
        lines.append(f"{label:<{width}}" + cells)
    acc = "".join(f"{percent(r.report.accuracy):>10}% " for r in results)
    lines.append(f"{'Accuracy':<{width}}" + acc.rstrip())
    return "\n".join(lines)


def render_report(results: list[ExperimentResult]) -> str:
    """Text tables in the published layout: per-class P/R per classifier,
    one table per axis value, overall accuracy at the bottom."""
    if not results:
        raise IngestError("nothing to render")
    groups: dict = {}
    for r in results:
        groups.setdefault((r.axis, r.axis_value), []).append(r)
    blocks = []
    for (axis, value), group in groups.items():
        title = axis if value is None else f"{axis} = {value:g}"
        blocks.append(f"=== {title} ===\n{_table_for_value(group)}")
    return "\n\n".join(blocks) + "\n"


def results_to_jsonl(results: list[ExperimentResult]) -> str:
    """One JSON object per classifier per axis value, key-sorted and stable."""
    return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in results)
