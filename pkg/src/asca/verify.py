"""Clip-level verdicts: does a recording match the commanded behaviour?"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import chunk_clip, read_wav
from .errors import LabelError
from .features import extract_features
from .filters import AmplitudeGateSpec, ButterworthSpec
from .harness import _ingest_filter
from .models import load_model, minmax_apply


@dataclass
class Verdict:
    """Outcome of comparing a clip against the expected label."""

    expected_label: str
    predicted_label: str
    per_chunk_votes: list[tuple[int, str, float]]  # (chunk index, label, confidence)
    agreement_fraction: float
    match: bool
    threshold: float
    tied: bool = False

    def to_dict(self) -> dict:
        return {
            "expected": self.expected_label,
            "predicted": self.predicted_label,
            "chunks": [
                {"index": i, "label": lab, "confidence": conf}
                for i, lab, conf in self.per_chunk_votes
            ],
            "agreement": self.agreement_fraction,
            "match": self.match,
            "threshold": self.threshold,
            "tied": self.tied,
        }


def verify(
    audio_path,
    expected_label: str,
    model_path,
    threshold: float = 0.5,
    filter_mode: str = "none",
    gate: AmplitudeGateSpec | None = None,
    butter: ButterworthSpec | None = None,
) -> Verdict:
    """Classify each 1-second chunk and take a plurality vote.

    match is true iff the winning label equals the expectation and its vote
    share reaches the threshold. Vote ties go to the lowest class index and
    are flagged.
    """
    model = model_path if hasattr(model_path, "predict_proba") else load_model(model_path)
    if expected_label not in model.label_names:
        raise LabelError(
            f"label {expected_label!r} is not one of {list(model.label_names)}"
        )
    clip = _ingest_filter(filter_mode, gate, butter)(read_wav(audio_path))
    chunks = chunk_clip(clip)
    X = np.array([extract_features(c).values for c in chunks])
    if model.scaler is not None:
        X = minmax_apply(model.scaler, X)
    proba = model.predict_proba(X)

    votes = np.argmax(proba, axis=1)
    per_chunk = [
        (i, model.label_names[v], float(proba[i, v])) for i, v in enumerate(votes)
    ]
    counts = np.bincount(votes, minlength=len(model.label_names))
    winner = int(np.argmax(counts))
    tied = int((counts == counts[winner]).sum()) > 1
    agreement = float(counts[winner] / len(chunks))
    predicted = model.label_names[winner]
    return Verdict(
        expected_label=expected_label,
        predicted_label=predicted,
        per_chunk_votes=per_chunk,
        agreement_fraction=agreement,
        match=(predicted == expected_label) and agreement >= threshold,
        threshold=threshold,
        tied=tied,
    )
