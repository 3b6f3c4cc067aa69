"""Acoustic side-channel analysis toolkit for verifying robot behaviour.

Pipeline: WAV in -> 1-second chunks -> 27-dimensional feature vectors ->
four classifier families -> evaluation tables and clip-level verdicts.
"""

__version__ = "0.1.0"

from .audio_io import AudioClip, Chunk, FrameSpec, chunk_clip, frame_chunk, read_wav, write_wav
from .features import FEATURE_NAMES, FeatureVector, extract_features
from .filters import (
    AmplitudeGateSpec,
    ButterworthSpec,
    SpectrumReport,
    amplitude_gate,
    apply_filter,
    butter_design,
    spectrum_peaks,
)
from .harness import (
    ExperimentResult,
    ExperimentSpec,
    RecordingMeta,
    load_manifest,
    render_report,
    results_to_jsonl,
    run_experiment,
)
from .models import (
    Dataset,
    EvalReport,
    TrainConfig,
    evaluate,
    fit_classifier,
    load_model,
    predict,
    save_model,
)
from .synth import MOVEMENTS, WORKFLOWS, SynthSpec, movement_grid, synth_dataset, synth_emission, workflow_grid
from .verify import Verdict, verify
