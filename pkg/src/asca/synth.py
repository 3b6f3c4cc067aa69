"""Deterministic generator of robot-like acoustic emissions.

Stands in for recordings of a real arm: each axis drives a harmonic tone
stack under a trapezoidal move envelope, plus mains hum and sensor noise.
Workflows are scripted sequences of movement segments whose motor load
(direction, carried weight) shifts the stack pitch slightly.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .audio_io import AudioClip, write_wav
from .errors import InvalidSpec

MOVEMENTS = ("X", "Y", "Z", "XY", "XZ", "YZ", "XYZ")
WORKFLOWS = ("Push", "Pull", "PickAndPlace", "Packing")

SPEEDS_MM_S = (12.5, 25.0, 50.0, 75.0, 100.0)
DISTANCES_MM = (1.0, 2.0, 5.0, 10.0, 25.0, 50.0)
MIC_DISTANCES_CM = (30.0, 50.0, 100.0)

SAMPLE_RATE = 44100
AXIS_HZ = {"X": 140.0, "Y": 180.0, "Z": 210.0}
HARMONIC_GAINS = (1.0, 0.5, 0.25)  # fundamental, -6 dB, -12 dB
BASE_AMP = 0.25
COMPOSITE_GAIN = 10.0 ** (-3.0 / 20.0)  # each axis of a multi-axis move
FREQ_JITTER = 0.002  # per-clip relative pitch wobble

# (axes, pitch_factor, reversed_envelope) per segment; pitch_factor models
# motor load: lowering/retracting runs slow, lifting/carrying runs strained.
WORKFLOW_SCRIPTS = {
    "Push": [("X", 1.00, False)],
    "Pull": [("X", 0.88, True)],
    "PickAndPlace": [("Z", 0.88, False), ("XY", 1.00, False), ("Z", 1.14, False)],
    "Packing": [("XY", 0.92, False), ("Z", 1.00, False), ("XY", 1.08, False)],
}

MANIFEST_COLUMNS = (
    "path",
    "label_kind",
    "label",
    "speed_mm_s",
    "move_distance_mm",
    "mic_distance_cm",
    "seed",
)


@dataclass(frozen=True)
class SynthSpec:
    """One cell of the recording grid. Set exactly one of movement/workflow."""

    movement: str | None = None
    workflow: str | None = None
    speed_mm_s: float = 12.5
    move_distance_mm: float = 1.0
    mic_distance_cm: float = 30.0
    duration_s: float = 5.0
    seed: int = 0
    hum_db: float | None = -35.0
    noise_db: float | None = -45.0

    def __post_init__(self):
        if (self.movement is None) == (self.workflow is None):
            raise InvalidSpec("set exactly one of movement or workflow")
        if self.movement is not None and self.movement not in MOVEMENTS:
            raise InvalidSpec(f"unknown movement {self.movement!r}")
        if self.workflow is not None and self.workflow not in WORKFLOWS:
            raise InvalidSpec(f"unknown workflow {self.workflow!r}")
        if self.speed_mm_s not in SPEEDS_MM_S:
            raise InvalidSpec(f"speed must be one of {SPEEDS_MM_S}")
        if self.move_distance_mm not in DISTANCES_MM:
            raise InvalidSpec(f"move distance must be one of {DISTANCES_MM}")
        if self.mic_distance_cm not in MIC_DISTANCES_CM:
            raise InvalidSpec(f"mic distance must be one of {MIC_DISTANCES_CM}")
        if self.duration_s < 1.0:
            raise InvalidSpec("duration must be at least 1 s")

    @property
    def label_kind(self) -> str:
        return "movement" if self.movement is not None else "workflow"

    @property
    def label(self) -> str:
        return self.movement if self.movement is not None else self.workflow


def _trapezoid(n_move: int, attack: float = 0.1, release: float = 0.3) -> np.ndarray:
    """Asymmetric speed envelope for one commanded move."""
    t = np.linspace(0.0, 1.0, n_move, endpoint=False)
    env = np.ones(n_move)
    rise = t < attack
    fall = t > 1.0 - release
    env[rise] = t[rise] / attack
    env[fall] = (1.0 - t[fall]) / release
    return env


def _segment_envelope(n: int, spec: SynthSpec, rng, reverse: bool) -> np.ndarray:
    """Move envelope + settling pause, tiled to fill the segment,
    starting at a random phase of the cycle."""
    move_s = spec.move_distance_mm / spec.speed_mm_s
    n_move = max(2, int(round(move_s * SAMPLE_RATE)))
    n_pause = int(round(0.25 * n_move))
    period = np.concatenate([_trapezoid(n_move), np.zeros(n_pause)])
    if reverse:
        period = period[::-1]
    reps = int(np.ceil(n / len(period)))
    env = np.tile(period, reps)[:n]
    return np.roll(env, int(rng.integers(0, len(period))))


def synth_emission(spec: SynthSpec) -> AudioClip:
    """Render one clip for the given grid cell, bit-reproducible per seed."""
    rng = np.random.default_rng(spec.seed)
    n = int(round(spec.duration_s * SAMPLE_RATE))
    t = np.arange(n) / SAMPLE_RATE
    speed_factor = (spec.speed_mm_s / 12.5) ** 0.25

    if spec.movement is not None:
        segments = [(spec.movement, 1.0, False)]
    else:
        segments = WORKFLOW_SCRIPTS[spec.workflow]

    bounds = np.round(np.linspace(0, n, len(segments) + 1)).astype(int)
    signal = np.zeros(n)
    for (axes, pitch, reverse), a, b in zip(segments, bounds[:-1], bounds[1:]):
        seg_t = t[a:b]
        axis_gain = COMPOSITE_GAIN if len(axes) > 1 else 1.0
        tone = np.zeros(b - a)
        for axis in axes:
            f0 = AXIS_HZ[axis] * speed_factor * pitch
            f0 *= 1.0 + FREQ_JITTER * rng.standard_normal()
            for h, gain in enumerate(HARMONIC_GAINS, start=1):
                phase = rng.uniform(0.0, 2.0 * np.pi)
                tone += BASE_AMP * gain * axis_gain * np.sin(
                    2.0 * np.pi * f0 * h * seg_t + phase
                )
        signal[a:b] = tone * _segment_envelope(b - a, spec, rng, reverse)

    signal *= 30.0 / spec.mic_distance_cm
    if spec.hum_db is not None:
        hum_amp = 10.0 ** (spec.hum_db / 20.0)
        signal += hum_amp * np.sin(2.0 * np.pi * 60.0 * t + rng.uniform(0.0, 2.0 * np.pi))
    if spec.noise_db is not None:
        signal += rng.normal(0.0, 10.0 ** (spec.noise_db / 20.0), n)
    return AudioClip(samples=np.clip(signal, -1.0, 1.0), sample_rate_hz=SAMPLE_RATE)


def derive_seed(base_seed: int, cell_index: int, clip_index: int) -> int:
    """Stable per-clip seed from the dataset base seed and grid position."""
    digest = hashlib.blake2s(
        f"{base_seed}:{cell_index}:{clip_index}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "little") >> 1


def movement_grid(
    movements=MOVEMENTS,
    speeds=(12.5,),
    distances=(1.0,),
    mic_distances=(30.0,),
    duration_s: float = 5.0,
    hum_db: float | None = -35.0,
    noise_db: float | None = -45.0,
) -> list[SynthSpec]:
    """Cartesian grid of movement cells (one SynthSpec per cell)."""
    return [
        SynthSpec(
            movement=m,
            speed_mm_s=s,
            move_distance_mm=d,
            mic_distance_cm=mic,
            duration_s=duration_s,
            hum_db=hum_db,
            noise_db=noise_db,
        )
        for m in movements
        for s in speeds
        for d in distances
        for mic in mic_distances
    ]


def workflow_grid(
    workflows=WORKFLOWS,
    duration_s: float = 5.0,
    hum_db: float | None = -35.0,
    noise_db: float | None = -45.0,
) -> list[SynthSpec]:
    """One cell per workflow at the baseline operating point."""
    return [
        SynthSpec(workflow=w, duration_s=duration_s, hum_db=hum_db, noise_db=noise_db)
        for w in workflows
    ]


def synth_dataset(
    grid: list[SynthSpec],
    clips_per_cell: int,
    out_dir,
    base_seed: int = 0,
) -> Path:
    """Render every cell to WAV files plus a manifest.csv; returns its path.

    Per-clip seeds derive from (base_seed, cell index, clip index) so a
    rerun with the same base seed reproduces every file bit-exactly.
    """
    if not grid:
        raise InvalidSpec("empty synthesis grid")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = out_dir / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_COLUMNS)
        for ci, cell in enumerate(grid):
            for j in range(clips_per_cell):
                spec = replace(cell, seed=derive_seed(base_seed, ci, j))
                name = f"{spec.label}_c{ci:03d}_{j:03d}.wav"
                write_wav(synth_emission(spec), out_dir / name)
                writer.writerow(
                    [
                        name,
                        spec.label_kind,
                        spec.label,
                        spec.speed_mm_s,
                        spec.move_distance_mm,
                        spec.mic_distance_cm,
                        spec.seed,
                    ]
                )
    return manifest
