"""WAV parsing/writing, 1-second chunking, and overlapped framing.

Readers accept RIFF/WAVE with integer PCM (format 1) or IEEE float
(format 3) in any channel count; unknown chunks (LIST, fact, ...) are
skipped. Writers always emit 16-bit PCM little-endian mono.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyAudio,
    InvalidLength,
    ParseError,
    TooShort,
    UnsupportedFormat,
)

_FMT_PCM = 1
_FMT_FLOAT = 3


@dataclass
class AudioClip:
    """Mono audio normalized to [-1, 1]."""

    samples: np.ndarray
    sample_rate_hz: int
    source_bit_depth: int = 16

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ParseError("AudioClip samples must be 1-D mono")
        if self.sample_rate_hz <= 0:
            raise ParseError("sample rate must be positive")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


@dataclass(frozen=True)
class FrameSpec:
    """Analysis framing: window/hop in samples, zero-padded transform length."""

    win_length: int = 1024
    hop_length: int = 512
    fft_size: int = 2048
    window_kind: str = "hann"

    def __post_init__(self):
        if self.win_length < 2:
            raise InvalidLength("win_length must be >= 2")
        if self.hop_length * 2 != self.win_length:
            raise InvalidLength("hop_length must be win_length / 2 (50% overlap)")
        if self.win_length > self.fft_size:
            raise InvalidLength("win_length must not exceed fft_size")
        if self.window_kind != "hann":
            raise InvalidLength(f"unknown window kind: {self.window_kind!r}")


@dataclass
class Chunk:
    """Exactly one second of samples cut from a parent clip."""

    samples: np.ndarray
    sample_rate_hz: int
    origin_offset_s: float = 0.0
    parent_id: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if len(self.samples) != self.sample_rate_hz:
            raise InvalidLength(
                f"chunk must hold exactly {self.sample_rate_hz} samples, "
                f"got {len(self.samples)}"
            )


def read_wav(path) -> AudioClip:
    """Parse a RIFF/WAVE file into a normalized mono AudioClip.

    16-bit samples map to x/32768; other integer widths scale by their own
    full-scale value; float data is clipped to [-1, 1]. Multi-channel input
    is downmixed by channel mean.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12:
        raise ParseError(f"{path}: too small to be a WAV file")
    riff, _size, wave_tag = struct.unpack_from("<4sI4s", data, 0)
    if riff != b"RIFF" or wave_tag != b"WAVE":
        raise ParseError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    raw = None
    pos = 12
    while pos + 8 <= len(data):
        cid, csize = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8 : pos + 8 + csize]
        if cid == b"fmt ":
            if len(body) < 16:
                raise ParseError(f"{path}: fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            if len(body) < csize:
                raise ParseError(f"{path}: data chunk truncated")
            raw = body
        # anything else (LIST, fact, ...) is skipped
        pos += 8 + csize + (csize & 1)  # chunks are word-aligned

    if fmt is None:
        raise ParseError(f"{path}: missing fmt chunk")
    if raw is None:
        raise ParseError(f"{path}: missing data chunk")

    code, n_channels, rate, _byterate, _align, bits = fmt
    if n_channels < 1 or rate <= 0:
        raise ParseError(f"{path}: nonsensical fmt fields")

    if code == _FMT_PCM:
        if bits == 8:
            x = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
        elif bits == 16:
            x = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
        elif bits == 24:
            b = np.frombuffer(raw, dtype=np.uint8)
            b = b[: len(b) - len(b) % 3].reshape(-1, 3)
            vals = (
                b[:, 0].astype(np.int32)
                | (b[:, 1].astype(np.int32) << 8)
                | (b[:, 2].astype(np.int32) << 16)
            )
            vals = np.where(vals >= 1 << 23, vals - (1 << 24), vals)
            x = vals.astype(np.float64) / float(1 << 23)
        elif bits == 32:
            x = np.frombuffer(raw, dtype="<i4").astype(np.float64) / float(1 << 31)
        else:
            raise UnsupportedFormat(f"{path}: {bits}-bit integer PCM not supported")
    elif code == _FMT_FLOAT:
        if bits == 32:
            x = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        elif bits == 64:
            x = np.frombuffer(raw, dtype="<f8").astype(np.float64)
        else:
            raise UnsupportedFormat(f"{path}: {bits}-bit float not supported")
        x = np.clip(x, -1.0, 1.0)
    else:
        raise UnsupportedFormat(f"{path}: wave format code {code} not supported")

    if n_channels > 1:
        x = x[: len(x) - len(x) % n_channels].reshape(-1, n_channels).mean(axis=1)
    if len(x) == 0:
        raise EmptyAudio(f"{path}: no audio samples")
    return AudioClip(samples=x, sample_rate_hz=int(rate), source_bit_depth=int(bits))


def quantize16(samples: np.ndarray) -> np.ndarray:
    """Clamp to [-1, 1] and quantize to int16, rounding half away from zero."""
    x = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0) * 32768.0
    q = np.copysign(np.floor(np.abs(x) + 0.5), x)
    return np.clip(q, -32768, 32767).astype(np.int16)


def write_wav(clip: AudioClip, path) -> None:
    """Write a clip as 16-bit PCM little-endian mono RIFF/WAVE."""
    pcm = quantize16(clip.samples).tobytes()
    hdr = b"".join(
        [
            b"RIFF",
            struct.pack("<I", 36 + len(pcm)),
            b"WAVE",
            b"fmt ",
            struct.pack(
                "<IHHIIHH",
                16,
                _FMT_PCM,
                1,
                clip.sample_rate_hz,
                clip.sample_rate_hz * 2,
                2,
                16,
            ),
            b"data",
            struct.pack("<I", len(pcm)),
        ]
    )
    with open(path, "wb") as fh:
        fh.write(hdr)
        fh.write(pcm)


def chunk_clip(clip: AudioClip, parent_id: str = "") -> list[Chunk]:
    """Cut a clip into contiguous non-overlapping 1-second chunks.

    The trailing partial second is discarded so every chunk's feature
    statistics stay comparable.
    """
    sr = clip.sample_rate_hz
    n_whole = len(clip.samples) // sr
    if n_whole < 1:
        raise TooShort(
            f"clip is {clip.duration_s:.3f} s, need at least 1 s to chunk"
        )
    return [
        Chunk(
            samples=clip.samples[i * sr : (i + 1) * sr],
            sample_rate_hz=sr,
            origin_offset_s=float(i),
            parent_id=parent_id,
        )
        for i in range(n_whole)
    ]


def frame_count(n_samples: int, spec: FrameSpec) -> int:
    return int(np.ceil((n_samples - spec.win_length) / spec.hop_length)) + 1


def frame_chunk(chunk: Chunk, spec: FrameSpec) -> np.ndarray:
    """Slice a chunk into overlapping frames, shape (n_frames, win_length).

    Frame i starts at i*hop_length; frames overrunning the chunk are
    zero-padded on the right.
    """
    x = chunk.samples
    if len(x) < spec.win_length:
        raise TooShort("chunk shorter than one analysis window")
    n = frame_count(len(x), spec)
    padded = np.zeros((n - 1) * spec.hop_length + spec.win_length)
    padded[: len(x)] = x
    idx = np.arange(spec.win_length)[None, :] + spec.hop_length * np.arange(n)[:, None]
    return padded[idx]
