"""Denoising for recorded emissions: amplitude gating, Butterworth low-pass,
and the averaged-spectrum peak inspection used to pick their parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import sosfilt

from .audio_io import AudioClip, chunk_clip
from .errors import InvalidCutoff, InvalidRange
from .features import hann_window, power_db

_RMS_EPS = 1e-12  # inside log so silent windows stay finite


@dataclass(frozen=True)
class AmplitudeGateSpec:
    """Gain reduction for windows whose RMS sits below a dBFS threshold."""

    threshold_dbfs: float = -30.0
    attenuation_db: float = -60.0
    window_ms: float = 10.0

    def __post_init__(self):
        if self.threshold_dbfs >= 0:
            raise InvalidRange("threshold_dbfs must be negative")
        if self.attenuation_db >= 0:
            raise InvalidRange("attenuation_db must be negative")
        if self.window_ms <= 0:
            raise InvalidRange("window_ms must be positive")


@dataclass(frozen=True)
class ButterworthSpec:
    """Low-pass design parameters, realized as cascaded biquads."""

    order: int = 4
    cutoff_hz: float = 1000.0

    def __post_init__(self):
        if self.order not in (2, 4, 6, 8):
            raise InvalidRange("order must be one of 2, 4, 6, 8")
        if self.cutoff_hz <= 0:
            raise InvalidCutoff("cutoff must be positive")


@dataclass
class SpectrumReport:
    """Dominant spectral peaks, strongest first."""

    peaks: list[tuple[float, float]]  # (frequency_hz, power_db)
    resolution_hz: float


def amplitude_gate(clip: AudioClip, spec: AmplitudeGateSpec | None = None) -> AudioClip:
    """Attenuate contiguous windows whose RMS falls below the threshold.

    Windows already below threshold + attenuation are left alone (they are
    past the gate floor), which makes the gate idempotent.
    """
    spec = spec or AmplitudeGateSpec()
    x = clip.samples.copy()
    win = max(1, int(round(clip.sample_rate_hz * spec.window_ms / 1000.0)))
    gain = 10.0 ** (spec.attenuation_db / 20.0)
    floor_db = spec.threshold_dbfs + spec.attenuation_db
    for start in range(0, len(x), win):
        w = x[start : start + win]
        level = 20.0 * np.log10(np.sqrt(np.mean(w**2)) + _RMS_EPS)
        if floor_db <= level < spec.threshold_dbfs:
            w *= gain
    return AudioClip(
        samples=x,
        sample_rate_hz=clip.sample_rate_hz,
        source_bit_depth=clip.source_bit_depth,
    )


def butter_design(spec: ButterworthSpec, sample_rate: int) -> np.ndarray:
    """Second-order sections for a Butterworth low-pass, shape (order/2, 6).

    Analog prototype poles exp(j*pi*(2k+n-1)/(2n)) are scaled to the
    prewarped cutoff and mapped by the bilinear transform; each section is
    normalized to unit DC gain.
    """
    if spec.cutoff_hz >= sample_rate / 2:
        raise InvalidCutoff(
            f"cutoff {spec.cutoff_hz} Hz must sit below Nyquist ({sample_rate / 2} Hz)"
        )
    n = spec.order
    wc = 2.0 * sample_rate * np.tan(np.pi * spec.cutoff_hz / sample_rate)
    k2 = (2.0 * sample_rate) ** 2
    sections = []
    for k in range(1, n // 2 + 1):
        theta = np.pi * (2 * k + n - 1) / (2 * n)
        re = wc * np.cos(theta)  # pole real part, negative for stability
        a0 = k2 - 2.0 * re * 2.0 * sample_rate + wc * wc
        a1 = (-2.0 * k2 + 2.0 * wc * wc) / a0
        a2 = (k2 + 2.0 * re * 2.0 * sample_rate + wc * wc) / a0
        b = np.array([1.0, 2.0, 1.0]) * (wc * wc / a0)
        b *= (1.0 + a1 + a2) / b.sum()  # exact unit gain at z = 1
        sections.append([b[0], b[1], b[2], 1.0, a1, a2])
    return np.array(sections)


def apply_filter(clip: AudioClip, sos: np.ndarray) -> AudioClip:
    """Run the biquad cascade (direct form II transposed, zero initial state)."""
    y = sosfilt(sos, clip.samples)
    return AudioClip(
        samples=np.clip(y, -1.0, 1.0),
        sample_rate_hz=clip.sample_rate_hz,
        source_bit_depth=clip.source_bit_depth,
    )


def sos_response(sos: np.ndarray, freq_hz, sample_rate: int) -> np.ndarray:
    """Complex frequency response of a biquad cascade at the given frequencies."""
    w = 2.0 * np.pi * np.atleast_1d(np.asarray(freq_hz, dtype=np.float64)) / sample_rate
    z = np.exp(-1j * w)
    h = np.ones_like(z, dtype=np.complex128)
    for b0, b1, b2, a0, a1, a2 in np.atleast_2d(sos):
        h *= (b0 + b1 * z + b2 * z**2) / (a0 + a1 * z + a2 * z**2)
    return h


def spectrum_peaks(
    clip: AudioClip, max_peaks: int = 10, neighborhood_bins: int = 4
) -> SpectrumReport:
    """Average 1-second periodograms and report the dominant peaks.

    Each whole second is Hann-windowed and transformed at its own length,
    giving 1 Hz-per-second-of-rate resolution; peaks are local maxima at
    least 3 dB above the edges of their +/- neighborhood.
    """
    chunks = chunk_clip(clip)
    sr = clip.sample_rate_hz
    window = hann_window(sr)
    mean_power = np.zeros(sr // 2 + 1)
    for chunk in chunks:
        spectrum = np.fft.rfft(chunk.samples * window)
        mean_power += np.abs(spectrum) ** 2
    mean_power /= len(chunks)

    db = power_db(mean_power)
    k = neighborhood_bins
    found = []
    for i in range(1, len(db) - 1):
        lo, hi = max(i - k, 0), min(i + k, len(db) - 1)
        if mean_power[i] < mean_power[i - 1] or mean_power[i] < mean_power[i + 1]:
            continue
        if mean_power[i] < mean_power[lo : hi + 1].max():
            continue
        if db[i] >= max(db[lo], db[hi]) + 3.0:
            found.append((float(i * sr / len(window)), float(db[i])))
    found.sort(key=lambda p: p[1], reverse=True)
    resolution = sr / len(window)
    return SpectrumReport(peaks=found[:max_peaks], resolution_hz=resolution)
