"""Per-frame acoustic features and the 27-dimensional chunk signature.

Eight feature families are computed from a short-time power spectrogram
and aggregated by arithmetic mean over frames into a fixed layout:

    mfcc_00..mfcc_13        14  chunk means per cepstral coefficient
    rmse_mean                1
    zcr_mean                 1
    centroid_mean_hz         1
    bandwidth_mean_hz        1
    rolloff_mean_hz          1
    contrast_0..contrast_6   7  octave-band peak/valley gaps, dB
    chroma_mean              1  mean over 12 pitch classes and frames
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .audio_io import Chunk, FrameSpec, frame_chunk
from .errors import EmptyFrame, InvalidLength, InvalidRange, ShapeError

LOG_FLOOR = 1e-10  # inside ln()/log10() to keep silence finite
N_MFCC = 14
N_MELS = 40
N_CONTRAST_BANDS = 7
CONTRAST_FIRST_EDGE_HZ = 200.0
CONTRAST_QUANTILE = 0.02
ROLLOFF_FRACTION = 0.85

FEATURE_NAMES: tuple[str, ...] = tuple(
    [f"mfcc_{i:02d}" for i in range(N_MFCC)]
    + ["rmse_mean", "zcr_mean", "centroid_mean_hz", "bandwidth_mean_hz", "rolloff_mean_hz"]
    + [f"contrast_{i}" for i in range(N_CONTRAST_BANDS)]
    + ["chroma_mean"]
)
N_FEATURES = len(FEATURE_NAMES)  # 27


@dataclass(frozen=True)
class FeatureVector:
    """The 27 chunk-level features in canonical order."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (N_FEATURES,):
            raise ShapeError(f"feature vector must have {N_FEATURES} entries")
        if not np.all(np.isfinite(v)):
            raise ShapeError("feature vector contains non-finite values")
        object.__setattr__(self, "values", v)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values.tolist()))


@dataclass
class PowerSpectrogram:
    """Magnitude-squared STFT, one row per frame, bins 0..fft_size/2."""

    power: np.ndarray
    bin_frequencies_hz: np.ndarray
    frame_times_s: np.ndarray


def hann_window(n: int) -> np.ndarray:
    """Symmetric Hann weights, w[i] = 0.5*(1 - cos(2*pi*i/(n-1)))."""
    if n < 2:
        raise InvalidLength("window length must be >= 2")
    i = np.arange(n)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * i / (n - 1)))


def stft_power(chunk: Chunk, spec: FrameSpec | None = None) -> PowerSpectrogram:
    """Windowed, zero-padded power spectrogram of a chunk."""
    spec = spec or FrameSpec()
    frames = frame_chunk(chunk, spec)
    windowed = frames * hann_window(spec.win_length)
    z = np.fft.rfft(windowed, n=spec.fft_size, axis=1)
    power = np.abs(z) ** 2
    sr = chunk.sample_rate_hz
    freqs = np.arange(spec.fft_size // 2 + 1) * sr / spec.fft_size
    times = np.arange(frames.shape[0]) * spec.hop_length / sr
    return PowerSpectrogram(power=power, bin_frequencies_hz=freqs, frame_times_s=times)


def rmse(frame: np.ndarray) -> float:
    """Root mean square energy of a frame."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size == 0:
        raise EmptyFrame("cannot take RMS of an empty frame")
    return float(np.sqrt(np.mean(frame**2)))


def zcr(frame: np.ndarray) -> float:
    """Zero-crossing rate: strict sign changes (zero counts as non-negative)
    over adjacent pairs, normalized by length - 1."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size < 2:
        raise InvalidLength("zero-crossing rate needs at least 2 samples")
    nonneg = frame >= 0
    return float(np.count_nonzero(nonneg[1:] != nonneg[:-1]) / (frame.size - 1))


def spectral_centroid(spectrum_row: np.ndarray, bin_frequencies: np.ndarray) -> float:
    """Power-weighted mean frequency; 0 Hz for an all-zero spectrum."""
    p = np.asarray(spectrum_row, dtype=np.float64)
    total = p.sum()
    if total <= 0.0:
        return 0.0
    return float((bin_frequencies * p).sum() / total)


def spectral_bandwidth(spectrum_row: np.ndarray, bin_frequencies: np.ndarray) -> float:
    """Power-weighted standard deviation of frequency around the centroid."""
    p = np.asarray(spectrum_row, dtype=np.float64)
    total = p.sum()
    if total <= 0.0:
        return 0.0
    c = (bin_frequencies * p).sum() / total
    return float(np.sqrt((p * (bin_frequencies - c) ** 2).sum() / total))


def spectral_rolloff(
    spectrum_row: np.ndarray,
    bin_frequencies: np.ndarray,
    fraction: float = ROLLOFF_FRACTION,
) -> float:
    """Frequency of the first bin where cumulative power reaches the fraction."""
    p = np.asarray(spectrum_row, dtype=np.float64)
    total = p.sum()
    if total <= 0.0:
        return 0.0
    idx = int(np.searchsorted(np.cumsum(p), fraction * total))
    return float(bin_frequencies[min(idx, len(p) - 1)])


def contrast_band_edges(sample_rate: int) -> np.ndarray:
    """Octave edges 200, 400, ... with the last edge capped at Nyquist."""
    edges = CONTRAST_FIRST_EDGE_HZ * 2.0 ** np.arange(N_CONTRAST_BANDS + 1)
    return np.minimum(edges, sample_rate / 2.0)


def power_db(x) -> np.ndarray:
    return 10.0 * np.log10(np.asarray(x, dtype=np.float64) + LOG_FLOOR)


def spectral_contrast(
    spectrum_row: np.ndarray,
    bin_frequencies: np.ndarray,
    band_edges: np.ndarray,
) -> np.ndarray:
    """Per-band gap between the mean of the top and bottom power quantiles, in dB.

    Quantile size is 2% of the band's bins with a floor of one bin; a band
    left empty by the Nyquist cap contributes 0.
    """
    p = np.asarray(spectrum_row, dtype=np.float64)
    out = np.zeros(len(band_edges) - 1)
    for b in range(len(band_edges) - 1):
        lo, hi = band_edges[b], band_edges[b + 1]
        if b == len(band_edges) - 2:
            mask = (bin_frequencies >= lo) & (bin_frequencies <= hi)
        else:
            mask = (bin_frequencies >= lo) & (bin_frequencies < hi)
        band = np.sort(p[mask])
        if band.size == 0:
            continue
        k = max(1, int(CONTRAST_QUANTILE * band.size))
        out[b] = float(power_db(band[-k:].mean()) - power_db(band[:k].mean()))
    return out


def chroma(spectrum_row: np.ndarray, bin_frequencies: np.ndarray) -> np.ndarray:
    """Fold power onto the 12 pitch classes (A440 reference), max-normalized."""
    p = np.asarray(spectrum_row, dtype=np.float64)
    classes = _pitch_classes(tuple(bin_frequencies))
    out = np.zeros(12)
    valid = classes >= 0
    np.add.at(out, classes[valid], p[valid])
    peak = out.max()
    if peak > 0.0:
        out /= peak
    return out


@lru_cache(maxsize=8)
def _pitch_classes(bin_frequencies: tuple) -> np.ndarray:
    f = np.asarray(bin_frequencies, dtype=np.float64)
    cls = np.full(f.shape, -1, dtype=np.int64)
    audible = f >= 20.0
    midi = np.round(12.0 * np.log2(f[audible] / 440.0)) + 69
    cls[audible] = midi.astype(np.int64) % 12
    return cls


def hz_to_mel(f) -> np.ndarray:
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m) -> np.ndarray:
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@dataclass
class MelFilterbank:
    """Triangular mel filters over the linear-frequency bins."""

    weights: np.ndarray
    n_mels: int
    fmin_hz: float
    fmax_hz: float


def mel_filterbank(
    n_mels: int, fmin: float, fmax: float, fft_size: int, sample_rate: int
) -> MelFilterbank:
    """Filters triangular in mel space: n_mels+2 equally spaced mel points,
    interpolated directly at each bin's frequency (no bin snapping)."""
    if not (0 <= fmin < fmax <= sample_rate / 2):
        raise InvalidRange("need 0 <= fmin < fmax <= sample_rate/2")
    if n_mels < 2:
        raise InvalidRange("need at least 2 mel filters")
    mel_pts = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2)
    hz_pts = mel_to_hz(mel_pts)
    freqs = np.arange(fft_size // 2 + 1) * sample_rate / fft_size
    lower = hz_pts[:-2][:, None]
    center = hz_pts[1:-1][:, None]
    upper = hz_pts[2:][:, None]
    rising = (freqs[None, :] - lower) / (center - lower)
    falling = (upper - freqs[None, :]) / (upper - center)
    weights = np.maximum(0.0, np.minimum(rising, falling))
    if np.any(weights.sum(axis=1) == 0.0):
        raise InvalidRange("a mel filter covers no FFT bin; widen fft_size or range")
    return MelFilterbank(weights=weights, n_mels=n_mels, fmin_hz=fmin, fmax_hz=fmax)


def dct_basis(n_coeffs: int, n_mels: int) -> np.ndarray:
    """Orthonormal DCT-II rows, shape (n_coeffs, n_mels)."""
    k = np.arange(n_coeffs)[:, None]
    j = np.arange(n_mels)[None, :]
    basis = np.sqrt(2.0 / n_mels) * np.cos(np.pi * k * (2 * j + 1) / (2 * n_mels))
    basis[0] /= np.sqrt(2.0)
    return basis


@lru_cache(maxsize=8)
def _cached_mel_weights(n_mels, fmin, fmax, fft_size, sample_rate) -> np.ndarray:
    return mel_filterbank(n_mels, fmin, fmax, fft_size, sample_rate).weights


@lru_cache(maxsize=8)
def _cached_dct(n_coeffs, n_mels) -> np.ndarray:
    return dct_basis(n_coeffs, n_mels)


def mfcc(
    power: np.ndarray, filterbank: MelFilterbank, n_coeffs: int = N_MFCC
) -> np.ndarray:
    """Cepstra from a power spectrogram: DCT-II of ln(mel energies + floor).

    All n_coeffs coefficients including the zeroth are kept; returns
    (n_frames, n_coeffs).
    """
    power = np.atleast_2d(np.asarray(power, dtype=np.float64))
    if power.shape[1] != filterbank.weights.shape[1]:
        raise ShapeError(
            f"spectrogram has {power.shape[1]} bins, filterbank expects "
            f"{filterbank.weights.shape[1]}"
        )
    mel_energy = power @ filterbank.weights.T
    log_e = np.log(mel_energy + LOG_FLOOR)
    return log_e @ _cached_dct(n_coeffs, filterbank.n_mels).T


def _contrast_all_frames(p, freqs, edges) -> np.ndarray:
    """spectral_contrast over every row at once; one sort per band."""
    out = np.zeros((p.shape[0], len(edges) - 1))
    for b in range(len(edges) - 1):
        if b == len(edges) - 2:
            mask = (freqs >= edges[b]) & (freqs <= edges[b + 1])
        else:
            mask = (freqs >= edges[b]) & (freqs < edges[b + 1])
        nb = int(np.count_nonzero(mask))
        if nb == 0:
            continue
        band = np.sort(p[:, mask], axis=1)
        k = max(1, int(CONTRAST_QUANTILE * nb))
        out[:, b] = power_db(band[:, -k:].mean(axis=1)) - power_db(band[:, :k].mean(axis=1))
    return out


def _chroma_all_frames(p, freqs) -> np.ndarray:
    """chroma over every row at once via a pitch-class indicator matrix."""
    classes = _pitch_classes(tuple(freqs))
    fold = np.zeros((12, len(freqs)))
    valid = classes >= 0
    fold[classes[valid], np.flatnonzero(valid)] = 1.0
    out = p @ fold.T
    peaks = out.max(axis=1, keepdims=True)
    np.divide(out, peaks, out=out, where=peaks > 0.0)
    return out


def extract_features(chunk: Chunk, spec: FrameSpec | None = None) -> FeatureVector:
    """Compute the 27-dimensional signature of a 1-second chunk.

    One STFT feeds every spectral family; time features come from the raw
    frames; everything is averaged over frames.
    """
    spec = spec or FrameSpec()
    sr = chunk.sample_rate_hz
    frames = frame_chunk(chunk, spec)
    sg = stft_power(chunk, spec)
    p = sg.power
    freqs = sg.bin_frequencies_hz

    fb_weights = _cached_mel_weights(N_MELS, 0.0, sr / 2.0, spec.fft_size, sr)
    mel_energy = p @ fb_weights.T
    cepstra = np.log(mel_energy + LOG_FLOOR) @ _cached_dct(N_MFCC, N_MELS).T

    rmse_all = np.sqrt(np.mean(frames**2, axis=1))
    nonneg = frames >= 0
    zcr_all = np.count_nonzero(nonneg[:, 1:] != nonneg[:, :-1], axis=1) / (
        frames.shape[1] - 1
    )

    totals = p.sum(axis=1)
    live = totals > 0.0
    centroid = np.zeros(p.shape[0])
    bandwidth = np.zeros(p.shape[0])
    rolloff = np.zeros(p.shape[0])
    if np.any(live):
        centroid[live] = (p[live] * freqs).sum(axis=1) / totals[live]
        spread = (freqs[None, :] - centroid[live][:, None]) ** 2
        bandwidth[live] = np.sqrt((p[live] * spread).sum(axis=1) / totals[live])
        cum = np.cumsum(p[live], axis=1)
        idx = (cum >= ROLLOFF_FRACTION * totals[live][:, None]).argmax(axis=1)
        rolloff[live] = freqs[idx]

    contrast = _contrast_all_frames(p, freqs, contrast_band_edges(sr))
    chroma_all = _chroma_all_frames(p, freqs)

    values = np.concatenate(
        [
            cepstra.mean(axis=0),
            [rmse_all.mean(), zcr_all.mean(), centroid.mean(), bandwidth.mean(), rolloff.mean()],
            contrast.mean(axis=0),
            [chroma_all.mean()],
        ]
    )
    return FeatureVector(values=values)
