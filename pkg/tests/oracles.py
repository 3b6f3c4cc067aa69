"""Brute-force reference implementations the library is checked against.

Everything here favors the direct textbook definition (explicit loops,
O(n^2) transforms) over speed, and stays independent of the library's own
code paths.
"""

import math

import numpy as np

_DFT_CACHE = {}


def dft_matrix(n: int) -> np.ndarray:
    if n not in _DFT_CACHE:
        jk = np.outer(np.arange(n), np.arange(n))
        _DFT_CACHE[n] = np.exp(-2j * np.pi * jk / n)
    return _DFT_CACHE[n]


def hann_closed_form(n: int) -> np.ndarray:
    return np.array([0.5 * (1.0 - math.cos(2.0 * math.pi * i / (n - 1))) for i in range(n)])


def stft_power_naive(samples, win, hop, fft_size):
    """Frame-by-frame windowed O(n^2) DFT, magnitude squared, half spectrum."""
    n = len(samples)
    count = math.ceil((n - win) / hop) + 1
    rows = []
    w = hann_closed_form(win)
    for i in range(count):
        frame = np.zeros(win)
        piece = samples[i * hop : i * hop + win]
        frame[: len(piece)] = piece
        padded = np.zeros(fft_size)
        padded[:win] = frame * w
        spectrum = dft_matrix(fft_size) @ padded
        rows.append(np.abs(spectrum[: fft_size // 2 + 1]) ** 2)
    return np.array(rows)


def rmse_naive(frame):
    return math.sqrt(sum(float(v) ** 2 for v in frame) / len(frame))


def zcr_naive(frame):
    crossings = 0
    for a, b in zip(frame[:-1], frame[1:]):
        if (a >= 0) != (b >= 0):
            crossings += 1
    return crossings / (len(frame) - 1)


def centroid_naive(row, freqs):
    total = sum(row)
    if total <= 0:
        return 0.0
    return sum(f * p for f, p in zip(freqs, row)) / total


def bandwidth_naive(row, freqs):
    total = sum(row)
    if total <= 0:
        return 0.0
    c = centroid_naive(row, freqs)
    return math.sqrt(sum(p * (f - c) ** 2 for f, p in zip(freqs, row)) / total)


def rolloff_naive(row, freqs, fraction=0.85):
    total = sum(row)
    if total <= 0:
        return 0.0
    acc = 0.0
    for f, p in zip(freqs, row):
        acc += p
        if acc >= fraction * total:
            return f
    return freqs[-1]


def contrast_naive(row, freqs, sample_rate, first_edge=200.0, n_bands=7, q=0.02):
    edges = [min(first_edge * 2.0**b, sample_rate / 2.0) for b in range(n_bands + 1)]
    out = []
    for b in range(n_bands):
        if b == n_bands - 1:
            band = [p for f, p in zip(freqs, row) if edges[b] <= f <= edges[b + 1]]
        else:
            band = [p for f, p in zip(freqs, row) if edges[b] <= f < edges[b + 1]]
        if not band:
            out.append(0.0)
            continue
        band = sorted(band)
        k = max(1, int(q * len(band)))
        top = sum(band[-k:]) / k
        bottom = sum(band[:k]) / k
        out.append(
            10.0 * math.log10(top + 1e-10) - 10.0 * math.log10(bottom + 1e-10)
        )
    return np.array(out)


def chroma_naive(row, freqs):
    out = [0.0] * 12
    for f, p in zip(freqs, row):
        if f >= 20.0:
            cls = (round(12.0 * math.log2(f / 440.0)) + 69) % 12
            out[cls] += p
    peak = max(out)
    if peak > 0:
        out = [v / peak for v in out]
    return np.array(out)


def mel_weights_naive(n_mels, fmin, fmax, fft_size, sample_rate):
    def mel(f):
        return 2595.0 * math.log10(1.0 + f / 700.0)

    def inv(m):
        return 700.0 * (10.0 ** (m / 2595.0) - 1.0)

    pts = [
        inv(mel(fmin) + (mel(fmax) - mel(fmin)) * i / (n_mels + 1))
        for i in range(n_mels + 2)
    ]
    n_bins = fft_size // 2 + 1
    weights = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        lo, mid, hi = pts[m], pts[m + 1], pts[m + 2]
        for k in range(n_bins):
            f = k * sample_rate / fft_size
            if lo < f < mid:
                weights[m, k] = (f - lo) / (mid - lo)
            elif f == mid:
                weights[m, k] = 1.0
            elif mid < f < hi:
                weights[m, k] = (hi - f) / (hi - mid)
    return weights


def dct2_naive(values, n_coeffs):
    """Direct orthonormal DCT-II summation."""
    n = len(values)
    out = []
    for k in range(n_coeffs):
        s = sum(values[j] * math.cos(math.pi * k * (2 * j + 1) / (2 * n)) for j in range(n))
        scale = math.sqrt(1.0 / n) if k == 0 else math.sqrt(2.0 / n)
        out.append(scale * s)
    return np.array(out)


def mfcc_naive(power_row, weights, n_coeffs=14):
    energies = weights @ power_row  # the naive matrix multiply
    logs = np.log(energies + 1e-10)
    return dct2_naive(logs, n_coeffs)


def butter_warped_gain_db(f, cutoff, order, sample_rate):
    """Closed-form low-pass magnitude after bilinear warping, in dB."""
    ratio = math.tan(math.pi * f / sample_rate) / math.tan(math.pi * cutoff / sample_rate)
    return -10.0 * math.log10(1.0 + ratio ** (2 * order))


def confusion_naive(y_true, y_pred, n_classes):
    counts = [[0] * n_classes for _ in range(n_classes)]
    for t, p in zip(y_true, y_pred):
        counts[t][p] += 1
    return np.array(counts)


def relative_error(actual, expected):
    actual = np.asarray(actual, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    scale = max(float(np.max(np.abs(expected))), 1e-30)
    return float(np.max(np.abs(actual - expected)) / scale)
