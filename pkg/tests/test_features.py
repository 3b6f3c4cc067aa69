import math

import numpy as np
import pytest
from scipy.fft import dct as scipy_dct

import oracles
from asca.audio_io import Chunk, FrameSpec
from asca.errors import EmptyFrame, InvalidLength, InvalidRange, ShapeError
from asca.features import (
    FEATURE_NAMES,
    LOG_FLOOR,
    N_FEATURES,
    FeatureVector,
    chroma,
    contrast_band_edges,
    dct_basis,
    extract_features,
    hann_window,
    hz_to_mel,
    mel_filterbank,
    mfcc,
    rmse,
    spectral_bandwidth,
    spectral_centroid,
    spectral_contrast,
    spectral_rolloff,
    stft_power,
    zcr,
)

SR = 44100
BIN_FREQS = np.arange(1025) * SR / 2048


def random_chunk(rng, n_frames=2, spec=None):
    spec = spec or FrameSpec()
    n = spec.win_length + (n_frames - 1) * spec.hop_length
    return Chunk(samples=rng.uniform(-1, 1, n), sample_rate_hz=n)


# --- window ---

def test_hann_closed_form_n4():
    np.testing.assert_allclose(hann_window(4), [0.0, 0.75, 0.75, 0.0], atol=1e-15)


def test_hann_symmetry(rng):
    for n in rng.integers(2, 300, size=10):
        w = hann_window(int(n))
        np.testing.assert_allclose(w, w[::-1], atol=1e-15)


def test_hann_sum_matches_direct_summation():
    w = hann_window(1024)
    direct = sum(0.5 * (1 - math.cos(2 * math.pi * i / 1023)) for i in range(1024))
    assert abs(w.sum() - direct) < 1e-9


def test_hann_rejects_short():
    with pytest.raises(InvalidLength):
        hann_window(1)


# --- stft ---

def test_stft_zero_chunk_is_zero():
    sg = stft_power(Chunk(samples=np.zeros(44100), sample_rate_hz=44100))
    assert sg.power.shape == (86, 1025)
    assert np.all(sg.power == 0)
    assert sg.bin_frequencies_hz[1] == SR / 2048


def test_stft_pure_tone_concentrates_energy():
    # unpadded frames (win == fft) keep a bin-centred tone in 3 bins
    spec = FrameSpec(win_length=2048, hop_length=1024, fft_size=2048)
    k = 100
    t = np.arange(44100)
    x = np.sin(2 * np.pi * k * t / 2048)
    sg = stft_power(Chunk(samples=x, sample_rate_hz=44100), spec)
    for row in sg.power[:-1]:  # last frame is zero-padded; skip it
        near = row[k - 1 : k + 2].sum()
        assert near / row.sum() > 0.99


def test_stft_matches_naive_dft(rng):
    spec = FrameSpec()
    chunk = random_chunk(rng, n_frames=2)
    mine = stft_power(chunk, spec).power
    ref = oracles.stft_power_naive(
        chunk.samples, spec.win_length, spec.hop_length, spec.fft_size
    )
    assert oracles.relative_error(mine, ref) < 1e-6


def test_stft_parseval_per_frame(rng):
    spec = FrameSpec()
    x = rng.uniform(-1, 1, spec.win_length)
    windowed = x * hann_window(spec.win_length)
    padded = np.zeros(spec.fft_size)
    padded[: spec.win_length] = windowed
    full = np.fft.fft(padded)
    time_energy = (windowed**2).sum()
    freq_energy = (np.abs(full) ** 2).sum() / spec.fft_size
    assert abs(time_energy - freq_energy) / time_energy < 1e-6


# --- frame scalars ---

def test_rmse_cases(rng):
    assert rmse(np.zeros(64)) == 0.0
    t = np.arange(4410)
    sine = 0.7 * np.sin(2 * np.pi * 100 * t / 4410)  # 100 whole periods
    assert abs(rmse(sine) - 0.7 / math.sqrt(2)) < 1e-3
    x = rng.uniform(-1, 1, 333)
    assert abs(rmse(x) - oracles.rmse_naive(x)) < 1e-12
    with pytest.raises(EmptyFrame):
        rmse(np.array([]))


def test_zcr_cases(rng):
    assert zcr(np.ones(50)) == 0.0
    alternating = np.array([1.0, -1.0] * 4)
    assert zcr(alternating) == 1.0
    x = rng.uniform(-1, 1, 501)
    assert zcr(x) == oracles.zcr_naive(x)
    assert zcr(np.array([0.0, -1.0, 0.0, 1.0])) == pytest.approx(2 / 3)
    with pytest.raises(InvalidLength):
        zcr(np.array([1.0]))


# --- spectral scalars ---

def _single_bin(freq_hz):
    row = np.zeros(1025)
    row[int(round(freq_hz / (SR / 2048)))] = 2.0
    return row


def test_centroid_cases(rng):
    row = np.zeros(1025)
    k500 = int(round(500 / (SR / 2048)))
    k1500 = int(round(1500 / (SR / 2048)))
    row[k500] = row[k1500] = 1.0
    mid = (BIN_FREQS[k500] + BIN_FREQS[k1500]) / 2
    assert spectral_centroid(row, BIN_FREQS) == pytest.approx(mid)
    single = _single_bin(1000.0)
    assert spectral_centroid(single, BIN_FREQS) == pytest.approx(
        BIN_FREQS[np.argmax(single)]
    )
    assert spectral_centroid(np.zeros(1025), BIN_FREQS) == 0.0
    x = rng.uniform(0, 1, 1025)
    assert oracles.relative_error(
        spectral_centroid(x, BIN_FREQS), oracles.centroid_naive(x, BIN_FREQS)
    ) < 1e-9


def test_bandwidth_cases(rng):
    assert spectral_bandwidth(_single_bin(750.0), BIN_FREQS) == 0.0
    row = np.zeros(1025)
    k500 = int(round(500 / (SR / 2048)))
    k1500 = int(round(1500 / (SR / 2048)))
    row[k500] = row[k1500] = 3.0
    half_gap = (BIN_FREQS[k1500] - BIN_FREQS[k500]) / 2
    assert spectral_bandwidth(row, BIN_FREQS) == pytest.approx(half_gap)
    assert spectral_bandwidth(np.zeros(1025), BIN_FREQS) == 0.0
    x = rng.uniform(0, 1, 1025)
    assert oracles.relative_error(
        spectral_bandwidth(x, BIN_FREQS), oracles.bandwidth_naive(x, BIN_FREQS)
    ) < 1e-9


def test_rolloff_cases(rng):
    single = _single_bin(3000.0)
    assert spectral_rolloff(single, BIN_FREQS) == BIN_FREQS[np.argmax(single)]
    uniform = np.ones(100)
    freqs = np.arange(100) * 10.0
    assert spectral_rolloff(uniform, freqs) == freqs[84]
    assert spectral_rolloff(np.zeros(8), np.arange(8.0)) == 0.0
    x = rng.uniform(0, 1, 1025)
    assert spectral_rolloff(x, BIN_FREQS) == oracles.rolloff_naive(x, BIN_FREQS)


def test_contrast_cases(rng):
    edges = contrast_band_edges(SR)
    assert edges[0] == 200.0 and edges[-1] == SR / 2
    flat = np.full(1025, 0.37)
    np.testing.assert_allclose(spectral_contrast(flat, BIN_FREQS, edges), np.zeros(7))
    spiked = np.full(1025, 1e-8)
    spiked[int(round(1000 / (SR / 2048)))] = 1.0  # inside band 2 (800-1600 Hz)
    c = spectral_contrast(spiked, BIN_FREQS, edges)
    assert c[2] > 60.0
    assert np.all(np.abs(np.delete(c, 2)) < 1.0)
    x = rng.uniform(0, 1, 1025)
    ref = oracles.contrast_naive(x, BIN_FREQS, SR)
    assert oracles.relative_error(spectral_contrast(x, BIN_FREQS, edges), ref) < 1e-9


def test_chroma_cases(rng):
    tone = _single_bin(440.0)
    c = chroma(tone, BIN_FREQS)
    assert c[9] == 1.0  # pitch class A
    assert c.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all(chroma(np.zeros(1025), BIN_FREQS) == 0.0)
    duo = _single_bin(440.0) + _single_bin(880.0)
    ref = oracles.chroma_naive(duo, BIN_FREQS)
    np.testing.assert_allclose(chroma(duo, BIN_FREQS), ref, atol=1e-12)
    assert ref[9] == 1.0
    x = rng.uniform(0, 1, 1025)
    np.testing.assert_allclose(
        chroma(x, BIN_FREQS), oracles.chroma_naive(x, BIN_FREQS), atol=1e-9
    )


# --- mel / mfcc ---

def test_mel_scale_reference_point():
    assert hz_to_mel(700.0) == pytest.approx(2595.0 * math.log10(2.0))


def test_mel_filterbank_matches_triangle_oracle(rng):
    for _ in range(3):
        n_mels = int(rng.integers(10, 50))
        fmax = float(rng.uniform(4000, SR / 2))
        fb = mel_filterbank(n_mels, 0.0, fmax, 2048, SR)
        ref = oracles.mel_weights_naive(n_mels, 0.0, fmax, 2048, SR)
        assert oracles.relative_error(fb.weights, ref) < 1e-9


def test_mel_filter_apex_is_maximal():
    fb = mel_filterbank(40, 0.0, SR / 2, 2048, SR)
    for row in fb.weights:
        assert row.max() > 0
        # apex bin beats every other bin in the same filter
        assert np.argmax(row) == np.argmax(row * (row > 0))


def test_mel_filterbank_rejects_bad_range():
    with pytest.raises(InvalidRange):
        mel_filterbank(40, 100.0, 50.0, 2048, SR)
    with pytest.raises(InvalidRange):
        mel_filterbank(1, 0.0, SR / 2, 2048, SR)


def test_dct_basis_orthonormal_and_matches_scipy():
    basis = dct_basis(14, 40)
    gram = basis @ basis.T
    assert np.max(np.abs(gram - np.eye(14))) < 1e-10
    ref = scipy_dct(np.eye(40), type=2, norm="ortho", axis=0)[:14]
    np.testing.assert_allclose(basis, ref, atol=1e-12)


def test_mfcc_constant_energy_hits_only_dc():
    # constant mel energies mean a constant log vector: DCT leaves only DC
    log_const = np.log(np.full(40, 0.5) + LOG_FLOOR)
    direct = dct_basis(14, 40) @ log_const
    assert abs(direct[0]) > 0
    np.testing.assert_allclose(direct[1:], 0.0, atol=1e-12)
    fb = mel_filterbank(40, 0.0, SR / 2, 2048, SR)
    assert mfcc(np.full((1, 1025), 2.0), fb).shape == (1, 14)


def test_mfcc_matches_naive_oracle(rng):
    fb = mel_filterbank(40, 0.0, SR / 2, 2048, SR)
    rows = rng.uniform(0, 1, (4, 1025))
    mine = mfcc(rows, fb)
    ref = np.array([oracles.mfcc_naive(r, fb.weights) for r in rows])
    assert oracles.relative_error(mine, ref) < 1e-6


def test_mfcc_shape_error():
    fb = mel_filterbank(40, 0.0, SR / 2, 2048, SR)
    with pytest.raises(ShapeError):
        mfcc(np.ones((2, 999)), fb)


def test_mfcc_scaling_shifts_only_dc(rng):
    spec = FrameSpec()
    chunk = random_chunk(rng, n_frames=4)
    base = np.asarray(chunk.samples) * 0.05  # headroom so 10x stays in range
    fb = mel_filterbank(40, 0.0, len(base) / 2, 2048, len(base))
    a = mfcc(stft_power(Chunk(samples=base, sample_rate_hz=len(base)), spec).power, fb)
    b = mfcc(stft_power(Chunk(samples=base * 10, sample_rate_hz=len(base)), spec).power, fb)
    # a scale factor is additive in log-energy: only the DC coefficient moves
    diff = (b - a).mean(axis=0)
    assert abs(diff[0]) > 1.0
    assert np.max(np.abs(diff[1:])) < 1e-3


# --- extract_features ---

def test_feature_names_layout():
    assert N_FEATURES == 27
    assert FEATURE_NAMES[0] == "mfcc_00"
    assert FEATURE_NAMES[13] == "mfcc_13"
    assert FEATURE_NAMES[14:19] == (
        "rmse_mean", "zcr_mean", "centroid_mean_hz", "bandwidth_mean_hz", "rolloff_mean_hz",
    )
    assert FEATURE_NAMES[19] == "contrast_0"
    assert FEATURE_NAMES[26] == "chroma_mean"


def test_extract_silence_chunk():
    fv = extract_features(Chunk(samples=np.zeros(44100), sample_rate_hz=44100))
    v = fv.values
    expected_dc = math.sqrt(40.0) * math.log(LOG_FLOOR)
    assert v[0] == pytest.approx(expected_dc, rel=1e-12)
    np.testing.assert_allclose(v[1:14], 0.0, atol=1e-9)
    np.testing.assert_allclose(v[14:], 0.0, atol=1e-12)


def test_extract_motor_tone_chunk():
    t = np.arange(44100) / 44100.0
    chunk = Chunk(samples=0.5 * np.sin(2 * np.pi * 150.0 * t), sample_rate_hz=44100)
    v = extract_features(chunk).values
    centroid = v[16]
    rolloff = v[18]
    assert 120.0 <= centroid <= 180.0
    assert rolloff < 400.0


def test_extract_shape_and_determinism(rng):
    chunk = Chunk(samples=rng.uniform(-1, 1, 44100), sample_rate_hz=44100)
    a = extract_features(chunk)
    b = extract_features(chunk)
    assert a.values.shape == (27,)
    assert np.all(np.isfinite(a.values))
    np.testing.assert_array_equal(a.values, b.values)


def test_extract_matches_per_frame_functions(rng):
    """The vectorized aggregation equals the scalar per-row operations."""
    chunk = Chunk(samples=rng.uniform(-1, 1, 44100), sample_rate_hz=44100)
    spec = FrameSpec()
    v = extract_features(chunk, spec).values
    sg = stft_power(chunk, spec)
    edges = contrast_band_edges(chunk.sample_rate_hz)
    contrast_ref = np.mean(
        [spectral_contrast(r, sg.bin_frequencies_hz, edges) for r in sg.power], axis=0
    )
    chroma_ref = np.mean([chroma(r, sg.bin_frequencies_hz) for r in sg.power])
    centroid_ref = np.mean(
        [spectral_centroid(r, sg.bin_frequencies_hz) for r in sg.power]
    )
    np.testing.assert_allclose(v[19:26], contrast_ref, atol=1e-12)
    assert v[26] == pytest.approx(chroma_ref, abs=1e-12)
    assert v[16] == pytest.approx(centroid_ref, rel=1e-12)


def test_time_reversed_frame_invariance(rng):
    x = rng.uniform(-1, 1, 1024)
    assert zcr(x) == zcr(x[::-1])
    assert rmse(x) == pytest.approx(rmse(x[::-1]), rel=1e-12)
    spec = FrameSpec()
    fwd = stft_power(Chunk(samples=np.pad(x, (0, 512)), sample_rate_hz=1536), spec)
    rev = stft_power(Chunk(samples=np.pad(x[::-1], (0, 512)), sample_rate_hz=1536), spec)
    np.testing.assert_allclose(fwd.power[0], rev.power[0], rtol=1e-9, atol=1e-12)


def test_feature_vector_validation():
    with pytest.raises(ShapeError):
        FeatureVector(values=np.zeros(26))
    with pytest.raises(ShapeError):
        FeatureVector(values=np.full(27, np.nan))
    fv = FeatureVector(values=np.arange(27.0))
    assert fv.as_dict()["chroma_mean"] == 26.0
