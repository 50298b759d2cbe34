import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import signal as sps

from veploop.sigproc import (DecoderConfig, EegFeaturePair, amplitude_at, amplitude_spectrum,
                             decode_samples, decode_trial, eeg_feature_loss, epoch, feature_pair,
                             notch_filter, peak_frequency, score_iteration, snr_at, target_bin)
from veploop.subject import EegRecording, SubjectConfig, pink_noise

FS = 250.0
T = np.arange(500) / FS


def sine(f, amp=1.0, phase=0.0, t=T):
    return amp * np.sin(2 * np.pi * f * t + phase)


def rms(x):
    return np.sqrt(np.mean(x**2))


# --- notch ---------------------------------------------------------------

def biquad_notch(f0, q, fs):
    """Textbook second-order notch (bilinear transform, unity passband)."""
    w0 = 2 * np.pi * f0 / fs
    g = 1 / (1 + np.tan(w0 / (2 * q)))
    b = g * np.array([1.0, -2 * np.cos(w0), 1.0])
    a = np.array([1.0, -2 * g * np.cos(w0), 2 * g - 1])
    return b, a


def test_notch_coefficients_match_closed_form():
    b, a = sps.iirnotch(50.0, 30.0, fs=FS)
    b2, a2 = biquad_notch(50.0, 30.0, FS)
    np.testing.assert_allclose(b, b2, rtol=1e-12)
    np.testing.assert_allclose(a, a2, rtol=1e-12)


def test_notch_attenuates_mains():
    t = np.arange(int(4 * FS)) / FS
    x = sine(50.0, t=t)
    y = notch_filter(x, FS)
    cut = int(0.2 * FS)
    assert rms(y[cut:-cut]) <= 0.1 * rms(x[cut:-cut])


def test_notch_passes_target_band():
    y = notch_filter(sine(4.0), FS)
    cut = int(0.2 * FS)
    ratio = rms(y[cut:-cut]) / rms(sine(4.0)[cut:-cut])
    assert abs(ratio - 1) <= 0.01


def test_notch_zero_and_bad_frequency():
    np.testing.assert_array_equal(notch_filter(np.zeros(500), FS), 0.0)
    with pytest.raises(ValueError):
        notch_filter(np.zeros(500), 80.0, f0=50.0)


def test_notch_zero_phase():
    y = notch_filter(sine(10.0, phase=0.3), FS)
    x_spec = np.fft.rfft(sine(10.0, phase=0.3))[20]
    y_spec = np.fft.rfft(y)[20]
    assert abs(np.angle(y_spec / x_spec)) < 1e-3


# --- epoching --------------------------------------------------------------

def test_epoch_splits():
    x = np.arange(500)
    assert [len(e) for e in epoch(x, 1)] == [500]
    parts = epoch(x, 2)
    assert [len(e) for e in parts] == [250, 250]
    np.testing.assert_array_equal(np.concatenate(parts), x)
    with pytest.raises(ValueError):
        epoch(x, 3)


def test_epoch_multichannel():
    x = np.arange(14 * 10).reshape(14, 10)
    parts = epoch(x, 5)
    assert len(parts) == 5 and parts[0].shape == (14, 2)
    np.testing.assert_array_equal(parts[1], x[:, 2:4])


# --- amplitude -------------------------------------------------------------

def test_amplitude_exact_bin():
    assert amplitude_at(sine(4.0), FS, 4.0) == pytest.approx(1.0, abs=1e-9)
    assert amplitude_at(sine(4.0), FS, 10.0) == pytest.approx(0.0, abs=1e-9)


def test_amplitude_of_constant():
    assert amplitude_at(np.full(500, 5.0), FS, 4.0) == pytest.approx(0.0, abs=1e-9)
    assert amplitude_at(np.full(500, 5.0), FS, 0.0) == pytest.approx(5.0, abs=1e-9)


def test_amplitude_linearity():
    x = 2 * sine(4.0) + 3 * sine(10.0)
    assert amplitude_at(x, FS, 4.0) == pytest.approx(2.0, abs=1e-9)
    assert amplitude_at(x, FS, 10.0) == pytest.approx(3.0, abs=1e-9)


def test_amplitude_rejects_off_bin():
    with pytest.raises(ValueError, match="resolution"):
        amplitude_at(sine(4.0), FS, 4.3)


@given(st.floats(0, 2 * np.pi), st.integers(1, 124))
@settings(max_examples=50)
def test_amplitude_phase_invariant(phase, k):
    f = k * FS / 500
    assert amplitude_at(sine(f, 1.7, phase), FS, f) == pytest.approx(1.7, abs=1e-9)


@pytest.mark.parametrize("n", [500, 501])
def test_parseval(n):
    x = np.random.default_rng(n).standard_normal(n) + 0.3
    _, amps = amplitude_spectrum(x, FS)
    power = amps[0] ** 2 + np.sum(amps[1:] ** 2) / 2
    if n % 2 == 0:
        power += amps[-1] ** 2 / 2  # Nyquist already carries 1/n
    assert power == pytest.approx(np.mean(x**2), rel=1e-6)


def test_target_bin():
    assert target_bin(500, FS, 4.0) == 8
    with pytest.raises(ValueError):
        target_bin(500, FS, 4.25)


# --- SNR -------------------------------------------------------------------

def test_snr_pure_sine_hits_cap():
    assert snr_at(sine(4.0), FS, 4.0) == 100.0


def test_snr_constructed_spectrum():
    n, k, m = 500, 8, 5
    rng = np.random.default_rng(0)
    spec = np.zeros(n // 2 + 1, dtype=complex)
    phases = rng.uniform(0, 2 * np.pi, 2 * m + 1)
    bins = np.arange(k - m, k + m + 1)
    mags = np.where(bins == k, 5.0, 1.0)
    spec[bins] = mags * n / 2 * np.exp(1j * phases)
    x = np.fft.irfft(spec, n=n)
    assert snr_at(x, FS, 4.0, DecoderConfig(snr_neighbors=m)) == pytest.approx(5.0, abs=1e-6)


def test_snr_white_noise_monte_carlo():
    rng = np.random.default_rng(2024)
    x = rng.standard_normal((1000, 500))
    assert np.mean(snr_at(x, FS, 4.0)) == pytest.approx(1.0, abs=0.1)


@given(st.floats(1e-3, 1e3))
@settings(max_examples=30)
def test_snr_scale_invariant(c):
    x = pink_noise(500, FS, 10.0, np.random.default_rng(5)) + sine(4.0, 3.0)
    assert snr_at(c * x, FS, 4.0) == pytest.approx(snr_at(x, FS, 4.0), rel=1e-9)


def test_snr_zero_signal_and_insufficient_bins():
    assert snr_at(np.zeros(500), FS, 4.0) == 0.0
    with pytest.raises(ValueError):
        snr_at(sine(1.0), FS, 1.0)


# --- scoring ---------------------------------------------------------------

def test_score_double_winner_and_loser():
    scores = score_iteration([(1.0, 1.0), (5.0, 3.0), (2.0, 2.0), (3.0, 1.5), (4.0, 2.5)])
    assert scores[1] == 2.0
    assert scores[0] == 0.0


def test_score_degenerate_feature():
    scores = score_iteration([(a, 1.5) for a in (1, 2, 3, 4, 5)])
    np.testing.assert_allclose(scores, [0.5, 0.75, 1.0, 1.25, 1.5])


def test_score_needs_two_images():
    with pytest.raises(ValueError):
        score_iteration([(1.0, 1.0)])


@given(st.floats(1e-3, 1e3), st.floats(-1e3, 1e3), st.integers(0, 2**32 - 1))
@settings(max_examples=40)
def test_score_affine_invariant(scale, shift, seed):
    rng = np.random.default_rng(seed)
    amps = rng.uniform(50, 400, 5)
    snrs = rng.uniform(1, 3, 5)
    a = score_iteration(np.column_stack([amps, snrs]))
    b = score_iteration(np.column_stack([amps * scale + shift, snrs]))
    np.testing.assert_allclose(a, b, atol=1e-12)


# --- decode ----------------------------------------------------------------

def test_decode_trial_on_clean_sine():
    samples = np.vstack([sine(4.0, 10.0 * (c + 1)) for c in range(3)])
    rec = EegRecording(samples=samples, fs=FS, channels=("a", "b", "c"))
    fft_amp, snr = decode_trial(rec, DecoderConfig())
    assert fft_amp == pytest.approx(20.0, rel=1e-3)
    assert snr == 100.0


def test_decode_batch_matches_single():
    rng = np.random.default_rng(0)
    batch = pink_noise(500, FS, 40.0, rng, size=(4, 7)) + sine(4.0, 100.0)
    cfg = DecoderConfig()
    fft_b, snr_b = decode_samples(batch, FS, cfg)
    for i in range(4):
        f, s = decode_samples(batch[i], FS, cfg)
        assert f == pytest.approx(fft_b[i], rel=1e-12)
        assert s == pytest.approx(snr_b[i], rel=1e-12)


def test_notch_skip_regression_guard():
    rng = np.random.default_rng(1)
    x = pink_noise(500, FS, 40.0, rng, size=7)
    spec = np.fft.rfft(x, axis=-1)
    spec[:, 100] = 0  # remove the 50 Hz bin entirely
    x = np.fft.irfft(spec, n=500, axis=-1) + sine(4.0, 120.0)
    with_notch = decode_samples(x, FS, DecoderConfig())
    without = decode_samples(x, FS, DecoderConfig(apply_notch=False))
    assert with_notch[0] == pytest.approx(without[0], rel=1e-3)
    assert with_notch[1] == pytest.approx(without[1], rel=1e-3)


def test_decode_with_epochs():
    x = sine(4.0, 7.0)[None, :]
    fft_amp, _ = decode_samples(x, FS, DecoderConfig(epochs_per_trial=2, snr_neighbors=3))
    assert fft_amp == pytest.approx(7.0, rel=1e-3)


def test_decoder_config_validation():
    DecoderConfig().validate(250.0, 500)
    with pytest.raises(ValueError, match="f_target"):
        DecoderConfig(f_target=4.3).validate(250.0, 500)
    with pytest.raises(ValueError, match="epochs_per_trial"):
        DecoderConfig(epochs_per_trial=3).validate(250.0, 500)
    with pytest.raises(ValueError, match="feature_loss_weight"):
        DecoderConfig(feature_loss_weight=0.5).validate()


# --- feature loss ------------------------------------------------------------

def test_feature_loss_examples():
    assert eeg_feature_loss(EegFeaturePair(0.4, 0.4)) == (0.0, 0.0)
    l, w = eeg_feature_loss(EegFeaturePair(1.0, 0.5, 0.05))
    assert l == 0.25
    assert w == pytest.approx(0.0125, abs=1e-15)


def test_feature_pair_lambda_range():
    with pytest.raises(ValueError):
        EegFeaturePair(0.0, 0.0, 0.2)


def test_feature_pair_normalization():
    pair = feature_pair(fft_amp=192.0, peak_freq=4.0, luminance=0.5, complexity=0.5,
                        amp_ref=384.0, f_target=4.0)
    assert pair.f == pytest.approx(0.75)
    assert pair.f_prime == pytest.approx(0.5)


def test_peak_frequency():
    x = sine(4.0, 50.0) + pink_noise(500, FS, 5.0, np.random.default_rng(0))
    assert peak_frequency(x, FS) == 4.0
