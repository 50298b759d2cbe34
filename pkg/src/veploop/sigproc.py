"""EEG decoding: notch filtering, epoching, exact-bin FFT amplitude, SNR and
per-iteration scoring.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as _signal

from .subject import EegRecording

_BIN_TOL = 1e-9


@dataclass(frozen=True)
class DecoderConfig:
    f_target: float = 4.0
    notch_f0: float = 50.0
    notch_q: float = 30.0
    snr_neighbors: int = 5
    snr_cap: float = 100.0
    epochs_per_trial: int = 1
    feature_loss_weight: float = 0.05
    apply_notch: bool = True

    def validate(self, fs: float | None = None, n_samples: int | None = None):
        if self.f_target <= 0:
            raise ValueError("f_target: must be positive")
        if self.snr_neighbors < 1:
            raise ValueError("snr_neighbors: must be >= 1")
        if self.snr_cap <= 0:
            raise ValueError("snr_cap: must be positive")
        if self.notch_q <= 0:
            raise ValueError("notch_q: must be positive")
        if self.epochs_per_trial < 1:
            raise ValueError("epochs_per_trial: must be >= 1")
        if not 0.01 <= self.feature_loss_weight <= 0.1:
            raise ValueError("feature_loss_weight: must lie in [0.01, 0.1]")
        if fs is not None:
            if self.apply_notch and not 0 < self.notch_f0 < fs / 2:
                raise ValueError(f"notch_f0: must lie in (0, fs/2) for fs={fs}")
            if n_samples is not None:
                if n_samples % self.epochs_per_trial:
                    raise ValueError(
                        f"epochs_per_trial: {n_samples} samples do not split into "
                        f"{self.epochs_per_trial} equal epochs")
                n_ep = n_samples // self.epochs_per_trial
                k = target_bin(n_ep, fs, self.f_target)  # raises if off-bin
                m = self.snr_neighbors
                if k - m < 1 or k + m > n_ep // 2:
                    raise ValueError(
                        f"snr_neighbors: bin {k} lacks {m} valid neighbours per side")
        return self


def target_bin(n: int, fs: float, f: float) -> int:
    """DFT bin index of ``f``; raises unless ``f`` falls exactly on a bin."""
    k = f * n / fs
    if abs(k - round(k)) > _BIN_TOL:
        res = fs / n
        raise ValueError(
            f"f_target: {f} Hz is not a multiple of the spectral resolution {res:g} Hz "
            f"(n={n}, fs={fs})")
    k = int(round(k))
    if not 0 <= k <= n // 2:
        raise ValueError(f"f_target: {f} Hz lies outside [0, fs/2]")
    return k


def notch_filter(x, fs: float, f0: float = 50.0, q: float = 30.0) -> np.ndarray:
    """Zero-phase second-order band-stop at ``f0`` along the last axis."""
    if not 0 < f0 < fs / 2:
        raise ValueError(f"notch frequency {f0} Hz must lie in (0, fs/2={fs / 2})")
    b, a = _signal.iirnotch(f0, q, fs=fs)
    return _signal.filtfilt(b, a, np.asarray(x, dtype=float), axis=-1)


def epoch(samples, n_epochs: int) -> list[np.ndarray]:
    """Split the last axis into ``n_epochs`` contiguous equal segments."""
    samples = np.asarray(samples)
    n = samples.shape[-1]
    if n_epochs < 1 or n % n_epochs:
        raise ValueError(f"cannot split {n} samples into {n_epochs} equal epochs")
    step = n // n_epochs
    return [samples[..., i * step:(i + 1) * step] for i in range(n_epochs)]


def amplitude_spectrum(x, fs: float):
    """Single-sided amplitude spectrum (no window).

    Interior bins carry ``2|X|/n``; DC and, for even ``n``, Nyquist carry
    ``|X|/n`` so that a sinusoid on an exact bin reads its amplitude.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    amps = np.abs(np.fft.rfft(x, axis=-1)) * (2.0 / n)
    amps[..., 0] /= 2
    if n % 2 == 0:
        amps[..., -1] /= 2
    return np.fft.rfftfreq(n, 1.0 / fs), amps


def amplitude_at(x, fs: float, f: float):
    x = np.asarray(x, dtype=float)
    k = target_bin(x.shape[-1], fs, f)
    _, amps = amplitude_spectrum(x, fs)
    return amps[..., k]


def _snr_from_amps(amps, k: int, m: int, cap: float):
    nb = amps.shape[-1]
    if k - m < 1 or k + m > nb - 1:
        raise ValueError(f"bin {k} lacks {m} valid neighbouring bins on each side")
    neigh = np.concatenate([amps[..., k - m:k], amps[..., k + 1:k + m + 1]], axis=-1)
    num = amps[..., k]
    den = np.maximum(neigh.mean(axis=-1), 1e-12 * amps.max(axis=-1))
    with np.errstate(divide="ignore", invalid="ignore"):
        snr = np.where(num > 0, num / den, 0.0)
    return np.minimum(snr, cap)


def snr_at(x, fs: float, f: float, cfg: DecoderConfig | None = None):
    """Target amplitude over the mean of the ``m`` nearest bins per side."""
    cfg = cfg or DecoderConfig()
    x = np.asarray(x, dtype=float)
    k = target_bin(x.shape[-1], fs, f)
    _, amps = amplitude_spectrum(x, fs)
    return _snr_from_amps(amps, k, cfg.snr_neighbors, cfg.snr_cap)


def decode_samples(samples, fs: float, cfg: DecoderConfig):
    """Decode raw samples of shape (..., channels, n).

    Returns ``(fft_amp, snr)`` averaged over epochs and channels, keeping
    any leading batch dimensions (e.g. trials).
    """
    x = np.asarray(samples, dtype=float)
    if cfg.apply_notch:
        x = notch_filter(x, fs, cfg.notch_f0, cfg.notch_q)
    segs = np.stack(epoch(x, cfg.epochs_per_trial), axis=-2)  # (..., ch, ep, n_ep)
    k = target_bin(segs.shape[-1], fs, cfg.f_target)
    _, amps = amplitude_spectrum(segs, fs)
    fft_amp = amps[..., k].mean(axis=(-2, -1))
    snr = _snr_from_amps(amps, k, cfg.snr_neighbors, cfg.snr_cap).mean(axis=(-2, -1))
    return fft_amp, snr


def decode_trial(rec: EegRecording, cfg: DecoderConfig) -> tuple[float, float]:
    fft_amp, snr = decode_samples(rec.samples, rec.fs, cfg)
    return float(fft_amp), float(snr)


def minmax_normalize(values) -> np.ndarray:
    """Min-max scale to [0, 1]; a constant batch maps to 0.5."""
    v = np.asarray(values, dtype=float)
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.full(v.shape, 0.5)
    return (v - lo) / (hi - lo)


def score_iteration(per_image) -> np.ndarray:
    """Normalized FFT amplitude plus normalized SNR for each image.

    ``per_image`` is a sequence of ``(fft_amp, snr)`` pairs from one
    iteration; normalization runs over that batch only.
    """
    arr = np.asarray(per_image, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("per_image must be a sequence of (fft_amp, snr) pairs")
    if arr.shape[0] < 2:
        raise ValueError("scoring needs at least two images per iteration")
    return minmax_normalize(arr[:, 0]) + minmax_normalize(arr[:, 1])


@dataclass(frozen=True)
class ImageScore:
    fft_amp: float
    snr: float
    score: float


@dataclass(frozen=True)
class EegFeaturePair:
    f: float
    f_prime: float
    lam: float = 0.05

    def __post_init__(self):
        if not 0.01 <= self.lam <= 0.1:
            raise ValueError(f"lambda must lie in [0.01, 0.1], got {self.lam}")


def eeg_feature_loss(pair: EegFeaturePair) -> tuple[float, float]:
    """Squared discrepancy between response and image features, and its
    lambda-weighted value."""
    l_eeg = (pair.f - pair.f_prime) ** 2
    return l_eeg, pair.lam * l_eeg


def peak_frequency(x, fs: float, fmin: float = 1.0) -> float:
    """Frequency of the largest spectral peak at or above ``fmin``."""
    freqs, amps = amplitude_spectrum(x, fs)
    valid = freqs >= fmin
    return float(freqs[valid][np.argmax(amps[valid])])


def feature_pair(fft_amp: float, peak_freq: float, luminance: float, complexity: float,
                 amp_ref: float, f_target: float, lam: float = 0.05) -> EegFeaturePair:
    """Build the response/image feature pair for one stimulus.

    Response side: mean of amplitude relative to ``amp_ref`` and closeness
    of the peak frequency to the target (ratio of the smaller to the larger).
    Image side: mean of luminance and complexity. Both lie in [0, 1].
    """
    n_amp = min(1.0, fft_amp / amp_ref) if amp_ref > 0 else 0.0
    n_freq = min(peak_freq, f_target) / max(peak_freq, f_target) if peak_freq > 0 else 0.0
    return EegFeaturePair(f=0.5 * (n_amp + n_freq), f_prime=0.5 * (luminance + complexity), lam=lam)
