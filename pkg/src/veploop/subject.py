"""Sinewave SSVEP subject model.

The evoked response is a phase-locked sum of harmonics of the flicker
frequency whose amplitude grows affinely with image luminance and pattern
complexity. Each trial adds 1/f background noise and a same-frequency
oscillator with a random per-trial phase, so only averaging across trials
(or a phase-sensitive decoder) separates the two.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imfeat import SubjectFeatures

CHANNELS = ("O1", "O2", "T5", "P3", "P4", "T6", "Pz")
DEFAULT_GAINS = (1.0, 1.0, 0.6, 0.8, 0.8, 0.6, 0.8)


@dataclass(frozen=True)
class SubjectConfig:
    f_target: float = 4.0
    fs: float = 250.0
    trial_len: float = 2.0
    channels: tuple[str, ...] = CHANNELS
    gains: tuple[float, ...] = DEFAULT_GAINS
    A_base: float = 80.0
    A_gain: float = 400.0
    w_L: float = 0.4
    w_C: float = 0.6
    harmonics: tuple[float, ...] = (1.0, 0.5, 0.25)
    noise_sigma: float = 40.0
    bg4_amp: float = 60.0
    adapt_gain: float = 0.0
    fatigue_slope: float = 0.0
    plateau_iter: float = 8.0

    @property
    def n_samples(self) -> int:
        return int(round(self.fs * self.trial_len))

    def validate(self):
        if self.f_target <= 0:
            raise ValueError("f_target: must be positive")
        top = len(self.harmonics) * self.f_target
        if not self.fs > 2 * max(top, 3 * self.f_target):
            raise ValueError("fs: must exceed twice the highest modelled harmonic")
        n = self.fs * self.trial_len
        if self.trial_len <= 0 or abs(n - round(n)) > 1e-9:
            raise ValueError("trial_len: fs * trial_len must be a positive integer")
        if len(self.channels) != len(self.gains):
            raise ValueError("gains: need one gain per channel")
        if len(self.channels) == 0:
            raise ValueError("channels: at least one channel required")
        if len(self.harmonics) == 0:
            raise ValueError("harmonics: at least one harmonic required")
        for name in ("A_base", "A_gain", "noise_sigma", "bg4_amp", "w_L", "w_C"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name}: must be >= 0")
        if any(g < 0 for g in self.gains):
            raise ValueError("gains: must be >= 0")
        if any(h < 0 for h in self.harmonics):
            raise ValueError("harmonics: must be >= 0")
        if self.adapt_gain < 0 or self.fatigue_slope < 0:
            raise ValueError("adapt_gain/fatigue_slope: must be >= 0")
        return self


@dataclass
class EegRecording:
    samples: np.ndarray  # (channels, n) in microvolts
    fs: float
    channels: tuple[str, ...] = CHANNELS

    @property
    def n_samples(self) -> int:
        return self.samples.shape[-1]


def pink_noise(n: int, fs: float, sigma: float, rng: np.random.Generator, size=()) -> np.ndarray:
    """1/f noise by spectral synthesis, rescaled to RMS ``sigma``.

    A complex white spectrum is shaped by f^-1/2 above 1 Hz (flat below),
    DC is dropped and each realisation is rescaled to exact RMS. ``size``
    prepends batch dimensions.
    """
    if n < 2:
        raise ValueError("pink_noise needs at least 2 samples")
    size = (int(size),) if np.isscalar(size) else tuple(size)
    if sigma == 0:
        return np.zeros(size + (n,))
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    shape = 1.0 / np.sqrt(np.maximum(freqs, 1.0))
    shape[0] = 0.0
    spec = rng.standard_normal(size + freqs.shape) + 1j * rng.standard_normal(size + freqs.shape)
    x = np.fft.irfft(spec * shape, n=n, axis=-1)
    x -= x.mean(axis=-1, keepdims=True)
    rms = np.sqrt(np.mean(x**2, axis=-1, keepdims=True))
    return sigma * x / rms


def gain_at(iteration: int, cfg: SubjectConfig) -> float:
    """Adaptation boost on the first iteration, linear fatigue after the plateau."""
    if iteration < 1:
        raise ValueError(f"iteration must be >= 1, got {iteration}")
    if iteration == 1:
        return 1.0 + cfg.adapt_gain
    return max(0.0, 1.0 - cfg.fatigue_slope * max(0.0, iteration - cfg.plateau_iter))


def evoked_amplitude(feat: SubjectFeatures, iteration: int, cfg: SubjectConfig) -> float:
    drive = cfg.w_L * feat.luminance + cfg.w_C * feat.complexity
    return gain_at(iteration, cfg) * (cfg.A_base + cfg.A_gain * drive)


def simulate_trial(feat: SubjectFeatures, iteration: int, cfg: SubjectConfig,
                   rng: np.random.Generator) -> EegRecording:
    n = cfg.n_samples
    t = np.arange(n) / cfg.fs
    amp = evoked_amplitude(feat, iteration, cfg)

    evoked = np.zeros(n)
    for h, rel in enumerate(cfg.harmonics, start=1):
        if rel:
            evoked += rel * amp * np.sin(2 * np.pi * h * cfg.f_target * t)

    # draw order is fixed: background phase, then noise
    phi = rng.uniform(0.0, 2 * np.pi)
    background = cfg.bg4_amp * np.sin(2 * np.pi * cfg.f_target * t + phi)
    noise = pink_noise(n, cfg.fs, cfg.noise_sigma, rng, size=len(cfg.channels))

    gains = np.asarray(cfg.gains, dtype=float)[:, None]
    samples = gains * evoked[None, :] + noise + background[None, :]
    return EegRecording(samples=samples, fs=cfg.fs, channels=tuple(cfg.channels))
