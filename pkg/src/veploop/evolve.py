"""Genetic latent generator: combine, mutate and interpolate the two best
latents of an iteration into the next candidate generation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import StreamFactory


@dataclass(frozen=True)
class EvolveConfig:
    n_mutants: int = 8
    n_interp: int = 10
    sigma_max: float = 0.8
    mutation_rate: float = 0.5
    elitism: bool = True

    @property
    def generation_size(self) -> int:
        return self.n_mutants + self.n_interp + (2 if self.elitism else 0)

    def validate(self):
        if self.n_mutants < 0 or self.n_interp < 0:
            raise ValueError("n_mutants/n_interp: must be >= 0")
        if self.generation_size < 2:
            raise ValueError("n_mutants: generation must hold at least two latents")
        if self.sigma_max < 0:
            raise ValueError("sigma_max: must be >= 0")
        if not 0 <= self.mutation_rate <= 1:
            raise ValueError("mutation_rate: must lie in [0, 1]")
        return self

    def sigma_ladder(self) -> np.ndarray:
        j = np.arange(1, self.n_mutants + 1)
        return j * self.sigma_max / self.n_mutants if self.n_mutants else j * 0.0

    def interp_alphas(self) -> np.ndarray:
        return np.arange(1, self.n_interp + 1) / (self.n_interp + 1)


def _pair(z_a, z_b):
    z_a = np.asarray(z_a, dtype=float)
    z_b = np.asarray(z_b, dtype=float)
    if z_a.shape != z_b.shape:
        raise ValueError(f"latent shapes differ: {z_a.shape} vs {z_b.shape}")
    return z_a, z_b


def combine(z_a, z_b) -> np.ndarray:
    z_a, z_b = _pair(z_a, z_b)
    return 0.5 * (z_a + z_b)


def mutate(z, sigma: float, p: float, rng: np.random.Generator) -> np.ndarray:
    """Add N(0, sigma^2) to each element independently with probability p."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    z = np.asarray(z, dtype=float)
    # both draws always happen so the stream layout is independent of p
    hit = rng.random(z.shape) < p
    delta = rng.normal(0.0, 1.0, z.shape) * sigma
    return z + np.where(hit, delta, 0.0)


def interpolate(z_a, z_b, alpha: float) -> np.ndarray:
    z_a, z_b = _pair(z_a, z_b)
    return (1.0 - alpha) * z_a + alpha * z_b


def next_generation(z_best_fft, z_best_snr, cfg: EvolveConfig, streams: StreamFactory) -> list[np.ndarray]:
    """Offspring in fixed order: parents (if elitist), mutants, interpolants.

    Mutant ``j`` draws from ``streams.stream("mutant", j)`` so each offspring
    is reproducible on its own.
    """
    cfg.validate()
    z_a, z_b = _pair(z_best_fft, z_best_snr)
    out = [z_a.copy(), z_b.copy()] if cfg.elitism else []
    centre = combine(z_a, z_b)
    for j, sigma in enumerate(cfg.sigma_ladder(), start=1):
        out.append(mutate(centre, float(sigma), cfg.mutation_rate, streams.stream("mutant", j)))
    for alpha in cfg.interp_alphas():
        out.append(interpolate(z_a, z_b, float(alpha)))
    return out


def select_parents(fft_amps, snrs, scores) -> tuple[int, int]:
    """Indices of the FFT-best and SNR-best images.

    When one image wins both, the second parent is the runner-up on the
    combined score.
    """
    fft_amps = np.asarray(fft_amps, dtype=float)
    snrs = np.asarray(snrs, dtype=float)
    scores = np.asarray(scores, dtype=float)
    if len(fft_amps) < 2:
        raise ValueError("need at least two images to pick two parents")
    i_fft = int(np.argmax(fft_amps))
    i_snr = int(np.argmax(snrs))
    if i_snr == i_fft:
        masked = scores.copy()
        masked[i_fft] = -np.inf
        i_snr = int(np.argmax(masked))
    return i_fft, i_snr
