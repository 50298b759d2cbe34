"""Procedural stimulus generator.

A frozen mapping from latent vectors to grayscale rasters. The parameter
space covers uniform luminance fields, square-wave gratings, checkerboards
and sparse dots; a fixed random projection (seeded by
``GeneratorConfig.projection_seed``) plays the role of trained generator
weights.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

# rows of the projection matrix, one per decoded scalar
_BRIGHTNESS = 0
_MIX = slice(1, 4)
_STRIPE_FREQ = 4
_ORIENTATION = 5
_CHECKER = 6
_DOT_DENSITY = 7
_DOT_VALUE = 8
_N_OUTPUTS = 9


@dataclass(frozen=True)
class GeneratorConfig:
    d: int = 100
    width: int = 64
    height: int = 64
    projection_seed: int = 0
    stripe_freq_range: tuple[float, float] = (1.0, 16.0)
    checker_range: tuple[int, int] = (1, 16)
    dot_density_max: float = 0.05
    # std of each projected coordinate when z ~ N(0, I)
    projection_scale: float = 3.5

    def validate(self):
        if self.d < 1:
            raise ValueError("d: latent dimension must be >= 1")
        if self.width < 8 or self.height < 8:
            raise ValueError("width/height: must be >= 8 pixels")
        lo, hi = self.stripe_freq_range
        if not 0 < lo < hi:
            raise ValueError("stripe_freq_range: need 0 < low < high")
        clo, chi = self.checker_range
        if not (1 <= clo < chi and int(clo) == clo and int(chi) == chi):
            raise ValueError("checker_range: need integers 1 <= low < high")
        if not 0 < self.dot_density_max <= 0.05:
            raise ValueError("dot_density_max: must lie in (0, 0.05]")
        if not self.projection_scale > 0:
            raise ValueError("projection_scale: must be positive")
        return self


@dataclass(frozen=True)
class StimulusParams:
    brightness: float
    mix_weights: tuple[float, float, float]  # uniform, stripes, checker
    stripe_freq: float
    stripe_orientation: float
    checker_cells: int
    dot_density: float
    dot_value: float

    def to_dict(self) -> dict:
        return {
            "brightness": self.brightness,
            "mix_weights": list(self.mix_weights),
            "stripe_freq": self.stripe_freq,
            "stripe_orientation": self.stripe_orientation,
            "checker_cells": self.checker_cells,
            "dot_density": self.dot_density,
            "dot_value": self.dot_value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StimulusParams":
        return cls(
            brightness=float(d["brightness"]),
            mix_weights=tuple(float(w) for w in d["mix_weights"]),
            stripe_freq=float(d["stripe_freq"]),
            stripe_orientation=float(d["stripe_orientation"]),
            checker_cells=int(d["checker_cells"]),
            dot_density=float(d["dot_density"]),
            dot_value=float(d["dot_value"]),
        )


def sample_latent(rng: np.random.Generator, d: int = 100) -> np.ndarray:
    """Draw a latent vector from the standard normal prior."""
    return rng.standard_normal(d)


@lru_cache(maxsize=16)
def _projection(d: int, seed: int, scale: float) -> np.ndarray:
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((_N_OUTPUTS, d)) * (scale / np.sqrt(d))
    w.setflags(write=False)
    return w


@lru_cache(maxsize=16)
def _dot_field(height: int, width: int, seed: int) -> np.ndarray:
    # independent of the projection draws so the two never alias
    rng = np.random.default_rng([seed, 0xD07])
    f = rng.random((height, width))
    f.setflags(write=False)
    return f


def projection_matrix(cfg: GeneratorConfig) -> np.ndarray:
    """Fixed (9, d) matrix mapping latents to pre-squash parameters."""
    return _projection(cfg.d, cfg.projection_seed, float(cfg.projection_scale))


def _logistic(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def decode_params(z, cfg: GeneratorConfig) -> StimulusParams:
    """Decode a latent into interpretable stimulus parameters.

    Scalars pass through a logistic squash and the three mixing weights
    through a softmax; there are no bias terms, so ``z = 0`` maps to the
    centre of every range.
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (cfg.d,):
        raise ValueError(f"latent has shape {z.shape}, expected ({cfg.d},)")
    if not np.all(np.isfinite(z)):
        raise ValueError("latent contains non-finite values")
    u = projection_matrix(cfg) @ z

    mix = np.exp(u[_MIX] - u[_MIX].max())
    mix /= mix.sum()
    s = _logistic(u)
    flo, fhi = cfg.stripe_freq_range
    clo, chi = cfg.checker_range
    return StimulusParams(
        brightness=float(s[_BRIGHTNESS]),
        mix_weights=(float(mix[0]), float(mix[1]), float(mix[2])),
        stripe_freq=float(flo + (fhi - flo) * s[_STRIPE_FREQ]),
        stripe_orientation=float(np.pi * s[_ORIENTATION]),
        checker_cells=int(np.rint(clo + (chi - clo) * s[_CHECKER])),
        dot_density=float(cfg.dot_density_max * s[_DOT_DENSITY]),
        dot_value=float(s[_DOT_VALUE]),
    )


def stripes(height: int, width: int, freq: float, orientation: float = 0.0) -> np.ndarray:
    """Binary square-wave grating, ``freq`` cycles across the image."""
    y, x = np.mgrid[0:height, 0:width]
    u = np.cos(orientation) * x / width + np.sin(orientation) * y / height
    phase = np.mod(freq * u, 1.0)
    return (phase < 0.5).astype(float)


def checkerboard(height: int, width: int, cells: int) -> np.ndarray:
    """Binary checkerboard with ``cells`` cells along each axis."""
    rows = (np.arange(height) * cells) // height
    cols = (np.arange(width) * cells) // width
    return ((rows[:, None] + cols[None, :]) % 2 == 0).astype(float)


def render(params: StimulusParams, cfg: GeneratorConfig) -> np.ndarray:
    """Rasterise parameters into a ``(height, width)`` image in [0, 1]."""
    h, w = cfg.height, cfg.width
    wu, ws, wc = params.mix_weights
    img = wu * np.ones((h, w))
    if ws:
        img += ws * stripes(h, w, params.stripe_freq, params.stripe_orientation)
    if wc:
        img += wc * checkerboard(h, w, params.checker_cells)
    img *= params.brightness
    if params.dot_density > 0:
        mask = _dot_field(h, w, cfg.projection_seed) < params.dot_density
        img[mask] = params.dot_value
    return np.clip(img, 0.0, 1.0)


def render_latent(z, cfg: GeneratorConfig) -> tuple[StimulusParams, np.ndarray]:
    params = decode_params(z, cfg)
    return params, render(params, cfg)


# --- PGM (P5) I/O -------------------------------------------------------

def to_bytes_pgm(img) -> bytes:
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ValueError("PGM export needs a 2-D image")
    h, w = img.shape
    data = np.rint(np.clip(img, 0.0, 1.0) * 255).astype(np.uint8)
    return f"P5\n{w} {h}\n255\n".encode("ascii") + data.tobytes()


def write_pgm(path, img) -> None:
    Path(path).write_bytes(to_bytes_pgm(img))


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) or ASCII (P2) PGM into floats in [0, 1]."""
    raw = Path(path).read_bytes()
    tokens = []
    pos = 0
    # header: magic, width, height, maxval, separated by whitespace/comments
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        tokens.append(raw[start:pos].decode("ascii"))
    magic, w, h, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic == "P5":
        pos += 1  # single whitespace byte before the raster
        dtype = np.dtype(">u2") if maxval > 255 else np.uint8
        count = w * h
        data = np.frombuffer(raw, dtype=dtype, count=count, offset=pos)
    elif magic == "P2":
        data = np.array(raw[pos:].split(), dtype=float)
        if data.size != w * h:
            raise ValueError(f"{path}: expected {w * h} samples, got {data.size}")
    else:
        raise ValueError(f"{path}: not a PGM file (magic {magic!r})")
    if maxval <= 0:
        raise ValueError(f"{path}: invalid maxval {maxval}")
    return data.reshape(h, w).astype(float) / maxval
