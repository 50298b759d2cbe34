"""Image features and diverse-subset selection.

``precheck_features`` gives the five-number texture summary used to pick a
mutually dissimilar subset of candidate stimuli. ``subject_features`` gives
the luminance/complexity pair the simulated subject responds to.
"""
from __future__ import annotations

from dataclasses import astuple, dataclass
from functools import lru_cache
from math import comb

import numpy as np
from scipy import ndimage

EDGE_THRESHOLD = 0.25
EXHAUSTIVE_LIMIT = 5_000_000
_VAR_EPS = 1e-12


@dataclass(frozen=True)
class FeatureVector:
    pixel_std: float
    edge_count: int
    haar_hf_energy: float
    mean_fourier_freq: float
    hist_skewness: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


@dataclass(frozen=True)
class SubjectFeatures:
    luminance: float
    complexity: float


def sobel_magnitude(img) -> np.ndarray:
    """Gradient magnitude, scaled so a unit step edge reads 1.0.

    Boundaries wrap, which keeps periodic patterns translation invariant.
    """
    img = np.asarray(img, dtype=float)
    gx = ndimage.sobel(img, axis=1, mode="wrap") / 4.0
    gy = ndimage.sobel(img, axis=0, mode="wrap") / 4.0
    return np.hypot(gx, gy)


def haar_level1(img):
    """One-level orthonormal 2-D Haar transform.

    Returns ``(LL, LH, HL, HH)``. Odd dimensions are padded by repeating the
    last row/column.
    """
    img = np.asarray(img, dtype=float)
    h, w = img.shape
    if h % 2 or w % 2:
        img = np.pad(img, ((0, h % 2), (0, w % 2)), mode="edge")
    a = img[0::2, 0::2]
    b = img[0::2, 1::2]
    c = img[1::2, 0::2]
    d = img[1::2, 1::2]
    ll = (a + b + c + d) / 2
    lh = (a + b - c - d) / 2
    hl = (a - b + c - d) / 2
    hh = (a - b - c + d) / 2
    return ll, lh, hl, hh


def haar_hf_energy(img) -> float:
    _, lh, hl, hh = haar_level1(img)
    return float(np.sum(lh**2) + np.sum(hl**2) + np.sum(hh**2))


def mean_fourier_freq(img) -> float:
    """Amplitude-weighted mean radial frequency (cycles/image), DC excluded."""
    img = np.asarray(img, dtype=float)
    if img.var() < _VAR_EPS:
        return 0.0
    h, w = img.shape
    amp = np.abs(np.fft.fft2(img))
    fy = np.fft.fftfreq(h) * h
    fx = np.fft.fftfreq(w) * w
    radius = np.hypot(fy[:, None], fx[None, :])
    amp[0, 0] = 0.0
    total = amp.sum()
    if total <= 0:
        return 0.0
    return float((amp * radius).sum() / total)


def hist_skewness(img, bins: int = 256) -> float:
    """Fisher skewness of the intensity histogram over [0, 1]."""
    counts, edges = np.histogram(np.asarray(img, dtype=float), bins=bins, range=(0.0, 1.0))
    centers = 0.5 * (edges[:-1] + edges[1:])
    p = counts / counts.sum()
    mu = np.sum(p * centers)
    var = np.sum(p * (centers - mu) ** 2)
    if var < _VAR_EPS:
        return 0.0
    return float(np.sum(p * (centers - mu) ** 3) / var**1.5)


def precheck_features(img, edge_threshold: float = EDGE_THRESHOLD) -> FeatureVector:
    img = np.asarray(img, dtype=float)
    var = img.var()
    return FeatureVector(
        pixel_std=float(np.sqrt(var)) if var >= _VAR_EPS else 0.0,
        edge_count=int(np.count_nonzero(sobel_magnitude(img) > edge_threshold)),
        haar_hf_energy=haar_hf_energy(img),
        mean_fourier_freq=mean_fourier_freq(img),
        hist_skewness=hist_skewness(img),
    )


def pixel_checkerboard(height: int, width: int) -> np.ndarray:
    """Full-contrast checkerboard with 1-pixel cells."""
    i, j = np.indices((height, width))
    return ((i + j) % 2 == 0).astype(float)


@lru_cache(maxsize=32)
def reference_hf_energy(height: int, width: int) -> float:
    return haar_hf_energy(pixel_checkerboard(height, width))


def subject_features(img) -> SubjectFeatures:
    img = np.asarray(img, dtype=float)
    e_ref = reference_hf_energy(*img.shape)
    return SubjectFeatures(
        luminance=float(img.mean()),
        complexity=float(min(1.0, haar_hf_energy(img) / e_ref)),
    )


# --- diverse subset selection ------------------------------------------

def standardize(features) -> np.ndarray:
    """Per-dimension z-score; zero-variance dimensions become 0."""
    x = _as_matrix(features)
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    out = np.zeros_like(x)
    ok = sd > 0
    out[:, ok] = (x[:, ok] - mu[ok]) / sd[ok]
    return out


def _as_matrix(features) -> np.ndarray:
    if len(features) and isinstance(features[0], FeatureVector):
        x = np.array([f.as_array() for f in features])
    else:
        x = np.asarray(features, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError("features must be an (n, p) array")
    return x


def pairwise_distances(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt(np.sum(diff**2, axis=-1))


def distance_sum(dist: np.ndarray, subset) -> float:
    """Sum of pairwise distances within ``subset`` (each pair once)."""
    idx = np.asarray(subset)
    return float(np.triu(dist[np.ix_(idx, idx)], 1).sum())


def lex_combinations(n: int, k: int) -> np.ndarray:
    """All k-subsets of range(n) as rows, in lexicographic order."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int32)
    combos = np.arange(n - k + 1, dtype=np.int32)[:, None]
    for col in range(1, k):
        last = combos[:, -1]
        # next element ranges over (last, n - k + col]
        counts = (n - k + col) - last
        rows = np.repeat(np.arange(len(combos)), counts)
        offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        nxt = last[rows] + 1 + offsets
        combos = np.column_stack([combos[rows], nxt.astype(np.int32)])
    return combos


def _exhaustive(dist, k, required, chunk=1 << 18):
    n = dist.shape[0]
    free = np.setdiff1d(np.arange(n), required)
    k_free = k - len(required)
    best, best_subset = -np.inf, None
    combos = lex_combinations(len(free), k_free)
    req = np.asarray(required, dtype=np.int64)
    base = distance_sum(dist, req) if len(req) > 1 else 0.0
    for start in range(0, len(combos), chunk):
        block = free[combos[start:start + chunk]]
        total = np.full(len(block), base)
        for a in range(k_free):
            for b in range(a + 1, k_free):
                total += dist[block[:, a], block[:, b]]
            for r in req:
                total += dist[block[:, a], r]
        i = int(np.argmax(total))
        # strict improvement keeps the earliest (lexicographically smallest) winner
        if total[i] > best:
            best = float(total[i])
            best_subset = block[i]
    subset = np.sort(np.concatenate([req, best_subset]))
    return subset


def _greedy(dist, k, required):
    n = dist.shape[0]
    chosen = list(required)
    if len(chosen) == 0:
        iu = np.triu_indices(n, 1)
        p = int(np.argmax(dist[iu]))
        chosen = [int(iu[0][p]), int(iu[1][p])]
    while len(chosen) < k:
        gain = dist[:, chosen].sum(axis=1)
        gain[chosen] = -np.inf
        chosen.append(int(np.argmax(gain)))
    return np.sort(np.array(chosen[:k]))


def select_diverse(features, k: int, mode: str = "auto", required=()) -> np.ndarray:
    """Pick ``k`` candidates with maximal total pairwise feature distance.

    Parameters
    ----------
    features : array_like of shape (n, p) or sequence of FeatureVector
        Raw features; standardized internally.
    k : int
        Subset size.
    mode : {"auto", "exhaustive", "greedy"}
        ``auto`` searches exhaustively when C(n, k) <= 5e6.
    required : sequence of int
        Indices that must be part of the subset.

    Returns
    -------
    ndarray of int
        Sorted selected indices.
    """
    x = standardize(features)
    n = x.shape[0]
    required = sorted({int(r) for r in required})
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if n < k:
        raise ValueError(f"cannot select {k} items from {n} candidates")
    if any(not 0 <= r < n for r in required) or len(required) > k:
        raise ValueError(f"invalid required indices {required} for n={n}, k={k}")
    if n == k:
        return np.arange(n)
    if mode == "auto":
        mode = "exhaustive" if comb(n - len(required), k - len(required)) <= EXHAUSTIVE_LIMIT else "greedy"
    dist = pairwise_distances(x)
    if mode == "exhaustive":
        return _exhaustive(dist, k, required)
    if mode == "greedy":
        return _greedy(dist, k, required)
    raise ValueError(f"unknown selection mode {mode!r}")


def diversity_score(features, subset) -> float:
    """Distance sum of ``subset`` under the same standardization as selection."""
    return distance_sum(pairwise_distances(standardize(features)), subset)
