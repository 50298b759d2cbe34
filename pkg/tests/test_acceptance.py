"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]`` or ``[FAIL]`` line (bypassing output
capture) before asserting, so ``pytest tests/test_acceptance.py`` reads as
a checklist.
"""
import time
from itertools import combinations

import numpy as np
import pytest
from scipy.stats import spearmanr

from veploop import cli
from veploop.evolve import mutate
from veploop.imfeat import select_diverse
from veploop.looprunner import improvement_pct, run_baseline, run_experiment
from veploop.sigproc import DecoderConfig, amplitude_at, notch_filter, score_iteration, snr_at

FS = 250.0
T = np.arange(500) / FS
SEEDS = range(10)


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}")
        assert ok, detail
    return emit


def sine(f, amp=1.0, t=T):
    return amp * np.sin(2 * np.pi * f * t)


def test_01_fft_exactness(verdict):
    t0 = time.perf_counter()
    a4 = amplitude_at(sine(4.0), FS, 4.0)
    a10 = amplitude_at(sine(4.0), FS, 10.0)
    dt = time.perf_counter() - t0
    ok = abs(a4 - 1.0) <= 1e-9 and abs(a10) <= 1e-9 and dt < 1.0
    verdict(1, "FFT exactness", ok, f"A(4 Hz)={a4:.12f} A(10 Hz)={a10:.2e} in {dt:.3f}s")


def test_02_snr_oracle(verdict):
    t0 = time.perf_counter()
    n, k, m = 500, 8, 5
    rng = np.random.default_rng(0)
    bins = np.arange(k - m, k + m + 1)
    spec = np.zeros(n // 2 + 1, dtype=complex)
    spec[bins] = np.where(bins == k, 5.0, 1.0) * n / 2 * np.exp(1j * rng.uniform(0, 2 * np.pi, bins.size))
    constructed = snr_at(np.fft.irfft(spec, n=n), FS, 4.0, DecoderConfig(snr_neighbors=m))
    noise = np.random.default_rng(1).standard_normal((1000, n))
    mc = float(np.mean(snr_at(noise, FS, 4.0)))
    dt = time.perf_counter() - t0
    ok = abs(constructed - 5.0) <= 1e-6 and abs(mc - 1.0) <= 0.1 and dt < 10.0
    verdict(2, "SNR oracle", ok, f"constructed={constructed:.9f} white-noise mean={mc:.4f} in {dt:.3f}s")


def test_03_notch(verdict):
    t0 = time.perf_counter()
    t = np.arange(int(4 * FS)) / FS
    cut = int(0.5 * FS)
    steady = slice(cut, -cut)

    def rms(x):
        return np.sqrt(np.mean(x[steady] ** 2))

    mains, target = sine(50.0, t=t), sine(4.0, t=t)
    atten_db = 20 * np.log10(rms(mains) / rms(notch_filter(mains, FS)))
    change = abs(rms(notch_filter(target, FS)) / rms(target) - 1)
    dt = time.perf_counter() - t0
    ok = atten_db >= 20.0 and change <= 0.01 and dt < 1.0
    verdict(3, "notch", ok, f"50 Hz attenuation={atten_db:.1f} dB, 4 Hz change={100 * change:.4f}% in {dt:.3f}s")


def brute_force(x, k):
    mu, sd = x.mean(axis=0), x.std(axis=0)
    z = np.zeros_like(x)
    live = sd > 0
    z[:, live] = (x[:, live] - mu[live]) / sd[live]
    best, best_set = -np.inf, None
    for subset in combinations(range(len(z)), k):
        total = 0.0
        for a, b in combinations(subset, 2):
            total += np.sqrt(np.sum((z[a] - z[b]) ** 2))
        if total > best:
            best, best_set = total, subset
    return best_set, best, z


def test_04_diversity_oracle(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    mismatches = []
    for case in range(50):
        n = int(rng.integers(5, 13))
        k = int(rng.integers(2, min(5, n) + 1))
        x = rng.standard_normal((n, 5)) * rng.uniform(0.01, 100, 5)
        chosen = tuple(int(i) for i in select_diverse(x, k, "exhaustive"))
        oracle_set, oracle_sum, z = brute_force(x, k)
        got_sum = sum(np.sqrt(np.sum((z[a] - z[b]) ** 2)) for a, b in combinations(chosen, 2))
        if chosen != oracle_set or abs(got_sum - oracle_sum) > 1e-9:
            mismatches.append(case)
    dt = time.perf_counter() - t0
    ok = not mismatches and dt < 30.0
    verdict(4, "diversity oracle", ok, f"50 cases, mismatches={mismatches} in {dt:.2f}s")


def test_05_closed_loop_improvement(verdict):
    t0 = time.perf_counter()
    first, last = [], []
    for seed in SEEDS:
        amp = run_experiment(master_seed=seed).iteration_amplitude()
        first.append(amp[0])
        last.append(amp[-1])
    first, last = np.array(first), np.array(last)
    pooled = improvement_pct(first.mean(), last.mean())
    median = float(np.median(100 * (last - first) / first))
    dt = time.perf_counter() - t0
    ok = pooled >= 28.0 and 40.0 <= median <= 120.0 and dt < 120.0
    verdict(5, "closed-loop improvement", ok,
            f"pooled mean gain={pooled:.1f}% (>=28), median per-seed gain={median:.1f}% "
            f"(in [40, 120]) in {dt:.1f}s")


def test_06_baseline_null(verdict):
    t0 = time.perf_counter()
    rhos, first, last = [], [], []
    for seed in SEEDS:
        log = run_baseline(master_seed=seed)
        score = log.iteration_mean_score()
        rhos.append(abs(spearmanr(np.arange(1, score.size + 1), score)[0]))
        amp = log.iteration_amplitude()
        first.append(amp[0])
        last.append(amp[-1])
    med_rho = float(np.median(rhos))
    ratio = float(np.mean(last) / np.mean(first))
    dt = time.perf_counter() - t0
    ok = med_rho <= 0.5 and 0.8 <= ratio <= 1.2 and dt < 120.0
    verdict(6, "baseline null", ok,
            f"median |rho|={med_rho:.3f} (<=0.5), final/initial amplitude={ratio:.3f} in {dt:.1f}s")


def test_07_table_arithmetic(verdict):
    t0 = time.perf_counter()
    amp = improvement_pct(111.1026, 255.2115)
    snr = improvement_pct(1.3218, 2.6634)
    dt = time.perf_counter() - t0
    ok = round(amp, 3) == 129.708 and round(snr) == 101 and dt < 1.0
    verdict(7, "improvement arithmetic", ok, f"amplitude {amp:.3f}%, SNR {round(snr)}%")


def test_08_mutation_statistics(verdict):
    t0 = time.perf_counter()
    z = np.zeros(100_000)
    std = float(np.std(mutate(z, 0.4, 1.0, np.random.default_rng(8)) - z))
    frac = float(np.mean(mutate(z, 0.4, 0.5, np.random.default_rng(9)) != z))
    dt = time.perf_counter() - t0
    ok = abs(std - 0.4) <= 0.004 and abs(frac - 0.5) <= 0.01 and dt < 5.0
    verdict(8, "mutation statistics", ok, f"std={std:.5f}, perturbed fraction={frac:.4f} in {dt:.3f}s")


def test_09_determinism_across_workers(verdict, tmp_path):
    t0 = time.perf_counter()
    codes = [cli.main(["run", "--seed", "0", "--workers", str(w), "--out", str(tmp_path / f"w{w}")])
             for w in (1, 8)]
    a = (tmp_path / "w1" / "log.json").read_bytes()
    b = (tmp_path / "w8" / "log.json").read_bytes()
    dt = time.perf_counter() - t0
    ok = codes == [0, 0] and a == b and dt < 60.0
    verdict(9, "determinism", ok, f"exit codes {codes}, byte-identical={a == b} ({len(a)} bytes) in {dt:.1f}s")


def test_10_score_properties(verdict):
    batch = np.array([[1.0, 1.0], [5.0, 3.0], [2.0, 2.0], [3.0, 1.5], [4.0, 2.5]])
    scores = score_iteration(batch)
    rng = np.random.default_rng(10)
    worst = 0.0
    for c in np.concatenate([[1e-3, 0.5, 7.0, 1e3], rng.uniform(0.01, 100, 20)]):
        scaled = batch.copy()
        scaled[:, 0] *= c
        worst = max(worst, float(np.max(np.abs(score_iteration(scaled) - scores))))
    ok = scores[1] == 2.0 and worst <= 1e-12
    verdict(10, "score properties", ok, f"double winner={float(scores[1])!r}, max rescale drift={worst:.1e}")
