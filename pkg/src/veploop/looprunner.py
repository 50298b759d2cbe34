"""Closed-loop experiment orchestration.

``run_experiment`` evolves stimuli against the simulated subject;
``run_baseline`` presents a frozen image set under the same protocol.
Both return an :class:`ExperimentLog` that is a pure function of
``(config, master_seed)``.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import evolve, imfeat, sigproc, stimgen, subject
from .config import ExperimentConfig, ProtocolConfig, config_from_dict  # noqa: F401
from .rng import StreamFactory, check_seed

LOG_FORMAT_VERSION = 1


class LoopError(RuntimeError):
    """A component failed inside the loop; carries the failure coordinate."""

    def __init__(self, message: str, iteration=None, image=None, trial=None):
        self.iteration, self.image, self.trial = iteration, image, trial
        where = ", ".join(f"{k}={v}" for k, v in
                          (("iteration", iteration), ("image", image), ("trial", trial))
                          if v is not None)
        super().__init__(f"[{where}] {message}" if where else message)


@dataclass
class IterationRecord:
    iteration: int
    source: str  # "pool", "offspring" or "frozen"
    candidate_indices: list[int]
    latents: list[list[float]] | None
    params: list[dict] | None
    luminance: list[float]
    complexity: list[float]
    trial_fft: list[list[float]]  # [image][trial], microvolts
    trial_snr: list[list[float]]
    image_fft: list[float]
    image_snr: list[float]
    image_score: list[float]
    parent_fft: int
    parent_snr: int
    l_eeg: list[float]
    l_eeg_weighted: list[float]

    def image_scores(self) -> list[sigproc.ImageScore]:
        return [sigproc.ImageScore(a, s, c)
                for a, s, c in zip(self.image_fft, self.image_snr, self.image_score)]


@dataclass
class ExperimentLog:
    config: dict
    master_seed: int
    mode: str  # "boosted" or "baseline"
    iterations: list[IterationRecord] = field(default_factory=list)
    # pixels of user-supplied baseline images, which have no latent to re-render from
    user_images: list[list[list[float]]] | None = None

    def to_dict(self) -> dict:
        return {
            "format_version": LOG_FORMAT_VERSION,
            "mode": self.mode,
            "master_seed": self.master_seed,
            "config": self.config,
            "iterations": [vars(rec) for rec in self.iterations],
            "user_images": self.user_images,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentLog":
        return cls(
            config=data["config"],
            master_seed=int(data["master_seed"]),
            mode=data["mode"],
            iterations=[IterationRecord(**rec) for rec in data["iterations"]],
            user_images=data.get("user_images"),
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentLog":
        return cls.from_dict(json.loads(text))

    @property
    def experiment_config(self) -> ExperimentConfig:
        return config_from_dict(self.config)

    # views ------------------------------------------------------------

    def trial_fft(self) -> np.ndarray:
        """(iterations, images, trials) array of per-trial FFT amplitude."""
        return np.array([rec.trial_fft for rec in self.iterations], dtype=float)

    def trial_snr(self) -> np.ndarray:
        return np.array([rec.trial_snr for rec in self.iterations], dtype=float)

    def iteration_amplitude(self) -> np.ndarray:
        return self.trial_fft().mean(axis=(1, 2))

    def iteration_snr(self) -> np.ndarray:
        return self.trial_snr().mean(axis=(1, 2))

    def trial_scores(self) -> np.ndarray:
        """Per-trial normalized score, normalized over every trial of the run.

        Unlike the per-iteration image scores used for selection, a run-wide
        reference keeps trials comparable across iterations.
        """
        fft, snr = self.trial_fft(), self.trial_snr()
        return sigproc.minmax_normalize(fft) + sigproc.minmax_normalize(snr)

    def iteration_mean_score(self) -> np.ndarray:
        return self.trial_scores().mean(axis=(1, 2))

    def heatmap(self) -> np.ndarray:
        """iterations x (images * trials) matrix of per-trial scores."""
        s = self.trial_scores()
        return s.reshape(s.shape[0], -1)

    def presented_images(self, iteration: int) -> list[np.ndarray]:
        """Re-render the images shown at ``iteration`` (1-based)."""
        rec = self.iterations[iteration - 1]
        if rec.params is None:
            return [np.asarray(img, dtype=float) for img in self.user_images]
        gcfg = self.experiment_config.generator
        return [stimgen.render(stimgen.StimulusParams.from_dict(p), gcfg) for p in rec.params]


# --- single-iteration pieces ----------------------------------------------

def _image_trials(img_feat, iteration, image, cfg: ExperimentConfig, streams: StreamFactory):
    """Simulate and decode every trial of one image; returns fft, snr, peak."""
    n_trials = cfg.protocol.trials_per_image
    samples = np.empty((n_trials, len(cfg.subject.channels), cfg.subject.n_samples))
    for t in range(n_trials):
        try:
            rng = streams.stream("trial", iteration, image, t)
            samples[t] = subject.simulate_trial(img_feat, iteration, cfg.subject, rng).samples
        except Exception as exc:
            raise LoopError(str(exc), iteration, image, t) from exc
    try:
        fft, snr = sigproc.decode_samples(samples, cfg.subject.fs, cfg.decoder)
        peak = sigproc.peak_frequency(samples.mean(axis=(0, 1)), cfg.subject.fs)
    except Exception as exc:
        raise LoopError(str(exc), iteration, image) from exc
    return fft, snr, peak


def _present(images, feats, iteration, cfg, streams, workers):
    jobs = range(len(images))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda j: _image_trials(feats[j], iteration, j, cfg, streams), jobs))
    else:
        results = [_image_trials(feats[j], iteration, j, cfg, streams) for j in jobs]
    return results


def _record_iteration(iteration, source, cand_idx, latents, params, images, cfg, streams, workers):
    feats = [imfeat.subject_features(img) for img in images]
    results = _present(images, feats, iteration, cfg, streams, workers)
    trial_fft = [r[0] for r in results]
    trial_snr = [r[1] for r in results]
    image_fft = np.array([f.mean() for f in trial_fft])
    image_snr = np.array([s.mean() for s in trial_snr])
    scores = sigproc.score_iteration(np.column_stack([image_fft, image_snr]))
    p_fft, p_snr = evolve.select_parents(image_fft, image_snr, scores)

    subj = cfg.subject
    amp_ref = float(np.mean(subj.gains)) * (subj.A_base + subj.A_gain) * subject.gain_at(iteration, subj)
    losses = []
    for j, f in enumerate(feats):
        pair = sigproc.feature_pair(image_fft[j], results[j][2], f.luminance, f.complexity,
                                    amp_ref, subj.f_target, cfg.decoder.feature_loss_weight)
        losses.append(sigproc.eeg_feature_loss(pair))

    return IterationRecord(
        iteration=iteration,
        source=source,
        candidate_indices=[int(i) for i in cand_idx],
        latents=None if latents is None else [list(map(float, z)) for z in latents],
        params=None if params is None else [p.to_dict() for p in params],
        luminance=[f.luminance for f in feats],
        complexity=[f.complexity for f in feats],
        trial_fft=[list(map(float, f)) for f in trial_fft],
        trial_snr=[list(map(float, s)) for s in trial_snr],
        image_fft=[float(v) for v in image_fft],
        image_snr=[float(v) for v in image_snr],
        image_score=[float(v) for v in scores],
        parent_fft=p_fft,
        parent_snr=p_snr,
        l_eeg=[float(l) for l, _ in losses],
        l_eeg_weighted=[float(w) for _, w in losses],
    )


def _render_all(latents, gcfg):
    out = [stimgen.render_latent(z, gcfg) for z in latents]
    return [p for p, _ in out], [img for _, img in out]


def _initial_selection(cfg: ExperimentConfig, streams: StreamFactory):
    prot = cfg.protocol
    pool = [stimgen.sample_latent(streams.stream("pool", i), cfg.generator.d)
            for i in range(prot.initial_pool)]
    params, images = _render_all(pool, cfg.generator)
    feats = [imfeat.precheck_features(img) for img in images]
    chosen = imfeat.select_diverse(feats, prot.images_per_iter, prot.selection_mode)
    return chosen, [pool[i] for i in chosen], [params[i] for i in chosen], [images[i] for i in chosen]


def _prepare(cfg, master_seed):
    cfg = cfg if cfg is not None else ExperimentConfig()
    cfg.validate()
    return cfg, check_seed(master_seed)


def run_experiment(cfg: ExperimentConfig | None = None, master_seed: int = 0, workers: int = 1) -> ExperimentLog:
    """Run the closed loop: present, decode, score, breed, preselect, repeat."""
    cfg, master_seed = _prepare(cfg, master_seed)
    streams = StreamFactory(master_seed)
    prot = cfg.protocol
    log = ExperimentLog(config=cfg.to_dict(), master_seed=master_seed, mode="boosted")

    cand, latents, params, images = _initial_selection(cfg, streams)
    source = "pool"
    for it in range(1, prot.n_iterations + 1):
        rec = _record_iteration(it, source, cand, latents, params, images, cfg, streams, workers)
        log.iterations.append(rec)
        if it == prot.n_iterations:
            break
        try:
            offspring = evolve.next_generation(latents[rec.parent_fft], latents[rec.parent_snr],
                                               cfg.evolve, streams.child("generation", it))
            off_params, off_images = _render_all(offspring, cfg.generator)
            feats = [imfeat.precheck_features(img) for img in off_images]
            # elites sit at offspring positions 0 and 1
            required = (0, 1) if cfg.evolve.elitism else ()
            cand = imfeat.select_diverse(feats, prot.images_per_iter, prot.selection_mode, required)
        except LoopError:
            raise
        except Exception as exc:
            raise LoopError(str(exc), iteration=it) from exc
        latents = [offspring[i] for i in cand]
        params = [off_params[i] for i in cand]
        images = [off_images[i] for i in cand]
        source = "offspring"
    return log


def run_baseline(cfg: ExperimentConfig | None = None, master_seed: int = 0, workers: int = 1,
                 images=None) -> ExperimentLog:
    """Present one frozen image set at every iteration.

    By default the frozen set is the pre-checked initial selection that
    :func:`run_experiment` would start from; ``images`` substitutes
    user-supplied grayscale arrays in [0, 1].
    """
    cfg, master_seed = _prepare(cfg, master_seed)
    streams = StreamFactory(master_seed)
    prot = cfg.protocol
    log = ExperimentLog(config=cfg.to_dict(), master_seed=master_seed, mode="baseline")

    if images is None:
        cand, latents, params, frozen = _initial_selection(cfg, streams)
    else:
        frozen = [np.clip(np.asarray(img, dtype=float), 0.0, 1.0) for img in images]
        if len(frozen) != prot.images_per_iter:
            raise LoopError(f"baseline needs {prot.images_per_iter} images, got {len(frozen)}")
        if any(img.ndim != 2 for img in frozen):
            raise LoopError("baseline images must be 2-D grayscale arrays")
        cand, latents, params = list(range(len(frozen))), None, None
        log.user_images = [img.tolist() for img in frozen]
    for it in range(1, prot.n_iterations + 1):
        log.iterations.append(
            _record_iteration(it, "frozen", cand, latents, params, frozen, cfg, streams, workers))
    return log


# --- reporting -------------------------------------------------------------

def improvement_pct(first: float, last: float) -> float:
    if first == 0:
        raise ValueError("first-iteration value is zero; improvement undefined")
    return 100.0 * (last - first) / first


@dataclass(frozen=True)
class RunSummary:
    mode: str
    first_amp: float
    last_amp: float
    first_snr: float
    last_snr: float

    @property
    def amp_improvement_pct(self) -> float:
        return improvement_pct(self.first_amp, self.last_amp)

    @property
    def snr_improvement_pct(self) -> float:
        return improvement_pct(self.first_snr, self.last_snr)

    @classmethod
    def from_log(cls, log: ExperimentLog) -> "RunSummary":
        amp, snr = log.iteration_amplitude(), log.iteration_snr()
        return cls(log.mode, float(amp[0]), float(amp[-1]), float(snr[0]), float(snr[-1]))


@dataclass(frozen=True)
class Report:
    boosted: RunSummary
    baseline: RunSummary

    @property
    def final_amp_ratio(self) -> float:
        """Boosted over baseline mean amplitude at the last iteration."""
        return self.boosted.last_amp / self.baseline.last_amp

    @property
    def final_amp_gain_pct(self) -> float:
        return improvement_pct(self.baseline.last_amp, self.boosted.last_amp)

    def to_text(self) -> str:
        lines = ["run       first_amp_uv  last_amp_uv  first_snr  last_snr  amp_impr_%  snr_impr_%"]
        for s in (self.boosted, self.baseline):
            lines.append(f"{s.mode:<9} {s.first_amp:12.4f} {s.last_amp:12.4f} {s.first_snr:10.4f} "
                         f"{s.last_snr:9.4f} {s.amp_improvement_pct:11.4f} {round(s.snr_improvement_pct):11d}")
        lines.append(f"final-iteration amplitude, boosted/baseline: {self.final_amp_ratio:.4f} "
                     f"({self.final_amp_gain_pct:+.1f}%)")
        return "\n".join(lines) + "\n"


def improvement_report(boosted: ExperimentLog, baseline: ExperimentLog) -> Report:
    b_shape, n_shape = boosted.trial_fft().shape, baseline.trial_fft().shape
    if b_shape != n_shape:
        raise ValueError(f"protocol shapes differ: {b_shape} vs {n_shape}")
    return Report(RunSummary.from_log(boosted), RunSummary.from_log(baseline))
