"""Command-line front end.

Subcommands: ``run``, ``baseline``, ``report``, ``render`` and ``precheck``.
Every artifact lands under ``--out``. Failures print one JSON object on
stderr and exit nonzero: 2 for usage and configuration problems, 1 for
everything else.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import imfeat, sigproc, stimgen
from .config import ConfigError, ExperimentConfig, parse_config
from .looprunner import (ExperimentLog, LoopError, Report, improvement_report, run_baseline,
                         run_experiment)
from .rng import check_seed

SEED_ENV = "VEPLOOP_SEED"
SCORES_HEADER = ("iteration", "image", "trial", "fft_amp_uv", "snr", "score")


class UsageError(Exception):
    pass


# --- artifact export ---------------------------------------------------------

def scores_csv(log: ExperimentLog) -> str:
    """Per-trial table; iteration, image and trial are numbered from 1."""
    fft, snr, score = log.trial_fft(), log.trial_snr(), log.trial_scores()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCORES_HEADER)
    for (i, j, t), amp in np.ndenumerate(fft):
        # repr keeps every float exactly recoverable
        writer.writerow([i + 1, j + 1, t + 1, repr(float(amp)), repr(float(snr[i, j, t])),
                         repr(float(score[i, j, t]))])
    return buf.getvalue()


def heatmap_pgm(log: ExperimentLog) -> bytes:
    return stimgen.to_bytes_pgm(sigproc.minmax_normalize(log.heatmap()))


def export_artifacts(log: ExperimentLog, out_dir, report: Report | None = None) -> list[Path]:
    """Write the log and its derived views under ``out_dir``.

    Returns the written paths. Everything except ``log.json`` is computed
    from the log itself.
    """
    out = Path(out_dir)
    stim_dir = out / "stimuli"
    stim_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def put(path: Path, data):
        if isinstance(data, str):
            path.write_text(data, encoding="utf-8")
        else:
            path.write_bytes(data)
        written.append(path)

    put(out / "log.json", log.to_json())
    put(out / "scores.csv", scores_csv(log))
    put(out / "heatmap.pgm", heatmap_pgm(log))
    for rec in log.iterations:
        for j, img in enumerate(log.presented_images(rec.iteration), start=1):
            put(stim_dir / f"iter{rec.iteration:02d}_img{j}.pgm", stimgen.to_bytes_pgm(img))
    if report is not None:
        put(out / "report.txt", report.to_text())
    return written


# --- helpers -------------------------------------------------------------------

def _load_config(path) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig().validate()
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _resolve_seed(arg) -> int:
    raw = arg if arg is not None else os.environ.get(SEED_ENV, "0")
    try:
        return check_seed(int(raw, 0) if isinstance(raw, str) else raw)
    except ValueError as exc:
        raise UsageError(f"seed: {exc}") from None


def _load_log(path) -> ExperimentLog:
    p = Path(path)
    if p.is_dir():
        p = p / "log.json"
    return ExperimentLog.from_json(p.read_text(encoding="utf-8"))


def _image_files(directory) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"image directory not found: {d}")
    files = sorted(p for p in d.iterdir() if p.suffix.lower() in (".pgm", ".pnm"))
    if not files:
        raise FileNotFoundError(f"no .pgm images in {d}")
    return files


def _read_latents(path, d: int) -> np.ndarray:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = data.get("latents", data.get("latent"))
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != d:
        raise ValueError(f"latent file must hold vectors of length {d}, got shape {arr.shape}")
    return arr


# --- subcommands -------------------------------------------------------------------

def cmd_run(args) -> str:
    cfg, seed = _load_config(args.config), _resolve_seed(args.seed)
    log = run_experiment(cfg, seed, workers=args.workers)
    report = None
    if args.with_baseline:
        base = run_baseline(cfg, seed, workers=args.workers)
        report = improvement_report(log, base)
        export_artifacts(base, Path(args.out) / "baseline")
    files = export_artifacts(log, args.out, report)
    return f"run: seed {seed}, {len(files)} files written to {args.out}"


def cmd_baseline(args) -> str:
    cfg, seed = _load_config(args.config), _resolve_seed(args.seed)
    images = None
    if args.images is not None:
        images = [stimgen.read_pgm(p) for p in _image_files(args.images)]
    log = run_baseline(cfg, seed, workers=args.workers, images=images)
    files = export_artifacts(log, args.out)
    return f"baseline: seed {seed}, {len(files)} files written to {args.out}"


def cmd_report(args) -> str:
    rep = improvement_report(_load_log(args.boosted), _load_log(args.baseline))
    text = rep.to_text()
    if args.out is not None:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "report.txt").write_text(text, encoding="utf-8")
    return text.rstrip("\n")


def cmd_render(args) -> str:
    gcfg = _load_config(args.config).generator
    latents = _read_latents(args.latent_file, gcfg.d)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params = []
    for i, z in enumerate(latents, start=1):
        p, img = stimgen.render_latent(z, gcfg)
        stimgen.write_pgm(out / f"render_{i:02d}.pgm", img)
        params.append(p.to_dict())
    (out / "params.json").write_text(json.dumps(params, indent=1, sort_keys=True), encoding="utf-8")
    return f"render: {len(latents)} images written to {out}"


def cmd_precheck(args) -> str:
    files = _image_files(args.image_dir)
    feats = [imfeat.precheck_features(stimgen.read_pgm(p)) for p in files]
    chosen = imfeat.select_diverse(feats, args.k, args.mode)
    result = {
        "k": args.k,
        "selected": [files[i].name for i in chosen],
        "features": {p.name: vars(f) for p, f in zip(files, feats)},
    }
    text = json.dumps(result, indent=1, sort_keys=True, default=float)
    if args.out is not None:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "precheck.json").write_text(text, encoding="utf-8")
    return "\n".join(result["selected"])


# --- parser ----------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="veploop", description="Closed-loop SSVEP stimulus evolution simulator")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(p, out_default="out"):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", help=f"master seed (default: ${SEED_ENV} or 0)")
        p.add_argument("--out", default=out_default, help="output directory")
        p.add_argument("--workers", type=_positive_int, default=1,
                       help="threads for trial simulation")

    p = sub.add_parser("run", help="evolve stimuli against the simulated subject")
    common(p)
    p.add_argument("--with-baseline", action="store_true",
                   help="also run the frozen baseline and write report.txt")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("baseline", help="present a frozen image set")
    common(p)
    p.add_argument("--images", help="directory with the frozen .pgm images")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("report", help="compare a boosted and a baseline log")
    p.add_argument("boosted", help="log.json or the directory holding it")
    p.add_argument("baseline", help="log.json or the directory holding it")
    p.add_argument("--out", help="directory for report.txt")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("render", help="render latent vectors from a JSON file")
    p.add_argument("latent_file")
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("precheck", help="pick the most diverse images in a directory")
    p.add_argument("image_dir")
    p.add_argument("-k", type=_positive_int, default=5, help="subset size")
    p.add_argument("--mode", choices=("auto", "exhaustive", "greedy"), default="auto")
    p.add_argument("--out", help="directory for precheck.json")
    p.set_defaults(func=cmd_precheck)
    return parser


def _fail(kind: str, exc: Exception, code: int, **extra) -> int:
    payload = {"error": kind, "message": " ".join(str(exc).split())}
    payload.update({k: v for k, v in extra.items() if v is not None})
    print("veploop: " + json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        message = args.func(args)
    except UsageError as exc:
        return _fail("usage", exc, 2)
    except ConfigError as exc:
        return _fail("config", exc, 2, field=exc.path or None)
    except LoopError as exc:
        return _fail("loop", exc, 1, iteration=exc.iteration, image=exc.image, trial=exc.trial)
    except OSError as exc:
        return _fail("io", exc, 1)
    except Exception as exc:  # noqa: BLE001 - the contract is a single error line
        return _fail(type(exc).__name__, exc, 1)
    print(message)
    return 0


if __name__ == "__main__":
    sys.exit(main())
