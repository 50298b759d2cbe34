"""Experiment configuration: one JSON document with a section per component.

Unspecified fields take their defaults; everything is validated eagerly and
errors name the offending field as ``section.field``.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .evolve import EvolveConfig
from .sigproc import DecoderConfig, target_bin
from .stimgen import GeneratorConfig
from .subject import SubjectConfig


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class ProtocolConfig:
    n_iterations: int = 8
    images_per_iter: int = 5
    trials_per_image: int = 30
    initial_pool: int = 50
    flicker_on_ms: float = 125.0
    flicker_off_ms: float = 125.0
    trial_len: float = 2.0
    inter_trial_gap_ms: float = 30.0
    rest_after_image_s: float = 30.0
    selection_mode: str = "auto"

    @property
    def flicker_hz(self) -> float:
        return 1000.0 / (self.flicker_on_ms + self.flicker_off_ms)

    def validate(self):
        for name in ("n_iterations", "images_per_iter", "trials_per_image", "initial_pool"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name}: must be a positive integer")
        for name in ("flicker_on_ms", "flicker_off_ms", "trial_len"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name}: must be positive")
        for name in ("inter_trial_gap_ms", "rest_after_image_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name}: must be >= 0")
        if self.images_per_iter < 2:
            raise ValueError("images_per_iter: scoring needs at least two images")
        if self.images_per_iter > self.initial_pool:
            raise ValueError("images_per_iter: cannot exceed initial_pool")
        if self.selection_mode not in ("auto", "exhaustive", "greedy"):
            raise ValueError("selection_mode: must be auto, exhaustive or greedy")
        return self


_SECTIONS = {
    "generator": GeneratorConfig,
    "subject": SubjectConfig,
    "decoder": DecoderConfig,
    "evolve": EvolveConfig,
    "protocol": ProtocolConfig,
}


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    subject: SubjectConfig = field(default_factory=SubjectConfig)
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    evolve: EvolveConfig = field(default_factory=EvolveConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)

    def validate(self) -> "ExperimentConfig":
        for name in _SECTIONS:
            section = getattr(self, name)
            try:
                if name == "decoder":
                    section.validate(self.subject.fs, self.subject.n_samples)
                else:
                    section.validate()
            except ValueError as exc:
                field_name, _, detail = str(exc).partition(": ")
                raise ConfigError(f"{name}.{field_name}", detail) from None
            if name == "subject":
                n_ep = self.subject.n_samples // max(1, self.decoder.epochs_per_trial)
                try:
                    target_bin(n_ep, self.subject.fs, self.subject.f_target)
                except ValueError as exc:
                    raise ConfigError("subject.f_target", str(exc).partition(": ")[2]) from None
        self._check_consistency()
        return self

    def _check_consistency(self):
        subj, dec, prot, ev = self.subject, self.decoder, self.protocol, self.evolve
        if dec.f_target != subj.f_target:
            raise ConfigError("decoder.f_target", f"{dec.f_target} differs from subject.f_target {subj.f_target}")
        if abs(prot.flicker_hz - subj.f_target) > 1e-9:
            raise ConfigError("protocol.flicker_on_ms",
                              f"flicker rate {prot.flicker_hz:g} Hz differs from subject.f_target {subj.f_target}")
        if prot.trial_len != subj.trial_len:
            raise ConfigError("protocol.trial_len", f"{prot.trial_len} differs from subject.trial_len {subj.trial_len}")
        if prot.images_per_iter > ev.generation_size:
            raise ConfigError("protocol.images_per_iter",
                              f"cannot exceed the generation size {ev.generation_size}")
        if ev.elitism and prot.images_per_iter < 2:
            raise ConfigError("protocol.images_per_iter", "elitism needs room for both parents")

    def to_dict(self) -> dict:
        return {name: _section_to_dict(getattr(self, name)) for name in _SECTIONS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _section_to_dict(section) -> dict:
    out = {}
    for f in dataclasses.fields(section):
        value = getattr(section, f.name)
        out[f.name] = list(value) if isinstance(value, tuple) else value
    return out


def _coerce(path, default, value):
    """Convert a JSON value to the type of the field's default."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, list):
            raise ConfigError(path, f"expected a list, got {value!r}")
        proto = default[0] if default else 0.0
        return tuple(_coerce(f"{path}[{i}]", proto, v) for i, v in enumerate(value))
    raise ConfigError(path, f"unsupported field type {type(default).__name__}")


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("", "configuration must be a JSON object")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown section")
    data = _inherit_shared(data)
    sections = {}
    for name, cls in _SECTIONS.items():
        raw = data.get(name, {})
        if not isinstance(raw, dict):
            raise ConfigError(name, "section must be a JSON object")
        defaults = cls()
        names = {f.name for f in dataclasses.fields(cls)}
        extra = set(raw) - names
        if extra:
            raise ConfigError(f"{name}.{sorted(extra)[0]}", "unknown field")
        kwargs = {k: _coerce(f"{name}.{k}", getattr(defaults, k), v) for k, v in raw.items()}
        try:
            sections[name] = cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(name, str(exc)) from None
    return ExperimentConfig(**sections).validate()


def _inherit_shared(data: dict) -> dict:
    """Propagate subject timing to sections that repeat it, unless set there."""
    data = {k: (dict(v) if isinstance(v, dict) else v) for k, v in data.items()}
    subj = data.get("subject", {})
    if not isinstance(subj, dict):
        return data
    sub_defaults = SubjectConfig()
    f_target = subj.get("f_target", sub_defaults.f_target)
    trial_len = subj.get("trial_len", sub_defaults.trial_len)
    dec = data.setdefault("decoder", {})
    prot = data.setdefault("protocol", {})
    if isinstance(dec, dict):
        dec.setdefault("f_target", f_target)
    if isinstance(prot, dict):
        prot.setdefault("trial_len", trial_len)
        if ("flicker_on_ms" not in prot and "flicker_off_ms" not in prot
                and isinstance(f_target, (int, float)) and f_target > 0):
            half = 500.0 / f_target
            prot["flicker_on_ms"] = half
            prot["flicker_off_ms"] = half
    return data


def parse_config(text: str) -> ExperimentConfig:
    """Parse a JSON configuration document."""
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"malformed JSON: {exc}") from None
    return config_from_dict(data)
