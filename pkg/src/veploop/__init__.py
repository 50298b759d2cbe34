"""Closed-loop SSVEP stimulus evolution simulator."""
from .config import ConfigError, ExperimentConfig, ProtocolConfig, parse_config
from .evolve import EvolveConfig, combine, interpolate, mutate, next_generation
from .imfeat import precheck_features, select_diverse, subject_features
from .looprunner import (ExperimentLog, IterationRecord, LoopError, Report, improvement_report,
                         run_baseline, run_experiment)
from .rng import StreamFactory
from .sigproc import DecoderConfig, amplitude_at, notch_filter, score_iteration, snr_at
from .stimgen import GeneratorConfig, StimulusParams, decode_params, render, sample_latent
from .subject import EegRecording, SubjectConfig, pink_noise, simulate_trial

__version__ = "0.1.0"
