"""Trace generation, replay, batch oracle and metrics."""

from .generate import ScenarioInterval, ScenarioSpec, generate_trace, random_scenario, reference_model
from .metrics import SessionMetrics, compute_metrics
from .oracle import brute_force_oracle
from .replay import replay
from .trace import Trace, TraceError, load_trace, save_trace

__all__ = [
    "ScenarioInterval",
    "ScenarioSpec",
    "SessionMetrics",
    "Trace",
    "TraceError",
    "brute_force_oracle",
    "compute_metrics",
    "generate_trace",
    "load_trace",
    "random_scenario",
    "reference_model",
    "replay",
    "save_trace",
]
