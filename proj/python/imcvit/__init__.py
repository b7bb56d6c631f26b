"""Crossbar cost model and attention-reuse explorer for vision transformers."""

from ._core import (
    Error,
    cka,
    crossbar_count,
    enumerate_patterns,
    find_optimal_n_reuse,
    model_config,
    model_cost,
    preset_models,
    run_scenario,
    scenario_csv,
    stable_softmax,
    toy_forward,
)

__all__ = [
    "Error",
    "cka",
    "crossbar_count",
    "enumerate_patterns",
    "find_optimal_n_reuse",
    "model_config",
    "model_cost",
    "preset_models",
    "run_scenario",
    "scenario_csv",
    "stable_softmax",
    "toy_forward",
]
__version__ = "0.1.0"
