"""Python bindings for the te experiment runner."""

import json as _json

from ._core import (
    TeError,
    mean,
    median_iqr,
    parse_estimate,
    pearson,
    rank_sum,
    rank_sum_exact,
    rank_sum_normal,
    sem,
    ug_pairing,
    validate_output_violations,
    version,
)
from . import _core

__all__ = [
    "TeError",
    "evaluate_choice",
    "mean",
    "median_iqr",
    "parse_estimate",
    "pearson",
    "rank_sum",
    "rank_sum_exact",
    "rank_sum_normal",
    "run",
    "sem",
    "ug_pairing",
    "validate",
    "report",
    "validate_output_violations",
    "version",
]


def evaluate_choice(script, prompt, choices, mode="scored", samples=100, seed=0):
    """Evaluates a k-choice prompt against a scripted backend given as a dict."""
    return _core.evaluate_choice(_json.dumps(script), prompt, list(choices), mode, samples, seed)


def _config_text(config):
    if isinstance(config, str):
        return config
    return "\n".join(f"{k} = {_json.dumps(v)}" for k, v in config.items())


def validate(config, overrides=()):
    return _core.run_command("validate", _config_text(config), list(overrides))


def run(config, overrides=()):
    return _core.run_command("run", _config_text(config), list(overrides))


def report(config, overrides=()):
    return _core.run_command("report", _config_text(config), list(overrides))
