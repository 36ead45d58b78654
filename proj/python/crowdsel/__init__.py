"""Python bindings for the crowdsel worker-selection library."""

import json

from ._core import (
    MassUnderflow,
    ParseError,
    conditional_params,
    fit_alpha,
    init_difficulty,
    irt_prob,
    log_likelihood,
    median_eliminate,
    plan_budget,
    rw1_moments,
    s1_moments,
    theorem_probe,
    truncated_conditional_mean,
)
from ._core import generate_dataset as _generate_dataset
from ._core import run as _run

METHODS = ("li", "me", "me-cpe", "ours", "us")


def generate_dataset(workers, domains, seed, Q=20, a_T=0.5, moments=None):
    """Return a synthetic pool as a dict (see ``generate_dataset_json`` for the raw text)."""
    return json.loads(_generate_dataset(workers, domains, seed, Q, a_T, moments))


def generate_dataset_json(workers, domains, seed, Q=20, a_T=0.5, moments=None):
    return _generate_dataset(workers, domains, seed, Q, a_T, moments)


def run(dataset, method, **kwargs):
    """Run one selection method. ``dataset`` may be a dict or JSON text."""
    text = dataset if isinstance(dataset, str) else json.dumps(dataset)
    return json.loads(_run(text, method, **kwargs))


__all__ = [
    "METHODS",
    "MassUnderflow",
    "ParseError",
    "conditional_params",
    "fit_alpha",
    "generate_dataset",
    "generate_dataset_json",
    "init_difficulty",
    "irt_prob",
    "log_likelihood",
    "median_eliminate",
    "plan_budget",
    "run",
    "rw1_moments",
    "s1_moments",
    "theorem_probe",
    "truncated_conditional_mean",
]
