"""Flat-model spectral toolkit for harmonic spinors along an edge."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import _run_experiment_json

__version__ = "0.1.0"


def run_experiment(name, **overrides):
    """Run one CLI experiment in-process and return its summary as a dict.

    Keyword arguments are config keys (N, l_max, tol, seed, ...).
    """
    return _json.loads(_run_experiment_json(name, {k: str(v) for k, v in overrides.items()}))
