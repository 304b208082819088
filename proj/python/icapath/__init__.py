"""Penalized GLM solution paths by iterative coordinate ascent."""

import json

from ._core import *  # noqa: F401,F403
from ._core import __version__, run_experiment_json


def run_experiment(config):
    """Run a simulation study and return its summary as a dict."""
    return json.loads(run_experiment_json(config))
