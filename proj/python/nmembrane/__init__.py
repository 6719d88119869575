"""Python interface to the nmembrane library."""

import json

from ._core import (
    NmembraneError,
    ScenarioError,
    __version__,
    b_to_gamma,
    enumerate_cones,
    h_eval,
    isotonic_project,
    normalize,
    qp_oracle_project,
    solve_disk,
    tau,
    verify,
)
from ._core import run_scenario as _run_scenario
from ._core import schema as _schema


def run_scenario(scenario, seed=None, tol=None, threads=1):
    """Run a scenario (dict or JSON text). Returns (files, manifest), where
    files maps output names to bytes."""
    text = scenario if isinstance(scenario, str) else json.dumps(scenario)
    files, manifest = _run_scenario(text, seed=seed, tol=tol, threads=threads)
    return files, json.loads(manifest)


def schema():
    return json.loads(_schema())


__all__ = [
    "NmembraneError",
    "ScenarioError",
    "__version__",
    "b_to_gamma",
    "enumerate_cones",
    "h_eval",
    "isotonic_project",
    "normalize",
    "qp_oracle_project",
    "run_scenario",
    "schema",
    "solve_disk",
    "tau",
    "verify",
]
