"""Two-time correlators of spin-1 chains: Hadamard tests and linear response."""

import json as _json

from ._core import (
    ConvergenceError,
    DimensionError,
    Error,
    ValidationError,
    __version__,
    correlator,
    decompose,
    linear_response,
    relative_error,
    spin_matrix,
    time_averaged_std,
    variance_model,
    xxz_hamiltonian,
)
from ._core import run_study as _run_study


def run_study(config=None, **overrides):
    """Run the quench study. `config` is a dict in the CLI's JSON schema."""
    merged = dict(config or {})
    merged.update(overrides)
    return _run_study(_json.dumps(merged))


__all__ = [
    "ConvergenceError",
    "DimensionError",
    "Error",
    "ValidationError",
    "__version__",
    "correlator",
    "decompose",
    "linear_response",
    "relative_error",
    "run_study",
    "spin_matrix",
    "time_averaged_std",
    "variance_model",
    "xxz_hamiltonian",
]
