"""Python bindings for the smallgain C++ library."""

import json as _json

from ._smallgain import (
    SmallGainError,
    __version__,
    apply,
    estimate_eta,
    iterate,
    kleene_star,
    reference_profile,
    run_config,
    simulate_ode,
    spectral_radius,
    strict_decay_point,
)


def run(config, seed=None, command=""):
    """Run a CLI command in-process. Returns (exit_code, report dict or None)."""
    text = config if isinstance(config, str) else _json.dumps(config)
    code, out, _ = run_config(text, seed, command)
    return code, (_json.loads(out) if out else None)


__all__ = [
    "SmallGainError",
    "__version__",
    "apply",
    "estimate_eta",
    "iterate",
    "kleene_star",
    "reference_profile",
    "run",
    "run_config",
    "simulate_ode",
    "spectral_radius",
    "strict_decay_point",
]
