"""Transient DMFT for the DC-field-driven Falicov-Kimball model."""

import json

import numpy as np

from ._nefk import (
    ConfigError,
    ConvergenceError,
    PatchError,
    SingularKernel,
    __version__,
    equilibrium,
    equilibrium_energy,
    faddeeva,
    fit_beta,
    gauss_hermite_joint,
    hilbert_gaussian,
)
from . import _nefk


def _overrides(overrides):
    if overrides is None:
        return []
    if isinstance(overrides, dict):
        return [f"{k}={json.dumps(v)}" for k, v in overrides.items()]
    return list(overrides)


def config(base=None, overrides=None):
    """Validated configuration as a dict; base is a dict or None for defaults."""
    text = json.dumps(base) if base is not None else ""
    return json.loads(_nefk.resolve_config(text, _overrides(overrides)))


def solve(base=None, overrides=None, index=0):
    """Converged transient run at the index-th time step of the triple."""
    text = json.dumps(base) if base is not None else ""
    return _nefk.solve(text, _overrides(overrides), index)


def run(command, base=None, overrides=None):
    """Runs 'equilibrium', 'transient' or 'bridge' and returns the written CSV paths."""
    text = json.dumps(base) if base is not None else ""
    return _nefk.run(command, text, _overrides(overrides))


def read_csv(path):
    """Reads an emitted CSV: returns (header dict, dict of numpy columns)."""
    header = {}
    with open(path) as f:
        lines = f.read().splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    for ln in lines:
        if ln.startswith("# ") and ":" in ln:
            key, value = ln[2:].split(":", 1)
            header[key.strip()] = value.strip()
    names = body[0].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in body[1:] if ln], dtype=float)
    data = data.reshape(-1, len(names))
    return header, {n: data[:, i] for i, n in enumerate(names)}


__all__ = [
    "ConfigError",
    "ConvergenceError",
    "PatchError",
    "SingularKernel",
    "__version__",
    "config",
    "equilibrium",
    "equilibrium_energy",
    "faddeeva",
    "fit_beta",
    "gauss_hermite_joint",
    "hilbert_gaussian",
    "read_csv",
    "run",
    "solve",
]
