"""Experiment configuration: YAML files deep-merged over built-in defaults."""

from __future__ import annotations

import copy

import numpy as np
import yaml

from .fields import GraphLagrangian, OneForm, PeriodicScalarField
from .tomograph import RadialMeasure, Tomograph

DEFAULTS = {
    "seed": 12345,
    "tomograph": {
        "dimension": 1,
        "outer_radius": 1.0,
        "frequency": 1,
        "measure": {"kind": "constant", "value": 1.0, "support": [0.5, 1.0]},
    },
    "quadrature": {"radial": 200, "angular": 64},
    "crofton": {
        "y_count": 21,
        "y_max": 1.0,
        "rel_tol": 1.0e-3,
        "n2_points": [[0.0, 0.0], [0.25, 0.55], [0.6, 0.6], [0.75, 0.3], [0.9, 0.95]],
        "sigma_sweep": 41,
        "max_at_zero_samples": 10000,
        "invariance_ks": [2, 4],
    },
    "homogenize": {
        "k_schedule": [1, 2, 4, 8, 16],
        "final_gap_rel": 0.01,
        "beta_potential": {"dimension": 1, "terms": [[0.6, [1], 0.0]]},
        "flat_y": [0.0, 0.3, 0.75],
    },
    "volume_bound": {
        "eta": 0.1,
        "tube": 0.2,
        "n_fields": 10,
        "k_schedule": [1, 2, 4, 8, 16, 32],
        "zero_rel_tol": 1.0e-3,
        "max_terms": 3,
        "max_freq": 3,
    },
    "semicontinuity": {
        "t_schedule": [0.2, 0.1, 0.05, 0.02],
        "tube": 1.0,
        "base_potential": {"dimension": 1, "terms": []},
        "radial": 60,
        "angular": 32,
        "volume_ratio_min": 3.0,
        "deficit_final_rel": 0.01,
        "control_row": {"t": 1.0, "n": 1},
    },
    "proof_trace": {
        "radial": 36,
        "angular": 20,
        "barcode_resolution": 256,
        "n_perturbations": 10,
        "sigma_jacobian_tol": 1.0e-4,
        "eps_delta_cap": 0.25,
        "degenerate_max_fraction": 0.01,
        "beta_stability_rel": 0.05,
        "base_potential": {"dimension": 1, "terms": []},
    },
    "barcode": {
        "field": {"dimension": 1, "terms": [[1.0, [2], 0.0]]},
        "resolution": 2048,
    },
    "gate": {"enabled": True},
}


def _deep_merge(base, override):
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config(path=None):
    """Built-in defaults, optionally overridden by a YAML file."""
    if path is None:
        return copy.deepcopy(DEFAULTS)
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ValueError("config file must hold a mapping at top level")
    return _deep_merge(DEFAULTS, data)


def field_from_config(data):
    """A PeriodicScalarField from {dimension, terms: [[amp, wave, phase], ...]}."""
    return PeriodicScalarField.from_terms(
        int(data["dimension"]),
        [(float(t[0]), np.asarray(t[1], dtype=np.int64), float(t[2])) for t in data.get("terms", [])],
    )


def graph_from_potential_config(data):
    return GraphLagrangian(OneForm.exact(field_from_config(data)))


def measure_from_config(data, outer_radius):
    kind = data.get("kind", "constant")
    if kind == "constant":
        lo, hi = data.get("support", [0.5, 1.0])
        return RadialMeasure.constant(float(data.get("value", 1.0)), float(lo), float(hi), outer_radius)
    if kind == "breakpoints":
        return RadialMeasure.from_breakpoints(outer_radius, data["breakpoints"], data["values"])
    if kind == "pieces":
        return RadialMeasure(outer_radius, [tuple(p) for p in data["pieces"]])
    raise ValueError(f"unknown measure kind {kind!r}")


def tomograph_from_config(data):
    measure = measure_from_config(data.get("measure", {}), float(data.get("outer_radius", 1.0)))
    tomo = Tomograph(int(data.get("dimension", 1)), measure, int(data.get("frequency", 1)))
    if data.get("normalized"):
        tomo = tomo.normalized()
    return tomo
