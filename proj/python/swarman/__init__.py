"""Python bindings for the swarman drone-swarm avatar core.

Configuration arguments take plain dicts with the same keys as the scenario
JSON used by the ``swarman`` command-line tool.
"""

import json

import numpy as np

from . import _swarman
from ._swarman import (
    EMOTIONS,
    LANDMARKS,
    LstmModel,
    SchemaError,
    SimulationError,
    ValidationError,
    emotion_color,
    generate_synthetic_dataset,
    greedy_assign,
    optimal_assign,
    random_takeoff_grid,
)

__all__ = [
    "EMOTIONS",
    "LANDMARKS",
    "LstmModel",
    "SchemaError",
    "SimulationError",
    "ValidationError",
    "build_formation",
    "classify",
    "emotion_color",
    "generate_synthetic_dataset",
    "greedy_assign",
    "optimal_assign",
    "random_takeoff_grid",
    "run_scenario",
    "total_force",
    "total_potential",
    "train",
]


def _dump(cfg):
    return "" if cfg is None else json.dumps(cfg)


def build_formation(frame, skeleton=None):
    """World-frame drone targets (9x3) for one landmark frame (9x3, camera coordinates)."""
    return _swarman.build_formation(np.asarray(frame, dtype=float), _dump(skeleton))


def total_force(index, positions, target, apf=None):
    return _swarman.total_force(index, np.asarray(positions, dtype=float), np.asarray(target, dtype=float), _dump(apf))


def total_potential(index, positions, target, apf=None):
    return _swarman.total_potential(index, np.asarray(positions, dtype=float), np.asarray(target, dtype=float), _dump(apf))


def run_scenario(times, frames, initial_positions, skeleton=None, sim=None, apf=None):
    """Replays landmark frames; returns t, positions, velocities, assignment and metrics."""
    out = _swarman.run_scenario(
        [float(t) for t in times],
        [np.asarray(f, dtype=float) for f in frames],
        np.asarray(initial_positions, dtype=float),
        _dump(skeleton),
        _dump(sim),
        _dump(apf),
    )
    out["metrics"] = json.loads(out.pop("metrics_json"))
    return out


def train(model, x, y, config=None):
    """Trains a copy of ``model``; returns (trained_model, per-epoch history)."""
    return _swarman.train(model, np.asarray(x, dtype=float), [int(v) for v in y], _dump(config))


def classify(model, x):
    """Labels and confidences for an (N, 30, 27) batch of feature windows."""
    p = model.predict_proba(np.asarray(x, dtype=float))
    idx = p.argmax(axis=1)
    return [EMOTIONS[i] for i in idx], p[np.arange(len(idx)), idx]
