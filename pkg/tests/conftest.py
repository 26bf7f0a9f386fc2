"""
Shared fixtures for the NSV test suite
"""

import numpy as np
import pytest

from src.config import parse_pipeline_config
from src.lift import build_dataset, make_lift
from src.systems import resolve_params


@pytest.fixture
def rng():
    """Fixed generator for test data."""
    return np.random.default_rng(1234)


@pytest.fixture
def circle_trajectories():
    """Unit-circle orbits sampled at dt=0.05, shape (4, 40, 2)."""
    dt = 0.05
    t = dt * np.arange(40)
    phases = [0.0, 0.7, 1.9, 3.1]
    return np.stack([np.stack([np.cos(t + p), np.sin(t + p)], axis=-1) for p in phases])


@pytest.fixture
def tiny_config():
    """Smallest spring-mass run that exercises every stage."""
    return parse_pipeline_config({
        "seed": 3,
        "system": {"name": "spring_mass", "substeps": 4},
        "dataset": {"n_train": 6, "n_val": 2, "n_test": 2, "seq_len": 12, "dt": 0.02},
        "lift": {"output_dim": 8},
        "dimension": {"k_min": 3, "k_max": 5, "max_points": 200, "split": "all"},
        "embed": {
            "intrinsic_dim": 2,
            "steps": 6,
            "batch_size": 8,
            "eval_every": 3,
            "beta_cycle": 4,
            "sinkhorn": {"max_iter": 50},
        },
        "field": {"steps": 6, "batch_size": 2, "eval_every": 3, "rho_cycle": 4, "starts_per_trajectory": 3},
        "analysis": {
            "n_candidates": 2,
            "n_directions": 2,
            "n_radii": 2,
            "horizon": 10,
            "epsilons": [0.05],
            "cycle_steps": 40,
            "gammas": [0.0, 1.0],
            "synthesis_steps": 10,
            "synthesis_count": 2,
            "near_eq_rollouts": 2,
            "near_eq_steps": 5,
            "newton_max_iter": 10,
        },
    })


@pytest.fixture
def spring_dataset():
    """Lifted spring-mass dataset: 4/2/2 sequences of 10 samples, D=8."""
    params = resolve_params("spring_mass")
    lift = make_lift(2, 8, seed=5)
    return build_dataset("spring_mass", params, lift, {"train": 4, "val": 2, "test": 2}, dt=0.02, seq_len=10, seed=11)
