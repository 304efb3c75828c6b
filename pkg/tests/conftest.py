"""
Shared test fixtures for the sepkit test suite.

Provides kernels plus temporary settings, kernel, ensemble and experiment
config files that use real file I/O (no mocking of the filesystem).
"""

import json

import numpy as np
import pytest
import toml


@pytest.fixture(autouse=True)
def _fresh_settings():
    """Every test starts from the bundled settings."""
    from utils.helpers import reset_settings_cache

    reset_settings_cache()
    yield
    reset_settings_cache()


@pytest.fixture
def sqexp_2d():
    """SqExp(1, theta=1) x SqExp(1, theta=1) on the unit square."""
    from kernels.core import Kernel1D, SeparableKernel

    return SeparableKernel((Kernel1D("sqexp", 1.0, 1.0), Kernel1D("sqexp", 1.0, 1.0)))


@pytest.fixture
def smooth_2d():
    """SqExp(1, theta=2) x SqExp(1, theta=2), the experiment default."""
    from kernels.core import Kernel1D, SeparableKernel

    return SeparableKernel((Kernel1D("sqexp", 1.0, 2.0), Kernel1D("sqexp", 1.0, 2.0)))


@pytest.fixture
def tmp_settings(tmp_path):
    """Create a real settings TOML file overriding a few sections."""
    settings_path = tmp_path / "settings.toml"
    data = {
        "spectral": {"nodes": 32},
        "second_order": {"tol": 4.0},
        "experiment": {"replicates": 12},
    }
    settings_path.write_text(toml.dumps(data))
    return settings_path


@pytest.fixture
def tmp_kernel_config(tmp_path):
    """Create a real kernel JSON config with evaluations and a Gram request."""
    path = tmp_path / "kernel.json"
    data = {
        "kernel": {
            "factors": [
                {"family": "sqexp", "variance": 2.0, "length_scale": 1.0, "domain": [0, 1]},
                {"family": "sqexp", "variance": 3.0, "length_scale": 1.0, "domain": [0, 1]},
            ]
        },
        "evaluate": [[[0.2, 0.4], [0.2, 0.4]], [[0.0, 0.0], [1.0, 1.0]]],
        "gram": [[0.1, 0.1], [0.5, 0.2], [0.9, 0.7], [0.3, 0.8], [0.6, 0.6]],
    }
    path.write_text(json.dumps(data, indent=2))
    return path


@pytest.fixture
def tmp_ensemble(tmp_path):
    """Create a real ensemble CSV (x1, x2, f) from a smooth test function."""
    path = tmp_path / "runs.csv"
    rng = np.random.default_rng(7)
    design = rng.uniform(size=(12, 2))
    values = np.sin(3 * design[:, 0]) * np.cos(2 * design[:, 1])
    lines = ["x1,x2,f"] + [f"{x!r},{y!r},{f!r}" for (x, y), f in zip(design.tolist(), values.tolist())]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def tmp_experiment_config(tmp_path):
    """Create a small but valid experiment config."""
    path = tmp_path / "experiment.json"
    data = {
        "p": 2,
        "n_runs": 12,
        "replicates": 10,
        "test_set_size": 60,
        "truncation": 4,
        "master_seed": 5,
    }
    path.write_text(json.dumps(data, indent=2))
    return path
