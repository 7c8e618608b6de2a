"""Shared fixtures"""

from pathlib import Path

import numpy as np
import pytest

from civforge.data import Dataset
from civforge.graph import conditional_iv_dag, simulation_dag, standard_iv_dag
from civforge.graph.catalog import GRAPH_DIR
from civforge.model import CivVaeConfig
from civforge.settings import get_settings
from civforge.simulation import ScmSpec, generate

REPO_ROOT = Path(__file__).resolve().parent.parent
SCHEMA_DIR = REPO_ROOT / "data" / "schemas"
CONFIG_DIR = REPO_ROOT / "configs"


@pytest.fixture(autouse=True)
def quiet_settings(monkeypatch):
    """No progress bars, single worker, unless a test says otherwise."""
    monkeypatch.setenv("CIVFORGE_PROGRESS", "false")
    monkeypatch.setenv("CIVFORGE_THREADS", "1")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def sim_dag():
    return simulation_dag()


@pytest.fixture
def civ_dag():
    return conditional_iv_dag()


@pytest.fixture
def iv_dag():
    return standard_iv_dag()


@pytest.fixture
def small_sim():
    """2,000 simulated rows with seed 7."""
    return generate(ScmSpec(), 2000, seed=7)


@pytest.fixture
def tiny_config():
    """A model small enough to train in well under a second."""
    return CivVaeConfig(
        dim_zt=1, dim_zc=2, hidden_dim=8, hidden_layers=1, epochs=2, batch_size=64, seed=3
    )


@pytest.fixture
def toy_dataset():
    """Mixed continuous/binary covariates with a continuous outcome."""
    rng = np.random.default_rng(0)
    n = 120
    x = np.column_stack([rng.normal(size=n), rng.normal(size=n), (rng.random(n) < 0.5) * 1.0])
    t = (rng.random(n) < 0.5) * 1.0
    y = 1.5 * t + x[:, 0] + rng.normal(size=n)
    return Dataset(
        x=x,
        columns=["a", "b", "c"],
        t=t,
        y=y,
        x_kinds=["continuous", "continuous", "binary"],
        true_ace=1.5,
        provenance="toy",
    )
