"""Pytest configuration and fixtures."""

from pathlib import Path
import tempfile

from click.testing import CliRunner
import numpy as np
import pytest
import yaml

from mobile_maps.maps import HalfEdgeMap
from mobile_maps.tree_core import LabeledTypedTree


@pytest.fixture
def cli_runner():
    """Provide a Click CLI runner for testing commands."""
    return CliRunner()


@pytest.fixture
def rng():
    """A seeded numpy Generator."""
    return np.random.default_rng(12345)


@pytest.fixture
def temp_project_dir():
    """Create a temporary project directory for testing."""
    with tempfile.TemporaryDirectory() as tmpdir:
        project_dir = Path(tmpdir) / "test_project"
        project_dir.mkdir()
        yield project_dir


@pytest.fixture
def config_file(temp_project_dir):
    """A mobile-maps.yaml overriding a few settings."""
    path = temp_project_dir / "mobile-maps.yaml"
    config = {
        "seed": 7,
        "max_vertices": 5,
        "solver": {"tolerance": 1e-11},
        "reports_dir": str(temp_project_dir / "reports"),
    }
    with open(path, "w") as f:
        yaml.safe_dump(config, f)
    return path


@pytest.fixture
def mock_cwd(monkeypatch, temp_project_dir):
    """Run inside the temporary project directory."""
    monkeypatch.chdir(temp_project_dir)
    return temp_project_dir


@pytest.fixture
def small_tree():
    """Root with children v1 and v3; v1 has the single child v2.

    Labels are 0, 1, 0, 0 and every vertex has type 1.
    """
    return LabeledTypedTree(
        types=(1, 1, 1, 1), children=(2, 1, 0, 0), disp2=(0, 2, -2, 0)
    )


@pytest.fixture
def single_edge_map():
    """The map with one edge between two distinct vertices."""
    return HalfEdgeMap(alpha=(1, 0), sigma=(0, 1), root=0)


@pytest.fixture
def loop_map():
    """The map with a single loop."""
    return HalfEdgeMap(alpha=(1, 0), sigma=(1, 0), root=0)
