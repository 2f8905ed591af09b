"""
Pytest configuration and shared fixtures for treedist tests.
"""

import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from treedist.settings import ENV_PREFIX, reset_settings  # noqa: E402
from tests.fixtures.tree_data import (  # noqa: E402
    CHERRY_BC_NEWICK,
    WORKED_T1_NEWICK,
    WORKED_T2_NEWICK,
    NNI_T1_NEWICK,
    NNI_T2_NEWICK,
)


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """
    Keep TREEDIST_* variables and .env.treedist files of the host out of tests

    Variables written by load_dotenv during a test are removed afterwards.
    """
    original_env = {key: value for key, value in os.environ.items() if key.startswith(ENV_PREFIX)}
    for key in original_env:
        monkeypatch.delenv(key)
    home = tmp_path / "home"
    home.mkdir()
    monkeypatch.setenv("HOME", str(home))
    monkeypatch.chdir(tmp_path)
    reset_settings()

    yield tmp_path

    for key in [key for key in os.environ if key.startswith(ENV_PREFIX)]:
        os.environ.pop(key, None)
    reset_settings()


@pytest.fixture
def rng():
    """Seeded generator; tests needing other streams seed their own"""
    return np.random.default_rng(20240611)


@pytest.fixture
def write_trees(tmp_path):
    """Write Newick lines to a file and return its path"""

    def _write(*lines: str, name: str = "trees.nwk") -> Path:
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write


@pytest.fixture
def worked_file(write_trees):
    return write_trees(WORKED_T1_NEWICK, WORKED_T2_NEWICK, name="worked.nwk")


@pytest.fixture
def nni_file(write_trees):
    return write_trees(NNI_T1_NEWICK, NNI_T2_NEWICK, name="nni.nwk")


@pytest.fixture
def cherry_file(write_trees):
    return write_trees(CHERRY_BC_NEWICK, CHERRY_BC_NEWICK, name="cherry.nwk")


# Pytest configuration
def pytest_configure(config):
    """Configure pytest with custom markers"""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line("markers", "integration: marks tests as integration tests")
    config.addinivalue_line("markers", "unit: marks tests as unit tests")


# Skip slow tests by default in CI
def pytest_collection_modifyitems(config, items):
    """Modify test collection based on markers"""
    if config.getoption("--ci"):
        skip_slow = pytest.mark.skip(reason="Slow test skipped in CI")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip_slow)


def pytest_addoption(parser):
    """Add custom command line options"""
    parser.addoption(
        "--ci",
        action="store_true",
        default=False,
        help="Run in CI mode (skip slow tests)",
    )
