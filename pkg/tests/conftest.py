"""Shared fixtures; data, logs and the run database go to a scratch directory"""

import os
import sys
import tempfile
from pathlib import Path

_SCRATCH = tempfile.mkdtemp(prefix="tempoflow-tests-")
os.environ.setdefault("TEMPOFLOW_HOME", _SCRATCH)
os.environ.setdefault("TEMPOFLOW_DB", str(Path(_SCRATCH) / "runs.db"))

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

import pytest

from utils.generators import gen_fig1, gen_unit_capacity_tree
from utils.network_model import NetworkBuilder


@pytest.fixture
def fig1():
    return gen_fig1(4)


@pytest.fixture
def unit_tree():
    return gen_unit_capacity_tree(2, 2)


@pytest.fixture
def chain():
    """s -> a -> t with a slower direct s -> t arc, enough supply to never bind"""
    g = NetworkBuilder(undirected=False)
    g.add_node("s", 100)
    g.add_node("a")
    g.add_node("t", -100)
    g.add_edge("s", "a", 2, 1)
    g.add_edge("a", "t", 1, 1)
    g.add_edge("s", "t", 1, 3)
    return g.build(4)


@pytest.fixture
def db_path(tmp_path, monkeypatch):
    path = tmp_path / "runs.db"
    monkeypatch.setenv("TEMPOFLOW_DB", str(path))
    return path

