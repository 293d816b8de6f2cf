import random

import pytest
import yaml
from typer.testing import CliRunner

from divconst.kernels import SmallGraph
from divconst.logger_utils import LoggingAgent


@pytest.fixture
def config_file(tmp_path, monkeypatch):
    """
    Temporary config.yml with every path under tmp_path, exported through CONFIG_PATH.
    """
    config = {
        "paths": {
            "base": str(tmp_path / "base"),
            "log_dir": "logs",
            "cache_dir": "cache",
            "sql_db": "runs.db",
        },
        "log_level": "WARNING",
        "kernels": {"max_vertices": 96, "path_cover_max_vertices": 128},
        "estimator": {"obs2_jmax": 40, "output_digits": 12},
        "oracle": {"max_exhaustive_n": 22, "max_path_cover_n": 24},
    }
    path = tmp_path / "config.yml"
    path.write_text(yaml.safe_dump(config), encoding="utf-8")
    monkeypatch.setenv("CONFIG_PATH", str(path))
    monkeypatch.delenv("DIVCONST_CACHE_DIR", raising=False)
    LoggingAgent.reset()
    # install the sinks outside any CliRunner stream swap
    LoggingAgent("tests")
    yield path
    LoggingAgent.reset()


@pytest.fixture
def no_config(monkeypatch):
    monkeypatch.delenv("CONFIG_PATH", raising=False)
    monkeypatch.delenv("DIVCONST_CACHE_DIR", raising=False)
    LoggingAgent.reset()
    LoggingAgent("tests")
    yield
    LoggingAgent.reset()


@pytest.fixture
def cache_file(tmp_path):
    return tmp_path / "terms.jsonl"


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def random_graphs():
    """200 seeded random graphs on up to 14 vertices."""
    rng = random.Random(20240611)
    graphs = []
    for _ in range(200):
        size = rng.randint(0, 14)
        density = rng.random()
        edges = [
            (u, v)
            for u in range(size)
            for v in range(u + 1, size)
            if rng.random() < density
        ]
        graphs.append(SmallGraph.from_edges(range(size), edges))
    return graphs
