"""Shared test fixtures for gamelab.

Provides:
- spec_doc / make_spec: GameSpec documents and instances for small 1-d games
- put_spec, degenerate_spec: the pure stopping put and the sigma = 0 benchmark
- write_config: writes a spec JSON plus an experiment YAML into tmp_path
- cli_runner: Click CliRunner
- --runslow: enables tests marked slow (acceptance-scale runs)
"""

import copy
import json
from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner

from gamelab.model.spec import GameSpec

REPO_ROOT = Path(__file__).resolve().parents[1]
SPECS_DIR = REPO_ROOT / "configs" / "specs"
EXPERIMENTS_DIR = REPO_ROOT / "configs" / "experiments"

BASE_DOC = {
    "name": "unit",
    "dims": {"d": 1, "d_prime": 1},
    "horizon": 1.0,
    "discount": 0.0,
    "drift": {"kind": "zero", "d": 1},
    "diffusion": {"kind": "constant", "matrix": [[0.4]]},
    "payoffs": {
        "f": {"kind": "constant", "value": 1000000.0},
        "g": {"kind": "put", "strike": 1.0, "scale": 1.0},
        "h": {"kind": "zero"},
    },
    "profile": {
        "variant": "A22_sublinear",
        "D1": 1.0,
        "D3": 1.0,
        "K1": 2.0,
        "K2": 2.0,
        "sigma_structure": "separable_ia",
        "beta": 0.5,
    },
}


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run acceptance-scale tests"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def spec_doc():
    """A fresh copy of the pure stopping put document."""
    return copy.deepcopy(BASE_DOC)


@pytest.fixture
def make_spec(spec_doc):
    """Build a GameSpec from the base document with top-level or payoff overrides."""

    def _make(payoffs: dict | None = None, **overrides) -> GameSpec:
        doc = copy.deepcopy(spec_doc)
        doc.update(overrides)
        if payoffs:
            doc["payoffs"] = {**doc["payoffs"], **payoffs}
        return GameSpec.from_dict(doc)

    return _make


@pytest.fixture
def put_spec(make_spec):
    return make_spec()


@pytest.fixture
def degenerate_spec(make_spec):
    """sigma = 0, b = 0, h = 0, g = |x|, f = 1: the value is g."""
    return make_spec(
        payoffs={"f": {"kind": "constant", "value": 1.0}, "g": {"kind": "abs", "scale": 1.0}},
        diffusion={"kind": "zero", "d": 1, "d_prime": 1},
        name="degenerate",
    )


@pytest.fixture
def write_config(tmp_path, spec_doc):
    """Write spec.json and config.yaml into tmp_path; returns the config path."""

    def _write(config: dict | None = None, spec: dict | None = None, name: str = "config.yaml"):
        (tmp_path / "spec.json").write_text(json.dumps(spec or spec_doc))
        data = {"spec": "spec.json", "seed": 1, "output_dir": "out"}
        data.update(config or {})
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data, sort_keys=False))
        return path

    return _write


@pytest.fixture
def cli_runner():
    return CliRunner()
