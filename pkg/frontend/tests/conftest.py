"""Fixtures: real run directories produced through the solver's public
runner, consumed here only via manifest.json and the CSV snapshots."""

import pytest

from mfgkit.config import parse_config
from mfgkit.runner import run_experiment
from mfgkit.scenarios import scenario


@pytest.fixture(scope="session")
def schelling_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("schelling")
    run_experiment(parse_config(scenario("schelling_smallT")), out)
    return out


@pytest.fixture(scope="session")
def sweep_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    tree = scenario("schelling_largeT_sweep")
    tree["domain"]["cells"] = [50]
    tree["time"] = {"horizon": 0.05, "steps": 30}
    tree["task"]["values"] = [0.02, 0.05]
    run_experiment(parse_config(tree), out)
    return out


@pytest.fixture(scope="session")
def multistart_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("multistart")
    tree = scenario("decoupled_sanity")
    tree["domain"]["cells"] = [60]
    tree["time"] = {"horizon": 0.1, "steps": 20}
    tree["task"] = {"kind": "multistart", "n_starts": 3, "seed": 0}
    run_experiment(parse_config(tree), out)
    return out
