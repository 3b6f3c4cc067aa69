import numpy as np
import pytest

from asca.harness import load_manifest
from asca.synth import movement_grid, synth_dataset, workflow_grid


@pytest.fixture(scope="session")
def movement_manifest(tmp_path_factory):
    """7 movements x 50 clips at the baseline cell, default noise."""
    out = tmp_path_factory.mktemp("movement_set")
    return synth_dataset(movement_grid(), clips_per_cell=50, out_dir=out, base_seed=101)


@pytest.fixture(scope="session")
def movement_dataset(movement_manifest):
    return load_manifest(movement_manifest)


@pytest.fixture(scope="session")
def workflow_manifest(tmp_path_factory):
    out = tmp_path_factory.mktemp("workflow_set")
    return synth_dataset(workflow_grid(), clips_per_cell=50, out_dir=out, base_seed=202)


@pytest.fixture(scope="session")
def workflow_dataset(workflow_manifest):
    return load_manifest(workflow_manifest)


@pytest.fixture()
def rng():
    return np.random.default_rng(6021)
