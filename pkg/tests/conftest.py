import dataclasses

import pytest

from algoinsure.harness import ExperimentConfig, build_pipeline


@pytest.fixture(scope="session")
def default_config(tmp_path_factory):
    out = tmp_path_factory.mktemp("results")
    return dataclasses.replace(ExperimentConfig(), output_dir=str(out))


@pytest.fixture(scope="session")
def pipeline(default_config):
    """One trained classifier shared by every test that needs the real data."""
    return build_pipeline(default_config)
