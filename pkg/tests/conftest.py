"""
Pytest configuration and fixtures for tests.
"""
import numpy as np
import pytest


@pytest.fixture
def rng():
    """A fixed generator so numerical tests are reproducible."""
    return np.random.default_rng(20240501)


@pytest.fixture
def scenario_factory():
    """Fixture to provide ScenarioFactory."""
    from tests.factories import ScenarioFactory
    return ScenarioFactory


@pytest.fixture
def framed_scenario_factory():
    """Fixture to provide FramedScenarioFactory."""
    from tests.factories import FramedScenarioFactory
    return FramedScenarioFactory


@pytest.fixture
def reference_scenario(scenario_factory):
    """The M = 5, three-source scenario at 10 dB and T = 750."""
    return scenario_factory(seed=0)


@pytest.fixture
def experiment_spec_factory():
    """Fixture to provide ExperimentSpecFactory."""
    from tests.factories import ExperimentSpecFactory
    return ExperimentSpecFactory


@pytest.fixture
def results_dir(tmp_path, settings):
    """Point CALIB_RESULTS_DIR at a temporary directory."""
    settings.CALIB_RESULTS_DIR = tmp_path / 'results'
    return settings.CALIB_RESULTS_DIR
