import numpy as np
import pytest

from src.models.scenario_config import ScenarioConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def table_config() -> ScenarioConfig:
    return ScenarioConfig.from_file('tableI')


@pytest.fixture
def small_config(table_config) -> ScenarioConfig:
    return table_config.model_copy(update={
        'n_drops': 4,
        'gamma_f_sweep_db': [-10.0],
        'gamma_m_sweep_db': [-80.0],
    })
