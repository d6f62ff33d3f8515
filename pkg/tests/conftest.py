import numpy as np
import pytest

import privrdv as pr

# the bundled 5-robot reference scenario
SEC4_WEIGHTS = np.array([
    [0.0, 0.3, 0.3, 0.0, 0.0],
    [0.3, 0.0, 0.2, 0.0, 0.0],
    [0.3, 0.2, 0.0, 0.3, 0.0],
    [0.0, 0.0, 0.3, 0.0, 0.5],
    [0.0, 0.0, 0.0, 0.5, 0.0],
])


@pytest.fixture(scope="session")
def sec4_config():
    return pr.load_config(pr.bundled_scenario_path())


@pytest.fixture(scope="session")
def sec4_graph(sec4_config):
    return sec4_config.graph


@pytest.fixture(scope="session")
def sec4_derived(sec4_graph):
    return pr.derive_quantities(sec4_graph)


@pytest.fixture(scope="session")
def robot1_inputs():
    """Calibration inputs of robot 1 in the reference scenario."""
    return pr.CalibrationInputs(alpha=0.4, p=0.6, sigma2=1.0, q=0.9, r=3.0)
