import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from otto_squeeze import dynamics, model

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def fig1_cfg():
    return model.fig1()


@pytest.fixture(scope="session")
def fig1_cycle(fig1_cfg):
    return dynamics.solve_limit_cycle(fig1_cfg)


def random_state(rng: np.random.Generator) -> np.ndarray:
    """Random density matrix from a Bloch vector inside the unit ball."""
    v = rng.normal(size=3)
    v *= rng.uniform() ** (1 / 3) / np.linalg.norm(v)
    from otto_squeeze.qops import from_bloch
    return from_bloch(np.concatenate([[1.0], v]))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance summary")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
