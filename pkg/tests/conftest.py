import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_ppt_states(D, count, seed=0, max_tries=200_000):
    """Rejection-sample PPT states from the HS ensemble (slow for D > 2)."""
    from ptmoment.linalg import partial_transpose_matrix
    from ptmoment.states import hs_batch

    found = []
    start = 0
    while len(found) < count and start < max_tries:
        rho = hs_batch(D * D, seed, start, 500)
        w = np.linalg.eigvalsh(partial_transpose_matrix(rho, D, D))
        found.extend(rho[w[:, 0] > 1e-12])
        start += 500
    return found[:count]


@pytest.fixture(scope="session")
def ppt_qubit_states():
    return random_ppt_states(2, 60, seed=11)


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
