import numpy as np
import pytest


def random_spd_banded(rng, n, beta, margin=0.1):
    """Random symmetric banded matrix made positive definite by a diagonal shift."""
    A = np.zeros((n, n))
    for k in range(beta + 1):
        d = rng.uniform(-1.0, 1.0, n - k)
        A += np.diag(d, -k)
        if k:
            A += np.diag(d, k)
    lam = np.linalg.eigvalsh(A)
    return A + (margin - lam[0] + rng.uniform(0.0, 1.0)) * np.eye(n)


def random_symmetric(rng, n):
    M = rng.standard_normal((n, n))
    return M + M.T


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[key])
