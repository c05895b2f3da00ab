import numpy as np
import pytest

import bouncesim as bs

#: one-line sign-off per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance sign-off")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def default_setup():
    """(SystemParams, TimeGrid, PulseSequence) for the baseline device."""
    return bs.load_config(bs.default_config())


@pytest.fixture(scope="session")
def default_params(default_setup):
    return default_setup[0]


@pytest.fixture(scope="session")
def default_grid(default_setup):
    return default_setup[1]


@pytest.fixture(scope="session")
def default_pulses(default_setup):
    return default_setup[2]


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a - b)).sum())


def random_density_matrix(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    """Hilbert-Schmidt-style random state from a complex Ginibre matrix."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
