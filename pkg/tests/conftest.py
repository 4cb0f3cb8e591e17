import numpy as np
import pytest

from shotfit import Dataset, exponential_model, rabi_model, sine_model

SINE_TRUTH = np.array([0.48, 1.0, 1.0, 0.5])
SINE_X = np.linspace(0.0, 4.0, 23)
EXP_TRUTH = np.array([0.2, 0.6, 1.5])
RABI_TRUTH = np.array([0.05, 0.9, 1.0, 0.0])
RABI_X = np.linspace(-5.0, 5.0, 41)

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE_RESULTS: dict = {}


def noiseless(model, theta, x, shots=10**9):
    """Counts rounded from ``shots * F``; fractions equal F to about 1/shots."""
    f = model.evaluate(np.asarray(x, float), np.asarray(theta, float))
    return Dataset(x, np.round(f * shots).astype(np.int64), shots)


@pytest.fixture
def sine():
    return sine_model()


@pytest.fixture
def exponential():
    return exponential_model()


@pytest.fixture
def rabi():
    return rabi_model()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
