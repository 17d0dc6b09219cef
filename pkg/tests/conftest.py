import numpy as np
import pytest

from nlkdv.kernels import custom_kernel


def sech2_kernel():
    """Smooth unit-mass kernel alpha = sech^2(x/2)/4 for custom-kernel checks."""
    def alpha(x):
        return 0.25 / np.cosh(0.5 * np.asarray(x, dtype=float)) ** 2

    def alpha_prime(x):
        x = np.asarray(x, dtype=float)
        return -0.25 * np.tanh(0.5 * x) / np.cosh(0.5 * x) ** 2

    return custom_kernel(alpha, alpha_prime, decay_rate=1.0, name="sech2")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail):
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
            terminalreporter.write_line(line)
