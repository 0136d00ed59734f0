import numpy as np
import pytest

from bsrlab.experiments import reference_pair
from bsrlab.radial import RadialPotential, assemble_bsd


@pytest.fixture(scope="session")
def reference():
    """(q, q~, bsd, bsd~) of the reference configuration, Lambda_max = 4 * 32^2."""
    return reference_pair()


@pytest.fixture(scope="session")
def free_bsd():
    """q = 0, alpha = 1, all eigenvalues up to 200."""
    return assemble_bsd(RadialPotential.constant(0.0), 1.0, 16, 200.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_CRITERIA = {}


@pytest.fixture
def record_criterion():
    """Store and print one PASS/FAIL line per acceptance criterion."""
    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
        _CRITERIA[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
