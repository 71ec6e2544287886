import math

import pytest

from thinguide.potential import resonant_triple_well, single_well

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def well_half():
    return single_well(math.pi / 2, 1.0)


@pytest.fixture(scope="session")
def well_pi():
    return single_well(math.pi, 1.0)


@pytest.fixture(scope="session")
def well_2pi():
    return single_well(2 * math.pi, 1.0)


@pytest.fixture(scope="session")
def triple():
    return resonant_triple_well(1.0, 6.0, 0.4, 0.4, 0.4)


@pytest.fixture(scope="session")
def strip_curvature():
    from thinguide.strip2d import default_curvature

    return default_curvature()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, title, detail = ACCEPTANCE[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {verdict}  {title}: {detail}")
