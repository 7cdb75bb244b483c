import pytest

from periodmap.integrate import solve_orbit
from periodmap.model import Branch, orbit_spec


@pytest.fixture(scope="session")
def orbit_k2():
    return solve_orbit(orbit_spec(2.0, -0.1, Branch.POSITIVE))


@pytest.fixture(scope="session")
def orbit_k3():
    return solve_orbit(orbit_spec(3.0, 2.0, Branch.SIGN_CHANGING))


@pytest.fixture(scope="session")
def orbit_k3_half():
    return solve_orbit(orbit_spec(3.0, 0.5, Branch.SIGN_CHANGING))


def pytest_terminal_summary(terminalreporter):
    lines = [value for reports in terminalreporter.stats.values() for rep in reports
             for name, value in getattr(rep, "user_properties", ())
             if name == "acceptance_line" and getattr(rep, "when", "call") == "call"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
