import pytest
from hypothesis import HealthCheck, settings

from solitoncrb.physics import PhysicalParams, PixelGrid

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def params50():
    return PhysicalParams.from_density(50.0)


@pytest.fixture
def grid_half():
    """Half-healing-length pixels over [-10, 10], dip on the central border."""
    return PixelGrid.covering(0.5, 10.0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":abc"))):
            terminalreporter.write_line(line)
