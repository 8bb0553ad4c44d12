import numpy as np
import pytest

from nodal_atlas.fem import assemble, identity, mesh_domain
from nodal_atlas.geometry import get_domain


@pytest.fixture(scope="session")
def square_mesh():
    return mesh_domain(get_domain("unit-square"), 0.05)


@pytest.fixture(scope="session")
def disk_mesh():
    return mesh_domain(get_domain("unit-disk", spacing=0.08), 0.08)


@pytest.fixture(scope="session")
def square_ops(square_mesh):
    return assemble(square_mesh, identity())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line(capsys):
    """Record and immediately show one pass/fail line for an acceptance criterion."""
    def emit(number, passed, detail):
        line = f"ACCEPTANCE {number:2d} {'PASS' if passed else 'FAIL'} {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
