import numpy as np
import pytest

from eucdesign.configspace import generate, random_rotation, union_scale

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def octahedron():
    return generate("cross_polytope", 3)


def two_octahedra(w1=1.0, w2=3.0, seed=7):
    octa = generate("cross_polytope", 3)
    rot = random_rotation(3, np.random.default_rng(seed))
    return union_scale(octa, [1.0, 2.0], per_shell_weights=[w1, w2], rotations=[np.eye(3), rot])


@pytest.fixture
def strong_fixture():
    return two_octahedra()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
