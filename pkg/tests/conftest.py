import numpy as np
import pytest
from hypothesis import strategies as st

from eslqr.controllers import BodyrateGains
from eslqr.riccati import LqrWeights
from eslqr.vehicle import VehicleParams


@pytest.fixture
def params():
    return VehicleParams()


@pytest.fixture
def weights():
    return LqrWeights.default()


@pytest.fixture
def gains():
    return BodyrateGains()


def vec3(lo=-3.0, hi=3.0):
    f = st.floats(lo, hi, allow_nan=False, allow_infinity=False)
    return st.tuples(f, f, f).map(np.array)


@st.composite
def rotvecs(draw, max_angle=np.pi - 0.01, min_angle=0.0):
    axis = draw(vec3(-1.0, 1.0).filter(lambda a: np.linalg.norm(a) > 1e-3))
    angle = draw(st.floats(min_angle, max_angle))
    return axis / np.linalg.norm(axis) * angle


# acceptance results, echoed as one line per criterion at the end of the run
_ACCEPTANCE = {}


@pytest.fixture
def record():
    def _record(number, name, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] {number}. {name}: {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[n])
