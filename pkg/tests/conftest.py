import numpy as np
import pytest

from manifold_frames import build_frame, build_sphere_model, build_torus_model, load_mesh_model
from manifold_frames.filters import FilterSpec
from manifold_frames.meshtools import write_icosphere_eigenfile

A_DEFAULT = 2.0 ** (1.0 / 3.0)
B_SWEEP = (0.7, 0.5, 0.35)


@pytest.fixture(scope="session")
def sphere16():
    # minimal exact grid
    return build_sphere_model(16, 17, 33)


@pytest.fixture(scope="session")
def sphere16_fine():
    # grid used for frame experiments
    return build_sphere_model(16, 32, 64)


@pytest.fixture(scope="session")
def torus():
    return build_torus_model(6, 24)


@pytest.fixture(scope="session")
def mesh_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("mesh") / "icosphere.meshspec"
    return write_icosphere_eigenfile(path, subdivisions=2, n_eig=49)


@pytest.fixture(scope="session")
def mesh(mesh_file):
    return load_mesh_model(mesh_file, "graph")


@pytest.fixture(scope="session")
def spec1():
    return FilterSpec(l=1, a=A_DEFAULT)


@pytest.fixture(scope="session")
def spec2():
    return FilterSpec(l=2, a=A_DEFAULT)


@pytest.fixture(scope="session")
def frames_by_b(sphere16_fine, spec1):
    return {b: build_frame(sphere16_fine, spec1, b=b) for b in B_SWEEP}


@pytest.fixture(scope="session")
def frame035(frames_by_b):
    return frames_by_b[0.35]


@pytest.fixture(scope="session")
def small_frame(sphere16, spec1):
    return build_frame(sphere16, spec1, b=0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


@pytest.fixture
def report_criterion(capsys):
    def report(number, passed, text):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {text}"
        ACCEPTANCE_LINES[number] = line
        with capsys.disabled():
            print(f"\n{line}")
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
