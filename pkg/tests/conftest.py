import math
import warnings

import numpy as np
import pytest

from transgauss import sphere
from transgauss.surfaces import (make_clifford, make_geodesic_sphere, make_grid,
                                 make_perturbed_sphere)

# numba's threading layer may warn about the TBB version; irrelevant here
warnings.filterwarnings("ignore", message=".*TBB.*")

E4 = sphere.basis_vector(3, 4)


def random_sphere(rng, m, d=4):
    x = rng.standard_normal((m, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def random_tangent(rng, p):
    v = rng.standard_normal(p.shape)
    return v - np.sum(v * p, axis=-1, keepdims=True) * p


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def cap_sphere():
    return make_geodesic_sphere(E4, 0.5)


@pytest.fixture(scope="session")
def torus():
    return make_clifford(2, 0.6)


@pytest.fixture(scope="session")
def bumpy():
    return make_perturbed_sphere(E4, 0.5, 0.05, 3)


@pytest.fixture(scope="session")
def grid16():
    return lambda imm: make_grid(imm, 16)


def interior_points(imm, rng, m):
    """Random chart points away from the pole rows of non-periodic axes."""
    lo, hi = imm.lower, imm.upper
    pad = np.where(imm.periodic, 0.0, 0.05 * (hi - lo))
    return lo + pad + rng.random((m, imm.n)) * (hi - lo - 2 * pad)


SQRT1_2 = 1.0 / math.sqrt(2.0)


ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    """Store and print one acceptance line; the terminal summary repeats them."""
    line = f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
