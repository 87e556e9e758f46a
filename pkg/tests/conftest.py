import sys

import numpy as np
import pytest

from stasis_cycles import builtin, find_stasis_fixed_lambda

BUILTIN_NAMES = ["SYS-LR", "SYS-PS", "SYS-DG", "SYS-3D"]
STASIS_AT_HALF = {"SYS-LR": (-1.0, 0.0), "SYS-PS": (0.0, 0.0), "SYS-3D": (0.0, 0.0, 0.0)}


def rk4_oracle(rhs, x0, t, steps=4000):
    """Plain fixed-step RK4, kept separate from the package integrators."""
    x = np.array(x0, dtype=float)
    h = t / steps
    for _ in range(steps):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * h * k1)
        k3 = rhs(x + 0.5 * h * k2)
        k4 = rhs(x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


# Hand-coded right-hand sides of the builtins, for oracles that must not go
# through the expression compiler.
RAW_FIELDS = {
    "SYS-LR": (lambda x: np.array([1.0, 0.0]), lambda x: np.array([x[0], x[1]])),
    "SYS-PS": (lambda x: np.array([1.0, 0.0]), lambda x: np.array([-1.0 - x[1], -x[0]])),
    "SYS-DG": (lambda x: np.array([1.0, 0.0]), lambda x: np.array([-1.0, 0.0])),
    "SYS-3D": (lambda x: np.array([1.0, 0.0, 0.0]), lambda x: np.array([-1.0 - x[1], -x[0], -x[2]])),
}


@pytest.fixture(scope="session")
def lr():
    return builtin("SYS-LR")


@pytest.fixture(scope="session")
def ps():
    return builtin("SYS-PS")


@pytest.fixture(scope="session")
def dg():
    return builtin("SYS-DG")


@pytest.fixture(scope="session")
def sys3d():
    return builtin("SYS-3D")


@pytest.fixture(scope="session")
def lr_stasis(lr):
    return find_stasis_fixed_lambda(lr, (-1.2, 0.3), 0.5)


@pytest.fixture(scope="session")
def ps_stasis(ps):
    return find_stasis_fixed_lambda(ps, (0.3, 0.4), 0.5)


@pytest.fixture(scope="session")
def sys3d_stasis(sys3d):
    return find_stasis_fixed_lambda(sys3d, (0.1, -0.1, 0.1), 0.5)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
