import numpy as np
import pytest

from amalgam.core import VFormation
from amalgam.oracle import random_extension, random_model
from amalgam.sweep import admissible_theories


def diag(xs):
    return [(x, x) for x in xs]


def random_vformation(theory, rng, c_max=2, arm_max=4):
    """Random normalized V-formation of models of ``theory``, or None."""
    c = int(rng.integers(0, c_max + 1))
    C = random_model(theory, [f"c{i}" for i in range(1, c + 1)], rng)
    if C is None:
        return None
    arms = []
    for prefix in ("a", "b"):
        k = int(rng.integers(0, arm_max - c + 1)) if arm_max > c else 0
        arm = random_extension(C, theory, [f"{prefix}{i}" for i in range(1, k + 1)], rng)
        if arm is None:
            return None
        arms.append(arm)
    return VFormation(arms[0], arms[1], C)


def satisfiable_theories():
    """Admissible theories with a nonempty one-point model."""
    out = []
    for t, case in admissible_theories():
        if random_model(t, ["x"], np.random.default_rng(0)) is not None:
            out.append((t, case))
    return out


@pytest.fixture(scope="session")
def theories():
    return satisfiable_theories()


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


_CRITERIA: dict = {}


@pytest.fixture
def record():
    """Store the PASS/FAIL line of an acceptance criterion."""
    def put(number, ok, detail):
        _CRITERIA[number] = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    return put


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[k])
