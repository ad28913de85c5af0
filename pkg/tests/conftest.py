import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


def spd(rng, g, floor=0.3):
    A = rng.standard_normal((g, g))
    return A @ A.T + floor * np.eye(g)


def sym_rand(rng, g):
    A = rng.standard_normal((g, g))
    return (A + A.T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# (number, title, passed, detail) appended by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num, title, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} [{num:2d}] {title}: {detail}")
