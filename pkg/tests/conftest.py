import numpy as np
import pytest
from hypothesis import settings

from nilcurv.metrics import GradientMetric, PsiMetric
from nilcurv.polyfunc import PolyMap, random_poly

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def poly(nvars, *terms):
    """poly(2, ((2, 0), 0.5), ((0, 1), 1.0)) -> 0.5 x0^2 + x1."""
    return PolyMap(nvars, {tuple(e): c for e, c in terms})


def quadratic_f(eps):
    p = len(eps)
    return poly(p, *[(tuple(2 if k == i else 0 for k in range(p)), 0.5 * e) for i, e in enumerate(eps)])


def random_psi(p, rng, degree=3):
    return PsiMetric.from_entries(p, {(i, j): random_poly(p, degree, rng) for i in range(p) for j in range(i, p)})


def random_gradient(p, rng, degree=3):
    return GradientMetric(p, random_poly(p, degree, rng))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
