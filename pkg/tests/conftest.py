import numpy as np
import pytest

from src.config import get_settings
from src.control import LQProblem, LQProblemSpec, example1_spec, example2_spec
from src.stochastic import PointMass, Product


class ZeroObjective:
    """F_1 = 0: value, gradient and Hessian all vanish."""

    def value(self, u):
        return 0.0

    def gradient(self, u):
        return np.zeros_like(u)

    def hessvec(self, v):
        return np.zeros_like(v)


@pytest.fixture(scope="session")
def example1_small():
    return LQProblem(example1_spec(n=8))


@pytest.fixture(scope="session")
def example1_tiny():
    return LQProblem(example1_spec(n=4))


@pytest.fixture(scope="session")
def example2_tiny():
    return LQProblem(example2_spec(n=4, k=3))


@pytest.fixture(scope="session")
def point_mass_problem():
    """Example 1 data with a degenerate parameter: every SAA problem equals the true one."""
    spec = example1_spec(n=4).model_copy(
        update={"distribution": Product(components=[PointMass(value=2.0), PointMass(value=0.3)])}
    )
    return LQProblem(LQProblemSpec.model_validate(spec.model_dump(by_alias=True)))


@pytest.fixture
def zero_objective():
    return ZeroObjective()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def isolated_settings(tmp_path, monkeypatch):
    """Fresh Settings writing below tmp_path."""
    monkeypatch.setenv("SAA_OUTPUT_DIR", str(tmp_path / "results"))
    monkeypatch.setenv("SAA_THREADS", "1")
    get_settings.cache_clear()
    yield get_settings()
    get_settings.cache_clear()
