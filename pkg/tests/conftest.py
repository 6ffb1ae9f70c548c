import pytest

from blochkit import MaterialParams


@pytest.fixture
def halide():
    """Dispersive damped material with poles at +-0.968... - 0.25i."""
    return MaterialParams(alpha=1.0, beta=1.0, gamma=0.5)


@pytest.fixture
def constant_eps2():
    """Non-dispersive real material, eps = 2."""
    return MaterialParams(alpha=1.0, beta=0.0, gamma=0.0)


@pytest.fixture
def undamped_pole():
    """Singular permittivity with real poles at +-1."""
    return MaterialParams(alpha=1.0, beta=1.0, gamma=0.0)


@pytest.fixture
def vacuum():
    """alpha = 0: homogeneous background."""
    return MaterialParams(alpha=0.0)
