import pytest

from germflow import SamplingSpec, parse


@pytest.fixture(scope="session")
def cubic_pair():
    # 1-D fixture: g - f = x1^3/4 lies in the cube of the gradient ideal of x1^2
    return parse("x1^2", 1), parse("x1^2 + 1/4*x1^3", 1)


@pytest.fixture(scope="session")
def radial_pair():
    # 2-D fixture: g = f + f^2 for f = x1^2 + x2^2
    f = parse("x1^2 + x2^2", 2)
    g = parse("x1^2 + x2^2 + x1^4 + 2*x1^2*x2^2 + x2^4", 2)
    return f, g


@pytest.fixture(scope="session")
def divergent_pair():
    # negative control: g - f = x1^2 makes the order-0 ratio blow up like 1/|x|
    return parse("x1^2", 1), parse("2*x1^2", 1)


@pytest.fixture
def spec1():
    return SamplingSpec(1)


@pytest.fixture
def spec2():
    return SamplingSpec(2)
