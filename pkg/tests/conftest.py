# Shared Test Fixtures
# ====================
# Seeded Faker instances and the small graphs most tests run against.
# Oracles are session scoped: materializing adjacency and star bitmasks is the
# expensive part and nothing in the tests mutates them.

import zlib

import pytest

from lab.graph_oracle import MATCHING, PERMUTATION, GraphFamily, GraphOracle
from utils.data_utils import DEFAULT_SEED, make_faker


@pytest.fixture
def fake(request):
    """Faker seeded from the test name, so every test sees its own fixed data."""
    return make_faker(DEFAULT_SEED ^ zlib.crc32(request.node.name.encode("utf-8")))


@pytest.fixture(scope="session")
def gamma3():
    return GraphOracle(GraphFamily(PERMUTATION, 3))


@pytest.fixture(scope="session")
def gamma4():
    return GraphOracle(GraphFamily(PERMUTATION, 4))


@pytest.fixture(scope="session")
def gamma5():
    return GraphOracle(GraphFamily(PERMUTATION, 5))


@pytest.fixture(scope="session")
def matching3():
    return GraphOracle(GraphFamily(MATCHING, 3))


@pytest.fixture(scope="session")
def matching4():
    return GraphOracle(GraphFamily(MATCHING, 4))
