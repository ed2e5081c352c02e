# Data Utilities Test Module
# ==========================

import pytest

from lab.graph_oracle import StarCenter, VertexSet
from utils.data_utils import make_faker, parse_set_spec, random_graph, random_vertex_subset
from utils.errors import PreconditionError


def test_parse_stars(gamma4, matching3):
    assert parse_set_spec("star:2-3", gamma4) == gamma4.star_set(StarCenter(2, 3))
    assert parse_set_spec("star:2-1", matching3) == matching3.star_set(StarCenter(1, 2))
    union = parse_set_spec("stars:1-2,3-4", matching3)
    assert union.size == 2 * matching3.params.N - 1


def test_parse_ranks_full_and_random(gamma4):
    assert parse_set_spec("ranks:0,5,7", gamma4).ranks() == (0, 5, 7)
    assert parse_set_spec("full", gamma4) == VertexSet.full(gamma4.V)
    first = parse_set_spec("random:6", gamma4, seed=3)
    assert first.size == 6
    assert parse_set_spec("random:6", gamma4, seed=3) == first


@pytest.mark.parametrize("spec", ["star:1", "star:1-5", "ranks:a", "random:x", "cube:1", "full:1"])
def test_parse_rejects_bad_specs(gamma4, spec):
    with pytest.raises(PreconditionError):
        parse_set_spec(spec, gamma4)


def test_seeded_data_is_reproducible():
    a = random_vertex_subset(make_faker(8), 50)
    b = random_vertex_subset(make_faker(8), 50)
    assert a == b
    assert random_graph(make_faker(8), 10).rows == random_graph(make_faker(8), 10).rows
    with pytest.raises(PreconditionError):
        random_vertex_subset(make_faker(8), 5, size=6)
