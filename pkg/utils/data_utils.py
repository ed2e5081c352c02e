# Data Utilities Module
# =====================
# Seeded random test data for the lab: vertex subsets, permutation pairs,
# random graphs, and the parser for the --set flag of the command line.
# Everything draws from a Faker instance seeded explicitly, so a seed fully
# determines the data.

from __future__ import annotations

import re

from faker import Faker

from lab.graph_oracle import DenseGraph, GraphOracle, StarCenter, VertexSet
from utils.combinatorics import Permutation
from utils.errors import PreconditionError

# Default seed for test corpora
DEFAULT_SEED = 20240601

_PAIR = re.compile(r"^(\d+)-(\d+)$")


def make_faker(seed: int = DEFAULT_SEED) -> Faker:
    """
    Faker instance with its own seeded random state.

    Note:
        seed_instance keeps the seed local to this instance, so tests running
        in parallel workers do not disturb each other.
    """
    fake = Faker()
    fake.seed_instance(seed)
    return fake


def random_vertex_subset(fake: Faker, universe: int, size: int | None = None) -> VertexSet:
    """A uniformly random subset of 0..universe-1, of the given size or of random size."""
    if size is None:
        size = fake.random_int(min=0, max=universe)
    if not 0 <= size <= universe:
        raise PreconditionError(f"subset size {size} outside 0..{universe}")
    return VertexSet.from_ranks(fake.random.sample(range(universe), size), universe)


def random_permutation(fake: Faker, n: int) -> Permutation:
    images = list(range(1, n + 1))
    fake.random.shuffle(images)
    return Permutation(tuple(images))


def random_permutation_pair(fake: Faker, n: int) -> tuple[Permutation, Permutation]:
    return random_permutation(fake, n), random_permutation(fake, n)


def random_graph(fake: Faker, V: int, density: float = 0.5) -> DenseGraph:
    """An Erdos-Renyi graph G(V, density) on vertices 0..V-1."""
    edges = [(u, v) for u in range(V) for v in range(u + 1, V) if fake.random.random() < density]
    return DenseGraph.from_edges(V, edges)


def _center(oracle: GraphOracle, text: str) -> StarCenter:
    match = _PAIR.match(text.strip())
    if not match:
        raise PreconditionError(f"star center '{text}' is not of the form a-b")
    a, b = int(match.group(1)), int(match.group(2))
    center = StarCenter(a, b) if oracle.is_permutation else StarCenter.edge(a, b)
    oracle.star_index(center)
    return center


def parse_set_spec(spec: str, oracle: GraphOracle, seed: int = DEFAULT_SEED) -> VertexSet:
    """
    Turn a --set value into a vertex set.

    Accepted forms:
        star:a-b          the star at i->j (permutations) or edge {a, b} (matchings)
        stars:a-b,c-d     union of several stars
        ranks:0,5,7       explicit vertex ranks
        random:K          K vertices drawn with the given seed
        full              every vertex

    Raises:
        PreconditionError: malformed spec or out-of-range values
    """
    kind, _, body = spec.partition(":")
    if kind == "full" and not body:
        return VertexSet.full(oracle.V)
    if kind == "star":
        return oracle.star_set(_center(oracle, body))
    if kind == "stars":
        result = VertexSet.empty(oracle.V)
        for part in body.split(","):
            result = result.union(oracle.star_set(_center(oracle, part)))
        return result
    if kind == "ranks":
        try:
            ranks = [int(x) for x in body.split(",") if x.strip()]
        except ValueError:
            raise PreconditionError(f"ranks '{body}' are not integers") from None
        return VertexSet.from_ranks(ranks, oracle.V)
    if kind == "random":
        try:
            size = int(body)
        except ValueError:
            raise PreconditionError(f"random set size '{body}' is not an integer") from None
        return random_vertex_subset(make_faker(seed), oracle.V, size)
    raise PreconditionError(f"unknown set spec '{spec}'")
