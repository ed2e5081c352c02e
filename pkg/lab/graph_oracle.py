# Graph Oracle Module
# ===================
# Implicit and explicit views of the derangement graph Gamma_n (vertices are
# permutations, adjacent when they disagree everywhere) and the perfect
# matching graph M_n (vertices are perfect matchings of K_{2n}, adjacent when
# edge-disjoint). Provides the parameter pack (V, d, N, M, K), stars,
# superstars, induced edge counts and the explicit bit-row adjacency form.
#
# Both families share one structural fact used throughout: two vertices are
# adjacent exactly when no star contains both of them.

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Union

import numpy as np

from config import environments
from utils.combinatorics import (
    PerfectMatching,
    Permutation,
    common_edge_count,
    complete_graph_edges,
    derangement_count,
    double_factorial,
    matching_count,
    matching_derangement_degree,
    matchings_containing,
    rank_matching,
    rank_permutation,
    relative_derangement,
    unrank_matching,
    unrank_permutation,
)
from utils.errors import BudgetExceededError, InvariantViolationError, PreconditionError

logger = logging.getLogger(__name__)

PERMUTATION = "permutation"
MATCHING = "matching"

# CLI spellings of the two families
FAMILY_FLAGS = {"perm": PERMUTATION, "pm": MATCHING}

Vertex = Union[Permutation, PerfectMatching]


def iter_bits(bits: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``bits`` in increasing order."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


# Family and Parameters
# =====================

@dataclass(frozen=True, order=True)
class GraphFamily:
    """
    One member of the two graph families.

    Attributes:
        kind (str): "permutation" for Gamma_n, "matching" for M_n
        n (int): Size parameter (permutations of n points, matchings of 2n points)
    """

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in (PERMUTATION, MATCHING):
            raise PreconditionError(f"unknown graph family '{self.kind}'")
        if self.n < 2:
            raise PreconditionError(f"{self.kind} family requires n >= 2, got {self.n}")

    @classmethod
    def from_flag(cls, flag: str, n: int) -> "GraphFamily":
        if flag not in FAMILY_FLAGS:
            raise PreconditionError(f"unknown family flag '{flag}', expected one of {sorted(FAMILY_FLAGS)}")
        return cls(FAMILY_FLAGS[flag], n)

    @property
    def flag(self) -> str:
        return "perm" if self.kind == PERMUTATION else "pm"

    @property
    def label(self) -> str:
        return f"{'Gamma' if self.kind == PERMUTATION else 'M'}_{self.n}"


@dataclass(frozen=True)
class GraphParams:
    """
    The parameter pack of a family member.

    Attributes:
        V: number of vertices
        d: valency
        N: independence number (size of a star)
        M: minus the least eigenvalue, also the number of neighbours an
           outside vertex has in any star
        K: number of stars
    """

    family: GraphFamily
    V: int
    d: int
    N: int
    M: int
    K: int

    @property
    def critical_probability(self) -> float:
        """ln(K(V-N))/M, the threshold probability for the random spanning subgraph."""
        return math.log(self.K * (self.V - self.N)) / self.M

    def as_row(self) -> dict:
        return {
            "family": self.family.flag,
            "n": self.family.n,
            "V": self.V,
            "d": self.d,
            "N": self.N,
            "M": self.M,
            "K": self.K,
            "pc": self.critical_probability,
        }


def graph_params(family: GraphFamily, max_n: int | None = None) -> GraphParams:
    """Exact (V, d, N, M, K) from the closed forms; no enumeration happens here."""
    max_n = environments.EKR_PARAMS_MAX_N if max_n is None else max_n
    n = family.n
    if n > max_n:
        raise BudgetExceededError("EKR_PARAMS_MAX_N", max_n, n)
    if family.kind == PERMUTATION:
        V, d, N, K = math.factorial(n), derangement_count(n), math.factorial(n - 1), n * n
        divisor = n - 1
    else:
        V, d, N, K = matching_count(n), matching_derangement_degree(n), double_factorial(2 * n - 3), math.comb(2 * n, 2)
        divisor = 2 * n - 2
    M, rest = divmod(d, divisor)
    if rest:
        raise InvariantViolationError(f"{family.label}: valency {d} not divisible by {divisor}")
    if N * (M + d) != V * M:
        raise InvariantViolationError(f"{family.label}: ratio bound not tight for N={N}")
    return GraphParams(family, V, d, N, M, K)


# Stars
# =====

@dataclass(frozen=True, order=True)
class StarCenter:
    """
    Center of a star: i->j for permutations, the edge {a, b} for matchings.

    For matchings the pair is stored sorted; use StarCenter.edge to build one.
    """

    a: int
    b: int

    @classmethod
    def edge(cls, a: int, b: int) -> "StarCenter":
        return cls(min(a, b), max(a, b))

    def label(self, family: GraphFamily) -> str:
        return f"{self.a}->{self.b}" if family.kind == PERMUTATION else f"{{{self.a},{self.b}}}"


# Vertex Sets
# ===========

@dataclass(frozen=True)
class VertexSet:
    """
    An immutable subset of vertex ranks stored as an int bitmask.

    Attributes:
        bits (int): bit r is set iff rank r is in the set
        universe (int): number of vertices V of the ambient graph
        size (int): cached cardinality
    """

    bits: int
    universe: int
    size: int = field(init=False, compare=False)

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.universe:
            raise PreconditionError(f"vertex set has indices outside 0..{self.universe - 1}")
        object.__setattr__(self, "size", self.bits.bit_count())

    @classmethod
    def from_ranks(cls, ranks: Iterable[int], universe: int) -> "VertexSet":
        bits = 0
        for r in ranks:
            if not 0 <= r < universe:
                raise PreconditionError(f"rank {r} outside 0..{universe - 1}")
            bits |= 1 << r
        return cls(bits, universe)

    @classmethod
    def empty(cls, universe: int) -> "VertexSet":
        return cls(0, universe)

    @classmethod
    def full(cls, universe: int) -> "VertexSet":
        return cls((1 << universe) - 1, universe)

    def __len__(self) -> int:
        return self.size

    def __contains__(self, r: int) -> bool:
        return 0 <= r < self.universe and bool(self.bits >> r & 1)

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.bits)

    def ranks(self) -> tuple[int, ...]:
        return tuple(self)

    def _check(self, other: "VertexSet") -> None:
        if other.universe != self.universe:
            raise PreconditionError(f"vertex sets over different universes: {self.universe} vs {other.universe}")

    def union(self, other: "VertexSet") -> "VertexSet":
        self._check(other)
        return VertexSet(self.bits | other.bits, self.universe)

    def intersection(self, other: "VertexSet") -> "VertexSet":
        self._check(other)
        return VertexSet(self.bits & other.bits, self.universe)

    def difference(self, other: "VertexSet") -> "VertexSet":
        self._check(other)
        return VertexSet(self.bits & ~other.bits, self.universe)

    def symmetric_difference(self, other: "VertexSet") -> "VertexSet":
        self._check(other)
        return VertexSet(self.bits ^ other.bits, self.universe)

    def issubset(self, other: "VertexSet") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def with_vertex(self, r: int) -> "VertexSet":
        return VertexSet.from_ranks([r], self.universe).union(self)

    def without_vertex(self, r: int) -> "VertexSet":
        return VertexSet(self.bits & ~(1 << r), self.universe)


# Explicit Graphs
# ===============

class DenseGraph:
    """
    A simple graph on vertices 0..V-1 stored as adjacency bit rows.

    Used for small instances of Gamma_n / M_n and for sampled spanning
    subgraphs in the threshold simulation.

    Attributes:
        V (int): number of vertices
        rows (tuple[int, ...]): rows[v] has bit u set iff u ~ v
    """

    def __init__(self, V: int, rows: Iterable[int], validate: bool = True):
        self.V = V
        self.rows = tuple(rows)
        if validate:
            self._validate()

    def _validate(self) -> None:
        if len(self.rows) != self.V:
            raise PreconditionError(f"expected {self.V} adjacency rows, got {len(self.rows)}")
        for v, row in enumerate(self.rows):
            if row >> v & 1:
                raise PreconditionError(f"vertex {v} has a loop")
            if row >> self.V:
                raise PreconditionError(f"row {v} references vertices outside 0..{self.V - 1}")
            for u in iter_bits(row):
                if not self.rows[u] >> v & 1:
                    raise PreconditionError(f"adjacency not symmetric at ({u}, {v})")

    @classmethod
    def from_edges(cls, V: int, edges: Iterable[tuple[int, int]]) -> "DenseGraph":
        rows = [0] * V
        for u, v in edges:
            if u == v:
                raise PreconditionError(f"loop at vertex {u}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(V, rows, validate=False)

    @classmethod
    def empty(cls, V: int) -> "DenseGraph":
        return cls(V, [0] * V, validate=False)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    def edge_count(self) -> int:
        return sum(row.bit_count() for row in self.rows) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges as (u, v) with u < v, in lexicographic order."""
        for u, row in enumerate(self.rows):
            for v in iter_bits(row >> (u + 1)):
                yield u, u + 1 + v

    def neighbours_in(self, v: int, bits: int) -> int:
        return (self.rows[v] & bits).bit_count()

    def induced_edge_count(self, bits: int) -> int:
        return sum((self.rows[v] & bits).bit_count() for v in iter_bits(bits)) // 2

    def is_independent(self, bits: int) -> bool:
        return all(self.rows[v] & bits == 0 for v in iter_bits(bits))

    def complement_rows(self) -> list[int]:
        full = (1 << self.V) - 1
        return [full & ~row & ~(1 << v) for v, row in enumerate(self.rows)]

    def spanning_subgraph(self, keep: Callable[[int, int], bool]) -> "DenseGraph":
        """Subgraph on the same vertices keeping the edges (u, v), u < v, for which keep(u, v) holds."""
        return DenseGraph.from_edges(self.V, ((u, v) for u, v in self.edges() if keep(u, v)))

    def without_edge(self, u: int, v: int) -> "DenseGraph":
        rows = list(self.rows)
        rows[u] &= ~(1 << v)
        rows[v] &= ~(1 << u)
        return DenseGraph(self.V, rows, validate=False)


# The Oracle
# ==========

class GraphOracle:
    """
    Adjacency, stars and edge counts for one family member.

    Small instances (V within the adjacency budget) get an explicit DenseGraph,
    built lazily from the vertex/star incidence matrix; everything else goes
    through the implicit adjacency predicate.

    Attributes:
        family (GraphFamily): which graph this oracle answers for
        params (GraphParams): the exact parameter pack
        V (int): number of vertices
    """

    def __init__(self, family: GraphFamily, adjacency_budget: int | None = None, pair_budget: int | None = None):
        self.family = family
        self.params = graph_params(family)
        self.V = self.params.V
        self.adjacency_budget = environments.EKR_ADJACENCY_BUDGET if adjacency_budget is None else adjacency_budget
        self.pair_budget = environments.EKR_PAIR_BUDGET if pair_budget is None else pair_budget
        self._dense: DenseGraph | None = None

    # Vertices
    # --------

    @property
    def is_permutation(self) -> bool:
        return self.family.kind == PERMUTATION

    def _check_rank(self, r: int) -> None:
        if not 0 <= r < self.V:
            raise PreconditionError(f"rank {r} out of range 0..{self.V - 1} for {self.family.label}")

    def vertex(self, r: int) -> Vertex:
        self._check_rank(r)
        if r < len(self._vertex_table):
            return self._vertex_table[r]
        return unrank_permutation(self.family.n, r) if self.is_permutation else unrank_matching(self.family.n, r)

    @cached_property
    def _vertex_table(self) -> tuple[Vertex, ...]:
        # Only small graphs keep every vertex object around
        if self.V > self.adjacency_budget:
            return ()
        logger.debug("Caching %d vertices of %s", self.V, self.family.label)
        if self.is_permutation:
            return tuple(unrank_permutation(self.family.n, r) for r in range(self.V))
        return tuple(unrank_matching(self.family.n, r) for r in range(self.V))

    def rank(self, vertex: Vertex) -> int:
        if vertex.n != self.family.n:
            raise PreconditionError(f"vertex of size {vertex.n} does not belong to {self.family.label}")
        if self.is_permutation:
            if not isinstance(vertex, Permutation):
                raise PreconditionError("expected a Permutation")
            return rank_permutation(vertex)
        if not isinstance(vertex, PerfectMatching):
            raise PreconditionError("expected a PerfectMatching")
        return rank_matching(vertex)

    def adjacent(self, u: int, v: int) -> bool:
        self._check_rank(u)
        self._check_rank(v)
        if u == v:
            return False
        if self._dense is not None:
            return self._dense.has_edge(u, v)
        x, y = self.vertex(u), self.vertex(v)
        if self.is_permutation:
            return relative_derangement(x, y)
        return common_edge_count(x, y) == 0

    # Stars
    # -----

    @cached_property
    def star_centers(self) -> tuple[StarCenter, ...]:
        """All K centers in canonical order: i->j lexicographically, or edges of K_{2n} lexicographically."""
        n = self.family.n
        if self.is_permutation:
            return tuple(StarCenter(i, j) for i in range(1, n + 1) for j in range(1, n + 1))
        return tuple(StarCenter(a, b) for a, b in complete_graph_edges(n))

    @cached_property
    def _center_index(self) -> dict[StarCenter, int]:
        return {c: x for x, c in enumerate(self.star_centers)}

    def star_index(self, center: StarCenter) -> int:
        try:
            return self._center_index[center]
        except KeyError:
            raise PreconditionError(f"invalid star center {center} for {self.family.label}") from None

    def vertex_features(self, r: int) -> tuple[int, ...]:
        """Indices of the n stars containing vertex r."""
        v = self.vertex(r)
        n = self.family.n
        if self.is_permutation:
            return tuple((i - 1) * n + (j - 1) for i, j in enumerate(v.images, start=1))
        return tuple(self._center_index[StarCenter(a, b)] for a, b in v.pairs)

    def star_set(self, center: StarCenter) -> VertexSet:
        """All vertices with sigma(i) = j, or all matchings containing the edge {a, b}."""
        x = self.star_index(center)
        return VertexSet(self.star_bits[x], self.V)

    @cached_property
    def star_bits(self) -> tuple[int, ...]:
        return tuple(sum(1 << r for r in members) for members in self.star_members)

    @cached_property
    def star_members(self) -> tuple[tuple[int, ...], ...]:
        """Sorted member ranks of every star, indexed like star_centers."""
        n = self.family.n
        members = []
        for center in self.star_centers:
            if self.is_permutation:
                i, j = center.a, center.b
                rest = [v for v in range(1, n + 1) if v != j]
                ranks = []
                for tail in itertools.permutations(rest):
                    images = tail[: i - 1] + (j,) + tail[i - 1:]
                    ranks.append(rank_permutation(Permutation(images)))
            else:
                ranks = [rank_matching(m) for m in matchings_containing(n, (center.a, center.b))]
            members.append(tuple(sorted(ranks)))
        return tuple(members)

    def superstar_set(self, center: StarCenter, v: int) -> VertexSet:
        """The star at ``center`` plus the outside vertex v."""
        self._check_rank(v)
        star = self.star_set(center)
        if v in star:
            raise PreconditionError(f"vertex {v} already lies in the star {center.label(self.family)}")
        return star.with_vertex(v)

    # Edge Counts
    # -----------

    def incidence_matrix(self) -> np.ndarray:
        """V x K 0/1 matrix, row r marks the stars containing vertex r."""
        X = np.zeros((self.V, self.params.K), dtype=np.float32)
        for x, members in enumerate(self.star_members):
            X[list(members), x] = 1.0
        return X

    def dense_graph(self) -> DenseGraph:
        """Materialize adjacency bit rows (V within the adjacency budget)."""
        if self._dense is None:
            if self.V > self.adjacency_budget:
                raise BudgetExceededError("EKR_ADJACENCY_BUDGET", self.adjacency_budget, self.V)
            logger.info("Materializing %s (%d vertices)", self.family.label, self.V)
            X = self.incidence_matrix()
            rows = []
            block = 1024
            for start in range(0, self.V, block):
                shared = X[start:start + block] @ X.T
                adjacent = shared == 0
                for offset, line in enumerate(adjacent):
                    line[start + offset] = False
                    packed = np.packbits(line, bitorder="little")
                    rows.append(int.from_bytes(packed.tobytes(), "little"))
            self._dense = DenseGraph(self.V, rows, validate=False)
        return self._dense

    def adjacency_matrix(self) -> np.ndarray:
        """Dense V x V float adjacency matrix (for diagonalization)."""
        X = self.incidence_matrix()
        A = (X @ X.T == 0).astype(np.float64)
        np.fill_diagonal(A, 0.0)
        return A

    def neighbours(self, v: int) -> list[int]:
        self._check_rank(v)
        return list(iter_bits(self.dense_graph().rows[v]))

    def induced_edge_count(self, S: VertexSet) -> int:
        """Exact number of edges inside S; refuses sets beyond the pair budget."""
        pairs = S.size * (S.size - 1) // 2
        if pairs > self.pair_budget:
            raise BudgetExceededError("EKR_PAIR_BUDGET", self.pair_budget, pairs)
        if self.V <= self.adjacency_budget:
            return self.dense_graph().induced_edge_count(S.bits)
        ranks = S.ranks()
        return sum(1 for idx, u in enumerate(ranks) for v in ranks[idx + 1:] if self.adjacent(u, v))

    def star_overlaps(self, A: VertexSet) -> list[int]:
        """|A intersect star| for every star, in canonical order."""
        return [(A.bits & bits).bit_count() for bits in self.star_bits]

    def max_star_overlap(self, A: VertexSet) -> tuple[int, StarCenter]:
        """Largest intersection of A with a star and its smallest-center witness."""
        if A.size == 0:
            raise PreconditionError("max_star_overlap needs a nonempty set")
        overlaps = self.star_overlaps(A)
        best = max(overlaps)
        return best, self.star_centers[overlaps.index(best)]

    def is_faux_star(self, A: VertexSet) -> bool:
        """|A| > N and every star has a vertex outside A."""
        if A.size <= self.params.N:
            return False
        return self.max_star_overlap(A)[0] < self.params.N

    def contained_star(self, A: VertexSet) -> StarCenter | None:
        """The smallest center whose star contains A, if any."""
        for center, bits in zip(self.star_centers, self.star_bits):
            if A.bits & ~bits == 0:
                return center
        return None

    # Structural Checks
    # -----------------

    def degree_violations(self) -> list[tuple[int, int]]:
        """Vertices whose degree differs from d, as (rank, degree)."""
        graph = self.dense_graph()
        return [(v, graph.degree(v)) for v in range(self.V) if graph.degree(v) != self.params.d]

    def superstar_edge_count(self, center: StarCenter, v: int) -> int:
        """Number of neighbours of the outside vertex v inside the star."""
        return self.induced_edge_count(self.superstar_set(center, v))

    def hoffman_tightness_violations(self) -> list[tuple[StarCenter, int, int]]:
        """(center, v, count) for every outside vertex v not having exactly M neighbours in the star."""
        graph = self.dense_graph()
        M = self.params.M
        violations = []
        for center, bits in zip(self.star_centers, self.star_bits):
            for v in range(self.V):
                if bits >> v & 1:
                    continue
                count = graph.neighbours_in(v, bits)
                if count != M:
                    violations.append((center, v, count))
        return violations

    def star_independence_violations(self) -> list[StarCenter]:
        return [c for c in self.star_centers if self.induced_edge_count(self.star_set(c)) != 0]

    def star_intersection_violations(self) -> list[tuple[tuple[StarCenter, ...], int, int]]:
        """
        Check the pair and triple intersection sizes of matching stars.

        Two distinct edges: (2n-5)!! common matchings when disjoint, none when
        they share a point. Three distinct edges (n >= 4): (2n-7)!! when
        pairwise disjoint, none otherwise.

        Returns:
            list: (centers, expected, actual) for every mismatch
        """
        if self.is_permutation:
            raise PreconditionError("star intersection formula applies to the matching family")
        n = self.family.n
        centers = self.star_centers
        bits = self.star_bits
        violations = []
        for x in range(len(centers)):
            for y in range(x + 1, len(centers)):
                disjoint = not {centers[x].a, centers[x].b} & {centers[y].a, centers[y].b}
                expected = double_factorial(2 * n - 5) if disjoint else 0
                actual = (bits[x] & bits[y]).bit_count()
                if actual != expected:
                    violations.append(((centers[x], centers[y]), expected, actual))
                if n < 4:
                    continue
                for z in range(y + 1, len(centers)):
                    points = [centers[w].a for w in (x, y, z)] + [centers[w].b for w in (x, y, z)]
                    expected3 = double_factorial(2 * n - 7) if len(set(points)) == 6 else 0
                    actual3 = (bits[x] & bits[y] & bits[z]).bit_count()
                    if actual3 != expected3:
                        violations.append(((centers[x], centers[y], centers[z]), expected3, actual3))
        return violations
