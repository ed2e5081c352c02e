# Combinatorics Core
# ==================
# Exact counting oracles and the canonical ranked representations of the two
# vertex families: permutations of {1..n} and perfect matchings of K_{2n}.
# Every other module indexes vertices by the ranks defined here.

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

from utils.errors import PreconditionError

Edge = tuple[int, int]


# Counting Oracles
# ================

def double_factorial(k: int) -> int:
    """
    Return k!! = k(k-2)(k-4)...1 for odd k, with the empty product for k in {-1, 0}.

    Raises:
        PreconditionError: if k < -1 or k is a positive even number
    """
    if k < -1:
        raise PreconditionError(f"double factorial undefined for k={k}")
    if k > 0 and k % 2 == 0:
        raise PreconditionError(f"double factorial only defined for odd k here, got {k}")
    return math.prod(range(k, 0, -2)) if k > 0 else 1


def derangement_count(n: int) -> int:
    """Number of fixed-point-free permutations of {1..n}, via d_n = n*d_{n-1} + (-1)^n."""
    if n < 0:
        raise PreconditionError(f"n must be nonnegative, got {n}")
    d = 1
    for i in range(1, n + 1):
        d = i * d + (-1) ** i
    return d


def derangement_count_by_recurrence(n: int) -> int:
    """Same count from d_n = (n-1)(d_{n-1} + d_{n-2}); kept as an independent cross-check."""
    if n < 0:
        raise PreconditionError(f"n must be nonnegative, got {n}")
    prev, cur = 1, 0  # d_0, d_1
    if n == 0:
        return prev
    for i in range(2, n + 1):
        prev, cur = cur, (i - 1) * (cur + prev)
    return cur


def matching_derangement_degree(n: int) -> int:
    """
    Number of perfect matchings of K_{2n} sharing no edge with a fixed one.

    Inclusion-exclusion over the edges of the fixed matching:
    sum_i (-1)^i C(n, i) (2n - 2i - 1)!!.
    """
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    return sum((-1) ** i * math.comb(n, i) * double_factorial(2 * n - 2 * i - 1) for i in range(n + 1))


def matching_count(n: int) -> int:
    """Number of perfect matchings of K_{2n}, (2n-1)!!."""
    return double_factorial(2 * n - 1)


# Vertex Types
# ============

@dataclass(frozen=True, order=True)
class Permutation:
    """
    A permutation of {1..n} stored as its image sequence.

    Attributes:
        images (tuple[int, ...]): images[i-1] is sigma(i)
    """

    images: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise PreconditionError(f"not a permutation of 1..{len(self.images)}: {self.images}")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_cycles(cls, n: int, *cycles: Iterable[int]) -> "Permutation":
        """Build a permutation from disjoint cycles, e.g. from_cycles(3, (1, 2, 3)) maps 1->2->3->1."""
        images = list(range(1, n + 1))
        for cycle in cycles:
            cycle = list(cycle)
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                images[a - 1] = b
        return cls(tuple(images))

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def compose(self, other: "Permutation") -> "Permutation":
        """Return self o other, i.e. i -> self(other(i))."""
        _same_size(self.n, other.n)
        return Permutation(tuple(self.images[j - 1] for j in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Permutation(tuple(inv))

    def fixed_points(self) -> list[int]:
        return [i for i, j in enumerate(self.images, start=1) if i == j]


@dataclass(frozen=True, order=True)
class PerfectMatching:
    """
    A perfect matching of K_{2n} in canonical form.

    Attributes:
        pairs (tuple[Edge, ...]): n pairs (a, b) with a < b, sorted by first element
    """

    pairs: tuple[Edge, ...]

    def __post_init__(self):
        pairs = tuple(tuple(p) for p in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        points = [x for p in pairs for x in p]
        if sorted(points) != list(range(1, 2 * len(pairs) + 1)):
            raise PreconditionError(f"pairs do not partition 1..{2 * len(pairs)}: {pairs}")
        if any(a >= b for a, b in pairs) or list(pairs) != sorted(pairs):
            raise PreconditionError(f"matching not in canonical form: {pairs}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Iterable[int]]) -> "PerfectMatching":
        """Canonicalize an arbitrary list of unordered pairs."""
        return cls(tuple(sorted(tuple(sorted(p)) for p in pairs)))

    @property
    def n(self) -> int:
        return len(self.pairs)

    def contains_edge(self, edge: Edge) -> bool:
        return tuple(sorted(edge)) in self.pairs


def _same_size(a: int, b: int) -> None:
    if a != b:
        raise PreconditionError(f"size mismatch: {a} vs {b}")


# Ranking
# =======
# Permutations: lexicographic order on image sequences (Lehmer code).
# Matchings: the smallest unmatched point is paired with each larger partner
# in ascending order, recursively.

def unrank_permutation(n: int, r: int) -> Permutation:
    if not 0 <= r < math.factorial(n):
        raise PreconditionError(f"rank {r} out of range for n={n}")
    remaining = list(range(1, n + 1))
    images = []
    for k in range(n - 1, -1, -1):
        q, r = divmod(r, math.factorial(k))
        images.append(remaining.pop(q))
    return Permutation(tuple(images))


def rank_permutation(sigma: Permutation) -> int:
    remaining = list(range(1, sigma.n + 1))
    r = 0
    for pos, value in enumerate(sigma.images):
        idx = remaining.index(value)
        r += idx * math.factorial(sigma.n - 1 - pos)
        remaining.pop(idx)
    return r


def unrank_matching(n: int, r: int) -> PerfectMatching:
    if not 0 <= r < matching_count(n):
        raise PreconditionError(f"rank {r} out of range for n={n}")
    points = list(range(1, 2 * n + 1))
    pairs = []
    while points:
        block = double_factorial(len(points) - 3)
        q, r = divmod(r, block)
        a = points.pop(0)
        b = points.pop(q)
        pairs.append((a, b))
    return PerfectMatching(tuple(pairs))


def rank_matching(m: PerfectMatching) -> int:
    partner = {}
    for a, b in m.pairs:
        partner[a], partner[b] = b, a
    points = list(range(1, 2 * m.n + 1))
    r = 0
    while points:
        block = double_factorial(len(points) - 3)
        a = points.pop(0)
        idx = points.index(partner[a])
        r += idx * block
        points.pop(idx)
    return r


def all_permutations(n: int) -> Iterator[Permutation]:
    """All permutations of {1..n} in rank order."""
    for images in itertools.permutations(range(1, n + 1)):
        yield Permutation(images)


def _matchings_of(points: tuple[int, ...]) -> Iterator[tuple[Edge, ...]]:
    if not points:
        yield ()
        return
    a = points[0]
    for idx in range(1, len(points)):
        rest = points[1:idx] + points[idx + 1:]
        for tail in _matchings_of(rest):
            yield ((a, points[idx]),) + tail


def all_matchings(n: int) -> Iterator[PerfectMatching]:
    """All perfect matchings of K_{2n} in rank order."""
    for pairs in _matchings_of(tuple(range(1, 2 * n + 1))):
        yield PerfectMatching(pairs)


def matchings_containing(n: int, edge: Edge) -> Iterator[PerfectMatching]:
    """All perfect matchings of K_{2n} containing ``edge`` (not in rank order)."""
    a, b = sorted(edge)
    rest = tuple(x for x in range(1, 2 * n + 1) if x not in (a, b))
    for pairs in _matchings_of(rest):
        yield PerfectMatching.from_pairs(pairs + ((a, b),))


def complete_graph_edges(n: int) -> list[Edge]:
    """The C(2n, 2) edges of K_{2n} in canonical (lexicographic) order."""
    return list(itertools.combinations(range(1, 2 * n + 1), 2))


# Adjacency Predicates
# ====================

def relative_derangement(sigma: Permutation, tau: Permutation) -> bool:
    """True iff sigma tau^{-1} is fixed-point-free, i.e. sigma(i) != tau(i) for all i."""
    _same_size(sigma.n, tau.n)
    return all(a != b for a, b in zip(sigma.images, tau.images))


def common_edge_count(p: PerfectMatching, q: PerfectMatching) -> int:
    """Number of edges shared by two perfect matchings; 0 means adjacent."""
    _same_size(p.n, q.n)
    return len(set(p.pairs) & set(q.pairs))
