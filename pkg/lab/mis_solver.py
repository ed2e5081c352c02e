# Maximum Independent Set Solver
# ==============================
# Exact maximum independent sets on explicit graphs: the verification engine
# for the EKR statements and the per-trial oracle of the threshold simulation.
#
# An independent set of G is a clique of the complement, so the search is a
# bitset max-clique branch and bound with greedy colouring bounds. A colour
# class of the complement is a clique of G, built by repeatedly taking the
# lowest candidate and intersecting with its G-neighbourhood.

from __future__ import annotations

import itertools
import logging
from functools import lru_cache
from typing import Iterator

from config import environments
from lab.graph_oracle import DenseGraph, VertexSet, iter_bits
from utils.errors import BudgetExceededError, InvariantViolationError, PreconditionError

logger = logging.getLogger(__name__)


class MisSolver:
    """
    Exact independence number, witnesses and enumeration for one DenseGraph.

    Vertices are relabelled internally so that bit 0 is the vertex of highest
    complement degree (ties by rank); all results are reported in original ranks.

    Attributes:
        graph (DenseGraph): the graph being solved
        nodes (int): search nodes expanded by the last call
    """

    def __init__(
        self,
        graph: DenseGraph,
        budget: int | None = None,
        enumeration_budget: int | None = None,
        enumeration_cap: int | None = None,
        verify: bool = False,
    ):
        self.budget = environments.EKR_MIS_BUDGET if budget is None else budget
        self.enumeration_budget = environments.EKR_ENUMERATION_BUDGET if enumeration_budget is None else enumeration_budget
        self.enumeration_cap = environments.EKR_ENUMERATION_CAP if enumeration_cap is None else enumeration_cap
        if graph.V > self.budget:
            raise BudgetExceededError("EKR_MIS_BUDGET", self.budget, graph.V)
        self.graph = graph
        self.verify = verify
        self.nodes = 0

        complement = graph.complement_rows()
        self._order = sorted(range(graph.V), key=lambda v: (-complement[v].bit_count(), v))
        position = {v: i for i, v in enumerate(self._order)}
        self._comp = [self._relabel(complement[v], position) for v in self._order]
        self._adj = [self._relabel(graph.rows[v], position) for v in self._order]
        self._full = (1 << graph.V) - 1
        self._alpha: int | None = None

    @staticmethod
    def _relabel(row: int, position: dict[int, int]) -> int:
        bits = 0
        for u in iter_bits(row):
            bits |= 1 << position[u]
        return bits

    def _to_vertex_set(self, internal: int) -> VertexSet:
        return VertexSet.from_ranks((self._order[i] for i in iter_bits(internal)), self.graph.V)

    def _colour_sort(self, candidates: int) -> tuple[list[int], list[int]]:
        """Greedy colouring of the complement on ``candidates``; returns vertices and their colour numbers."""
        order, colours = [], []
        uncoloured = candidates
        colour = 0
        while uncoloured:
            colour += 1
            pool = uncoloured
            while pool:
                low = pool & -pool
                v = low.bit_length() - 1
                uncoloured ^= low
                pool = (pool ^ low) & self._adj[v]
                order.append(v)
                colours.append(colour)
        return order, colours

    def _greedy(self) -> int:
        chosen, candidates = 0, self._full
        while candidates:
            low = candidates & -candidates
            chosen |= low
            candidates &= self._comp[low.bit_length() - 1]
        return chosen

    def _check_witness(self, witness: VertexSet) -> None:
        if not self.graph.is_independent(witness.bits):
            raise InvariantViolationError(f"solver witness of size {witness.size} spans an edge")

    # Maximum Independent Set
    # =======================

    def max_independent_set(self, lower_hint: int = 0, stop_at: int | None = None) -> tuple[int, VertexSet]:
        """
        Exact alpha(G) and a witness.

        Args:
            lower_hint (int): a size known to be achievable (e.g. N from a surviving star);
                primes the pruning
            stop_at (int | None): decision mode, return as soon as a set of at least this
                size is found; the returned size is then only a lower bound on alpha

        Returns:
            tuple: (size, witness VertexSet)
        """
        self.nodes = 0
        best_bits = self._greedy()
        best = best_bits.bit_count()
        if stop_at is not None and best >= stop_at:
            return self._finish(best, best_bits, exact=False)
        # Sets of size < lower_hint are not worth recording
        floor = max(best, lower_hint - 1)

        stack = [(0, 0, *self._colour_sort(self._full))]
        # each frame: (clique bits, clique size, candidate order, colours)
        candidates_left = [self._full]
        while stack:
            clique, size, order, colours = stack[-1]
            if not order:
                stack.pop()
                candidates_left.pop()
                continue
            v = order.pop()
            colour = colours.pop()
            if size + colour <= floor:
                stack.pop()
                candidates_left.pop()
                continue
            self.nodes += 1
            candidates = candidates_left[-1]
            new_clique = clique | (1 << v)
            new_candidates = candidates & self._comp[v]
            candidates_left[-1] = candidates & ~(1 << v)
            if new_candidates:
                stack.append((new_clique, size + 1, *self._colour_sort(new_candidates)))
                candidates_left.append(new_candidates)
            elif size + 1 > floor:
                floor = size + 1
                best, best_bits = size + 1, new_clique
                if stop_at is not None and best >= stop_at:
                    return self._finish(best, best_bits, exact=False)

        if best < lower_hint:
            raise PreconditionError(f"lower_hint {lower_hint} exceeds the independence number {best}")
        return self._finish(best, best_bits, exact=True)

    def _finish(self, size: int, bits: int, exact: bool) -> tuple[int, VertexSet]:
        witness = self._to_vertex_set(bits)
        if self.verify:
            self._check_witness(witness)
        if exact:
            self._alpha = size
        logger.debug("MIS search: size %d after %d nodes (exact=%s)", size, self.nodes, exact)
        return size, witness

    def independence_number(self) -> int:
        if self._alpha is None:
            self.max_independent_set()
        return self._alpha

    # Enumeration
    # ===========

    def _check_enumeration_budget(self) -> None:
        if self.graph.V > self.enumeration_budget:
            raise BudgetExceededError("EKR_ENUMERATION_BUDGET", self.enumeration_budget, self.graph.V)

    def _admit(self, found: set[int], bits: int) -> None:
        found.add(bits)
        if len(found) > self.enumeration_cap:
            raise BudgetExceededError("EKR_ENUMERATION_CAP", self.enumeration_cap, len(found))

    def _canonical(self, found: set[int]) -> list[VertexSet]:
        sets = [self._to_vertex_set(bits) for bits in found]
        sets.sort(key=lambda s: (-s.size, s.ranks()))
        if self.verify:
            for s in sets:
                self._check_witness(s)
        return sets

    def enumerate_maximum_independent_sets(self) -> list[VertexSet]:
        """Every independent set of size alpha(G), in canonical order."""
        self._check_enumeration_budget()
        alpha = self.independence_number()
        found: set[int] = set()
        stack = [(0, 0, *self._colour_sort(self._full))]
        candidates_left = [self._full]
        while stack:
            clique, size, order, colours = stack[-1]
            if not order:
                stack.pop()
                candidates_left.pop()
                continue
            v = order.pop()
            colour = colours.pop()
            if size + colour < alpha:
                stack.pop()
                candidates_left.pop()
                continue
            candidates = candidates_left[-1]
            new_clique = clique | (1 << v)
            new_candidates = candidates & self._comp[v]
            candidates_left[-1] = candidates & ~(1 << v)
            if size + 1 == alpha:
                self._admit(found, new_clique)
            elif new_candidates:
                stack.append((new_clique, size + 1, *self._colour_sort(new_candidates)))
                candidates_left.append(new_candidates)
        return self._canonical(found)

    def _maximal_sets(self, start: int, candidates: int, excluded: int, min_size: int) -> Iterator[int]:
        """Bron-Kerbosch with pivoting on the complement; yields maximal independent sets of size >= min_size."""
        stack = [(start, candidates, excluded)]
        while stack:
            clique, cand, excl = stack.pop()
            if not cand and not excl:
                if clique.bit_count() >= min_size:
                    yield clique
                continue
            if clique.bit_count() + cand.bit_count() < min_size:
                continue
            pivot_pool = cand | excl
            pivot = max(iter_bits(pivot_pool), key=lambda u: (cand & self._comp[u]).bit_count())
            for v in iter_bits(cand & ~self._comp[pivot]):
                bit = 1 << v
                stack.append((clique | bit, cand & self._comp[v], excl & self._comp[v]))
                cand &= ~bit
                excl |= bit

    def maximal_independent_sets(self, min_size: int = 1) -> list[VertexSet]:
        """Every maximal independent set with at least ``min_size`` vertices, canonical order."""
        self._check_enumeration_budget()
        found: set[int] = set()
        for bits in self._maximal_sets(0, self._full, 0, min_size):
            self._admit(found, bits)
        return self._canonical(found)

    def maximal_independent_sets_containing(self, v: int, min_size: int = 1) -> Iterator[VertexSet]:
        """Maximal independent sets through the vertex of rank v (lazy, unordered)."""
        self._check_enumeration_budget()
        internal = self._order.index(v)
        for bits in self._maximal_sets(1 << internal, self._comp[internal], 0, min_size):
            yield self._to_vertex_set(bits)

    def enumerate_independent_sets_at_least(self, t: int) -> list[VertexSet]:
        """
        All independent sets with at least t vertices.

        These are exactly the subsets of size >= t of the maximal independent
        sets of size >= t, so the maximal ones are enumerated first and then
        thinned out.

        Raises:
            PreconditionError: t < alpha(G) - 3 (the subset expansion would explode)
            BudgetExceededError: more sets than the enumeration cap
        """
        alpha = self.independence_number()
        if t < alpha - 3:
            raise PreconditionError(f"threshold {t} is below alpha - 3 = {alpha - 3}")
        if t > alpha:
            return []
        self._check_enumeration_budget()
        found: set[int] = set()
        for bits in self._maximal_sets(0, self._full, 0, max(t, 1)):
            members = [1 << i for i in iter_bits(bits)]
            for drop in range(len(members) - max(t, 0) + 1):
                for removed in itertools.combinations(members, drop):
                    self._admit(found, bits & ~sum(removed))
        found.discard(0)
        return self._canonical(found)


def brute_force_independence_number(graph: DenseGraph) -> int:
    """Exhaustive reference for small graphs: branch on the lowest vertex (take it or leave it)."""
    if graph.V > 30:
        raise BudgetExceededError("brute_force_vertices", 30, graph.V)

    @lru_cache(maxsize=None)
    def _alpha(candidates: int) -> int:
        if not candidates:
            return 0
        low = candidates & -candidates
        v = low.bit_length() - 1
        rest = candidates ^ low
        return max(_alpha(rest), 1 + _alpha(rest & ~graph.rows[v]))

    return _alpha((1 << graph.V) - 1)
