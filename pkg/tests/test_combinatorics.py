# Combinatorics Test Module
# =========================
# Counting oracles against brute force, the two ranking schemes, and the
# adjacency predicates on the vertex types.

import math

import pytest

from utils.combinatorics import (
    PerfectMatching,
    Permutation,
    all_matchings,
    all_permutations,
    common_edge_count,
    complete_graph_edges,
    derangement_count,
    derangement_count_by_recurrence,
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
from utils.data_utils import random_permutation_pair
from utils.errors import PreconditionError


# Counting
# ========

def test_double_factorial_values():
    """k!! for odd k, with the empty product at -1 and 0."""
    assert double_factorial(-1) == 1
    assert double_factorial(0) == 1
    assert double_factorial(1) == 1
    assert double_factorial(5) == 15
    assert double_factorial(7) == 105
    assert double_factorial(9) == 945


@pytest.mark.parametrize("k", [-2, -5, 2, 4])
def test_double_factorial_rejects_bad_arguments(k):
    with pytest.raises(PreconditionError):
        double_factorial(k)


def test_derangement_counts_small_values():
    assert [derangement_count(n) for n in range(8)] == [1, 0, 1, 2, 9, 44, 265, 1854]


def test_derangement_recurrences_agree():
    """Both recurrences give the same sequence well past the brute-force range."""
    for n in range(25):
        assert derangement_count(n) == derangement_count_by_recurrence(n)


def test_derangement_count_matches_brute_force():
    for n in range(1, 8):
        brute = sum(1 for sigma in all_permutations(n) if not sigma.fixed_points())
        assert brute == derangement_count(n)


def test_matching_derangement_degree_values():
    assert matching_derangement_degree(1) == 0
    assert matching_derangement_degree(2) == 2
    assert matching_derangement_degree(3) == 8
    assert matching_derangement_degree(4) == 60


def test_matching_derangement_degree_matches_brute_force():
    """Count matchings edge-disjoint from the rank-0 matching."""
    for n in range(2, 6):
        base = unrank_matching(n, 0)
        brute = sum(1 for m in all_matchings(n) if common_edge_count(base, m) == 0)
        assert brute == matching_derangement_degree(n)


def test_valencies_divisible_by_family_divisor():
    """d_n/(n-1) and the matching degree over (2n-2) are integers for every n checked."""
    for n in range(2, 21):
        assert derangement_count(n) % (n - 1) == 0
        assert matching_derangement_degree(n) % (2 * n - 2) == 0


def test_matching_count_is_odd_double_factorial():
    for n in range(1, 6):
        assert matching_count(n) == double_factorial(2 * n - 1)
        assert sum(1 for _ in all_matchings(n)) == matching_count(n)


# Vertex Types
# ============

def test_permutation_rejects_non_permutations():
    with pytest.raises(PreconditionError):
        Permutation((1, 1, 2))
    with pytest.raises(PreconditionError):
        Permutation((0, 1, 2))


def test_permutation_from_cycles_and_group_operations():
    """A 3-cycle composed with its inverse is the identity."""
    rho = Permutation.from_cycles(3, (1, 2, 3))
    assert rho.images == (2, 3, 1)
    assert rho(1) == 2
    assert rho.inverse().images == (3, 1, 2)
    assert rho.compose(rho.inverse()) == Permutation.identity(3)
    assert rho.compose(rho).images == (3, 1, 2)
    assert rho.fixed_points() == []
    assert Permutation.from_cycles(4, (1, 2)).fixed_points() == [3, 4]


def test_compose_rejects_size_mismatch():
    with pytest.raises(PreconditionError):
        Permutation.identity(3).compose(Permutation.identity(4))


def test_perfect_matching_canonical_form():
    m = PerfectMatching.from_pairs([(4, 3), (2, 1)])
    assert m.pairs == ((1, 2), (3, 4))
    assert m.n == 2
    assert m.contains_edge((2, 1))
    assert not m.contains_edge((1, 3))


def test_perfect_matching_rejects_bad_pairs():
    with pytest.raises(PreconditionError):
        PerfectMatching(((1, 2), (2, 3)))
    with pytest.raises(PreconditionError):
        PerfectMatching(((2, 1), (3, 4)))
    with pytest.raises(PreconditionError):
        PerfectMatching(((3, 4), (1, 2)))


# Ranking
# =======

def test_unrank_permutation_is_lexicographic():
    assert unrank_permutation(3, 0).images == (1, 2, 3)
    assert unrank_permutation(3, 1).images == (1, 3, 2)
    assert unrank_permutation(3, 5).images == (3, 2, 1)


def test_permutation_ranks_are_a_bijection():
    for n in range(1, 7):
        seen = [unrank_permutation(n, r) for r in range(math.factorial(n))]
        assert len(set(seen)) == len(seen)
        assert [rank_permutation(sigma) for sigma in seen] == list(range(math.factorial(n)))
        assert seen == list(all_permutations(n))


def test_unrank_matching_small_ranks():
    assert unrank_matching(2, 0).pairs == ((1, 2), (3, 4))
    assert unrank_matching(2, 1).pairs == ((1, 3), (2, 4))
    assert unrank_matching(2, 2).pairs == ((1, 4), (2, 3))


def test_matching_ranks_are_a_bijection():
    for n in range(1, 6):
        total = matching_count(n)
        seen = [unrank_matching(n, r) for r in range(total)]
        assert len(set(seen)) == total
        assert [rank_matching(m) for m in seen] == list(range(total))
        assert seen == list(all_matchings(n))


@pytest.mark.parametrize("n, r", [(3, -1), (3, 6), (4, 24)])
def test_unrank_permutation_out_of_range(n, r):
    with pytest.raises(PreconditionError):
        unrank_permutation(n, r)


def test_unrank_matching_out_of_range():
    with pytest.raises(PreconditionError):
        unrank_matching(3, 15)


def test_matchings_containing_lists_one_star():
    """Every listed matching contains the edge; there are (2n-3)!! of them."""
    for n in range(2, 5):
        for edge in complete_graph_edges(n):
            members = list(matchings_containing(n, edge))
            assert len(members) == double_factorial(2 * n - 3)
            assert len(set(members)) == len(members)
            assert all(m.contains_edge(edge) for m in members)


def test_complete_graph_edges_order():
    assert complete_graph_edges(2) == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
    assert len(complete_graph_edges(4)) == math.comb(8, 2)


# Adjacency Predicates
# ====================

def test_relative_derangement_small_cases():
    identity = Permutation.identity(3)
    assert relative_derangement(identity, Permutation.from_cycles(3, (1, 2, 3)))
    assert not relative_derangement(identity, Permutation.from_cycles(3, (1, 2)))
    assert not relative_derangement(identity, identity)


def test_relative_derangement_matches_quotient(fake):
    """sigma and tau disagree everywhere iff sigma tau^{-1} has no fixed point."""
    for _ in range(200):
        sigma, tau = random_permutation_pair(fake, 6)
        quotient = sigma.compose(tau.inverse())
        assert relative_derangement(sigma, tau) == (not quotient.fixed_points())
        assert relative_derangement(sigma, tau) == relative_derangement(tau, sigma)


def test_common_edge_count():
    p = PerfectMatching.from_pairs([(1, 2), (3, 4), (5, 6)])
    q = PerfectMatching.from_pairs([(1, 2), (3, 5), (4, 6)])
    r = PerfectMatching.from_pairs([(1, 3), (2, 5), (4, 6)])
    assert common_edge_count(p, p) == 3
    assert common_edge_count(p, q) == 1
    assert common_edge_count(p, r) == 0
