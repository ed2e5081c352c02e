# FKN Analysis Test Module
# ========================
# Star coefficients, the moments of h computed both ways, the identity and
# inequality suites, the round(c)-star approximation and the stability check
# on the perfect matching graphs M_3 and M_4.

from fractions import Fraction

import pytest

from lab.fkn_analysis import (
    FknAnalyzer,
    analyzer_for,
    optim_lower_bound,
    round_half_up,
    stability_check,
)
from lab.graph_oracle import StarCenter, VertexSet
from utils.data_utils import make_faker, random_vertex_subset
from utils.errors import BudgetExceededError, PreconditionError
from utils.report_utils import FAIL, PASS, REPORT, any_failed

# Inequalities that hold for every vertex set, whatever its shape
UNCONDITIONAL_BOUNDS = {
    "b_square_sum_bound",
    "pair_sum_upper_bound",
    "triple_product_sum_nonnegative",
    "triangle_sum_lower_bound",
    "third_moment_bound",
    "cube_sum_norm_bound",
}


@pytest.fixture(scope="module")
def analyzer3():
    return analyzer_for(3)


@pytest.fixture(scope="module")
def analyzer4():
    return analyzer_for(4)


def _corpus(analyzer, count, seed):
    fake = make_faker(seed)
    return [random_vertex_subset(fake, analyzer.V) for _ in range(count)]


@pytest.fixture(scope="module")
def corpus3(analyzer3):
    return _corpus(analyzer3, 100, seed=303)


@pytest.fixture(scope="module")
def corpus4(analyzer4):
    return _corpus(analyzer4, 25, seed=404)


def _star(analyzer, a, b):
    return analyzer.oracle.star_set(StarCenter.edge(a, b))


# Coefficients
# ============

def test_star_coefficients_of_a_star(analyzer3):
    coeffs = analyzer3.star_coefficients(_star(analyzer3, 1, 2))
    assert coeffs.c == 1
    assert coeffs.theta == Fraction(1, 5)
    assert coeffs.kappa == Fraction(4, 3)
    assert coeffs.a[(1, 2)] == 1
    assert coeffs.b[(1, 2)] == Fraction(4, 5)
    inside = [e for e in coeffs.b if not {1, 2} & set(e)]
    meeting = [e for e in coeffs.b if e != (1, 2) and {1, 2} & set(e)]
    assert len(inside) == 6 and len(meeting) == 8
    assert all(coeffs.b[e] == Fraction(2, 15) for e in inside)
    assert all(coeffs.b[e] == Fraction(-1, 5) for e in meeting)
    assert coeffs.ranked_edges()[0] == ((1, 2), Fraction(4, 5))


def test_coefficients_sum_to_c_around_every_point(fake, analyzer3):
    for _ in range(30):
        A = random_vertex_subset(fake, analyzer3.V)
        coeffs = analyzer3.star_coefficients(A)
        for x in range(1, 7):
            assert sum(v for e, v in coeffs.b.items() if x in e) == 0


def test_analyzer_rejects_small_n_and_foreign_sets(analyzer3):
    with pytest.raises(PreconditionError):
        FknAnalyzer(2)
    with pytest.raises(PreconditionError):
        analyzer3.star_coefficients(VertexSet.empty(105))


# Moments
# =======

def test_moments_of_a_star(analyzer3):
    report = analyzer3.h_moments(_star(analyzer3, 1, 2))
    assert report.mean_h == 0
    assert report.sum_b2 == Fraction(16, 15)
    assert report.sum_b3 == Fraction(104, 225)
    assert report.second_moment == Fraction(64, 225)
    assert report.third_moment == Fraction(256, 1125)
    assert report.triangle_ordered == Fraction(816, 675)
    assert report.triangle_ordered == 6 * report.triangle_unordered
    assert report.sigma3 == 12
    assert report.residual_sq == 0
    assert report.epsilon == 0


def test_g_and_h_are_affine_in_the_projection(analyzer3):
    gh = analyzer3.gh_affine_check(_star(analyzer3, 1, 2))
    assert gh.g_max_deviation == 0
    assert gh.h_max_deviation == 0
    assert gh.g_inside == Fraction(5, 3)
    assert gh.g_outside == Fraction(1, 3)
    assert gh.mean_h == 0


def test_moments_agree_on_random_sets(fake, analyzer3):
    """Pointwise and coefficient moments agree (h_moments raises otherwise)."""
    for _ in range(25):
        A = random_vertex_subset(fake, analyzer3.V)
        report = analyzer3.h_moments(A)
        assert report.second_moment == report.second_moment_from_sums
        assert report.third_moment == report.third_moment_from_sums


# Check Suites
# ============

def test_identity_suite_passes_on_the_m3_corpus(analyzer3, corpus3):
    for A in corpus3:
        checks = analyzer3.identity_suite(A)
        assert [c.check for c in checks if c.status != PASS] == []


@pytest.mark.slow
def test_identity_suite_passes_on_the_m4_corpus(analyzer4, corpus4):
    for A in corpus4:
        checks = analyzer4.identity_suite(A)
        assert [c.check for c in checks if c.status != PASS] == []


def test_pair_sum_identity_on_a_star(analyzer3):
    """Each cherry of K_{2n} lies in exactly one triple, so sigma2 = c^2 n - sum a^2."""
    report = analyzer3.h_moments(_star(analyzer3, 1, 2))
    assert report.sum_a2 == Fraction(5, 3)
    assert report.sigma2 == Fraction(4, 3)
    checks = {c.check: c for c in analyzer3.identity_suite(_star(analyzer3, 1, 2))}
    assert checks["pair_sum_identity"].status == PASS
    assert checks["pair_sum_identity"].rhs == Fraction(4, 3)


def test_identity_suite_on_the_empty_set(analyzer3):
    checks = analyzer3.identity_suite(VertexSet.empty(analyzer3.V))
    assert all(c.status == PASS for c in checks)


def test_unconditional_bounds_hold_on_the_m3_corpus(analyzer3, corpus3):
    for A in corpus3:
        checks = {c.check: c for c in analyzer3.inequality_suite(A)}
        assert UNCONDITIONAL_BOUNDS <= set(checks)
        assert [name for name in UNCONDITIONAL_BOUNDS if checks[name].status == FAIL] == []


@pytest.mark.slow
def test_unconditional_bounds_hold_on_the_m4_corpus(analyzer4, corpus4):
    for A in corpus4:
        checks = {c.check: c for c in analyzer4.inequality_suite(A)}
        assert [name for name in UNCONDITIONAL_BOUNDS if checks[name].status == FAIL] == []


def test_b_square_sum_bound_is_tight_at_a_star(analyzer3):
    checks = {c.check: c for c in analyzer3.inequality_suite(_star(analyzer3, 1, 2))}
    bound = checks["b_square_sum_bound"]
    assert bound.lhs == bound.rhs == Fraction(16, 15)
    assert bound.status == PASS


def test_inequality_chain_on_a_star(analyzer3):
    """For a star every premise holds and the lower bounds are attained."""
    checks = {c.check: c for c in analyzer3.inequality_suite(_star(analyzer3, 1, 2))}
    assert not any_failed(checks.values())
    assert checks["cube_moment_lower_bound"].status == PASS
    assert checks["third_moment_lower_bound"].status == PASS
    assert checks["third_moment_lower_bound"].lhs == pytest.approx(256 / 1125)
    assert checks["third_moment_lower_bound"].rhs == pytest.approx(256 / 1125)
    assert checks["near_boolean_residuals"].status == REPORT
    assert not checks["near_boolean_residuals"].binding


def test_inequality_chain_on_a_union_of_stars(analyzer4):
    A = _star(analyzer4, 1, 2).union(_star(analyzer4, 3, 4))
    checks = analyzer4.inequality_suite(A)
    assert not any_failed(checks)
    assert all(c.status == PASS for c in checks if c.binding)


# Optimization Bound
# ==================

def test_optim_lower_bound_value():
    assert optim_lower_bound(Fraction(1, 5), 1, 0, Fraction(1, 25)) == pytest.approx(-0.028, abs=1e-12)


def test_optim_lower_bound_without_slack_is_the_step_function():
    assert optim_lower_bound(Fraction(1, 5), 2, 1, 0) == pytest.approx(0.2 * 8 + 0.8 * 1)
    fake = make_faker(515)
    for _ in range(100):
        theta = Fraction(fake.random_int(min=1, max=99), 100)
        L = Fraction(fake.random_int(min=0, max=50), 10)
        H = L + Fraction(fake.random_int(min=1, max=50), 10)
        assert optim_lower_bound(theta, H, L, 0) == float(theta * H ** 3 + (1 - theta) * L ** 3)


@pytest.mark.parametrize(
    "theta, H, L, eta",
    [(0, 1, 0, 0), (1, 1, 0, 0), (0.5, 1, 1, 0), (0.5, 1, -1, 0), (0.5, 1, 0, -0.1), (0.2, 1, 0, 0.2)],
)
def test_optim_lower_bound_preconditions(theta, H, L, eta):
    with pytest.raises(PreconditionError):
        optim_lower_bound(theta, H, L, eta)


def test_round_half_up():
    assert round_half_up(Fraction(1, 2)) == 1
    assert round_half_up(Fraction(3, 2)) == 2
    assert round_half_up(Fraction(7, 5)) == 1
    assert round_half_up(Fraction(9, 5)) == 2
    assert round_half_up(0) == 0
    with pytest.raises(PreconditionError):
        round_half_up(-1)


# Star Approximation
# ==================

def test_approximation_of_a_star_is_exact(analyzer3):
    report = analyzer3.star_approximation(_star(analyzer3, 1, 2))
    assert report.rounded == 1
    assert report.centers == [(1, 2)]
    assert report.symdiff == 0
    assert report.large_count == 1
    assert report.rounding_gap == 0
    assert report.overlap_check.status == PASS


def test_approximation_after_swapping_one_vertex(analyzer3):
    star = _star(analyzer3, 1, 2)
    inside = next(iter(star))
    outside = next(r for r in range(analyzer3.V) if r not in star)
    A = star.without_vertex(inside).with_vertex(outside)
    report = analyzer3.star_approximation(A)
    assert report.c == 1
    assert report.centers == [(1, 2)]
    assert report.symdiff == 2
    assert report.overlap_check.status == PASS


def test_approximation_of_two_stars(analyzer4):
    union = _star(analyzer4, 1, 2).union(_star(analyzer4, 3, 4))
    report = analyzer4.star_approximation(union)
    assert union.size == 27
    assert report.c == Fraction(9, 5)
    assert report.rounded == 2
    assert sorted(report.centers) == [(1, 2), (3, 4)]
    assert report.symdiff == 0
    assert report.overlap_check.status == PASS

    # Drop the three matchings containing both edges
    split = _star(analyzer4, 1, 2).symmetric_difference(_star(analyzer4, 3, 4))
    report = analyzer4.star_approximation(split)
    assert split.size == 24
    assert report.c == Fraction(8, 5)
    assert report.rounded == 2
    assert report.symdiff == 3


def test_approximation_of_three_stars_through_a_point(analyzer4):
    """Stars of edges sharing a point are disjoint, so c = 3 and the three centers lead the b ranking."""
    A = _star(analyzer4, 1, 2).union(_star(analyzer4, 1, 3)).union(_star(analyzer4, 1, 4))
    report = analyzer4.star_approximation(A)
    assert A.size == 45
    assert report.c == 3
    assert report.rounded == 3
    assert sorted(report.centers) == [(1, 2), (1, 3), (1, 4)]
    assert report.symdiff == 0
    assert report.overlap_check.status == PASS


def test_approximation_of_three_stars_with_disjoint_centers(analyzer4):
    """|A| = 3*15 - 3*3 + 1 = 37, so round(c) = 2 and one of the three tied stars is left out."""
    A = _star(analyzer4, 1, 2).union(_star(analyzer4, 3, 4)).union(_star(analyzer4, 5, 6))
    report = analyzer4.star_approximation(A)
    assert A.size == 37
    assert report.c == Fraction(37, 15)
    assert report.rounded == 2
    assert set(report.centers) < {(1, 2), (3, 4), (5, 6)}
    assert report.symdiff == 10
    assert report.symdiff <= 2 * 3 * 3
    assert report.overlap_check.status == PASS


def test_sorted_b_is_non_increasing(fake, analyzer3):
    A = random_vertex_subset(fake, analyzer3.V, size=5)
    report = analyzer3.star_approximation(A)
    assert report.sorted_b == sorted(report.sorted_b, reverse=True)
    assert report.prefix_sum == sum(report.sorted_b[: report.rounded])


# Stability
# =========

def test_stability_on_m3():
    """Every independent set of M_3 lies in a star."""
    report = stability_check(3)
    assert report.threshold == 3
    assert len(report.large_sets) == 15
    assert all(label is not None for _, _, label in report.large_sets)
    assert report.largest_outside_stars == 0
    assert report.witness is None
    assert not any_failed(report.checks)


def test_stability_below_N_is_informational():
    report = stability_check(3, threshold=2)
    listing = report.checks[0]
    assert listing.status == REPORT
    assert not listing.binding


@pytest.mark.slow
def test_stability_on_m4():
    """The largest intersecting family of M_4 in no star holds every matching with two of three fixed disjoint edges."""
    report = stability_check(4)
    assert report.threshold == 15
    assert len(report.large_sets) == 28
    assert report.largest_outside_stars == 7
    assert report.witness is not None and len(report.witness) == report.largest_outside_stars
    assert not any_failed(report.checks)


@pytest.mark.slow
def test_stability_on_m4_one_below_N():
    """delta = 1/15 lowers the listing threshold to 14; only the 28 stars reach it."""
    report = stability_check(4, delta=Fraction(1, 15))
    assert report.threshold == 14
    assert len(report.large_sets) == 28
    assert all(label is not None for _, _, label in report.large_sets)
    listing = report.checks[0]
    assert listing.status == REPORT
    assert listing.lhs == 0
    assert report.largest_outside_stars == 7
    assert not any_failed(report.checks)


def test_stability_limits():
    with pytest.raises(PreconditionError):
        stability_check(2)
    with pytest.raises(BudgetExceededError):
        stability_check(5)
