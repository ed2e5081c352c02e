# FKN Analysis Module
# ===================
# Exact-rational machinery for the stability of intersecting families of
# perfect matchings: star coefficients a_e / b_e of a vertex set A of M_n,
# the functions g and h built from them, their moments computed two ways,
# the chain of inequalities that forces a near-independent A to be close to
# a union of round(c) stars, the constructive star approximation itself, and
# the exhaustive stability check at small n.
#
# Notation: V = (2n-1)!!, N = (2n-3)!!, c = |A|/N, theta = c/(2n-1),
# kappa = (2n-2)/(2n-3).

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from lab.graph_oracle import MATCHING, GraphFamily, GraphOracle, StarCenter, VertexSet
from lab.mis_solver import MisSolver
from lab.spectral import SetFunction, StarSpaceProjector, complement_least_eigenvalue, independent_residual_bound
from utils.combinatorics import Edge, double_factorial
from utils.errors import BudgetExceededError, InvariantViolationError, PreconditionError
from utils.report_utils import FAIL, PASS, PREMISE_FAILURE, REPORT, CheckResult, compare

logger = logging.getLogger(__name__)

# Slack allowed when a check involves square roots
FLOAT_TOLERANCE = 1e-12


# Coefficients and Moments
# ========================

@dataclass(frozen=True)
class FknCoefficients:
    """
    Star coefficients of A.

    Attributes:
        n (int): matchings of K_{2n}
        c (Fraction): |A| / (2n-3)!!
        a (dict[Edge, Fraction]): |A intersect S_e| / (2n-3)!!
        b (dict[Edge, Fraction]): a_e - c/(2n-1)
    """

    n: int
    c: Fraction
    a: dict[Edge, Fraction]
    b: dict[Edge, Fraction]

    @property
    def theta(self) -> Fraction:
        return self.c / (2 * self.n - 1)

    @property
    def kappa(self) -> Fraction:
        return Fraction(2 * self.n - 2, 2 * self.n - 3)

    def ranked_edges(self) -> list[tuple[Edge, Fraction]]:
        """Edges by non-increasing b_e, ties in canonical edge order."""
        return sorted(self.b.items(), key=lambda kv: (-kv[1], kv[0]))


@dataclass(frozen=True)
class MomentReport:
    """
    Moments of h computed pointwise and from the b coefficients, plus the
    auxiliary sums of the third-moment argument.

    The triangle sums run over triples of edges forming a triangle in K_{2n};
    ``triangle_ordered`` counts each vertex triple 6 times, ``triangle_unordered`` once.
    """

    n: int
    c: Fraction
    mean_h: Fraction
    second_moment: Fraction
    third_moment: Fraction
    mean_h_from_sums: Fraction
    second_moment_from_sums: Fraction
    third_moment_from_sums: Fraction
    sum_b2: Fraction
    sum_b3: Fraction
    triangle_ordered: Fraction
    triangle_unordered: Fraction
    sigma1: Fraction
    sigma2: Fraction
    sigma3: Fraction
    sum_a2: Fraction
    residual_sq: Fraction
    epsilon: Fraction


@dataclass(frozen=True)
class GhReport:
    """Deviation of g and h from their affine expressions in f1 (both must be 0)."""

    g_max_deviation: Fraction
    h_max_deviation: Fraction
    g_inside: Fraction | None
    g_outside: Fraction | None
    mean_h: Fraction


@dataclass(frozen=True)
class ApproximationReport:
    """
    The round(c)-star approximation B of A.

    Attributes:
        centers (list[Edge]): the round(c) edges with the largest b_e
        approximation (VertexSet): union of their stars
        symdiff (int): |A symmetric-difference B|
        sorted_b (list[Fraction]): all b_e in non-increasing order
        large_count (int): number of b_e >= 1/2
        prefix_sum (Fraction): sum of the round(c) largest b_e
        rounding_gap (Fraction): |c - round(c)|
        overlap_check (CheckResult): |A n B| >= sum |A n S_e| - C(r,2)(2n-5)!!
    """

    c: Fraction
    rounded: int
    centers: list[Edge]
    approximation: VertexSet
    symdiff: int
    sorted_b: list[Fraction]
    large_count: int
    prefix_sum: Fraction
    rounding_gap: Fraction
    overlap_check: CheckResult


def round_half_up(c) -> int:
    """Nearest integer to c >= 0, halves rounded up."""
    c = Fraction(c)
    if c < 0:
        raise PreconditionError(f"round_half_up expects c >= 0, got {c}")
    return math.floor(c + Fraction(1, 2))


def optim_lower_bound(theta, H, L, eta) -> float:
    """
    Lower bound on E[phi^3] for a nonnegative phi with the mean of the two-level
    step function Phi = H on [0, theta), L on [theta, 1] and E[(phi - Phi)^2] <= eta:

    theta H^3 + (1-theta) L^3 - 3 (H^2 - L^2) sqrt(theta (1-theta) eta)
      + 3 ((1-theta) L + theta H) eta - (1 - 2 theta) / sqrt(theta (1-theta)) eta^(3/2)

    Raises:
        PreconditionError: unless 0 < theta < 1, H > L >= 0, eta >= 0 and
            eta / (theta (1-theta)) <= (H-L)^2
    """
    theta, H, L, eta = (Fraction(x) for x in (theta, H, L, eta))
    if not 0 < theta < 1:
        raise PreconditionError(f"theta must lie in (0, 1), got {theta}")
    if not H > L >= 0:
        raise PreconditionError(f"need H > L >= 0, got H={H}, L={L}")
    if eta < 0:
        raise PreconditionError(f"eta must be nonnegative, got {eta}")
    spread = theta * (1 - theta)
    if eta / spread > (H - L) ** 2:
        raise PreconditionError(f"eta/(theta(1-theta)) = {eta / spread} exceeds (H-L)^2 = {(H - L) ** 2}")
    exact_part = theta * H ** 3 + (1 - theta) * L ** 3 + 3 * ((1 - theta) * L + theta * H) * eta
    if eta == 0:
        return float(exact_part)
    root = math.sqrt(spread * eta)
    return (
        float(exact_part)
        - 3 * float(H * H - L * L) * root
        - float(1 - 2 * theta) / math.sqrt(spread) * float(eta) ** 1.5
    )


class FknAnalyzer:
    """
    All coefficient, moment and inequality computations for subsets of M_n.

    One analyzer per n keeps the oracle and the star-space projector, which
    are the expensive parts.

    Attributes:
        n (int): size parameter, n >= 3
        oracle (GraphOracle): the perfect matching graph
        edges (list[Edge]): edges of K_{2n}, aligned with the oracle's star order
    """

    def __init__(self, n: int, oracle: GraphOracle | None = None):
        if n < 3:
            raise PreconditionError(f"the coefficient machinery needs n >= 3, got {n}")
        self.n = n
        self.oracle = oracle or GraphOracle(GraphFamily(MATCHING, n))
        self.edges: list[Edge] = [(c.a, c.b) for c in self.oracle.star_centers]
        self.N = self.oracle.params.N
        self.V = self.oracle.V
        self._projector: StarSpaceProjector | None = None

    @property
    def projector(self) -> StarSpaceProjector:
        if self._projector is None:
            self._projector = StarSpaceProjector(self.oracle)
        return self._projector

    def _check_set(self, A: VertexSet) -> None:
        if A.universe != self.V:
            raise PreconditionError(f"set lives on {A.universe} vertices, M_{self.n} has {self.V}")

    # Coefficients
    # ------------

    def star_coefficients(self, A: VertexSet) -> FknCoefficients:
        """
        a_e, b_e and c for A, after checking that around every point x of K_{2n}
        the a_e sum to c and the b_e sum to 0.

        Raises:
            InvariantViolationError: if those sums fail (an internal bug)
        """
        self._check_set(A)
        n = self.n
        overlaps = self.oracle.star_overlaps(A)
        c = Fraction(A.size, self.N)
        theta = c / (2 * n - 1)
        a = {e: Fraction(k, self.N) for e, k in zip(self.edges, overlaps)}
        b = {e: value - theta for e, value in a.items()}
        for x in range(1, 2 * n + 1):
            around = [e for e in self.edges if x in e]
            if sum(a[e] for e in around) != c or sum(b[e] for e in around) != 0:
                raise InvariantViolationError(f"star coefficients around point {x} do not sum to c")
        return FknCoefficients(n, c, a, b)

    def _edge_function(self, weights: dict[Edge, Fraction]) -> SetFunction:
        coeffs = [weights[e] for e in self.edges]
        return self.projector.combine(coeffs)

    def g_function(self, coeffs: FknCoefficients) -> SetFunction:
        """g = sum a_e 1_{S_e}."""
        return self._edge_function(coeffs.a)

    def h_function(self, coeffs: FknCoefficients) -> SetFunction:
        """h = sum b_e 1_{S_e}."""
        return self._edge_function(coeffs.b)

    # Triangle Sums
    # -------------

    def _triangle_sums(self, coeffs: FknCoefficients) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        """(sum of b-triangles over vertex triples, sigma1, sigma2, sigma3)."""
        a, b = coeffs.a, coeffs.b
        points = range(1, 2 * self.n + 1)
        tri_b = sig1 = sig2 = sig3 = Fraction(0)
        for x in points:
            for y in range(x + 1, 2 * self.n + 1):
                for z in range(y + 1, 2 * self.n + 1):
                    axy, axz, ayz = a[(x, y)], a[(x, z)], a[(y, z)]
                    tri_b += b[(x, y)] * b[(x, z)] * b[(y, z)]
                    sig1 += axy * axz * ayz
                    sig2 += axy * axz + axy * ayz + axz * ayz
                    sig3 += axy + axz + ayz
        return tri_b, sig1, sig2, sig3

    # Moments
    # -------

    def h_moments(self, A: VertexSet) -> MomentReport:
        """
        E[h], E[h^2], E[h^3] pointwise and from the b coefficients.

        Raises:
            InvariantViolationError: if the two computations of any moment disagree
        """
        n = self.n
        coeffs = self.star_coefficients(A)
        h = self.h_function(coeffs)
        b_values = list(coeffs.b.values())
        sum_b = sum(b_values, Fraction(0))
        sum_b2 = sum((x * x for x in b_values), Fraction(0))
        sum_b3 = sum((x ** 3 for x in b_values), Fraction(0))
        tri_unordered, sig1, sig2, sig3 = self._triangle_sums(coeffs)
        tri_ordered = 6 * tri_unordered

        mean_sums = sum_b / (2 * n - 1)
        second_sums = Fraction(2 * n - 2, (2 * n - 1) * (2 * n - 3)) * sum_b2
        third_sums = (
            Fraction(2 * (n - 2), (2 * n - 3) * (2 * n - 5)) * sum_b3
            - tri_ordered / ((2 * n - 1) * (2 * n - 3) * (2 * n - 5))
        )
        mean, second, third = h.moment(1), h.moment(2), h.moment(3)
        for name, pointwise, from_sums in (
            ("E[h]", mean, mean_sums),
            ("E[h^2]", second, second_sums),
            ("E[h^3]", third, third_sums),
        ):
            if pointwise != from_sums:
                raise InvariantViolationError(f"{name} disagrees: pointwise {pointwise}, from coefficients {from_sums}")

        _, residual = self.projector.project_set(A)
        epsilon = residual * (2 * n - 1) / coeffs.c if coeffs.c else Fraction(0)
        return MomentReport(
            n=n,
            c=coeffs.c,
            mean_h=mean,
            second_moment=second,
            third_moment=third,
            mean_h_from_sums=mean_sums,
            second_moment_from_sums=second_sums,
            third_moment_from_sums=third_sums,
            sum_b2=sum_b2,
            sum_b3=sum_b3,
            triangle_ordered=tri_ordered,
            triangle_unordered=tri_unordered,
            sigma1=sig1,
            sigma2=sig2,
            sigma3=sig3,
            sum_a2=sum((x * x for x in coeffs.a.values()), Fraction(0)),
            residual_sq=residual,
            epsilon=epsilon,
        )

    def gh_affine_check(self, A: VertexSet) -> GhReport:
        """
        Compare g and h with kappa f1 + c(n-2)/(2n-3) and kappa f1 - c(2n-2)/((2n-1)(2n-3)),
        where f1 is the projection of 1_A onto the star space.
        """
        n = self.n
        coeffs = self.star_coefficients(A)
        f1, _ = self.projector.project_set(A)
        kappa = coeffs.kappa
        g_expected = f1.scaled(kappa).shifted(coeffs.c * (n - 2) / (2 * n - 3))
        h_expected = f1.scaled(kappa).shifted(-coeffs.c * (2 * n - 2) / ((2 * n - 1) * (2 * n - 3)))
        g, h = self.g_function(coeffs), self.h_function(coeffs)
        inside = next(iter(A), None)
        outside = next((r for r in range(self.V) if r not in A), None)
        return GhReport(
            g_max_deviation=(g - g_expected).max_abs(),
            h_max_deviation=(h - h_expected).max_abs(),
            g_inside=g[inside] if inside is not None else None,
            g_outside=g[outside] if outside is not None else None,
            mean_h=h_expected.moment(1),
        )

    # Check Suites
    # ------------

    def identity_suite(self, A: VertexSet) -> list[CheckResult]:
        """Exact identities; every one of them must pass for every A."""
        n = self.n
        report = self.h_moments(A)
        coeffs = self.star_coefficients(A)
        gh = self.gh_affine_check(A)
        c, kappa = report.c, coeffs.kappa
        theta = coeffs.theta
        beta = c * kappa / (2 * n - 1)
        f1, _ = self.projector.project_set(A)

        disjoint_defects = []
        for e in self.edges:
            disjoint_sum = sum((coeffs.b[f] for f in self.edges if not set(e) & set(f)), Fraction(0))
            if disjoint_sum != coeffs.b[e]:
                disjoint_defects.append(e)

        expansion = report.sigma1 - theta * report.sigma2 + theta ** 2 * report.sigma3 - math.comb(2 * n, 3) * theta ** 3
        second_from_residual = (
            c * kappa ** 2 * (1 - report.epsilon) / (2 * n - 1) - c ** 2 * kappa ** 2 / (2 * n - 1) ** 2
        )
        return [
            CheckResult("coefficient_sums_around_points", PASS, c, c),
            compare("mean_h_zero", report.mean_h, Fraction(0), "=="),
            compare("second_moment_identity", report.second_moment, report.second_moment_from_sums, "=="),
            compare("third_moment_identity", report.third_moment, report.third_moment_from_sums, "=="),
            compare("triangle_sum_expansion", report.triangle_unordered, expansion, "=="),
            compare("pair_sum_identity", report.sigma2, c * c * n - report.sum_a2, "=="),
            compare("edge_sum_identity", report.sigma3, Fraction((2 * n - 2) * n) * c, "=="),
            compare("g_affine_in_projection", gh.g_max_deviation, Fraction(0), "=="),
            compare("h_affine_in_projection", gh.h_max_deviation, Fraction(0), "=="),
            compare("second_moment_from_residual", report.second_moment, second_from_residual, "=="),
            compare(
                "cube_moment_link",
                kappa ** 3 * f1.moment(3),
                report.third_moment + 3 * beta * report.second_moment + beta ** 3,
                "==",
            ),
            CheckResult(
                "disjoint_edge_sums",
                PASS if not disjoint_defects else FAIL,
                len(disjoint_defects),
                0,
                disjoint_defects or None,
            ),
        ]

    def inequality_suite(self, A: VertexSet) -> list[CheckResult]:
        """
        The inequality chain, evaluated exactly where possible.

        Checks whose premises fail are reported as premise-failure; the
        third-moment bound with the unordered-triangle constant and the b^3
        lower bound derived from it are reported but not binding.
        """
        n = self.n
        report = self.h_moments(A)
        coeffs = self.star_coefficients(A)
        c, kappa, theta, eps = report.c, coeffs.kappa, coeffs.theta, report.epsilon
        q = 2 * n - 1
        checks = [
            compare("b_square_sum_bound", report.sum_b2, kappa * c - kappa * c * c / q, "<="),
            compare("pair_sum_upper_bound", report.sigma2, c * c * n, "<="),
            compare("triple_product_sum_nonnegative", report.sigma1, Fraction(0), ">="),
            compare("triangle_sum_lower_bound", report.triangle_unordered, -c ** 3 * n * (2 * n + 1) / (3 * q * q), ">="),
        ]

        cube_coeff = Fraction(2 * (n - 2), (2 * n - 3) * (2 * n - 5))
        unordered_constant = c ** 3 * n * (2 * n + 1) / (3 * q ** 3 * (2 * n - 3) * (2 * n - 5))
        checks.append(
            compare("third_moment_bound", report.third_moment, cube_coeff * report.sum_b3 + 6 * unordered_constant, "<=")
        )
        checks.append(
            compare(
                "third_moment_bound_unordered_constant",
                report.third_moment,
                cube_coeff * report.sum_b3 + unordered_constant,
                "<=",
                binding=False,
            )
        )

        f1, _ = self.projector.project_set(A)
        cube_moment = f1.moment(3)
        eta = eps * c / q
        nonnegative = min(f1.values, default=Fraction(0)) >= 0
        optim_ok = nonnegative and 0 < theta < 1 and eta <= theta * (1 - theta)
        if optim_ok:
            checks.append(
                compare(
                    "cube_moment_lower_bound",
                    float(cube_moment),
                    optim_lower_bound(theta, 1, 0, eta),
                    ">=",
                    tolerance=FLOAT_TOLERANCE,
                )
            )
        else:
            checks.append(CheckResult("cube_moment_lower_bound", PREMISE_FAILURE, float(cube_moment), None))

        chain_ok = optim_ok and eps <= Fraction(1, 2) and c <= Fraction(q, 2)
        root_eps = math.sqrt(eps)
        third_lower = float(kappa ** 3) * (
            float(c / q) - 4 * float(c) * root_eps / q - float(3 * c * c / q ** 2) + float(2 * c ** 3 / q ** 3)
        )
        ratio = Fraction((2 * n - 5) * (2 * n - 2) ** 3, (2 * n - 4) * (2 * n - 3) ** 2 * q)
        b3_lower = (
            float(ratio * c)
            - 4 * float(ratio * c) * root_eps
            - float(3 * ratio * c * c / q)
            + float((2 * ratio - Fraction(n * (2 * n + 1), 3 * (2 * n - 4) * q)) * c ** 3 / q ** 2)
        )
        if chain_ok:
            checks.append(compare("third_moment_lower_bound", float(report.third_moment), third_lower, ">=", tolerance=FLOAT_TOLERANCE))
            checks.append(
                compare("b_cube_sum_lower_bound", float(report.sum_b3), b3_lower, ">=", binding=False, tolerance=FLOAT_TOLERANCE)
            )
        else:
            checks.append(CheckResult("third_moment_lower_bound", PREMISE_FAILURE, float(report.third_moment), third_lower))
            checks.append(CheckResult("b_cube_sum_lower_bound", PREMISE_FAILURE, float(report.sum_b3), b3_lower, binding=False))

        checks.append(
            compare("cube_sum_norm_bound", float(report.sum_b3), float(report.sum_b2) ** 1.5, "<=", tolerance=FLOAT_TOLERANCE)
        )
        checks.append(
            CheckResult(
                "near_boolean_residuals",
                REPORT,
                report.sum_b3 - c,
                report.sum_b2 - report.sum_b3,
                {"epsilon": eps, "c": c},
                binding=False,
            )
        )
        return checks

    # Star Approximation
    # ------------------

    def star_approximation(self, A: VertexSet) -> ApproximationReport:
        """Approximate A by the union of the stars at the round(c) edges of largest b_e."""
        n = self.n
        coeffs = self.star_coefficients(A)
        ranked = coeffs.ranked_edges()
        rounded = round_half_up(coeffs.c)
        centers = [e for e, _ in ranked[:rounded]]
        approximation = VertexSet.empty(self.V)
        for a, b in centers:
            approximation = approximation.union(self.oracle.star_set(StarCenter(a, b)))
        sorted_b = [value for _, value in ranked]

        covered = A.intersection(approximation).size
        overlap_sum = sum(coeffs.a[e] * self.N for e in centers)
        overlap_rhs = overlap_sum - math.comb(rounded, 2) * double_factorial(2 * n - 5)
        return ApproximationReport(
            c=coeffs.c,
            rounded=rounded,
            centers=centers,
            approximation=approximation,
            symdiff=A.symmetric_difference(approximation).size,
            sorted_b=sorted_b,
            large_count=sum(1 for x in sorted_b if x >= Fraction(1, 2)),
            prefix_sum=sum(sorted_b[:rounded], Fraction(0)),
            rounding_gap=abs(coeffs.c - rounded),
            overlap_check=compare("approximation_overlap", Fraction(covered), overlap_rhs, ">="),
        )


@lru_cache(maxsize=8)
def analyzer_for(n: int) -> FknAnalyzer:
    return FknAnalyzer(n)


def star_coefficients(n: int, A: VertexSet) -> FknCoefficients:
    return analyzer_for(n).star_coefficients(A)


def h_moments(n: int, A: VertexSet) -> MomentReport:
    return analyzer_for(n).h_moments(A)


def gh_affine_check(n: int, A: VertexSet) -> GhReport:
    return analyzer_for(n).gh_affine_check(A)


def fkn_inequality_suite(n: int, A: VertexSet) -> list[CheckResult]:
    return analyzer_for(n).inequality_suite(A)


def fkn_identity_suite(n: int, A: VertexSet) -> list[CheckResult]:
    return analyzer_for(n).identity_suite(A)


def star_approximation(n: int, A: VertexSet) -> ApproximationReport:
    return analyzer_for(n).star_approximation(A)


# Stability
# =========

@dataclass
class StabilityReport:
    """
    Exhaustive stability check on M_n for small n.

    Attributes:
        threshold (int): minimum size of the listed maximal independent sets
        large_sets (list[tuple]): (ranks, size, containing star label or None)
        largest_outside_stars (int): size of the largest independent set contained
            in no star (0 when every independent set lies in a star)
        witness (tuple[int, ...] | None): one such set
        checks (list[CheckResult]): the derived pass/fail checks
    """

    n: int
    threshold: int
    large_sets: list[tuple[tuple[int, ...], int, str | None]] = field(default_factory=list)
    largest_outside_stars: int = 0
    witness: tuple[int, ...] | None = None
    checks: list[CheckResult] = field(default_factory=list)


def largest_set_outside_stars(oracle: GraphOracle, solver: MisSolver) -> tuple[int, VertexSet | None]:
    """
    Largest independent set of M_n contained in no star.

    M_n is vertex transitive and "contained in no star" is preserved under
    supersets, so it suffices to scan maximal independent sets through vertex 0
    and skip the stars themselves. The size floor is lowered one step at a
    time from N - 1, so the first floor that admits a non-star set settles the answer.
    """
    for floor in range(oracle.params.N - 1, 1, -1):
        best, witness = 0, None
        for S in solver.maximal_independent_sets_containing(0, min_size=floor):
            if oracle.contained_star(S) is not None:
                continue
            if witness is None or (-S.size, S.ranks()) < (-best, witness.ranks()):
                best, witness = S.size, S
        if witness is not None:
            return best, witness
    return 0, None


def stability_check(n: int, delta=None, threshold: int | None = None) -> StabilityReport:
    """
    List the maximal independent sets of size >= (1 - delta)(2n-3)!! (or >= threshold)
    with the star containing each, find the largest independent set in no star, and
    check that independent sets keep at least M vertices of every star they leave.

    Raises:
        BudgetExceededError: n > 4
    """
    if n < 3:
        raise PreconditionError(f"stability check needs n >= 3, got {n}")
    if n > 4:
        raise BudgetExceededError("stability_n", 4, n)
    oracle = GraphOracle(GraphFamily(MATCHING, n))
    params = oracle.params
    if threshold is None:
        delta = Fraction(0) if delta is None else Fraction(delta)
        threshold = math.ceil((1 - delta) * params.N)
    threshold = max(int(threshold), 1)
    solver = MisSolver(oracle.dense_graph(), verify=True)
    report = StabilityReport(n=n, threshold=threshold)

    large = solver.maximal_independent_sets(min_size=threshold)
    for S in large:
        center = oracle.contained_star(S)
        report.large_sets.append((S.ranks(), S.size, center.label(oracle.family) if center else None))
    outside = [s for s in report.large_sets if s[2] is None]
    # Below N a non-star maximal set is allowed, so the listing is informational
    if threshold >= params.N:
        status = PASS if not outside else FAIL
    else:
        status = REPORT
    report.checks.append(
        CheckResult("large_independent_sets_in_stars", status, len(outside), 0, outside or None, binding=threshold >= params.N)
    )

    report.largest_outside_stars, witness = largest_set_outside_stars(oracle, solver)
    report.witness = witness.ranks() if witness else None
    report.checks.append(
        compare("largest_set_outside_stars_below_N", report.largest_outside_stars, params.N - 1, "<=", witness=report.witness)
    )

    # Every independent set holding a vertex outside a star misses >= M of its vertices
    if n == 3:
        sample = solver.enumerate_independent_sets_at_least(1)
    else:
        sample = list(large) + ([witness] if witness else [])
    M = params.M
    star_sets = [oracle.star_set(center) for center in oracle.star_centers]
    violations = []
    for S in sample:
        for center, star in zip(oracle.star_centers, star_sets):
            if not S.issubset(star) and star.difference(S).size < M:
                violations.append((S.ranks(), center.label(oracle.family)))
    report.checks.append(
        CheckResult("outside_vertex_forces_missing_star_vertices", PASS if not violations else FAIL, len(violations), 0, violations[:10] or None)
    )

    mu = complement_least_eigenvalue(oracle.family)
    projector = StarSpaceProjector(oracle)
    residual_violations = []
    for S in sample:
        _, residual = projector.project_set(S)
        bound = independent_residual_bound(params, S.size, mu)
        if residual > bound:
            residual_violations.append((S.ranks(), residual, bound))
    report.checks.append(
        CheckResult(
            "independent_set_residual_bound",
            PASS if not residual_violations else FAIL,
            len(residual_violations),
            0,
            residual_violations[:10] or None,
        )
    )
    logger.info("Stability check on M_%d: %d large sets, largest outside stars %d", n, len(large), report.largest_outside_stars)
    return report
