# Spectral Module
# ===============
# Eigenvalues of Gamma_n from symmetric-group characters (Murnaghan-Nakayama),
# dense-spectrum cross-checks for both families, the exact orthogonal
# projection onto the star space U, and the ratio / isoperimetry bounds built
# on top of them.
#
# All identities are evaluated over Fraction; numpy only diagonalizes.

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from config import environments
from lab.graph_oracle import GraphFamily, GraphOracle, GraphParams, VertexSet, graph_params
from utils.errors import BudgetExceededError, InvariantViolationError, PreconditionError

logger = logging.getLogger(__name__)

# Eigenvalues within this distance of an integer are snapped to it
SNAP_TOLERANCE = 1e-6


# Partitions and Characters
# =========================

@dataclass(frozen=True, order=True)
class IntegerPartition:
    """
    A partition of n as a non-increasing tuple of positive parts.

    Attributes:
        parts (tuple[int, ...]): e.g. (3, 1) for the partition 3 + 1 of 4
    """

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(self.parts)
        object.__setattr__(self, "parts", parts)
        if any(p <= 0 for p in parts) or list(parts) != sorted(parts, reverse=True):
            raise PreconditionError(f"not a partition: {parts}")

    @classmethod
    def of(cls, *parts: int) -> "IntegerPartition":
        return cls(tuple(parts))

    @property
    def n(self) -> int:
        return sum(self.parts)

    def has_fixed_points(self) -> bool:
        """True when the cycle type has a 1-cycle."""
        return 1 in self.parts

    def class_size(self) -> int:
        """Number of permutations with this cycle type, n!/z_mu."""
        z = 1
        for part, mult in Counter(self.parts).items():
            z *= part ** mult * math.factorial(mult)
        return math.factorial(self.n) // z

    def dimension(self) -> int:
        """Degree of the irreducible character, by the hook length formula."""
        conjugate = [sum(1 for p in self.parts if p > j) for j in range(self.parts[0])] if self.parts else []
        hooks = 1
        for i, row in enumerate(self.parts):
            for j in range(row):
                hooks *= (row - j - 1) + (conjugate[j] - i - 1) + 1
        return math.factorial(self.n) // hooks

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.parts)) + ")"


def partitions(n: int) -> list[IntegerPartition]:
    """All partitions of n in reverse lexicographic order, (n) first."""
    def _gen(remaining: int, largest: int) -> Iterator[tuple[int, ...]]:
        if remaining == 0:
            yield ()
            return
        for part in range(min(remaining, largest), 0, -1):
            for tail in _gen(remaining - part, part):
                yield (part,) + tail

    return [IntegerPartition(p) for p in _gen(n, n)]


def _beta_set(parts: tuple[int, ...]) -> list[int]:
    length = len(parts)
    return [p + (length - 1 - i) for i, p in enumerate(parts)]


def _from_beta_set(beta: Iterable[int]) -> tuple[int, ...]:
    ordered = sorted(beta, reverse=True)
    length = len(ordered)
    return tuple(p for p in (b - (length - 1 - i) for i, b in enumerate(ordered)) if p > 0)


@lru_cache(maxsize=None)
def _mn(shape: tuple[int, ...], cycle_type: tuple[int, ...]) -> int:
    # Remove a rim hook of length cycle_type[0] by sliding one bead down
    if not cycle_type:
        return 1 if not shape else 0
    k, rest = cycle_type[0], cycle_type[1:]
    beta = _beta_set(shape)
    occupied = set(beta)
    total = 0
    for b in beta:
        target = b - k
        if target < 0 or target in occupied:
            continue
        height = sum(1 for x in beta if target < x < b)
        new_shape = _from_beta_set((occupied - {b}) | {target})
        total += (-1) ** height * _mn(new_shape, rest)
    return total


def mn_character(shape: IntegerPartition, cycle_type: IntegerPartition) -> int:
    """Value of the irreducible character chi_shape on permutations of the given cycle type."""
    if shape.n != cycle_type.n:
        raise PreconditionError(f"partitions of different sizes: {shape} and {cycle_type}")
    return _mn(shape.parts, cycle_type.parts)


def character_table(n: int) -> list[tuple[IntegerPartition, IntegerPartition, int]]:
    """(shape, cycle type, value) for all pairs of partitions of n."""
    parts = partitions(n)
    return [(lam, mu, mn_character(lam, mu)) for lam in parts for mu in parts]


def gamma_eigenvalue(shape: IntegerPartition) -> Fraction:
    """Eigenvalue of Gamma_n on the shape's isotypic component: (1/dim) sum over derangement classes."""
    if shape.n < 2:
        raise PreconditionError("gamma eigenvalues need n >= 2")
    total = sum(mu.class_size() * mn_character(shape, mu) for mu in partitions(shape.n) if not mu.has_fixed_points())
    return Fraction(total, shape.dimension())


def character_orthogonality_defects(n: int) -> list[tuple[IntegerPartition, IntegerPartition, int]]:
    """Pairs (lambda, lambda') whose class-weighted inner product is not n!*[lambda == lambda']."""
    parts = partitions(n)
    defects = []
    for i, lam in enumerate(parts):
        for lam2 in parts[i:]:
            total = sum(mu.class_size() * mn_character(lam, mu) * mn_character(lam2, mu) for mu in parts)
            expected = math.factorial(n) if lam == lam2 else 0
            if total != expected:
                defects.append((lam, lam2, total))
    return defects


# Spectra
# =======

@dataclass(frozen=True)
class Spectrum:
    """
    Eigenvalue multiset as (value, multiplicity) pairs in decreasing order.

    Attributes:
        entries (tuple): ((eigenvalue, multiplicity), ...)
        raw (tuple[float, ...]): unsnapped eigenvalues, ascending, when diagonalized
    """

    entries: tuple[tuple[object, int], ...]
    raw: tuple[float, ...] = ()

    @classmethod
    def from_values(cls, values: Iterable, raw: Sequence[float] = ()) -> "Spectrum":
        counts = Counter(values)
        return cls(tuple(sorted(counts.items(), key=lambda kv: kv[0], reverse=True)), tuple(raw))

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.entries)

    @property
    def largest(self):
        return self.entries[0][0]

    @property
    def least(self):
        return self.entries[-1][0]

    @property
    def second_smallest(self):
        """The second smallest distinct eigenvalue."""
        if len(self.entries) < 2:
            raise PreconditionError("spectrum has a single distinct eigenvalue")
        return self.entries[-2][0]

    def as_dict(self) -> dict:
        return {value: mult for value, mult in self.entries}

    def expanded(self) -> list:
        """All eigenvalues with repetition, ascending."""
        return sorted(v for v, m in self.entries for _ in range(m))

    def rows(self, family: GraphFamily) -> list[dict]:
        return [{"family": family.flag, "n": family.n, "eigenvalue": v, "multiplicity": m} for v, m in self.entries]


def character_spectrum(n: int) -> Spectrum:
    """Spectrum of Gamma_n assembled from gamma_eigenvalue with multiplicity dim^2."""
    values = Counter()
    for lam in partitions(n):
        values[gamma_eigenvalue(lam)] += lam.dimension() ** 2
    return Spectrum(tuple(sorted(values.items(), key=lambda kv: kv[0], reverse=True)))


@lru_cache(maxsize=32)
def _eigenvalues(family: GraphFamily) -> tuple[float, ...]:
    oracle = GraphOracle(family)
    logger.info("Diagonalizing %s (%d x %d)", family.label, oracle.V, oracle.V)
    return tuple(float(x) for x in np.linalg.eigvalsh(oracle.adjacency_matrix()))


def dense_spectrum(family: GraphFamily, budget: int | None = None) -> Spectrum:
    """
    Full adjacency spectrum by symmetric diagonalization, snapped to integers.

    Eigenvalues within SNAP_TOLERANCE of an integer are replaced by it. When
    every eigenvalue snaps, the result is audited against trace(A) = 0 and
    trace(A^2) = V*d.

    Raises:
        BudgetExceededError: V above the dense budget
        InvariantViolationError: the snapped spectrum fails the trace audit
    """
    budget = environments.EKR_DENSE_BUDGET if budget is None else budget
    params = graph_params(family)
    if params.V > budget:
        raise BudgetExceededError("EKR_DENSE_BUDGET", budget, params.V)
    raw = _eigenvalues(family)
    snapped = [round(x) if abs(x - round(x)) <= SNAP_TOLERANCE else x for x in raw]
    if all(isinstance(x, int) for x in snapped):
        trace = sum(snapped)
        trace_sq = sum(x * x for x in snapped)
        if trace != 0 or trace_sq != params.V * params.d:
            raise InvariantViolationError(
                f"{family.label}: snapped spectrum fails trace audit ({trace}, {trace_sq} vs 0, {params.V * params.d})"
            )
    else:
        logger.warning("%s: some eigenvalues are not within %g of an integer", family.label, SNAP_TOLERANCE)
    return Spectrum.from_values(snapped, raw)


def least_eigenvalue(params: GraphParams) -> Fraction:
    """tau from the closed form, -M."""
    return Fraction(-params.M)


def second_smallest_eigenvalue(family: GraphFamily, budget: int | None = None):
    """mu, from the dense spectrum (small n only)."""
    return dense_spectrum(family, budget).second_smallest


@lru_cache(maxsize=32)
def _complement_eigenvalues(family: GraphFamily) -> tuple[float, ...]:
    oracle = GraphOracle(family)
    X = oracle.incidence_matrix().astype(np.float64)
    left, singular, _ = np.linalg.svd(X, full_matrices=True)
    rank = int(np.count_nonzero(singular > SNAP_TOLERANCE * singular[0]))
    Q = left[:, rank:]
    return tuple(float(x) for x in np.linalg.eigvalsh(Q.T @ oracle.adjacency_matrix() @ Q))


def complement_least_eigenvalue(family: GraphFamily, budget: int | None = None):
    """
    Least adjacency eigenvalue on the orthogonal complement of the star space.

    This is the mu that makes the mixing bound hold. It is the second smallest
    eigenvalue unless the least eigenvalue also has eigenvectors outside the
    star space, as the sign character does on Gamma_4 (there it equals tau).

    Raises:
        BudgetExceededError: V above the dense budget
        PreconditionError: the stars span every function
    """
    budget = environments.EKR_DENSE_BUDGET if budget is None else budget
    params = graph_params(family)
    if params.V > budget:
        raise BudgetExceededError("EKR_DENSE_BUDGET", budget, params.V)
    values = _complement_eigenvalues(family)
    if not values:
        raise PreconditionError(f"{family.label}: the star indicators span every function")
    least = min(values)
    return round(least) if abs(least - round(least)) <= SNAP_TOLERANCE else least


# Set Functions
# =============

@dataclass(frozen=True)
class SetFunction:
    """
    An exact rational function on the vertices, indexed by rank.

    The inner product is <f, g> = (1/V) sum f(v) g(v).
    """

    values: tuple[Fraction, ...]

    @classmethod
    def indicator(cls, S: VertexSet) -> "SetFunction":
        one, zero = Fraction(1), Fraction(0)
        return cls(tuple(one if S.bits >> r & 1 else zero for r in range(S.universe)))

    @classmethod
    def constant(cls, V: int, value) -> "SetFunction":
        return cls((Fraction(value),) * V)

    @property
    def V(self) -> int:
        return len(self.values)

    def __getitem__(self, r: int) -> Fraction:
        return self.values[r]

    def __add__(self, other: "SetFunction") -> "SetFunction":
        return SetFunction(tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: "SetFunction") -> "SetFunction":
        return SetFunction(tuple(a - b for a, b in zip(self.values, other.values)))

    def scaled(self, factor) -> "SetFunction":
        factor = Fraction(factor)
        return SetFunction(tuple(factor * a for a in self.values))

    def shifted(self, offset) -> "SetFunction":
        offset = Fraction(offset)
        return SetFunction(tuple(a + offset for a in self.values))

    def inner(self, other: "SetFunction") -> Fraction:
        return Fraction(sum(a * b for a, b in zip(self.values, other.values)), self.V)

    def norm_sq(self) -> Fraction:
        return self.inner(self)

    def moment(self, k: int = 1) -> Fraction:
        """E[f^k] under the uniform measure."""
        return Fraction(sum(a ** k for a in self.values), self.V)

    def max_abs(self) -> Fraction:
        return max((abs(a) for a in self.values), default=Fraction(0))


# Star Space Projection
# =====================

def _pivot_columns(matrix: list[list[int]]) -> list[int]:
    """Columns of a linearly independent spanning subset, by fraction-free (Bareiss) elimination."""
    A = [row[:] for row in matrix]
    rows, cols = len(A), len(A[0]) if A else 0
    prev, r, pivots = 1, 0, []
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if A[i][c] != 0), None)
        if pivot is None:
            continue
        A[r], A[pivot] = A[pivot], A[r]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                A[i][j] = (A[i][j] * A[r][c] - A[i][c] * A[r][j]) // prev
            A[i][c] = 0
        prev = A[r][c]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return pivots


def _bareiss_inverse(matrix: list[list[int]]) -> list[list[Fraction]]:
    """Inverse of a nonsingular integer matrix: Bareiss forward elimination, exact back substitution."""
    size = len(matrix)
    A = [row[:] + [int(i == j) for j in range(size)] for i, row in enumerate(matrix)]
    width = 2 * size
    prev = 1
    for k in range(size):
        pivot = next((i for i in range(k, size) if A[i][k] != 0), None)
        if pivot is None:
            raise InvariantViolationError("Gram submatrix on pivot columns is singular")
        A[k], A[pivot] = A[pivot], A[k]
        for i in range(k + 1, size):
            for j in range(k + 1, width):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
            A[i][k] = 0
        prev = A[k][k]
    inverse = [[Fraction(0)] * size for _ in range(size)]
    for col in range(size):
        for i in range(size - 1, -1, -1):
            acc = Fraction(A[i][size + col])
            for j in range(i + 1, size):
                acc -= A[i][j] * inverse[j][col]
            inverse[i][col] = acc / A[i][i]
    return inverse


class StarSpaceProjector:
    """
    Exact orthogonal projection onto U, the span of the K star indicators.

    The Gram matrix G[x][y] = |S_x intersect S_y| is singular in general (U is
    spanned, not based, by the stars), so a rank-revealing fraction-free
    elimination picks pivot stars; coordinates on the remaining stars are 0.
    The projection itself is unique.

    Attributes:
        oracle (GraphOracle): the graph whose stars span U
        gram (list[list[int]]): K x K integer Gram matrix
        pivots (list[int]): indices of a basis of U among the stars
    """

    def __init__(self, oracle: GraphOracle, budget: int | None = None, max_stars: int | None = None):
        budget = environments.EKR_PROJECTION_BUDGET if budget is None else budget
        max_stars = environments.EKR_PROJECTION_MAX_STARS if max_stars is None else max_stars
        if oracle.V > budget:
            raise BudgetExceededError("EKR_PROJECTION_BUDGET", budget, oracle.V)
        if oracle.params.K > max_stars:
            raise BudgetExceededError("EKR_PROJECTION_MAX_STARS", max_stars, oracle.params.K)
        self.oracle = oracle
        self.V = oracle.V
        X = oracle.incidence_matrix().astype(np.int64)
        self.gram = [[int(v) for v in row] for row in X.T @ X]
        self.pivots = _pivot_columns(self.gram)
        self._inverse = _bareiss_inverse([[self.gram[x][y] for y in self.pivots] for x in self.pivots])
        self._features = [oracle.vertex_features(r) for r in range(self.V)]
        logger.debug("Star space of %s has dimension %d (K=%d)", oracle.family.label, len(self.pivots), oracle.params.K)

    @property
    def dimension(self) -> int:
        return len(self.pivots)

    def star_sums(self, f: SetFunction) -> list[Fraction]:
        """b[x] = sum of f over the star S_x, for every star."""
        sums = [Fraction(0)] * self.oracle.params.K
        for r, value in enumerate(f.values):
            if value:
                for x in self._features[r]:
                    sums[x] += value
        return sums

    def coefficients(self, f: SetFunction) -> list[Fraction]:
        """Star coordinates c with f1 = sum c_x 1_{S_x}; zero off the pivot stars."""
        if f.V != self.V:
            raise PreconditionError(f"function has length {f.V}, expected {self.V}")
        sums = self.star_sums(f)
        rhs = [sums[x] for x in self.pivots]
        coeffs = [Fraction(0)] * self.oracle.params.K
        for row, x in zip(self._inverse, self.pivots):
            coeffs[x] = sum((a * b for a, b in zip(row, rhs)), Fraction(0))
        return coeffs

    def combine(self, coeffs: Sequence[Fraction]) -> SetFunction:
        """The function sum_x coeffs[x] 1_{S_x}."""
        return SetFunction(tuple(sum((coeffs[x] for x in feats), Fraction(0)) for feats in self._features))

    def project(self, f: SetFunction) -> tuple[SetFunction, Fraction]:
        """Return (f1, ||f - f1||^2) where f1 is the projection of f onto U."""
        f1 = self.combine(self.coefficients(f))
        return f1, (f - f1).norm_sq()

    def project_set(self, S: VertexSet) -> tuple[SetFunction, Fraction]:
        return self.project(SetFunction.indicator(S))

    def orthogonality_defects(self, f: SetFunction, f1: SetFunction) -> list[int]:
        """Stars whose indicator is not exactly orthogonal to f - f1."""
        sums = self.star_sums(f - f1)
        return [x for x, s in enumerate(sums) if s != 0]


def project_star_space(oracle: GraphOracle, f: SetFunction) -> tuple[SetFunction, Fraction]:
    """One-shot projection; build a StarSpaceProjector directly when projecting many functions."""
    return StarSpaceProjector(oracle).project(f)


# Bounds
# ======

def hoffman_bound(params: GraphParams) -> Fraction:
    """Ratio bound V/(1 - d/tau) with tau = -M."""
    return Fraction(params.V) / (1 + Fraction(params.d, params.M))


def mixing_edge_lower_bound(params: GraphParams, set_size: int, residual_sq: Fraction, mu) -> Fraction:
    """
    Lower bound on ed(S) from the projection residual of 1_S:

    (V/2) [ (k - tau)(|S|/V)^2 + tau |S|/V - (tau - mu) residual ]

    with k = d, tau = -M and mu the least eigenvalue on the complement of the
    star space (see complement_least_eigenvalue).
    """
    if mu is None:
        raise PreconditionError("mu unavailable; supply it")
    tau = least_eigenvalue(params)
    mu = Fraction(mu)
    x = Fraction(set_size, params.V)
    return Fraction(params.V, 2) * ((params.d - tau) * x * x + tau * x - (tau - mu) * Fraction(residual_sq))


def ratio_isoperimetry_bound(params: GraphParams, a_size: int, b_size: int) -> int:
    """Guaranteed ed((S \\ A) u B) for a star S, |A| = a_size inside, |B| = b_size outside."""
    if not 0 <= a_size <= params.N:
        raise PreconditionError(f"|A| must lie in 0..{params.N}, got {a_size}")
    if b_size < 0:
        raise PreconditionError(f"|B| must be nonnegative, got {b_size}")
    return max(0, b_size * (params.M - a_size))


def faux_star_edge_lower_bound(params: GraphParams, i: int) -> int:
    """Edges forced in a set obtained from a star by trading i vertices for i outside ones."""
    return ratio_isoperimetry_bound(params, i, i)


def independent_residual_bound(params: GraphParams, set_size: int, mu) -> Fraction:
    """
    Largest projection residual an independent set of this size can have.

    Setting ed(S) = 0 in the mixing bound gives
    residual <= x (M - (d + M) x) / (mu + M) with x = |S|/V.
    """
    gap = Fraction(mu) + params.M
    if gap <= 0:
        raise PreconditionError(f"mu = {mu} does not exceed tau = {-params.M}; the residual is unconstrained")
    x = Fraction(set_size, params.V)
    return x * (params.M - (params.d + params.M) * x) / gap


@dataclass(frozen=True)
class EdgeProjectionCheck:
    """ed(A) >= (V M / 4) residual for |A| = N, valid when mu - tau >= M/2."""

    status: str
    edges: int
    bound: Fraction
    residual_sq: Fraction


def edge_projection_check(params: GraphParams, edges: int, residual_sq: Fraction, mu) -> EdgeProjectionCheck:
    tau = least_eigenvalue(params)
    bound = Fraction(params.V * params.M, 4) * residual_sq
    if Fraction(mu) - tau < Fraction(params.M, 2):
        return EdgeProjectionCheck("premise-failure", edges, bound, residual_sq)
    return EdgeProjectionCheck("pass" if edges >= bound else "fail", edges, bound, residual_sq)


def asymptotic_table(kind: str, n_values: Iterable[int], delta: float = 0.5) -> list[dict]:
    """Parameter rows with p_c and K/(V-N)^delta as floats."""
    rows = []
    for n in n_values:
        params = graph_params(GraphFamily(kind, n))
        row = params.as_row()
        row["K_over_VN_delta"] = params.K / float(params.V - params.N) ** delta
        rows.append(row)
    return rows
