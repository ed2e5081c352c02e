# Threshold Simulation Module
# ===========================
# Seeded Monte Carlo on the random spanning subgraphs Gamma_{n,p} and M_{n,p}:
# every edge of the host graph is kept independently with probability p. Per
# trial the simulator counts surviving superstars (Y), decides or computes the
# independence number with the MIS solver, and optionally counts independent
# faux stars by type. Closed-form evaluators for the expectations and union
# bounds that drive the threshold live at the bottom of the module.
#
# Coins come from utils.rng and depend on (seed, trial, u, v) only, so the
# implicit superstar scan and the materialized subgraph always agree and a
# sweep gives the same bytes for any thread budget.

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from config import environments
from lab.graph_oracle import DenseGraph, GraphFamily, GraphOracle, GraphParams, graph_params, iter_bits
from lab.mis_solver import MisSolver
from utils.errors import BudgetExceededError, InvariantViolationError, NumericOverflowError, PreconditionError
from utils.rng import edges_survive

logger = logging.getLogger(__name__)

# Two-sided 95% normal quantile
WILSON_Z = 1.959963984540054

SWEEP_COLUMNS = ["family", "n", "p", "trials", "successes", "p_hat", "wilson_lo", "wilson_hi", "mean_Y", "pc", "p_over_pc"]


# Closed Forms
# ============

def critical_probability(family: GraphFamily) -> float:
    """
    p_c from the family-specific closed form, cross-checked against ln(K(V-N))/M.

    Raises:
        PreconditionError: n < 3
        InvariantViolationError: the two forms differ by more than 1e-12 relative
    """
    n = family.n
    if n < 3:
        raise PreconditionError(f"critical probability needs n >= 3, got {n}")
    params = graph_params(family)
    if family.kind == "permutation":
        closed = (n - 1) * math.log(math.factorial(n) * n * (n - 1)) / params.d
    else:
        closed = (2 * n - 2) * math.log(n * (2 * n - 2) * params.V) / params.d
    generic = params.critical_probability
    if abs(closed - generic) > 1e-12 * abs(generic):
        raise InvariantViolationError(f"{family.label}: p_c forms disagree ({closed} vs {generic})")
    return generic


def expected_superstar_count(family: GraphFamily, p: float) -> float:
    """E[Y] = K (V - N) (1 - p)^M."""
    params = graph_params(family)
    return params.K * (params.V - params.N) * (1.0 - p) ** params.M


def _log_binomial(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def fauxstar_expectation_bound(family: GraphFamily, p: float, i: int, j: int) -> float:
    """
    Bound on the expected number of independent maximal sets A with |A| = N + j - i
    and largest star overlap N - i:

    alpha_ij = K C(N, i) C(V, j) (1 - p)^(j (M - i)) (j p)^i

    evaluated through logarithms.

    Raises:
        PreconditionError: unless 1 <= i <= N and j >= i
        NumericOverflowError: the value does not fit in a double
    """
    params = graph_params(family)
    if not 1 <= i <= params.N:
        raise PreconditionError(f"i must lie in 1..{params.N}, got {i}")
    if j < i:
        raise PreconditionError(f"j must be at least i={i}, got {j}")
    if not 0.0 <= p <= 1.0:
        raise PreconditionError(f"p must lie in [0, 1], got {p}")
    exponent = j * (params.M - i)
    if p == 1.0 and exponent > 0:
        return 0.0
    if p == 0.0:
        return 0.0
    log_value = math.log(params.K) + _log_binomial(params.N, i) + _log_binomial(params.V, j) + i * math.log(j * p)
    if exponent:
        log_value += exponent * math.log1p(-p)
    try:
        return math.exp(log_value)
    except OverflowError:
        raise NumericOverflowError(f"alpha_{i},{j} overflows a double (log value {log_value:.3f})") from None


def fauxstar_ratio_bound(family: GraphFamily, p: float, i: int, j: int) -> float:
    """alpha_{i,j+1} / alpha_{i,j} is at most V (1 - p)^(M - i) (1 + 1/j)^i."""
    params = graph_params(family)
    if j < 1:
        raise PreconditionError(f"j must be positive, got {j}")
    return params.V * (1.0 - p) ** (params.M - i) * (1.0 + 1.0 / j) ** i


def r_factor(family: GraphFamily, eps: float) -> float:
    """V (K (V - N))^(eps^2/2 - eps/2 - 1) e, the ratio factor at p = (1 + eps) p_c."""
    params = graph_params(family)
    base = params.K * (params.V - params.N)
    return params.V * base ** (eps * eps / 2 - eps / 2 - 1) * math.e


def no_superstar_upper_bound(family: GraphFamily, p: float) -> float:
    """P[alpha = N] <= (1 - (1 - p)^M)^(V - N): the superstars over one fixed star are independent events."""
    params = graph_params(family)
    return (1.0 - (1.0 - p) ** params.M) ** (params.V - params.N)


def superstar_tail_bound(family: GraphFamily, eps: float) -> float:
    """(K (V - N))^(-eps), the Markov bound on P[Y > 0] at p = (1 + eps) p_c."""
    params = graph_params(family)
    return float(params.K * (params.V - params.N)) ** (-eps)


def faux_star_count_upper_bound(family: GraphFamily, i: int) -> int:
    """K C(N, i) C(V - N, i) bounds the number of faux stars of type i."""
    params = graph_params(family)
    if not 1 <= i <= params.N:
        raise PreconditionError(f"i must lie in 1..{params.N}, got {i}")
    return params.K * math.comb(params.N, i) * math.comb(params.V - params.N, i)


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Two-sided Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise PreconditionError(f"trials must be positive, got {trials}")
    if not 0 <= successes <= trials:
        raise PreconditionError(f"successes must lie in 0..{trials}, got {successes}")
    p_hat = successes / trials
    denom = 1.0 + z * z / trials
    center = (p_hat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p_hat * (1 - p_hat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, min(center - half, p_hat)), min(1.0, max(center + half, p_hat))


def probability_grid(spec: str) -> list[float]:
    """
    Parse "a:b:k" (k evenly spaced points from a to b) or a single probability.

    Raises:
        PreconditionError: malformed grid or a point outside [0, 1]
    """
    parts = spec.split(":")
    if len(parts) not in (1, 3):
        raise PreconditionError(f"probability grid '{spec}' is not of the form a:b:k")
    try:
        numbers = [float(parts[0])] if len(parts) == 1 else [float(parts[0]), float(parts[1]), int(parts[2])]
    except ValueError:
        raise PreconditionError(f"probability grid '{spec}' is not numeric") from None
    if len(numbers) == 1:
        grid = numbers
    else:
        a, b, k = numbers
        if k < 1:
            raise PreconditionError(f"grid needs at least one point, got {k}")
        grid = [a] if k == 1 else [a + (b - a) * t / (k - 1) for t in range(k)]
    # Strip float noise so CSV bytes do not depend on the arithmetic path
    grid = [round(x, 12) for x in grid]
    for x in grid:
        if not 0.0 <= x <= 1.0:
            raise PreconditionError(f"probability {x} outside [0, 1]")
    return grid


# Configuration and Results
# =========================

@dataclass(frozen=True)
class SimConfig:
    """
    One threshold experiment.

    Attributes:
        family (GraphFamily): host graph
        p_grid (tuple[float, ...]): edge retention probabilities
        trials (int): trials per probability
        seed (int): 64-bit master seed
        threads (int): thread budget; results do not depend on it
        exact_alpha (bool): compute alpha exactly instead of deciding alpha = N
        count_faux (bool): count independent faux stars per trial (small graphs only)
    """

    family: GraphFamily
    p_grid: tuple[float, ...]
    trials: int
    seed: int = 0
    threads: int = 1
    exact_alpha: bool = False
    count_faux: bool = False

    def __post_init__(self):
        if not self.p_grid:
            raise PreconditionError("empty probability grid")
        for p in self.p_grid:
            if not 0.0 <= p <= 1.0:
                raise PreconditionError(f"probability {p} outside [0, 1]")
        if self.trials < 1:
            raise PreconditionError(f"trials must be positive, got {self.trials}")
        if self.threads < 1:
            raise PreconditionError(f"thread budget must be positive, got {self.threads}")
        if not 0 <= self.seed < 1 << 64:
            raise PreconditionError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class TrialOutcome:
    """
    Result of one trial.

    Attributes:
        trial (int): trial index
        Y (int): surviving (independent) superstars
        alpha (int): independence number, exact or, in decision mode, N when
            alpha = N and N + 1 otherwise
        exact (bool): whether alpha is exact
        star_witness (bool): some maximum independent set is a star (alpha = N)
        faux_counts (dict[int, int] | None): independent faux stars by type i
        faux_pair_counts (dict[tuple[int, int], int] | None): maximal independent faux
            stars by type (i, j)
        faux_indicated (bool): alpha > N with Y = 0, so an independent faux star exists
    """

    trial: int
    Y: int
    alpha: int
    exact: bool
    star_witness: bool
    faux_counts: dict[int, int] | None = None
    faux_pair_counts: dict[tuple[int, int], int] | None = None
    faux_indicated: bool = False


@dataclass
class ThresholdReport:
    """Per-probability estimates of P[alpha = N] in canonical p order."""

    family: GraphFamily
    rows: list[dict] = field(default_factory=list)
    outcomes: dict[float, list[TrialOutcome]] = field(default_factory=dict)

    def csv_rows(self) -> list[dict]:
        return [{col: row[col] for col in SWEEP_COLUMNS} for row in self.rows]

    def faux_totals(self) -> list[dict]:
        """
        Faux-star counts summed over the trials of each probability.

        Trials whose counts were skipped (budget, or alpha far above N) are
        left out and reported as ``trials_uncounted``.
        """
        totals = []
        for p, outcomes in self.outcomes.items():
            by_type: dict[int, int] = {}
            by_pair: dict[str, int] = {}
            uncounted = 0
            for o in outcomes:
                if o.faux_counts is None or o.faux_pair_counts is None:
                    uncounted += 1
                    continue
                for i, count in o.faux_counts.items():
                    by_type[i] = by_type.get(i, 0) + count
                for (i, j), count in o.faux_pair_counts.items():
                    key = f"{i},{j}"
                    by_pair[key] = by_pair.get(key, 0) + count
            totals.append(
                {
                    "p": p,
                    "X_i": dict(sorted(by_type.items())),
                    "X_ij": dict(sorted(by_pair.items())),
                    "trials_with_faux": sum(1 for o in outcomes if o.faux_counts),
                    "trials_uncounted": uncounted,
                }
            )
        return totals


# Simulator
# =========

class ThresholdSimulator:
    """
    Trial runner for one host graph.

    The host's explicit adjacency and the per-superstar neighbour arrays are
    built once and shared by all trials and threads (read-only).

    Attributes:
        family (GraphFamily): host graph family member
        oracle (GraphOracle): adjacency and stars of the host
        params (GraphParams): (V, d, N, M, K)
    """

    def __init__(
        self,
        family: GraphFamily,
        scan_budget: int | None = None,
        trial_budget: int | None = None,
        faux_budget: int | None = None,
    ):
        self.family = family
        self.oracle = GraphOracle(family)
        self.params: GraphParams = self.oracle.params
        self.scan_budget = environments.EKR_SCAN_BUDGET if scan_budget is None else scan_budget
        self.trial_budget = environments.EKR_TRIAL_BUDGET if trial_budget is None else trial_budget
        self.faux_budget = environments.EKR_FAUX_BUDGET if faux_budget is None else faux_budget

    @cached_property
    def host(self) -> DenseGraph:
        return self.oracle.dense_graph()

    @cached_property
    def _host_edges(self) -> tuple[np.ndarray, np.ndarray]:
        pairs = np.array(list(self.host.edges()), dtype=np.int64).reshape(-1, 2)
        return pairs[:, 0], pairs[:, 1]

    @cached_property
    def _superstar_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """(K (V - N), M) arrays of the star-to-v edges of every superstar, as (low, high) ranks."""
        params = self.params
        cells = params.K * (params.V - params.N) * params.M
        if cells > self.scan_budget:
            raise BudgetExceededError("EKR_SCAN_BUDGET", self.scan_budget, cells)
        rows = self.host.rows
        low, high = [], []
        for star in self.oracle.star_bits:
            for v in range(params.V):
                if star >> v & 1:
                    continue
                ends = list(iter_bits(rows[v] & star))
                if len(ends) != params.M:
                    raise InvariantViolationError(f"vertex {v} has {len(ends)} neighbours in a star, expected {params.M}")
                low.append([min(u, v) for u in ends])
                high.append([max(u, v) for u in ends])
        return np.array(low, dtype=np.int64), np.array(high, dtype=np.int64)

    # Per-Trial Operations
    # --------------------

    def superstar_scan(self, p: float, seed: int, trial: int) -> int:
        """Number of superstars whose M star-to-v edges were all deleted."""
        low, high = self._superstar_edges
        if p >= 1.0:
            return 0
        if p <= 0.0:
            return low.shape[0]
        kept = edges_survive(seed, trial, low.ravel(), high.ravel(), p).reshape(low.shape)
        return int(np.count_nonzero(~kept.any(axis=1)))

    def sample_subgraph(self, p: float, seed: int, trial: int) -> DenseGraph:
        """The spanning subgraph of the host keeping each edge with probability p."""
        us, vs = self._host_edges
        kept = edges_survive(seed, trial, us, vs, p)
        return DenseGraph.from_edges(self.params.V, zip(us[kept].tolist(), vs[kept].tolist()))

    def _independent_superstars(self, graph: DenseGraph) -> int:
        params = self.params
        count = 0
        for star in self.oracle.star_bits:
            if not graph.is_independent(star):
                raise InvariantViolationError("a star spans an edge of a spanning subgraph")
            count += sum(1 for v in range(params.V) if not star >> v & 1 and graph.rows[v] & star == 0)
        return count

    def _faux_counts(self, solver: MisSolver, alpha: int) -> dict[int, int] | None:
        params = self.params
        if params.V > self.faux_budget:
            return None
        if alpha <= params.N:
            return {}
        if params.N + 1 < alpha - 3:
            logger.debug("Faux-star enumeration skipped: alpha %d far above N %d", alpha, params.N)
            return None
        counts: dict[int, int] = {}
        for A in solver.enumerate_independent_sets_at_least(params.N + 1):
            overlap, _ = self.oracle.max_star_overlap(A)
            if overlap < params.N:
                i = params.N - overlap
                counts[i] = counts.get(i, 0) + 1
        return dict(sorted(counts.items()))

    def _faux_pair_counts(self, solver: MisSolver, alpha: int) -> dict[tuple[int, int], int] | None:
        """X_{i,j}: maximal independent faux stars with N - i vertices in their best star and N + j - i in all."""
        params = self.params
        if params.V > self.faux_budget:
            return None
        if alpha <= params.N:
            return {}
        counts: dict[tuple[int, int], int] = {}
        for A in solver.maximal_independent_sets(min_size=params.N + 1):
            overlap, _ = self.oracle.max_star_overlap(A)
            if overlap < params.N:
                i = params.N - overlap
                key = (i, A.size - params.N + i)
                counts[key] = counts.get(key, 0) + 1
        return dict(sorted(counts.items()))

    def trial_alpha(self, p: float, seed: int, trial: int, exact: bool = False, count_faux: bool = False) -> TrialOutcome:
        """
        Sample the subgraph and decide whether alpha = N (or compute alpha when ``exact``).

        Y is recomputed from the sampled rows, independently of superstar_scan.
        """
        params = self.params
        if params.V > self.trial_budget:
            raise BudgetExceededError("EKR_TRIAL_BUDGET", self.trial_budget, params.V)
        graph = self.sample_subgraph(p, seed, trial)
        Y = self._independent_superstars(graph)
        solver = MisSolver(graph)
        if exact or count_faux:
            alpha, _ = solver.max_independent_set(lower_hint=params.N)
            is_exact = True
        else:
            alpha, _ = solver.max_independent_set(lower_hint=params.N, stop_at=params.N + 1)
            alpha = min(alpha, params.N + 1)
            is_exact = alpha == params.N
        faux = self._faux_counts(solver, alpha) if count_faux else None
        faux_pairs = self._faux_pair_counts(solver, alpha) if count_faux else None
        return TrialOutcome(
            trial=trial,
            Y=Y,
            alpha=alpha,
            exact=is_exact,
            star_witness=alpha == params.N,
            faux_counts=faux,
            faux_pair_counts=faux_pairs,
            faux_indicated=alpha > params.N and Y == 0,
        )

    # Sweeps
    # ------

    def threshold_sweep(self, cfg: SimConfig) -> ThresholdReport:
        """Estimate P[alpha = N] at every grid point; rows are in grid order, trials in index order."""
        if cfg.family != self.family:
            raise PreconditionError(f"simulator is bound to {self.family.label}, config asks for {cfg.family.label}")
        pc = self.params.critical_probability
        report = ThresholdReport(self.family)
        jobs = [(p, t) for p in cfg.p_grid for t in range(cfg.trials)]
        # Shared lazy state must exist before worker threads start
        _ = self.host

        def work(job: tuple[float, int]) -> TrialOutcome:
            p, t = job
            return self.trial_alpha(p, cfg.seed, t, exact=cfg.exact_alpha, count_faux=cfg.count_faux)

        if cfg.threads == 1:
            results = [work(job) for job in jobs]
        else:
            with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                results = list(pool.map(work, jobs))

        for index, p in enumerate(cfg.p_grid):
            outcomes = results[index * cfg.trials:(index + 1) * cfg.trials]
            successes = sum(1 for o in outcomes if o.alpha == self.params.N)
            lo, hi = wilson_interval(successes, cfg.trials)
            report.outcomes[p] = outcomes
            report.rows.append(
                {
                    "family": self.family.flag,
                    "n": self.family.n,
                    "p": p,
                    "trials": cfg.trials,
                    "successes": successes,
                    "p_hat": successes / cfg.trials,
                    "wilson_lo": lo,
                    "wilson_hi": hi,
                    "mean_Y": sum(o.Y for o in outcomes) / cfg.trials,
                    "pc": pc,
                    "p_over_pc": p / pc,
                }
            )
            logger.info("%s p=%.4f: %d/%d trials with alpha = N", self.family.label, p, successes, cfg.trials)
        return report


def threshold_sweep(cfg: SimConfig) -> ThresholdReport:
    return ThresholdSimulator(cfg.family).threshold_sweep(cfg)
