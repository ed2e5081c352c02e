# Command Line Interface
# ======================
# One entry point for every check and experiment of the lab:
#
#   python -m lab.cli <subcommand> [flags]
#
# Reports go to --out (or stdout) as CSV or JSON; a run manifest with the
# SHA-256 digest of the report bytes goes next to the report (or to stderr).
# Exit codes: 0 all checks pass, 2 a binding check failed or an internal
# identity broke, 1 usage error, invalid argument or exceeded budget.

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

from config import environments
from lab.fkn_analysis import analyzer_for, stability_check
from lab.graph_oracle import FAMILY_FLAGS, MATCHING, GraphFamily, GraphOracle
from lab.mis_solver import MisSolver
from lab.spectral import (
    IntegerPartition,
    SetFunction,
    StarSpaceProjector,
    asymptotic_table,
    character_orthogonality_defects,
    character_spectrum,
    character_table,
    complement_least_eigenvalue,
    dense_spectrum,
    edge_projection_check,
    gamma_eigenvalue,
    hoffman_bound,
    mixing_edge_lower_bound,
    ratio_isoperimetry_bound,
)
from lab.threshold_sim import (
    SWEEP_COLUMNS,
    SimConfig,
    critical_probability,
    expected_superstar_count,
    faux_star_count_upper_bound,
    fauxstar_expectation_bound,
    fauxstar_ratio_bound,
    no_superstar_upper_bound,
    probability_grid,
    threshold_sweep,
)
from utils.combinatorics import derangement_count
from utils.data_utils import parse_set_spec
from utils.errors import BudgetExceededError, InvariantViolationError, LabError, PreconditionError
from utils.report_utils import (
    FAIL,
    PASS,
    REPORT,
    CheckResult,
    RunManifest,
    compare,
    csv_bytes,
    json_bytes,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2

CHECK_COLUMNS = ["check", "status", "lhs", "rhs", "binding"]


@dataclass
class Outcome:
    """What a subcommand hands back: a payload for JSON, optional CSV rows, and its checks."""

    payload: dict
    rows: list[dict] | None = None
    columns: list[str] | None = None
    checks: list[CheckResult] = field(default_factory=list)
    default_format: str = "json"


def _family(args: argparse.Namespace) -> GraphFamily:
    if args.n is None:
        raise PreconditionError("--n is required")
    return GraphFamily.from_flag(args.family, args.n)


def _matching_n(args: argparse.Namespace) -> int:
    if args.family != "pm":
        raise PreconditionError("this subcommand works on the perfect matching graph; use --family pm")
    if args.n is None:
        raise PreconditionError("--n is required")
    return args.n


# Subcommands
# ===========

def cmd_params(args: argparse.Namespace) -> Outcome:
    if args.range:
        low, _, high = args.range.partition(":")
        try:
            ns = list(range(int(low), int(high) + 1))
        except ValueError:
            raise PreconditionError(f"--range '{args.range}' is not of the form a:b") from None
    else:
        ns = [_family(args).n]
    kind = FAMILY_FLAGS[args.family]
    rows = asymptotic_table(kind, ns, delta=args.delta if args.delta is not None else 0.5)
    checks = []
    for row in rows:
        params = GraphOracle(GraphFamily(kind, row["n"])).params
        checks.append(compare(f"hoffman_bound_tight_n{row['n']}", hoffman_bound(params), Fraction(params.N), "=="))
    columns = ["family", "n", "V", "d", "N", "M", "K", "pc", "K_over_VN_delta"]
    return Outcome({"rows": rows}, rows, columns, checks, default_format="csv")


def cmd_spectrum(args: argparse.Namespace) -> Outcome:
    family = _family(args)
    oracle = GraphOracle(family)
    spectrum = dense_spectrum(family)
    params = oracle.params
    checks = [
        compare("largest_eigenvalue_is_valency", spectrum.largest, params.d, "=="),
        compare("least_eigenvalue_is_minus_M", spectrum.least, -params.M, "=="),
        compare("multiplicities_sum_to_V", spectrum.total_multiplicity, params.V, "=="),
    ]
    if family.kind != MATCHING:
        characters = character_spectrum(family.n)
        checks.append(
            CheckResult(
                "character_formula_matches_diagonalization",
                PASS if characters.as_dict() == spectrum.as_dict() else FAIL,
                characters.as_dict(),
                spectrum.as_dict(),
            )
        )
    rows = spectrum.rows(family)
    return Outcome({"family": family.flag, "n": family.n, "spectrum": rows}, rows, ["family", "n", "eigenvalue", "multiplicity"], checks, "csv")


def cmd_characters(args: argparse.Namespace) -> Outcome:
    if args.n is None:
        raise PreconditionError("--n is required")
    n = args.n
    rows = [{"shape": str(shape), "cycle_type": str(mu), "value": value} for shape, mu, value in character_table(n)]
    defects = character_orthogonality_defects(n)
    checks = [CheckResult("character_orthogonality", PASS if not defects else FAIL, len(defects), 0, defects or None)]
    if n >= 2:
        d = derangement_count(n)
        checks.append(compare("trivial_shape_eigenvalue", gamma_eigenvalue(IntegerPartition.of(n)), Fraction(d), "=="))
        checks.append(
            compare("standard_shape_eigenvalue", gamma_eigenvalue(IntegerPartition.of(n - 1, 1)), Fraction(-d, n - 1), "==")
        )
    return Outcome({"n": n, "characters": rows}, rows, ["shape", "cycle_type", "value"], checks, "csv")


def cmd_ekr_verify(args: argparse.Namespace) -> Outcome:
    family = _family(args)
    oracle = GraphOracle(family)
    params = oracle.params
    solver = MisSolver(oracle.dense_graph(), verify=True)
    alpha, witness = solver.max_independent_set(lower_hint=params.N)
    checks = [
        compare("independence_number_is_N", alpha, params.N, "==", witness=witness.ranks()),
        compare("hoffman_bound_is_N", hoffman_bound(params), Fraction(params.N), "=="),
    ]
    payload: dict = {"family": family.flag, "n": family.n, "alpha": alpha, "N": params.N, "K": params.K}
    try:
        maximum = solver.enumerate_maximum_independent_sets()
    except BudgetExceededError as error:
        checks.append(CheckResult("maximum_sets_are_stars", REPORT, None, None, error.as_dict(), binding=False))
    else:
        centers = [oracle.contained_star(S) for S in maximum]
        stars = [c.label(family) for S, c in zip(maximum, centers) if c is not None and S.size == params.N]
        payload["maximum_sets"] = len(maximum)
        payload["star_centers"] = stars
        checks.append(compare("maximum_set_count_is_K", len(maximum), params.K, "=="))
        checks.append(compare("maximum_sets_are_stars", len(stars), len(maximum), "=="))
    degree = oracle.degree_violations()
    checks.append(CheckResult("regular_of_valency_d", PASS if not degree else FAIL, len(degree), 0, degree[:10] or None))
    tight = oracle.hoffman_tightness_violations()
    checks.append(
        CheckResult("outside_vertices_have_M_star_neighbours", PASS if not tight else FAIL, len(tight), 0, tight[:10] or None)
    )
    loose = oracle.star_independence_violations()
    checks.append(CheckResult("stars_are_independent", PASS if not loose else FAIL, len(loose), 0, loose or None))
    if family.kind == MATCHING and family.n >= 3:
        wrong = oracle.star_intersection_violations()
        checks.append(CheckResult("star_intersection_sizes", PASS if not wrong else FAIL, len(wrong), 0, wrong[:10] or None))
    return Outcome(payload, checks=checks)


def cmd_iso_check(args: argparse.Namespace) -> Outcome:
    family = _family(args)
    oracle = GraphOracle(family)
    params = oracle.params
    S = parse_set_spec(args.set or f"random:{params.N}", oracle, args.seed)
    edges = oracle.induced_edge_count(S)
    projector = StarSpaceProjector(oracle)
    f1, residual = projector.project_set(S)
    mu = complement_least_eigenvalue(family)
    bound = mixing_edge_lower_bound(params, S.size, residual, mu)
    defects = projector.orthogonality_defects(SetFunction.indicator(S), f1)
    checks = [
        compare("mixing_edge_lower_bound", Fraction(edges), bound, ">="),
        CheckResult("residual_orthogonal_to_stars", PASS if not defects else FAIL, len(defects), 0, defects or None),
    ]
    payload: dict = {
        "family": family.flag,
        "n": family.n,
        "size": S.size,
        "edges": edges,
        "residual_sq": residual,
        "mu": mu,
        "second_smallest_eigenvalue": dense_spectrum(family).second_smallest,
        "mixing_bound": bound,
    }
    if S.size:
        overlap, center = oracle.max_star_overlap(S)
        removed, added = params.N - overlap, S.size - overlap
        ratio = ratio_isoperimetry_bound(params, removed, added)
        payload["closest_star"] = center.label(family)
        payload["ratio_bound"] = ratio
        checks.append(compare("ratio_isoperimetry_bound", edges, ratio, ">="))
    if S.size == params.N:
        chain = edge_projection_check(params, edges, residual, mu)
        payload["edge_projection_bound"] = chain.bound
        checks.append(CheckResult("edge_projection_bound", chain.status, edges, chain.bound))
    return Outcome(payload, checks=checks)


def cmd_fkn_check(args: argparse.Namespace) -> Outcome:
    n = _matching_n(args)
    analyzer = analyzer_for(n)
    A = parse_set_spec(args.set or "star:1-2", analyzer.oracle, args.seed)
    moments = analyzer.h_moments(A)
    checks = analyzer.identity_suite(A) + analyzer.inequality_suite(A)
    return Outcome({"n": n, "size": A.size, "moments": moments}, checks=checks)


def cmd_fkn_approx(args: argparse.Namespace) -> Outcome:
    n = _matching_n(args)
    analyzer = analyzer_for(n)
    A = parse_set_spec(args.set or "star:1-2", analyzer.oracle, args.seed)
    report = analyzer.star_approximation(A)
    payload = {
        "n": n,
        "size": A.size,
        "c": report.c,
        "round_c": report.rounded,
        "centers": [list(e) for e in report.centers],
        "symdiff": report.symdiff,
        "sorted_b": report.sorted_b,
        "large_count": report.large_count,
        "prefix_sum": report.prefix_sum,
        "rounding_gap": report.rounding_gap,
    }
    return Outcome(payload, checks=[report.overlap_check])


def cmd_stability(args: argparse.Namespace) -> Outcome:
    n = _matching_n(args)
    delta = Fraction(args.delta).limit_denominator(10**6) if args.delta is not None else None
    report = stability_check(n, delta=delta, threshold=args.threshold)
    payload = {
        "n": n,
        "threshold": report.threshold,
        "large_sets": [{"ranks": list(r), "size": s, "star": label} for r, s, label in report.large_sets],
        "largest_outside_stars": report.largest_outside_stars,
        "witness": report.witness,
    }
    return Outcome(payload, checks=report.checks)


def cmd_pc(args: argparse.Namespace) -> Outcome:
    family = _family(args)
    row = {"family": family.flag, "n": family.n, "pc": critical_probability(family)}
    return Outcome(row, [row], ["family", "n", "pc"], default_format="csv")


def cmd_sweep(args: argparse.Namespace) -> Outcome:
    family = _family(args)
    cfg = SimConfig(
        family=family,
        p_grid=tuple(probability_grid(args.p or "0:1:11")),
        trials=args.trials,
        seed=args.seed,
        threads=args.threads,
        exact_alpha=args.exact_alpha,
        count_faux=args.count_faux,
    )
    report = threshold_sweep(cfg)
    rows = report.csv_rows()
    payload = {"rows": rows}
    if args.count_faux:
        payload["faux_counts"] = report.faux_totals()
    return Outcome(payload, rows, SWEEP_COLUMNS, default_format="csv")


def cmd_expect(args: argparse.Namespace) -> Outcome:
    family = _family(args)
    i, j = args.i, args.j
    rows = []
    for p in probability_grid(args.p or "0.5"):
        rows.append(
            {
                "p": p,
                "expected_Y": expected_superstar_count(family, p),
                "alpha_ij": fauxstar_expectation_bound(family, p, i, j),
                "alpha_ratio_bound": fauxstar_ratio_bound(family, p, i, j),
                "no_superstar_upper_bound": no_superstar_upper_bound(family, p),
            }
        )
    payload = {
        "family": family.flag,
        "n": family.n,
        "i": i,
        "j": j,
        "pc": critical_probability(family),
        "faux_star_count_bound": faux_star_count_upper_bound(family, i),
        "rows": rows,
    }
    return Outcome(payload, rows, ["p", "expected_Y", "alpha_ij", "alpha_ratio_bound", "no_superstar_upper_bound"])


COMMANDS: dict[str, Callable[[argparse.Namespace], Outcome]] = {
    "params": cmd_params,
    "spectrum": cmd_spectrum,
    "characters": cmd_characters,
    "ekr-verify": cmd_ekr_verify,
    "iso-check": cmd_iso_check,
    "fkn-check": cmd_fkn_check,
    "fkn-approx": cmd_fkn_approx,
    "stability": cmd_stability,
    "pc": cmd_pc,
    "sweep": cmd_sweep,
    "expect": cmd_expect,
}


# Parsing and Output
# ==================

class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise PreconditionError(f"usage: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ekr-lab", description="Verification lab for EKR results on derangement and perfect matching graphs.")
    parser.add_argument("subcommand", choices=sorted(COMMANDS))
    parser.add_argument("--family", choices=sorted(FAMILY_FLAGS), default="perm")
    parser.add_argument("--n", type=int)
    parser.add_argument("--range", help="a:b range of n for params")
    parser.add_argument("--p", help="probability or a:b:k grid")
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--seed", type=int, default=environments.EKR_SEED)
    parser.add_argument("--threads", type=int, default=environments.EKR_THREADS)
    parser.add_argument(
        "--delta",
        type=float,
        help="params: exponent in K/(V-N)^delta, default 0.5; stability: size slack, lists maximal sets of size >= (1 - delta) N",
    )
    parser.add_argument("--threshold", type=int)
    parser.add_argument("--set", help="star:a-b | stars:a-b,c-d | ranks:r1,r2 | random:K | full")
    parser.add_argument("--i", type=int, default=1)
    parser.add_argument("--j", type=int, default=1)
    parser.add_argument("--exact-alpha", action="store_true")
    parser.add_argument("--count-faux", action="store_true", help="sweep: count independent faux stars X_i and X_{i,j} per trial (small hosts only)")
    parser.add_argument("--out", type=Path)
    parser.add_argument("--format", choices=["csv", "json"])
    parser.add_argument("--log-level", default=environments.EKR_LOG_LEVEL)
    return parser


def render(outcome: Outcome, fmt: str | None) -> bytes:
    fmt = fmt or outcome.default_format
    if fmt == "csv":
        if outcome.rows is not None:
            return csv_bytes(outcome.rows, outcome.columns or list(outcome.rows[0]))
        return csv_bytes([c.as_dict() for c in outcome.checks], CHECK_COLUMNS)
    payload = dict(outcome.payload)
    payload["schema_version"] = environments.EKR_SCHEMA_VERSION
    if outcome.checks:
        payload["checks"] = outcome.checks
    return json_bytes(payload)


def _write(report: bytes, manifest: RunManifest, out: Path | None) -> None:
    if out is None:
        sys.stdout.buffer.write(report)
        sys.stdout.flush()
        sys.stderr.buffer.write(manifest.to_bytes())
        sys.stderr.flush()
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(report)
    out.with_name(out.name + ".manifest.json").write_bytes(manifest.to_bytes())


def _fail(message: str, payload: dict, code: int) -> int:
    sys.stderr.buffer.write(json_bytes(payload))
    sys.stderr.write(f"❌ {message}\n")
    return code


def run(argv: list[str] | None = None) -> int:
    """Parse ``argv``, run one subcommand and return the process exit code."""
    try:
        args = build_parser().parse_args(argv)
    except PreconditionError as error:
        return _fail(str(error), {"error": "usage", "message": str(error)}, EXIT_USAGE)
    except SystemExit as exit_request:
        # --help
        return EXIT_OK if exit_request.code in (0, None) else EXIT_USAGE

    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    flags = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())}
    manifest = RunManifest(args.subcommand, flags, args.seed)

    try:
        outcome = COMMANDS[args.subcommand](args)
    except BudgetExceededError as error:
        return _fail(str(error), error.as_dict(), EXIT_USAGE)
    except PreconditionError as error:
        return _fail(str(error), {"error": "precondition", "message": str(error)}, EXIT_USAGE)
    except InvariantViolationError as error:
        logger.error("Internal identity violated: %s", error)
        return _fail(str(error), {"error": "invariant_violation", "message": str(error)}, EXIT_CHECK_FAILED)
    except LabError as error:
        return _fail(str(error), {"error": type(error).__name__, "message": str(error)}, EXIT_USAGE)

    report = render(outcome, args.format)
    _write(report, manifest.seal(report), args.out)

    failed = [c for c in outcome.checks if c.failed]
    if failed:
        names = ", ".join(c.check for c in failed)
        sys.stderr.write(f"❌ {args.subcommand}: {len(failed)} of {len(outcome.checks)} checks failed ({names})\n")
        return EXIT_CHECK_FAILED
    sys.stderr.write(f"✅ {args.subcommand}: {len(outcome.checks)} checks passed\n")
    return EXIT_OK


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
