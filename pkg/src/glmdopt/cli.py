"""Command-line frontend: single solves, sweeps, region maps, benchmarks.

Problem files are JSON with fields:

* ``link``: weight-function kind (string), or an object
  ``{"kind": "tabulated", "eta": [...], "w": [...]}`` /
  ``{"kind": "constant", "value": c}``;
* ``beta``: model coefficients;
* ``design_points``: rows of factor levels (discrete problems), or
* ``bounds``: ``[lo1, hi1, lo2, hi2]`` (two continuous factors);
* ``model_terms``: optional, ``"main-effects"`` (default) or a list of
  factor-index lists per column starting with ``[]`` for the intercept.

Exit codes: 0 success, 2 input error, 3 solver failure. All floats are
serialized with 17 significant digits; CSV uses LF line endings and a header
row. Random benchmark instances come from numpy's PCG64 generator, so a seed
pins the instance stream across platforms.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .boundary import (
    ContinuousProblem,
    check_boundary_optimal,
    region_boundary_segments,
    region_sweep,
    rescale_problem,
)
from .design import DesignProblem, SolveReport, build_model_matrix, full_factorial_design, objective_det
from .errors import DomainError, SolverError
from .liftone import LiftOneConfig, liftone_maximize
from .saturated import compute_v, solve_saturated
from .twofactor import solve_fourpoint
from .weights import WeightFunction


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _csv_lines(header, rows) -> str:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(str(c) if isinstance(c, str) else _fmt(c) for c in row))
    return "\n".join(out) + "\n"


def weight_fn_from_spec(spec) -> WeightFunction:
    if isinstance(spec, str):
        return WeightFunction.from_name(spec)
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "tabulated":
            if "eta" not in spec or "w" not in spec:
                raise DomainError("link: tabulated weight needs 'eta' and 'w' arrays")
            return WeightFunction.tabulated(spec["eta"], spec["w"])
        if kind in ("constant", "identity", "identity_constant"):
            return WeightFunction.constant(spec.get("value", 1.0))
        if isinstance(kind, str):
            return WeightFunction.from_name(kind)
        raise DomainError("link.kind: expected a string")
    raise DomainError("link: expected a string or an object with a 'kind' field")


def _require_numbers(obj, path: str) -> list:
    if not isinstance(obj, list) or not all(isinstance(x, (int, float)) for x in obj):
        raise DomainError(f"{path}: expected an array of numbers")
    return [float(x) for x in obj]


def load_problem_file(path: str):
    """Parse a problem file into ('discrete', DesignProblem) or ('continuous', ContinuousProblem)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise DomainError(f"cannot read problem file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"problem file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise DomainError("problem file: expected a JSON object")
    if "link" not in raw:
        raise DomainError("link: field is required")
    if "beta" not in raw:
        raise DomainError("beta: field is required")
    fn = weight_fn_from_spec(raw["link"])
    beta = _require_numbers(raw["beta"], "beta")

    has_points = "design_points" in raw
    has_bounds = "bounds" in raw
    if has_points == has_bounds:
        raise DomainError("design_points/bounds: provide exactly one of them")

    if has_bounds:
        bounds = _require_numbers(raw["bounds"], "bounds")
        if len(bounds) != 4:
            raise DomainError(f"bounds: expected 4 numbers, got {len(bounds)}")
        if len(beta) != 3:
            raise DomainError(f"beta: expected 3 numbers for a two-factor rectangle, got {len(beta)}")
        return "continuous", ContinuousProblem(np.array(beta), tuple(bounds), fn)

    pts_raw = raw["design_points"]
    if not isinstance(pts_raw, list) or not pts_raw:
        raise DomainError("design_points: expected a non-empty array of rows")
    width = None
    points = []
    for i, row in enumerate(pts_raw):
        vals = _require_numbers(row, f"design_points[{i}]")
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise DomainError(f"design_points[{i}]: expected {width} numbers, got {len(vals)}")
        points.append(vals)
    terms = raw.get("model_terms", "main-effects")
    if not isinstance(terms, str):
        if not isinstance(terms, list):
            raise DomainError("model_terms: expected 'main-effects' or an array of index arrays")
        terms = [tuple(int(j) for j in t) for t in terms]
    try:
        X = build_model_matrix(np.array(points), terms)
    except DomainError as exc:
        raise DomainError(f"model_terms: {exc}") from exc
    if len(beta) != X.shape[1]:
        raise DomainError(f"beta: expected {X.shape[1]} numbers for these model terms, got {len(beta)}")
    problem = DesignProblem(X, beta=np.array(beta), weight_fn=fn)
    return "discrete", problem


def dispatch_solve(problem: DesignProblem, method: str, tol: float) -> SolveReport:
    """Route a discrete problem to the solver its shape supports."""
    n, d = problem.X.shape
    if method == "liftone":
        return liftone_maximize(problem, LiftOneConfig(tol=tol))
    if method not in ("auto", "analytic"):
        raise DomainError(f"unknown method {method!r}")
    if n == 4 and d == 3:
        return solve_fourpoint(problem)
    if n == d + 1:
        return solve_saturated(compute_v(problem))
    if method == "analytic":
        raise DomainError(
            f"no analytic solver covers shape n={n}, d={d}; use --method liftone (or auto)"
        )
    return liftone_maximize(problem, LiftOneConfig(tol=tol))


def _report_dict(report: SolveReport) -> dict:
    return {
        "allocation": [float(x) for x in report.allocation.p],
        "objective": float(report.objective),
        "case_label": report.case_label,
        "diagnostics": {k: float(v) for k, v in sorted(report.diagnostics.items())},
    }


def cmd_solve(args) -> int:
    kind, problem = load_problem_file(args.problem)
    if kind == "continuous":
        if args.format != "json":
            raise DomainError("continuous problems serialize as JSON only")
        unit, transform = rescale_problem(problem)
        verdict = check_boundary_optimal(unit, s_grid_steps=args.grid_steps)
        from .boundary import CORNERS

        out = {
            "case_label": "boundary-check",
            "boundary_optimal": bool(verdict.boundary_optimal),
            "min_s": float(verdict.min_s),
            "argmin": [float(verdict.argmin[0]), float(verdict.argmin[1])],
            "allocation": [float(x) for x in verdict.p4.p],
            "objective": float(verdict.f_p4),
            "design_points": [[float(v) for v in row] for row in transform.from_unit(CORNERS)],
            "diagnostics": {
                "det_factor": float(transform.det_factor),
                "objective_original_scale": float(
                    verdict.f_p4 / (transform.det_factor**2)
                ),
            },
        }
        sys.stdout.write(_dump_json(out))
        return 0
    report = dispatch_solve(problem, args.method, args.tol)
    if args.format == "json":
        sys.stdout.write(_dump_json(_report_dict(report)))
    else:
        n = len(report.allocation.p)
        header = ["case_label", "objective"] + [f"p{i + 1}" for i in range(n)]
        row = [report.case_label, report.objective] + list(report.allocation.p)
        sys.stdout.write(_csv_lines(header, [row]))
    return 0


def _parse_range(text: str, want_steps: bool):
    parts = text.split(":")
    expect = 3 if want_steps else 2
    if len(parts) != expect:
        raise DomainError(f"--range: expected {'LO:HI:STEPS' if want_steps else 'LO:HI'}, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise DomainError(f"--range: non-numeric bound in {text!r}") from None
    if want_steps:
        try:
            steps = int(parts[2])
        except ValueError:
            raise DomainError(f"--range: non-integer step count in {text!r}") from None
        if steps < 1:
            raise DomainError("--range: steps must be >= 1")
        return lo, hi, steps
    return lo, hi


def cmd_sweep_beta(args) -> int:
    kind, problem = load_problem_file(args.problem)
    if kind != "discrete":
        raise DomainError("sweep-beta needs a discrete problem (design_points)")
    lo, hi, steps = _parse_range(args.range, want_steps=True)
    idx = args.vary
    d = problem.X.shape[1]
    if not 0 <= idx < d:
        raise DomainError(f"--vary: index {idx} out of range for {d} coefficients")
    values = np.linspace(lo, hi, steps) if steps > 1 else np.array([0.5 * (lo + hi)])
    n = problem.X.shape[0]
    header = ["beta_value"] + [f"p{i + 1}" for i in range(n)] + ["objective", "case_label"]
    rows = []
    for val in values:
        beta = problem.beta.copy()
        beta[idx] = val
        prob = DesignProblem(problem.X, beta=beta, weight_fn=problem.weight_fn)
        report = dispatch_solve(prob, args.method, args.tol)
        rows.append([val] + list(report.allocation.p) + [report.objective, report.case_label])
    sys.stdout.write(_csv_lines(header, rows))
    return 0


def cmd_region(args) -> int:
    lo, hi = _parse_range(args.range, want_steps=False)
    fn = WeightFunction.from_name(args.link)
    grid = region_sweep(
        args.beta0,
        (lo, hi),
        (lo, hi),
        args.steps,
        fn,
        s_grid_steps=args.grid_steps,
        threads=args.threads,
    )
    rows = []
    for i, b1 in enumerate(grid.beta1):
        for j, b2 in enumerate(grid.beta2):
            verdict = "1" if grid.verdict[i, j] else "0"
            if grid.failed[i, j]:
                verdict = "failed"
            rows.append([b1, b2, grid.min_s[i, j], verdict])
    sys.stdout.write(_csv_lines(["beta1", "beta2", "min_s", "verdict"], rows))
    if args.boundary:
        segs = region_boundary_segments(grid)
        text = _csv_lines(
            ["x1", "y1", "x2", "y2"], [[p1[0], p1[1], p2[0], p2[1]] for p1, p2 in segs]
        )
        with open(args.boundary, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return 0


def _parse_dist(text: str):
    parts = text.split(":")
    if parts[0] == "uniform" and len(parts) == 3:
        lo, hi = float(parts[1]), float(parts[2])
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise DomainError(f"--dist: need finite lo < hi, got {text!r}")
        return lambda rng, size: rng.uniform(lo, hi, size)
    if parts[0] == "normal" and len(parts) == 2:
        sigma = float(parts[1])
        if not (np.isfinite(sigma) and sigma > 0):
            raise DomainError(f"--dist: need a positive sigma, got {text!r}")
        return lambda rng, size: rng.normal(0.0, sigma, size)
    raise DomainError(f"--dist: expected uniform:LO:HI or normal:SIGMA, got {text!r}")


def _parse_model(text: str):
    if text == "2x2":
        X = build_model_matrix(
            np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]), "main-effects"
        )
        return X
    if text.startswith("2^"):
        try:
            k = int(text[2:])
        except ValueError:
            raise DomainError(f"--model: bad factor count in {text!r}") from None
        if not 2 <= k <= 6:
            raise DomainError("--model: 2^k supports k from 2 to 6")
        X, _ = full_factorial_design(k)
        return X
    raise DomainError(f"--model: expected 2x2 or 2^K, got {text!r}")


def cmd_bench(args) -> int:
    X = _parse_model(args.model)
    n, d = X.shape
    sample = _parse_dist(args.dist)
    fn = WeightFunction.from_name(args.link)
    rng = np.random.Generator(np.random.PCG64(args.seed))
    betas = sample(rng, (args.n_instances, d))

    def analytic_one(beta):
        problem = DesignProblem(X, beta=beta, weight_fn=fn)
        if n == 4 and d == 3:
            report = solve_fourpoint(problem)
        else:
            report = solve_saturated(compute_v(problem))
        return problem, report

    def run(method_fn):
        results = []
        failures = 0
        start = time.perf_counter()
        if args.threads > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=args.threads) as pool:
                raw = list(pool.map(method_fn, betas))
        else:
            raw = [method_fn(b) for b in betas]
        elapsed = time.perf_counter() - start
        for item in raw:
            if item is None:
                failures += 1
            else:
                results.append(item)
        return results, failures, elapsed

    def safe_analytic(beta):
        try:
            problem, report = analytic_one(beta)
            return objective_det(problem, report.allocation)
        except Exception:
            return None

    def safe_liftone(beta):
        try:
            problem = DesignProblem(X, beta=beta, weight_fn=fn)
            report = liftone_maximize(problem, LiftOneConfig(tol=args.tol))
            return objective_det(problem, report.allocation)
        except Exception:
            return None

    f_analytic, fail_a, time_a = run(safe_analytic)
    f_liftone, fail_l, time_l = run(safe_liftone)

    eff = [
        fl / fa
        for fa, fl in zip(f_analytic, f_liftone)
        if fa is not None and fl is not None and fa > 0.0
    ]
    eff = np.array(eff) if eff else np.array([np.nan])
    rows = [
        ["analytic", args.n_instances, fail_a, time_a, 1.0, 1.0, 1.0],
        [
            "liftone",
            args.n_instances,
            fail_l,
            time_l,
            float(np.mean(eff)),
            float(np.percentile(eff, 1)),
            float(np.min(eff)),
        ],
    ]
    header = [
        "method",
        "n_instances",
        "failures",
        "total_time_s",
        "efficiency_mean",
        "efficiency_p01",
        "efficiency_min",
    ]
    sys.stdout.write(_csv_lines(header, rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glmdopt",
        description="Locally D-optimal approximate designs for generalized linear models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a single problem file")
    p_solve.add_argument("problem", help="path to a JSON problem file")
    p_solve.add_argument("--method", choices=["auto", "analytic", "liftone"], default="auto")
    p_solve.add_argument("--tol", type=float, default=1e-12)
    p_solve.add_argument("--format", choices=["json", "csv"], default="json")
    p_solve.add_argument("--grid-steps", type=int, default=201, dest="grid_steps")
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep-beta", help="solve along a grid of one coefficient")
    p_sweep.add_argument("problem")
    p_sweep.add_argument("--vary", type=int, required=True, help="coefficient index to vary")
    p_sweep.add_argument("--range", required=True, help="LO:HI:STEPS")
    p_sweep.add_argument("--method", choices=["auto", "analytic", "liftone"], default="analytic")
    p_sweep.add_argument("--tol", type=float, default=1e-12)
    p_sweep.add_argument("--format", choices=["csv"], default="csv")
    p_sweep.set_defaults(func=cmd_sweep_beta)

    p_region = sub.add_parser("region", help="corner-support verdicts over a slope grid")
    p_region.add_argument("--beta0", type=float, required=True)
    p_region.add_argument("--range", required=True, help="LO:HI applied to both slopes")
    p_region.add_argument("--steps", type=int, required=True)
    p_region.add_argument("--link", default="logit")
    p_region.add_argument("--grid-steps", type=int, default=201, dest="grid_steps")
    p_region.add_argument("--threads", type=int, default=1)
    p_region.add_argument("--boundary", help="also write region-edge segments to this CSV path")
    p_region.add_argument("--format", choices=["csv"], default="csv")
    p_region.set_defaults(func=cmd_region)

    p_bench = sub.add_parser("bench", help="analytic vs lift-one on random instances")
    p_bench.add_argument("--model", default="2x2", help="2x2 or 2^K (K=2..6)")
    p_bench.add_argument("--dist", default="uniform:-3:3", help="uniform:LO:HI or normal:SIGMA")
    p_bench.add_argument("--n-instances", type=int, default=10000, dest="n_instances")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--link", default="logit")
    p_bench.add_argument("--tol", type=float, default=1e-12)
    p_bench.add_argument("--threads", type=int, default=1)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
