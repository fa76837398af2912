"""Command-line front end: ``mpqp solve|regions|grad|check|sweep <problem.json>``.

Exit codes: 0 success, 1 input or validation error, 2 infeasible parameter,
3 verification failure (``check`` only).
"""

import argparse
import csv
import io
import json
import logging
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from .checks import run_checks
from .errors import InfeasibleParameter, MpqpError, OutsideFeasibleSet
from .explicit import enumerate_regions, save_solution
from .gradient import BoundaryWarning, Route, value_gradient
from .oracle import kkt_residuals, solve_qp, value_at
from .problem import format_active_set, load_problem

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_CHECK_FAILED = 0, 1, 2, 3


class CliError(Exception):
    """Bad command-line input; reported on stderr with exit code 1."""


def fmt(v):
    """Shortest round-trip decimal for a float, with -0.0 printed as 0.0."""
    return repr(float(v) + 0.0)


def fmt_vector(v, sep=" "):
    return sep.join(fmt(a) for a in np.atleast_1d(v))


def _json_floats(v):
    return [float(a) + 0.0 for a in np.atleast_1d(v)]


def parse_vector(text, n, flag="--x"):
    if text is None:
        raise CliError(f"{flag} is required")
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise CliError(f"{flag} must be comma-separated numbers, got {text!r}") from None
    if not all(np.isfinite(values)):
        raise CliError(f"{flag} must contain finite numbers")
    if len(values) != n:
        raise CliError(f"{flag} has {len(values)} entries, the problem has n={n}")
    return np.array(values)


def read_problem(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    return load_problem(text)


@dataclass(frozen=True)
class SweepSpec:
    """Evenly spaced points from x_start to x_end, endpoints included."""

    x_start: np.ndarray
    x_end: np.ndarray
    steps: int

    def __post_init__(self):
        if self.steps < 2:
            raise CliError(f"--steps must be at least 2, got {self.steps}")
        if np.shape(self.x_start) != np.shape(self.x_end):
            raise CliError("--from and --to have different lengths")

    def points(self):
        for k in range(self.steps):
            t = k / (self.steps - 1)
            yield t, self.x_start + t * (self.x_end - self.x_start)


# -- commands ----------------------------------------------------------------

def cmd_solve(args, out):
    problem = read_problem(args.problem)
    x = parse_vector(args.x, problem.n)
    sol = solve_qp(problem, x)
    if not sol.optimal:
        if args.json:
            out.write(json.dumps({"status": sol.status.value}) + "\n")
        else:
            out.write(f"status {sol.status.value}\n")
        return EXIT_INFEASIBLE
    res = kkt_residuals(problem, x, sol.z_star, sol.lambda_star)
    if args.json:
        doc = {
            "status": sol.status.value,
            "z_star": _json_floats(sol.z_star),
            "lambda_star": _json_floats(sol.lambda_star),
            "objective": float(sol.objective) + 0.0,
            "active_set": [i + 1 for i in sol.active_set],
            "kkt": {k: v + 0.0 for k, v in res.as_dict().items()},
        }
        out.write(json.dumps(doc) + "\n")
    else:
        out.write(f"status {sol.status.value}\n")
        out.write(f"z* {fmt_vector(sol.z_star)}\n")
        out.write(f"lambda* {fmt_vector(sol.lambda_star)}\n")
        out.write(f"V {fmt(sol.objective)}\n")
        out.write(f"active_set {format_active_set(sol.active_set)}\n")
        out.write("kkt " + " ".join(f"{k}={fmt(v)}" for k, v in res.as_dict().items()) + "\n")
    return EXIT_OK


def cmd_regions(args, out):
    problem = read_problem(args.problem)
    solution = enumerate_regions(problem)
    out.write(save_solution(solution) + "\n")
    sets = " ".join(format_active_set(r.active_set) for r in solution.regions)
    sys.stderr.write(f"{len(solution.regions)} regions: {sets}\n")
    return EXIT_OK


def _gradient(solution, x, route):
    """value_gradient with boundary warnings echoed to stderr."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BoundaryWarning)
        result = value_gradient(solution, x, route)
    for w in caught:
        sys.stderr.write(f"warning: {w.message}\n")
    return result


def cmd_grad(args, out):
    problem = read_problem(args.problem)
    x = parse_vector(args.x, problem.n)
    solution = enumerate_regions(problem)
    route = Route(args.route)
    try:
        result = _gradient(solution, x, route)
    except (InfeasibleParameter, OutsideFeasibleSet) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INFEASIBLE
    if args.json:
        region = None
        if result.region_index is not None:
            region = [i + 1 for i in solution.regions[result.region_index].active_set]
        doc = {
            "gradient": _json_floats(result.gradient),
            "route": route.value,
            "region_active_set": region,
            "boundary": result.boundary,
        }
        out.write(json.dumps(doc) + "\n")
    else:
        out.write(fmt_vector(result.gradient) + "\n")
    return EXIT_OK


def cmd_check(args, out):
    problem = read_problem(args.problem)
    report = run_checks(problem, seed=args.seed, samples=args.samples)
    if args.json:
        out.write(json.dumps(report.to_dict()) + "\n")
    else:
        out.write(report.render_text() + "\n")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def sweep_rows(solution, spec, route=Route.REGION):
    """CSV rows (header first) of V and grad V along a segment."""
    problem = solution.problem
    n = problem.n
    header = (["t"] + [f"x_{i + 1}" for i in range(n)] + ["V"]
              + [f"gradV_{i + 1}" for i in range(n)] + ["region_active_set", "boundary_flag"])
    rows = [header]
    for t, x in spec.points():
        row = [fmt(t)] + [fmt(v) for v in x]
        try:
            result = _gradient(solution, x, route)
        except (InfeasibleParameter, OutsideFeasibleSet):
            rows.append(row + [""] * (n + 1) + ["", "0"])
            continue
        if result.region_index is not None:
            region = solution.regions[result.region_index]
            V = region.value_form(x)
            active = format_active_set(region.active_set)
        else:
            V = value_at(problem, x)
            active = format_active_set(solve_qp(problem, x).active_set)
        rows.append(row + [fmt(V)] + [fmt(g) for g in result.gradient]
                    + [active, "1" if result.boundary else "0"])
    return rows


def cmd_sweep(args, out):
    problem = read_problem(args.problem)
    spec = SweepSpec(
        parse_vector(args.x_from, problem.n, "--from"),
        parse_vector(args.x_to, problem.n, "--to"),
        args.steps,
    )
    solution = enumerate_regions(problem)
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(sweep_rows(solution, spec, Route(args.route)))
    if args.out is None:
        out.write(buf.getvalue())
        return EXIT_OK
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc.strerror}") from None
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


_VECTOR_FLAGS = ("--x", "--from", "--to")


def _attach_vector_values(argv):
    """Turn ``--x -3,0`` into ``--x=-3,0`` so negative vectors are not
    mistaken for options."""
    out = []
    i = 0
    while i < len(argv):
        if argv[i] in _VECTOR_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def build_parser():
    parser = _Parser(prog="mpqp", description="Explicit mpQP solutions and value-function gradients.")
    sub = parser.add_subparsers(dest="command", required=True)
    routes = [r.value for r in Route]

    p = sub.add_parser("solve", help="solve the QP at one parameter")
    p.add_argument("problem")
    p.add_argument("--x")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("regions", help="print the explicit solution as JSON")
    p.add_argument("problem")
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("grad", help="gradient of V at one parameter")
    p.add_argument("problem")
    p.add_argument("--x")
    p.add_argument("--route", choices=routes, default=Route.REGION.value)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_grad)

    p = sub.add_parser("check", help="run the verification suite")
    p.add_argument("problem")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="V and grad V along a segment, as CSV")
    p.add_argument("problem")
    p.add_argument("--from", dest="x_from")
    p.add_argument("--to", dest="x_to")
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--route", choices=routes, default=Route.REGION.value)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None, out=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_attach_vector_values(argv))
    out = out or sys.stdout
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args, out)
    except (CliError, MpqpError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
