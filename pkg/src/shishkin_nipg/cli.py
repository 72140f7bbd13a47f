"""Command-line entry point: ``solve``, ``sweep`` and ``check``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings

from .checks import run_checks
from .experiment import (
    CSV_HEADER,
    ConfigError,
    ConvergenceTable,
    ExperimentConfig,
    dump_result,
    emit_csv,
    run_single,
    run_sweep,
)
from .problem import PROBLEMS

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2
DEFAULTS = ExperimentConfig()


def _read_penalty_file(path):
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
        values = [float(ln) for ln in lines]
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read penalty file {path!r}: {exc}") from None
    return tuple(values)


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors (exit 1), not argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(
        prog="shishkin-nipg",
        description="NIPG solver on Shishkin meshes with convergence diagnostics.",
    )
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def grid_flags(p):
        p.add_argument("--epsilon", type=float, action="append", help="perturbation parameter (repeatable)")
        p.add_argument("--degree", type=int, action="append", help="polynomial degree k (repeatable)")
        p.add_argument("--n", type=int, action="append", dest="Ns", help="number of elements N (repeatable)")
        p.add_argument("--sigma", type=float, help="fixed mesh parameter sigma")
        p.add_argument("--sigma-rule", choices=["k+5/2", "fixed"], default="k+5/2",
                       help="sigma = k + 5/2 (default) or the value given by --sigma")
        p.add_argument("--scheme", default=DEFAULTS.scheme, help="A, B or custom:<file>")
        p.add_argument("--problem", choices=sorted(PROBLEMS), default=DEFAULTS.problem)
        p.add_argument("--post-process", choices=["on", "off"], default="on")
        p.add_argument("--out", help="CSV output path")
        p.add_argument("--dump-solution", help="write nodal values of u_N (and R u_N) to this CSV")
        p.add_argument("--quad-err", type=int, help="Gauss points per piece in error norms")
        p.add_argument("--workers", type=int, default=1, help="parallel workers for sweeps")

    grid_flags(sub.add_parser("solve", help="one (epsilon, k, N) run"))
    grid_flags(sub.add_parser("sweep", help="full grid with convergence rates"))
    check = sub.add_parser("check", help="fast property checks")
    check.add_argument("--seed", type=int, default=0)
    return parser


def config_from_args(args, single):
    if args.sigma_rule == "fixed" and args.sigma is None:
        raise ConfigError("--sigma-rule fixed needs --sigma")
    if args.sigma_rule == "k+5/2" and args.sigma is not None:
        raise ConfigError("--sigma conflicts with --sigma-rule k+5/2; pass --sigma-rule fixed")
    grid = {}
    for name, given, default in (
        ("epsilons", args.epsilon, DEFAULTS.epsilons),
        ("degrees", args.degree, DEFAULTS.degrees),
        ("Ns", args.Ns, DEFAULTS.Ns),
    ):
        if single and given and len(given) > 1:
            raise ConfigError(f"solve takes a single value for {name}")
        values = tuple(given) if given else default
        grid[name] = values[:1] if single else values
    scheme, custom = args.scheme, None
    if scheme.startswith("custom:"):
        custom = _read_penalty_file(scheme.split(":", 1)[1])
        scheme = "custom"
    return ExperimentConfig(
        **grid,
        sigma=args.sigma,
        scheme=scheme,
        custom_penalties=custom,
        problem=args.problem,
        post_process=args.post_process == "on",
        q_err=args.quad_err,
        out=args.out,
        dump_solution=args.dump_solution,
    )


def _print_table(table, stream):
    stream.write(",".join(CSV_HEADER[:10]) + "\n")
    for r in table:
        stream.write(
            f"{r.epsilon:.1e},{r.k},{r.N},{r.sigma:g},{r.scheme},"
            + ",".join(f"{getattr(r, c):.4e}" for c in CSV_HEADER[5:10])
            + "\n"
        )


def _cmd_solve(config, stream):
    (eps, k, N), = config.cells()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        result = run_single(config, eps, k, N)
    row = result.row
    stream.write(f"epsilon={eps:g} k={k} N={N} sigma={row.sigma:g} scheme={row.scheme}\n")
    stream.write(f"residual={result.solution.residual:.3e} rcond={row.rcond:.3e}\n")
    for name in ("e_uN_nipg", "e_uN_discrete", "e_Ik", "e_Pi", "e_post"):
        stream.write(f"{name}={getattr(row, name):.9e}\n")
    for note in row.warnings:
        stream.write(f"warning: {note}\n")
    if config.out:
        emit_csv(ConvergenceTable([row]), config.out)
    if config.dump_solution:
        dump_result(result, config.dump_solution)
    return EXIT_OK


def _cmd_sweep(config, workers, stream):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        table = run_sweep(config, workers=workers)
    _print_table(table, stream)
    for r in table.failures:
        stream.write(f"failed: epsilon={r.epsilon:g} k={r.k} N={r.N}: {'; '.join(r.warnings)}\n")
    return EXIT_NUMERICAL if table.failures else EXIT_OK


def _cmd_check(seed, stream):
    results = run_checks(seed)
    for r in results:
        stream.write(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


def main(argv=None, stream=None):
    stream = sys.stdout if stream is None else stream
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        if args.verb == "check":
            return _cmd_check(args.seed, stream)
        config = config_from_args(args, single=args.verb == "solve")
        if args.verb == "solve":
            return _cmd_solve(config, stream)
        return _cmd_sweep(config, args.workers, stream)
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except (ArithmeticError, FloatingPointError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
