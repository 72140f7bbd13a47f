"""Convergence experiments: single runs, parameter sweeps, CSV tables.

Rates are attached to the row of the coarser mesh: the rate on row N uses
the errors at N and 2N.
"""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .interpolation import interpolate_lobatto, interpolate_pi
from .mesh import assumption_warnings, build_macro, build_shishkin
from .norms import CONTINUOUS, DISCRETE, convergence_rate, error_norm, macro_error_norm, nipg_norm
from .postprocess import apply_R
from .problem import PROBLEMS, get_problem
from .solver import (
    SCHEMES,
    assemble,
    custom_schedule,
    penalty_schedule,
    solve,
    stability_warnings,
)

CSV_HEADER = (
    "epsilon", "k", "N", "sigma", "scheme",
    "e_uN_nipg", "e_uN_discrete", "e_Ik", "e_Pi", "e_post",
    "p_uN", "p_Ik", "p_Pi", "p_post",
    "rcond", "warnings",
)
ERROR_COLUMNS = ("e_uN_nipg", "e_Ik", "e_Pi", "e_post")
RATE_COLUMNS = ("p_uN", "p_Ik", "p_Pi", "p_post")
SIGMA_RULE = "k+5/2"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid and discretization choices; defaults reproduce the reference experiment."""

    epsilons: tuple = (1e-8, 1e-9, 1e-10, 1e-11)
    degrees: tuple = (1, 2, 3, 4, 5)
    Ns: tuple = (8, 16, 32, 64)
    sigma: Optional[float] = None  # None selects sigma = k + 5/2
    beta: float = 2.0
    scheme: str = "B"
    custom_penalties: Optional[tuple] = None
    problem: str = "layer"
    post_process: bool = True
    q_err: Optional[int] = None
    q_asm: Optional[int] = None
    out: Optional[str] = None
    dump_solution: Optional[str] = None

    def __post_init__(self):
        for name in ("epsilons", "degrees", "Ns"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.custom_penalties is not None:
            object.__setattr__(self, "custom_penalties", tuple(float(r) for r in self.custom_penalties))
        self.validate()

    def validate(self):
        if not (self.epsilons and self.degrees and self.Ns):
            raise ConfigError("epsilons, degrees and Ns must be nonempty")
        for eps in self.epsilons:
            if not 0.0 < eps < 1.0:
                raise ConfigError(f"epsilon must lie in (0, 1), got {eps}")
        for k in self.degrees:
            if int(k) != k or not 1 <= k <= 10:
                raise ConfigError(f"degree must be an integer in 1..10, got {k}")
        for N in self.Ns:
            if int(N) != N or N < 4 or N % 2:
                raise ConfigError(f"N must be an even integer >= 4, got {N}")
            if self.post_process and N % 4:
                raise ConfigError(f"post-processing needs N divisible by 4, got N={N}")
        if self.sigma is not None and self.sigma < 1.0:
            raise ConfigError(f"sigma must be >= 1, got {self.sigma}")
        if self.beta <= 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; known: {sorted(PROBLEMS)}")
        if self.scheme == "custom":
            if self.custom_penalties is None:
                raise ConfigError("custom scheme needs penalty values")
            for N in self.Ns:
                if len(self.custom_penalties) != N + 1:
                    raise ConfigError(
                        f"custom penalties have {len(self.custom_penalties)} values, N={N} needs {N + 1}"
                    )
            if any(r < 0 or not math.isfinite(r) for r in self.custom_penalties):
                raise ConfigError("custom penalties must be finite and nonnegative")
        elif self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; known: {sorted(SCHEMES)} or custom")
        for name in ("q_err", "q_asm"):
            q = getattr(self, name)
            if q is not None and (int(q) != q or q < 1 or q > 32):
                raise ConfigError(f"{name} must be an integer in 1..32, got {q}")
            if q is not None and q < max(self.degrees) + 1:
                raise ConfigError(f"{name}={q} is below k+1 for k={max(self.degrees)}")

    def sigma_for(self, k):
        return k + 2.5 if self.sigma is None else float(self.sigma)

    def penalties_for(self, N):
        if self.scheme == "custom":
            return custom_schedule(self.custom_penalties)
        return penalty_schedule(self.scheme, N)

    def cells(self):
        """Grid cells in table order: epsilon, then k, then N."""
        return [(eps, k, N) for eps in self.epsilons for k in self.degrees for N in sorted(self.Ns)]


@dataclass
class TableRow:
    epsilon: float
    k: int
    N: int
    sigma: float
    scheme: str
    e_uN_nipg: float = math.nan
    e_uN_discrete: float = math.nan
    e_Ik: float = math.nan
    e_Pi: float = math.nan
    e_post: float = math.nan
    p_uN: Optional[float] = None
    p_Ik: Optional[float] = None
    p_Pi: Optional[float] = None
    p_post: Optional[float] = None
    rcond: float = math.nan
    warnings: tuple = ()
    failed: bool = False

    @property
    def key(self):
        return (self.epsilon, self.k, self.N)


@dataclass
class RunResult:
    """A table row plus the objects it was computed from."""

    row: TableRow
    mesh: object = None
    solution: object = None
    post: object = None
    reports: dict = field(default_factory=dict)


def run_single(config, epsilon, k, N):
    """Build mesh, assemble, solve, interpolate, post-process and measure one cell."""
    sigma = config.sigma_for(k)
    penalties = config.penalties_for(N)
    row = TableRow(epsilon, k, N, sigma, penalties.scheme)
    problem = get_problem(config.problem, epsilon)
    mesh = build_shishkin(N, epsilon, sigma, config.beta)
    notes = list(assumption_warnings(mesh))
    if config.post_process:
        notes += stability_warnings(mesh, penalties)

    system = assemble(problem, mesh, k, penalties, config.q_asm)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        uN = solve(system)
    notes += [str(w.message) for w in caught if str(w.message) not in uN.warnings]
    notes += list(uN.warnings)
    row.rcond = uN.rcond

    exact = (problem.u, problem.du)
    gamma = problem.gamma
    q = config.q_err
    reports = {
        "uN": error_norm(exact, uN, penalties, gamma, CONTINUOUS, q),
        "uN_discrete": error_norm(exact, uN, penalties, gamma, DISCRETE, q),
        "Ik": nipg_norm(interpolate_lobatto(mesh, k, problem.u) - uN, penalties, gamma, q),
        "Pi": nipg_norm(interpolate_pi(mesh, k, problem.u) - uN, penalties, gamma, q),
    }
    post = None
    if config.post_process:
        post = apply_R(uN, build_macro(mesh))
        reports["post"] = macro_error_norm(exact, post, penalties, gamma, q)
        row.e_post = reports["post"].total
    row.e_uN_nipg = reports["uN"].total
    row.e_uN_discrete = reports["uN_discrete"].total
    row.e_Ik = reports["Ik"].total
    row.e_Pi = reports["Pi"].total
    row.warnings = tuple(notes)
    return RunResult(row, mesh, uN, post, reports)


def _run_cell(args):
    config, (eps, k, N) = args
    try:
        return run_single(config, eps, k, N).row
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        row = TableRow(eps, k, N, config.sigma_for(k), config.penalties_for(N).scheme)
        row.failed = True
        row.warnings = (f"failed: {exc}",)
        return row


class ConvergenceTable:
    """Rows keyed by (epsilon, k, N) with observed rates between N and 2N."""

    def __init__(self, rows=()):
        self.rows = sorted(rows, key=lambda r: r.key)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def row(self, epsilon, k, N):
        for r in self.rows:
            if r.key == (epsilon, k, N):
                return r
        raise KeyError((epsilon, k, N))

    def column(self, name, epsilon, k):
        """Values of one column for fixed (epsilon, k), ordered by N."""
        return [getattr(r, name) for r in self.rows if (r.epsilon, r.k) == (epsilon, k)]

    def compute_rates(self):
        index = {r.key: r for r in self.rows}
        for r in self.rows:
            nxt = index.get((r.epsilon, r.k, 2 * r.N))
            for e_col, p_col in zip(ERROR_COLUMNS, RATE_COLUMNS):
                rate = None
                if nxt is not None:
                    a, b = getattr(r, e_col), getattr(nxt, e_col)
                    if a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b):
                        rate = convergence_rate(a, b)
                setattr(r, p_col, rate)
        return self

    @property
    def failures(self):
        return [r for r in self.rows if r.failed]


def run_sweep(config, workers=1):
    """Run every grid cell; failed cells are marked and the sweep continues."""
    jobs = [(config, cell) for cell in config.cells()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell, jobs))
    else:
        rows = [_run_cell(job) for job in jobs]
    table = ConvergenceTable(rows).compute_rates()
    if config.out:
        emit_csv(table, config.out)
    return table


def _fmt(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.9e}"


def emit_csv(table, path):
    """Write the table; reals in scientific notation with 10 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in table:
            writer.writerow([
                _fmt(r.epsilon), r.k, r.N, _fmt(r.sigma), r.scheme,
                *(_fmt(getattr(r, c)) for c in ("e_uN_nipg", "e_uN_discrete", "e_Ik", "e_Pi", "e_post")),
                *(_fmt(getattr(r, c)) for c in RATE_COLUMNS),
                _fmt(r.rcond), "; ".join(r.warnings),
            ])


def read_csv(path):
    """Parse a table written by emit_csv."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        for rec in reader:
            def num(name, blank=math.nan):
                return float(rec[name]) if rec[name] else blank

            notes = tuple(w for w in rec["warnings"].split("; ") if w)
            row = TableRow(
                epsilon=float(rec["epsilon"]), k=int(rec["k"]), N=int(rec["N"]),
                sigma=float(rec["sigma"]), scheme=rec["scheme"],
                rcond=num("rcond"), warnings=notes,
                failed=any(w.startswith("failed:") for w in notes),
            )
            for c in ("e_uN_nipg", "e_uN_discrete", "e_Ik", "e_Pi", "e_post"):
                setattr(row, c, num(c))
            for c in RATE_COLUMNS:
                setattr(row, c, num(c, None))
            rows.append(row)
    return ConvergenceTable(rows)


def dump_result(result, path):
    """Write u_N nodal values to path and, if present, Ru_N next to it."""
    path = Path(path)
    result.solution.to_csv(path)
    if result.post is not None:
        result.post.to_csv(path.with_name(path.stem + "_post" + path.suffix))

