"""NIPG discretization: penalty schedules, assembly, banded solve, diagnostics.

Unknowns are ordered element-major with the local Lobatto node index minor,
so interface terms only couple neighbouring elements and the matrix is
banded. Matrix rows are test functions, columns trial functions:
``A[r, c] = B(phi_c, phi_r)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lapack
from scipy.sparse.linalg import LinearOperator, onenormest

from .dgspace import DGFunction, jump_average, reference_basis
from .mesh import layer_levels
from .quadrature import gauss_rule, graded_rule

RCOND_WARN = 1e-14


class SingularSystemError(ArithmeticError):
    pass


# -- penalties ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PenaltySchedule:
    scheme: str
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("penalty values must be one-dimensional")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("penalty values must be finite and nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)


def _two_level(N, coarse, fine):
    values = np.full(N + 1, float(fine))
    values[: N // 2] = coarse
    return values


def scheme_a(N):
    """rho = 1 at nodes 0..N/2-1 and N^2 at N/2..N."""
    return PenaltySchedule("A", _two_level(N, 1.0, float(N) ** 2))


def scheme_b(N):
    """rho = 1/N at nodes 0..N/2-1 and N^3 at N/2..N."""
    return PenaltySchedule("B", _two_level(N, 1.0 / N, float(N) ** 3))


def custom_schedule(values):
    return PenaltySchedule("custom", values)


SCHEMES = {"A": scheme_a, "B": scheme_b}


def penalty_schedule(scheme, N):
    try:
        return SCHEMES[scheme](N)
    except KeyError:
        raise ValueError(f"unknown penalty scheme {scheme!r}") from None


def stability_warnings(mesh, penalties, C=1.0):
    """Report nodes where rho falls below the post-processing stability bounds."""
    N, eps = mesh.N, mesh.epsilon
    rho = penalties.values
    half = N // 2
    msgs = []
    coarse_min = C * max(eps * N, 1.0 / N)
    fine_min = C * N / np.log(N)
    bad = np.flatnonzero(rho[:half] < coarse_min)
    if bad.size:
        msgs.append(f"rho below {coarse_min:.3g} at {bad.size} coarse node(s)")
    bad = np.flatnonzero(rho[half:] < fine_min)
    if bad.size:
        msgs.append(f"rho below {fine_min:.3g} at {bad.size} fine node(s)")
    return msgs


# -- interface functionals ---------------------------------------------------


def default_assembly_points(k):
    return k + 3


def _check_inputs(problem, mesh, penalties):
    if problem.epsilon != mesh.epsilon:
        raise ValueError(f"problem epsilon {problem.epsilon} differs from mesh epsilon {mesh.epsilon}")
    if len(penalties) != mesh.N + 1:
        raise ValueError(f"need {mesh.N + 1} penalty values, got {len(penalties)}")


def _interfaces(mesh, k):
    """For every node i: (dofs, jump, avg-derivative, right-trace) functionals.

    Each functional is a vector over ``dofs`` (the Lobatto coefficients of the
    elements touching node i) applied to a DG test function.
    """
    N, nloc = mesh.N, k + 1
    _, dphi = reference_basis(k, [-1.0, 1.0])
    d_left_end, d_right_end = dphi[0], dphi[1]
    unit_first = np.eye(nloc)[0]
    unit_last = np.eye(nloc)[-1]
    zero = np.zeros(nloc)
    out = []
    for i in range(N + 1):
        if i == 0:
            s = 2.0 / mesh.widths[0]
            dofs = np.arange(nloc)
            out.append((dofs, -unit_first, s * d_left_end, unit_first))
        elif i == N:
            s = 2.0 / mesh.widths[-1]
            dofs = np.arange((N - 1) * nloc, N * nloc)
            out.append((dofs, unit_last, s * d_right_end, zero))
        else:
            sl, sr = 2.0 / mesh.widths[i - 1], 2.0 / mesh.widths[i]
            dofs = np.arange((i - 1) * nloc, (i + 1) * nloc)
            jump = np.concatenate([unit_last, -unit_first])
            avg = 0.5 * np.concatenate([sl * d_right_end, sr * d_left_end])
            plus = np.concatenate([zero, unit_first])
            out.append((dofs, jump, avg, plus))
    return out


# -- assembly ----------------------------------------------------------------


class _Triplets:
    def __init__(self):
        self.rows, self.cols, self.vals = [], [], []

    def add_block(self, rows, cols, block):
        r, c = np.meshgrid(rows, cols, indexing="ij")
        self.rows.append(r.ravel())
        self.cols.append(c.ravel())
        self.vals.append(np.asarray(block).ravel())

    def matrix(self, n):
        if not self.vals:
            return sp.csr_matrix((n, n))
        return sp.coo_matrix(
            (np.concatenate(self.vals), (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=(n, n),
        ).tocsr()


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    problem: object
    mesh: object
    k: int
    penalties: PenaltySchedule
    parts: dict = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    q_asm: int = 0

    @property
    def n(self):
        return self.mesh.N * (self.k + 1)

    @property
    def bandwidth(self):
        # interface patches span two neighbouring elements
        return 2 * self.k + 1

    @cached_property
    def matrix(self):
        return (self.parts["B1"] + self.parts["B2"] + self.parts["B3"]).tocsr()

    def banded(self):
        """Matrix in LAPACK general band storage with kl extra rows for pivoting."""
        kl = ku = self.bandwidth
        ab = np.zeros((2 * kl + ku + 1, self.n))
        coo = self.matrix.tocoo()
        if coo.nnz and np.max(np.abs(coo.row - coo.col)) > kl:
            raise AssertionError("assembled entry outside the nearest-neighbour band")
        ab[kl + ku + coo.row - coo.col, coo.col] = coo.data
        return ab

    @cached_property
    def factorization(self):
        return BandedLU(self.banded(), self.bandwidth, self.bandwidth, self.matrix)

    @property
    def condition_estimate(self):
        """Reciprocal 1-norm condition number estimate."""
        return self.factorization.rcond

    def dump_coo(self, path):
        coo = self.matrix.tocoo()
        with open(path, "w") as fh:
            for r, c, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{r} {c} {v:.17e}\n")


def assemble(problem, mesh, k, penalties, q_asm=None):
    """Assemble B = B1 + B2 + B3 and the load vector on a mesh."""
    q_asm = default_assembly_points(k) if q_asm is None else int(q_asm)
    if q_asm < k + 2:
        raise ValueError(f"assembly quadrature needs at least k+2={k + 2} points, got {q_asm}")
    _check_inputs(problem, mesh, penalties)
    eps = mesh.epsilon
    N, nloc = mesh.N, k + 1
    n = N * nloc
    rule = gauss_rule(q_asm)
    w = rule.weights
    phi, dphi = reference_basis(k, rule.nodes)
    x = mesh.map_to_physical(rule.nodes)
    half_h = 0.5 * mesh.widths
    a_q = np.broadcast_to(problem.a(x), x.shape)
    b_q = np.broadcast_to(problem.b(x), x.shape)

    stiff = (dphi * w[:, None]).T @ dphi
    diffusion = eps * (2.0 / mesh.widths)[:, None, None] * stiff[None]
    convection = np.einsum("q,eq,qr,qs->ers", w, a_q, phi, dphi)
    reaction = np.einsum("q,e,eq,qr,qs->ers", w, half_h, b_q, phi, phi)
    # f carries the layer, which Gauss points on a coarse element cannot see
    load_rule = graded_rule(q_asm, layer_levels(mesh))
    x_load = mesh.map_to_physical(load_rule.nodes)
    f_q = np.broadcast_to(problem.f(x_load), x_load.shape)
    phi_load, _ = reference_basis(k, load_rule.nodes)
    load = np.einsum("q,e,eq,qr->er", load_rule.weights, half_h, f_q, phi_load)

    t1, t2, t3 = _Triplets(), _Triplets(), _Triplets()
    for e in range(N):
        dofs = np.arange(e * nloc, (e + 1) * nloc)
        t1.add_block(dofs, dofs, diffusion[e])
        t2.add_block(dofs, dofs, convection[e])
        t3.add_block(dofs, dofs, reaction[e])

    rho = penalties.values
    a_nodes = np.broadcast_to(problem.a(mesh.points), mesh.points.shape)
    for i, (dofs, jump, avg, plus) in enumerate(_interfaces(mesh, k)):
        block = -eps * np.outer(jump, avg) + eps * np.outer(avg, jump) + rho[i] * np.outer(jump, jump)
        t1.add_block(dofs, dofs, block)
        if i < N:
            t2.add_block(dofs, dofs, -a_nodes[i] * np.outer(plus, jump))

    parts = {"B1": t1.matrix(n), "B2": t2.matrix(n), "B3": t3.matrix(n)}
    return AssembledSystem(problem, mesh, k, penalties, parts, load.reshape(-1), q_asm)


# -- linear algebra ----------------------------------------------------------


class BandedLU:
    """LU factorization with partial pivoting of a band matrix (LAPACK gbtrf)."""

    def __init__(self, ab, kl, ku, matrix=None):
        self.kl, self.ku = kl, ku
        self.n = ab.shape[1]
        # 1-norm of A: column sums of the band rows that hold A
        self.anorm = float(np.max(np.sum(np.abs(ab[kl:]), axis=0))) if self.n else 0.0
        self.lu, self.piv, info = lapack.dgbtrf(ab, kl, ku)
        if info > 0:
            raise SingularSystemError(f"exactly zero pivot U[{info - 1}, {info - 1}]")
        if info < 0:
            raise ValueError(f"illegal argument {-info} to dgbtrf")
        self._matrix = matrix

    def solve(self, b, trans=0):
        x, info = lapack.dgbtrs(self.lu, self.kl, self.ku, b, self.piv, trans=trans)
        if info != 0:
            raise ValueError(f"dgbtrs failed with info={info}")
        return x

    @cached_property
    def rcond(self):
        if self.anorm == 0.0:
            return 0.0
        inv = LinearOperator(
            (self.n, self.n),
            matvec=lambda v: self.solve(np.ravel(v)),
            rmatvec=lambda v: self.solve(np.ravel(v), trans=1),
            dtype=float,
        )
        # onenormest needs n >= 4 t; fall back to exact columns on tiny systems
        if self.n <= 8:
            inv_norm = np.max(np.sum(np.abs(self.solve(np.eye(self.n))), axis=0))
        else:
            # onenormest draws from the global numpy RNG; pin it so runs are reproducible
            state = np.random.get_state()
            try:
                np.random.seed(0)
                inv_norm = onenormest(inv)
            finally:
                np.random.set_state(state)
        return 1.0 / (self.anorm * inv_norm)


@dataclass(frozen=True, eq=False)
class DiscreteSolution(DGFunction):
    """Discrete solution u_N together with its linear-solve diagnostics."""

    residual: float = 0.0
    rcond: float = float("nan")
    warnings: tuple = ()


def solve(system):
    """Solve the assembled system by banded LU; returns a DiscreteSolution."""
    lu = system.factorization
    rhs = system.rhs
    x = lu.solve(rhs)
    A = system.matrix
    bnorm = np.max(np.abs(rhs))
    residual = float(np.max(np.abs(A @ x - rhs)) / bnorm) if bnorm > 0 else float(np.max(np.abs(A @ x)))
    rcond = lu.rcond
    notes = []
    if rcond < RCOND_WARN:
        msg = f"ill-conditioned system: rcond={rcond:.2e}"
        notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return DiscreteSolution(
        system.mesh, system.k, x.reshape(system.mesh.N, system.k + 1),
        residual=residual, rcond=float(rcond), warnings=tuple(notes),
    )


# -- bilinear form on general arguments --------------------------------------


def _samples_and_traces(u, mesh, k, nodes):
    """Values/derivatives of u at mapped points plus one-sided node traces."""
    if isinstance(u, DGFunction):
        vals, ders = u.sample(nodes)
        left, right = u.traces()
        dleft, dright = u.derivative_traces()
        return vals, ders, (left, right), (dleft, dright)
    try:
        fun, dfun = u
    except (TypeError, ValueError):
        raise TypeError("exact arguments must be a (u, du) pair of callables") from None
    if dfun is None:
        raise ValueError("exact argument needs its derivative")
    x = mesh.map_to_physical(nodes)
    vals = np.broadcast_to(fun(x), x.shape)
    ders = np.broadcast_to(dfun(x), x.shape)
    tv = np.broadcast_to(fun(mesh.points), mesh.points.shape)
    td = np.broadcast_to(dfun(mesh.points), mesh.points.shape)
    return vals, ders, (tv, tv), (td, td)


def bilinear_vector(problem, mesh, k, penalties, u, q=None):
    """The vector B(u, phi_r) over all test basis functions phi_r.

    ``u`` is a DGFunction or a pair ``(u, du)`` of vectorized callables.
    Quadrature defaults to k+3 Gauss points for DG arguments and to a
    layer-graded k+6 point rule for exact ones.
    """
    _check_inputs(problem, mesh, penalties)
    discrete = isinstance(u, DGFunction)
    if q is None:
        q = default_assembly_points(k) if discrete else k + 6
    eps = mesh.epsilon
    N = mesh.N
    rule = gauss_rule(q) if discrete else graded_rule(q, layer_levels(mesh))
    w = rule.weights
    phi, dphi = reference_basis(k, rule.nodes)
    x = mesh.map_to_physical(rule.nodes)
    half_h = 0.5 * mesh.widths
    vals, ders, (left, right), (dleft, dright) = _samples_and_traces(u, mesh, k, rule.nodes)
    a_q = np.broadcast_to(problem.a(x), x.shape)
    b_q = np.broadcast_to(problem.b(x), x.shape)

    out = eps * np.einsum("q,eq,qr->er", w, ders, dphi)
    out += np.einsum("q,e,eq,eq,qr->er", w, half_h, a_q, ders, phi)
    out += np.einsum("q,e,eq,eq,qr->er", w, half_h, b_q, vals, phi)
    out = out.reshape(-1)

    jump_u, _ = jump_average(left, right)
    _, avg_du = jump_average(dleft, dright)
    rho = penalties.values
    a_nodes = np.broadcast_to(problem.a(mesh.points), mesh.points.shape)
    for i, (dofs, jump, avg, plus) in enumerate(_interfaces(mesh, k)):
        contrib = -eps * avg_du[i] * jump + eps * jump_u[i] * avg + rho[i] * jump_u[i] * jump
        if i < N:
            contrib = contrib - a_nodes[i] * jump_u[i] * plus
        out[dofs] += contrib
    return out


def bilinear_apply(problem, mesh, k, penalties, u, v, q=None):
    """B(u, v) for a DG test function v.

    Evaluated on v's own samples and traces rather than as a dot product
    with bilinear_vector, whose entries grow like eps/h and cancel.
    """
    _check_inputs(problem, mesh, penalties)
    if v.k != k:
        raise ValueError(f"test function has degree {v.k}, expected {k}")
    discrete = isinstance(u, DGFunction)
    if q is None:
        q = default_assembly_points(k) if discrete else k + 6
    rule = gauss_rule(q) if discrete else graded_rule(q, layer_levels(mesh))
    x = mesh.map_to_physical(rule.nodes)
    wh = rule.weights[None, :] * (0.5 * mesh.widths)[:, None]
    vals, ders, (left, right), (dleft, dright) = _samples_and_traces(u, mesh, k, rule.nodes)
    v_vals, v_ders = v.sample(rule.nodes)
    a_q = np.broadcast_to(problem.a(x), x.shape)
    b_q = np.broadcast_to(problem.b(x), x.shape)
    volume = np.sum(wh * (mesh.epsilon * ders * v_ders + a_q * ders * v_vals + b_q * vals * v_vals))

    jump_u, _ = jump_average(left, right)
    _, avg_du = jump_average(dleft, dright)
    v_left, v_right = v.traces()
    jump_v, _ = jump_average(v_left, v_right)
    _, avg_dv = jump_average(*v.derivative_traces())
    a_nodes = np.broadcast_to(problem.a(mesh.points), mesh.points.shape)
    eps = mesh.epsilon
    faces = np.sum(-eps * avg_du * jump_v + eps * avg_dv * jump_u + penalties.values * jump_u * jump_v)
    upwind = np.sum(a_nodes[:-1] * jump_u[:-1] * v_right[:-1])
    return float(volume + faces - upwind)
