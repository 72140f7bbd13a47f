"""Fast property checks runnable from the command line."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dgspace import DGFunction
from .interpolation import interpolate_lobatto, interpolate_pi, project_gauss_radau
from .mesh import build_macro, build_shishkin, partition
from .norms import discrete_nipg_norm, nipg_norm
from .postprocess import apply_R
from .problem import Problem, paper_test_problem
from .solver import assemble, bilinear_apply, bilinear_vector, custom_schedule, scheme_a, scheme_b, solve


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_dg(rng, mesh, k):
    return DGFunction(mesh, k, rng.standard_normal((mesh.N, k + 1)))


def check_coercivity(rng, samples=60):
    worst = np.inf
    for _ in range(samples):
        k = int(rng.integers(1, 4))
        N = int(rng.choice([8, 16, 32]))
        eps = float(rng.choice([1e-4, 1e-8]))
        pen = (scheme_a if rng.random() < 0.5 else scheme_b)(N)
        problem = paper_test_problem(eps)
        mesh = build_shishkin(N, eps, k + 2.5, problem.beta)
        v = _random_dg(rng, mesh, k)
        norm2 = nipg_norm(v, pen, problem.gamma).total ** 2
        worst = min(worst, bilinear_apply(problem, mesh, k, pen, v, v) / norm2)
    return CheckResult("coercivity", worst >= 1 - 1e-10, f"min B(v,v)/|v|^2 = {worst:.6f}")


def check_norm_equality(rng, samples=40):
    worst = 0.0
    for _ in range(samples):
        k = int(rng.integers(1, 6))
        N = int(rng.choice([8, 16]))
        mesh = build_shishkin(N, 1e-6, k + 2.5, 2.0)
        pen = scheme_b(N)
        v = _random_dg(rng, mesh, k)
        a, b = nipg_norm(v, pen, 1.5).total, discrete_nipg_norm(v, pen, 1.5).total
        worst = max(worst, abs(a - b) / a)
    return CheckResult("norm equality", worst <= 1e-12, f"max relative gap = {worst:.2e}")


def check_projections(rng, samples=10):
    worst = 0.0
    for _ in range(samples):
        k = int(rng.integers(1, 6))
        mesh = build_shishkin(8, 1e-4, k + 2.5, 2.0)
        c = rng.standard_normal(k + 1)
        p = np.polynomial.Polynomial(c)
        for op in (interpolate_lobatto, project_gauss_radau, interpolate_pi):
            v = op(mesh, k, p)
            worst = max(worst, float(np.max(np.abs(v.coeffs - p(v.nodes_physical())))))
    return CheckResult("polynomial reproduction", worst <= 1e-12, f"max nodal error = {worst:.2e}")


def check_orthogonality():
    worst = 0.0
    eps = 1e-8
    problem = paper_test_problem(eps)
    for k in (1, 2):
        for N in (8, 16, 32):
            mesh = build_shishkin(N, eps, k + 2.5, problem.beta)
            pen = scheme_b(N)
            system = assemble(problem, mesh, k, pen)
            uN = solve(system)
            res = bilinear_vector(problem, mesh, k, pen, (problem.u, problem.du)) - system.matrix @ uN.vector
            scale = np.asarray(abs(system.matrix).max(axis=1).todense()).ravel()
            worst = max(worst, float(np.max(np.abs(res) / scale)))
    return CheckResult("Galerkin orthogonality", worst <= 1e-8, f"max |B(u-u_N, phi)|/row = {worst:.2e}")


def check_unit_form():
    one = lambda x: np.ones_like(np.asarray(x, dtype=float))
    zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    problem = Problem(epsilon=1.0, a=one, a_prime=zero, b=one, f=one, beta=1.0, name="unit")
    mesh = partition([0.0, 0.1, 0.45, 0.5, 0.8, 1.0])
    values = np.linspace(1.0, 3.0, mesh.N + 1)
    pen = custom_schedule(values)
    v = DGFunction(mesh, 2, np.ones((mesh.N, 3)))
    got = bilinear_apply(problem, mesh, 2, pen, v, v)
    want = values[0] + values[-1] + 2.0
    return CheckResult("B(1,1) hand value", abs(got - want) <= 1e-12, f"B(1,1) = {got:.15f}, expected {want}")


def check_post_identity(rng, samples=10):
    worst = 0.0
    for _ in range(samples):
        k = int(rng.integers(1, 6))
        mesh = build_shishkin(16, 1e-4, k + 2.5, 2.0)
        macro = build_macro(mesh)
        w = rng.uniform(1.0, 5.0)
        g = lambda x, w=w: np.sin(w * np.asarray(x, dtype=float))
        # sampling a continuous g at the base nodes is I_k g, so compare against the direct data
        Ri = apply_R(interpolate_lobatto(mesh, k, g), macro)
        direct = g(Ri.points_physical())
        worst = max(worst, float(np.max(np.abs(Ri.coeffs - direct))))
    return CheckResult("R v = R I_k v", worst <= 1e-12, f"max deviation = {worst:.2e}")


def run_checks(seed=0):
    rng = np.random.default_rng(seed)
    return [
        check_coercivity(rng),
        check_norm_equality(rng),
        check_projections(rng),
        check_orthogonality(),
        check_unit_form(),
        check_post_identity(rng),
    ]
