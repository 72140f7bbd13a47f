"""Acceptance suite: one test per criterion, thresholds as specified.

Each test gathers every sub-check before asserting so that a failure
message reports all measured values, not only the first miss.
"""

import time

import numpy as np
import pytest

from shishkin_nipg.dgspace import DGFunction
from shishkin_nipg.experiment import ExperimentConfig, run_sweep
from shishkin_nipg.interpolation import interpolate_lobatto, interpolate_pi, project_gauss_radau
from shishkin_nipg.mesh import build_macro, build_shishkin, partition
from shishkin_nipg.norms import discrete_nipg_norm, nipg_norm
from shishkin_nipg.postprocess import apply_R, apply_R_to_function
from shishkin_nipg.problem import Problem, paper_test_problem
from shishkin_nipg.solver import (
    assemble,
    bilinear_apply,
    bilinear_vector,
    custom_schedule,
    scheme_a,
    scheme_b,
    solve,
)

RATE_CONFIG = ExperimentConfig(epsilons=(1e-8,), degrees=(1, 2), Ns=(8, 16, 32, 64))


def _random(rng, mesh, k):
    return DGFunction(mesh, k, rng.standard_normal((mesh.N, k + 1)))


def _report(failures):
    assert not failures, "\n".join(failures)


@pytest.fixture(scope="module")
def rate_table():
    start = time.perf_counter()
    table = run_sweep(RATE_CONFIG)
    return table, time.perf_counter() - start


@pytest.fixture(scope="module")
def coarse_quadrature_table():
    tables = {}
    for k in RATE_CONFIG.degrees:
        cfg = ExperimentConfig(epsilons=RATE_CONFIG.epsilons, degrees=(k,), Ns=RATE_CONFIG.Ns, q_err=k + 3)
        tables[k] = run_sweep(cfg)
    return tables


def test_acceptance_01_coercivity():
    start = time.perf_counter()
    rng = np.random.default_rng(20240101)
    failures, count = [], 0
    for k in (1, 2, 3):
        for N in (8, 16, 32):
            for eps in (1e-4, 1e-8):
                problem = paper_test_problem(eps)
                mesh = build_shishkin(N, eps, k + 2.5, problem.beta)
                for scheme in (scheme_a, scheme_b):
                    pen = scheme(N)
                    for _ in range(28):
                        v = _random(rng, mesh, k)
                        norm2 = nipg_norm(v, pen, problem.gamma).total ** 2
                        Bvv = bilinear_apply(problem, mesh, k, pen, v, v)
                        count += 1
                        if Bvv < (1 - 1e-10) * norm2:
                            failures.append(f"k={k} N={N} eps={eps} {pen.scheme}: B={Bvv} norm2={norm2}")
    elapsed = time.perf_counter() - start
    assert count >= 1000
    if elapsed >= 10:
        failures.append(f"runtime {elapsed:.1f} s >= 10 s")
    _report(failures)


def test_acceptance_02_norm_equality():
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    failures = []
    for i in range(200):
        k = 1 + i % 5
        N = (8, 16, 32)[i % 3]
        eps = (1e-4, 1e-8)[i % 2]
        mesh = build_shishkin(N, eps, k + 2.5, 2.0)
        pen = (scheme_a, scheme_b)[(i // 2) % 2](N)
        v = _random(rng, mesh, k)
        a = nipg_norm(v, pen, 1.5).total
        b = discrete_nipg_norm(v, pen, 1.5).total
        if abs(a - b) > 1e-12 * a:
            failures.append(f"k={k} N={N}: continuous {a!r} discrete {b!r}")
    elapsed = time.perf_counter() - start
    if elapsed >= 5:
        failures.append(f"runtime {elapsed:.1f} s >= 5 s")
    _report(failures)


def test_acceptance_03_projection_identities():
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    failures = []
    xi, w = np.polynomial.legendre.leggauss(16)
    for k in range(1, 6):
        mesh = build_shishkin(16, 1e-6, k + 2.5, 2.0)
        x = mesh.map_to_physical(xi)
        p = np.polynomial.Polynomial(rng.standard_normal(k + 1))
        for name, op in (("I_k", interpolate_lobatto), ("P_h", project_gauss_radau), ("Pi", interpolate_pi)):
            err = np.max(np.abs(op(mesh, k, p).sample(xi)[0] - p(x)))
            if err > 1e-12:
                failures.append(f"{name} k={k}: reproduction error {err:.2e}")

        g = lambda t: np.exp(np.asarray(t)) * np.cos(4 * np.asarray(t))
        P = project_gauss_radau(mesh, k, g)
        vals = P.sample(xi)[0]
        for m in range(k):
            leg = np.polynomial.legendre.Legendre.basis(m)(xi)
            mom = np.max(np.abs((g(x) - vals) @ (w * leg)))
            if mom > 1e-12:
                failures.append(f"P_h k={k}: moment {m} residual {mom:.2e}")
        left, _ = P.traces()
        end = np.max(np.abs(left[1:] - g(mesh.points[1:])))
        if end > 1e-12:
            failures.append(f"P_h k={k}: right-endpoint residual {end:.2e}")

        u = paper_test_problem(1e-6).u
        Pi = interpolate_pi(mesh, k, u)
        l, r = Pi.traces()
        t = mesh.N // 2
        seam = abs((u(mesh.points[t]) - l[t]) - (u(mesh.points[t]) - r[t]))
        if seam > 1e-12:
            failures.append(f"Pi k={k}: seam jump {seam:.2e}")
    elapsed = time.perf_counter() - start
    if elapsed >= 5:
        failures.append(f"runtime {elapsed:.1f} s >= 5 s")
    _report(failures)


def test_acceptance_04_galerkin_orthogonality():
    start = time.perf_counter()
    eps = 1e-8
    problem = paper_test_problem(eps)
    failures = []
    for k in (1, 2):
        for N in (8, 16, 32):
            mesh = build_shishkin(N, eps, k + 2.5, problem.beta)
            pen = scheme_b(N)
            system = assemble(problem, mesh, k, pen)
            uN = solve(system)
            residual = bilinear_vector(problem, mesh, k, pen, (problem.u, problem.du)) - system.matrix @ uN.vector
            row_size = np.asarray(abs(system.matrix).max(axis=1).todense()).ravel()
            worst = float(np.max(np.abs(residual) / row_size))
            if worst > 1e-8:
                failures.append(f"k={k} N={N}: max |B(u-u_N, phi_j)|/row = {worst:.2e}")
    elapsed = time.perf_counter() - start
    if elapsed >= 10:
        failures.append(f"runtime {elapsed:.1f} s >= 10 s")
    _report(failures)


RATE_THRESHOLD = {1: 1.5, 2: 2.3}


def _supercloseness(table, column):
    failures = []
    for k, threshold in RATE_THRESHOLD.items():
        errs = table.column(column, 1e-8, k)
        if not all(a > b for a, b in zip(errs, errs[1:])):
            failures.append(f"k={k}: {column} not strictly decreasing: {errs}")
        rate = table.row(1e-8, k, 32).p_Ik if column == "e_Ik" else table.row(1e-8, k, 32).p_Pi
        if rate < threshold:
            failures.append(f"k={k}: {column} rate 32->64 = {rate:.4f} < {threshold}")
    return failures


def test_acceptance_05_supercloseness_rates(rate_table):
    table, elapsed = rate_table
    failures = _supercloseness(table, "e_Ik")
    if elapsed >= 30:
        failures.append(f"runtime {elapsed:.1f} s >= 30 s")
    _report(failures)


def test_acceptance_06_supercloseness_of_composite_interpolant(rate_table):
    table, _ = rate_table
    _report(_supercloseness(table, "e_Pi"))


def _rate(table, column, k, N=32):
    from shishkin_nipg.norms import convergence_rate

    return convergence_rate(getattr(table.row(1e-8, k, N), column), getattr(table.row(1e-8, k, 2 * N), column))


def test_acceptance_07_discrete_norm_superconvergence(rate_table):
    table, _ = rate_table
    failures = []
    for k in (1, 2):
        discrete = _rate(table, "e_uN_discrete", k)
        continuous = _rate(table, "e_uN_nipg", k)
        if discrete < k + 0.3:
            failures.append(f"k={k}: discrete-norm rate {discrete:.4f} < {k + 0.3}")
        if discrete - continuous < 0.3:
            failures.append(f"k={k}: discrete rate {discrete:.4f} exceeds continuous {continuous:.4f} by < 0.3")
    _report(failures)


def test_acceptance_08_post_processing_gain(rate_table):
    table, _ = rate_table
    failures = []
    for k in (1, 2):
        for N in (32, 64):
            r = table.row(1e-8, k, N)
            if not r.e_post <= r.e_uN_nipg:
                failures.append(f"k={k} N={N}: post error {r.e_post:.4e} > u_N error {r.e_uN_nipg:.4e}")
        rate = table.row(1e-8, k, 32).p_post
        if rate < k + 0.3:
            failures.append(f"k={k}: post-processed rate 32->64 = {rate:.4f} < {k + 0.3}")

    rng = np.random.default_rng(8)
    mesh_cache = {}
    worst = 0.0
    for i in range(50):
        k = 1 + i % 5
        if k not in mesh_cache:
            mesh = build_shishkin(32, 1e-8, k + 2.5, 2.0)
            mesh_cache[k] = (mesh, build_macro(mesh))
        mesh, macro = mesh_cache[k]
        c = rng.uniform(-3, 3, 4)
        g = lambda x, c=c: c[0] * np.sin(c[1] * np.asarray(x)) + c[2] * np.exp(c[3] * np.asarray(x))
        direct = apply_R_to_function(g, macro, k)
        via_interpolant = apply_R(interpolate_lobatto(mesh, k, g), macro)
        worst = max(worst, float(np.max(np.abs(direct.coeffs - via_interpolant.coeffs))))
    if worst > 1e-12:
        failures.append(f"R g != R I_k g: max deviation {worst:.2e}")
    _report(failures)


def test_acceptance_09_hand_derived_bilinear_value():
    one = lambda x: np.ones_like(np.asarray(x, dtype=float))
    zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    problem = Problem(epsilon=1.0, a=one, a_prime=zero, b=one, f=one, beta=1.0)
    rng = np.random.default_rng(9)
    failures = []
    meshes = [partition(np.concatenate([[0.0], np.sort(rng.uniform(0, 1, n - 1)), [1.0]])) for n in (1, 2, 5, 13)]
    meshes.append(partition(build_shishkin(16, 1e-3, 2.5, 2).points))
    for mesh in meshes:
        for k in (1, 2, 4):
            rho = rng.uniform(0, 10, mesh.N + 1)
            v = DGFunction(mesh, k, np.ones((mesh.N, k + 1)))
            got = bilinear_apply(problem, mesh, k, custom_schedule(rho), v, v)
            want = rho[0] + rho[-1] + 2.0
            if abs(got - want) > 1e-12:
                failures.append(f"N={mesh.N} k={k}: B(1,1) = {got!r}, expected {want!r}")
    _report(failures)


def test_acceptance_10_quadrature_saturation(rate_table, coarse_quadrature_table):
    table, _ = rate_table
    failures = []
    for k, coarse in coarse_quadrature_table.items():
        for N in RATE_CONFIG.Ns:
            fine_row, coarse_row = table.row(1e-8, k, N), coarse.row(1e-8, k, N)
            for col in ("e_uN_nipg", "e_uN_discrete", "e_Ik", "e_Pi", "e_post"):
                a, b = getattr(coarse_row, col), getattr(fine_row, col)
                change = abs(a - b) / abs(b)
                if change >= 1e-3:
                    failures.append(f"k={k} N={N} {col}: relative change {change:.2e}")
    _report(failures)
