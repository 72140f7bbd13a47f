import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shishkin_nipg.dgspace import DGFunction, from_function
from shishkin_nipg.interpolation import interpolate_lobatto
from shishkin_nipg.mesh import build_macro, build_shishkin, partition
from shishkin_nipg.norms import (
    DISCRETE,
    NormReport,
    convergence_rate,
    discrete_nipg_norm,
    error_norm,
    macro_error_norm,
    nipg_norm,
)
from shishkin_nipg.postprocess import apply_R, apply_R_to_function
from shishkin_nipg.problem import paper_test_problem
from shishkin_nipg.solver import assemble, custom_schedule, scheme_a, scheme_b, solve

from oracles import nipg_norm_reference

MESH = build_shishkin(8, 1e-3, 3.5, 2)


def _random(rng, mesh, k):
    return DGFunction(mesh, k, rng.standard_normal((mesh.N, k + 1)))


def test_report_invariants():
    r = NormReport(1.0, 2.0, 6.0)
    assert r.total == 3.0 and r.kind == "continuous"
    with pytest.raises(ValueError):
        NormReport(-1.0, 0.0, 0.0)


def test_zero_and_constant_examples():
    pen = scheme_a(8)
    assert nipg_norm(DGFunction.zeros(MESH, 2), pen, 1.5).total == 0.0
    assert discrete_nipg_norm(DGFunction.zeros(MESH, 2), pen, 1.5).total == 0.0
    rho = np.full(9, 5.0)
    rho[0] = rho[-1] = 1.0
    one = DGFunction(MESH, 2, np.ones((8, 3)))
    r = nipg_norm(one, custom_schedule(rho), 1.0)
    assert r.total**2 == pytest.approx(3.0, abs=1e-13)
    assert r.diffusion_part == pytest.approx(0.0, abs=1e-20)


def test_discrete_single_element_example():
    mesh = partition([0.0, 1.0], epsilon=1.0)
    v = from_function(mesh, 1, lambda x: np.asarray(x))
    r = discrete_nipg_norm(v, custom_schedule([0.0, 0.0]), 0.0)
    assert r.diffusion_part == pytest.approx(1.0, abs=1e-15)
    assert r.kind == DISCRETE


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_discrete_and_continuous_norms_agree_on_dg_space(k):
    rng = np.random.default_rng(k)
    for pen in (scheme_a(8), scheme_b(8)):
        v = _random(rng, MESH, k)
        a, b = nipg_norm(v, pen, 1.5).total, discrete_nipg_norm(v, pen, 1.5).total
        assert abs(a - b) <= 1e-12 * a


# squares of subnormal scalings underflow, so alpha stays well inside the normal range
@given(seed=st.integers(0, 2**31), alpha=st.floats(-5, 5).filter(lambda a: abs(a) > 1e-100), k=st.integers(1, 4))
def test_homogeneity(seed, alpha, k):
    v = _random(np.random.default_rng(seed), MESH, k)
    pen = scheme_b(8)
    assert nipg_norm(alpha * v, pen, 1.5).total == pytest.approx(abs(alpha) * nipg_norm(v, pen, 1.5).total, rel=1e-12)


@given(seed=st.integers(0, 2**31), k=st.integers(1, 4))
def test_triangle_inequality(seed, k):
    rng = np.random.default_rng(seed)
    v, w = _random(rng, MESH, k), _random(rng, MESH, k)
    pen = scheme_a(8)
    assert nipg_norm(v + w, pen, 1.5).total <= nipg_norm(v, pen, 1.5).total + nipg_norm(w, pen, 1.5).total + 1e-10


@pytest.mark.parametrize("k", [1, 2, 3])
def test_norm_matches_adaptive_quadrature_oracle(k):
    v = _random(np.random.default_rng(3 + k), MESH, k)
    pen = scheme_b(8)
    r = nipg_norm(v, pen, 1.5)
    diff, react, jumps = nipg_norm_reference(v, pen.values, 1.5)
    assert r.diffusion_part == pytest.approx(diff, rel=1e-9)
    assert r.reaction_part == pytest.approx(react, rel=1e-9)
    assert r.jump_part == pytest.approx(jumps, rel=1e-12)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("eps", [1e-2, 1e-8])
def test_error_norm_matches_oracle_across_the_layer(eps):
    k = 2
    problem = paper_test_problem(eps)
    mesh = build_shishkin(16, eps, k + 2.5, problem.beta)
    pen = scheme_b(16)
    uN = solve(assemble(problem, mesh, k, pen))
    r = error_norm((problem.u, problem.du), uN, pen, problem.gamma)
    diff, react, jumps = nipg_norm_reference(uN, pen.values, problem.gamma, exact=(problem.u, problem.du))
    assert r.diffusion_part == pytest.approx(diff, rel=1e-6)
    assert r.reaction_part == pytest.approx(react, rel=1e-6)
    assert r.jump_part == pytest.approx(jumps, rel=1e-10)


def test_error_norm_of_exact_representation():
    p = np.polynomial.Polynomial([0.3, -1.0, 2.0])
    v = from_function(MESH, 2, p)
    r = error_norm((p, p.deriv()), v, scheme_b(8), 1.5)
    assert r.total <= 1e-12
    with pytest.raises(ValueError):
        error_norm((p, None), v, scheme_b(8), 1.5)


def test_single_jump_isolation():
    g = lambda x: np.sin(np.asarray(x))
    dg = lambda x: np.cos(np.asarray(x))
    v = from_function(MESH, 2, g)
    # elements after x_4 carry g + 1, so u - v jumps only at x_4 and at x_N
    coeffs = np.array(v.coeffs)
    coeffs[4:] += 1.0
    shifted = DGFunction(MESH, 2, coeffs)
    pen = scheme_a(8)
    r = error_norm((g, dg), shifted, pen, 1.5)
    assert r.jump_part == pytest.approx(pen.values[4] + pen.values[8], rel=1e-12)


def test_macro_error_norm_examples():
    macro = build_macro(MESH)
    pen = scheme_b(8)
    g = lambda x: np.cos(np.asarray(x))
    w = apply_R_to_function(g, macro, 2)
    assert macro_error_norm((g, lambda x: -np.sin(np.asarray(x))), w, pen, 1.5).jump_part <= 1e-28
    zero = apply_R(DGFunction.zeros(MESH, 2), macro)
    assert macro_error_norm(None, zero, pen, 1.5).total == 0.0
    v = apply_R(_random(np.random.default_rng(0), MESH, 2), macro)
    scaled = apply_R(-3.0 * _random(np.random.default_rng(0), MESH, 2), macro)
    assert macro_error_norm(None, scaled, pen, 1.5).total == pytest.approx(
        3.0 * macro_error_norm(None, v, pen, 1.5).total, rel=1e-12
    )
    with pytest.raises(ValueError):
        macro_error_norm(None, v, scheme_b(16), 1.5)


def test_monotone_interpolation_error():
    eps = 1e-8
    problem = paper_test_problem(eps)
    errs = []
    for N in (8, 16, 32, 64):
        mesh = build_shishkin(N, eps, 3.5, problem.beta)
        pen = scheme_b(N)
        uN = solve(assemble(problem, mesh, 1, pen))
        Iu = interpolate_lobatto(mesh, 1, problem.u)
        errs.append(nipg_norm(Iu - uN, pen, problem.gamma).total)
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_convergence_rate_examples():
    assert convergence_rate(0.1, 0.025) == pytest.approx(2.0, abs=1e-15)
    assert convergence_rate(0.1, 0.05) == pytest.approx(1.0, abs=1e-15)
    assert convergence_rate(math.e, math.e) == 0.0
    with pytest.raises(ValueError):
        convergence_rate(0.0, 1.0)
