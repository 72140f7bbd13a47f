import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shishkin_nipg.dgspace import DGFunction
from shishkin_nipg.interpolation import (
    InterpolantKind,
    dg_as_function,
    interpolate,
    interpolate_lobatto,
    interpolate_pi,
    project_gauss_radau,
)
from shishkin_nipg.mesh import build_shishkin, partition
from shishkin_nipg.problem import paper_test_problem

from oracles import element_polys, radau_reference

MESH = build_shishkin(8, 1e-2, 2.5, 2)
UNIT = partition([0.0, 1.0])


def _square(x):
    return np.asarray(x, dtype=float) ** 2


def test_radau_linear_projection_of_square():
    v = project_gauss_radau(UNIT, 1, _square)
    p = element_polys(v)[0]
    np.testing.assert_allclose(p.convert().coef, [-1 / 3, 4 / 3], atol=1e-14)
    assert float(p(1.0)) == pytest.approx(1.0, abs=1e-15)


def test_lobatto_linear_interpolant_of_square():
    v = interpolate_lobatto(UNIT, 1, _square)
    x = np.linspace(0, 1, 201)
    err = np.abs(element_polys(v)[0](x) - x**2)
    assert err.max() == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("kind", list(InterpolantKind))
@given(k=st.integers(1, 6), seed=st.integers(0, 2**31))
def test_polynomials_are_reproduced(kind, k, seed):
    p = np.polynomial.Polynomial(np.random.default_rng(seed).standard_normal(k + 1))
    v = interpolate(kind, MESH, k, p)
    x = MESH.map_to_physical(np.linspace(-1, 1, 7))
    vals, _ = v.sample(np.linspace(-1, 1, 7))
    np.testing.assert_allclose(vals, p(x), atol=1e-11)


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_radau_matches_definition_oracle(k):
    g = lambda x: np.exp(np.asarray(x)) * np.sin(3 * np.asarray(x))
    v = project_gauss_radau(MESH, k, g)
    pts = MESH.points
    mine = element_polys(v)
    for i in range(MESH.N):
        ref = radau_reference(g, pts[i], pts[i + 1], k)
        xs = np.linspace(pts[i], pts[i + 1], 9)
        np.testing.assert_allclose(mine[i](xs), ref(xs), atol=1e-10)


@given(k=st.integers(1, 5), j=st.data())
def test_radau_moments_and_endpoint(k, j):
    g = lambda x: np.cos(5 * np.asarray(x)) + np.asarray(x) ** 7
    v = project_gauss_radau(MESH, k, g)
    m = j.draw(st.integers(0, k - 1))
    xi, w = np.polynomial.legendre.leggauss(20)
    vals, _ = v.sample(xi)
    x = MESH.map_to_physical(xi)
    leg = np.polynomial.legendre.Legendre.basis(m)(xi)
    moments = (g(x) - vals) @ (w * leg)
    np.testing.assert_allclose(moments, 0.0, atol=1e-13)
    left, _ = v.traces()
    np.testing.assert_allclose(left[1:], g(MESH.points[1:]), atol=1e-13)


@pytest.mark.parametrize("k", [1, 2, 4])
def test_composite_error_is_continuous_at_transition(k):
    u = paper_test_problem(1e-2).u
    v = interpolate_pi(MESH, k, u)
    left, right = v.traces()
    t = MESH.N // 2
    assert (u(MESH.points[t]) - left[t]) - (u(MESH.points[t]) - right[t]) == pytest.approx(0.0, abs=1e-14)
    lob = interpolate_lobatto(MESH, k, u)
    np.testing.assert_array_equal(v.coeffs[t:], lob.coeffs[t:])


@pytest.mark.parametrize("kind", list(InterpolantKind))
@pytest.mark.parametrize("k", [1, 3])
def test_idempotence(kind, k):
    u = paper_test_problem(1e-2).u
    once = interpolate(kind, MESH, k, u)
    twice = interpolate(kind, MESH, k, dg_as_function(once))
    np.testing.assert_allclose(twice.coeffs, once.coeffs, atol=1e-13)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_pi_rate_on_coarse_part(k):
    eps = 1e-8
    u = paper_test_problem(eps).u
    errs = []
    for N in (16, 32, 64):
        mesh = build_shishkin(N, eps, k + 2.5, 2)
        v = interpolate_pi(mesh, k, u)
        xi, w = np.polynomial.legendre.leggauss(k + 6)
        vals, _ = v.sample(xi)
        x = mesh.map_to_physical(xi)
        half = N // 2
        sq = ((u(x[:half]) - vals[:half]) ** 2) @ w * (0.5 * mesh.widths[:half])
        errs.append(math.sqrt(sq.sum()))
    rate = math.log2(errs[-2] / errs[-1])
    assert rate >= k + 0.8


def test_interpolants_reject_bad_input():
    with pytest.raises(ValueError):
        interpolate("bogus", MESH, 1, _square)
    with pytest.raises(ValueError):
        interpolate_lobatto(MESH, 0, _square)
    assert isinstance(interpolate("composite", MESH, 2, _square), DGFunction)
