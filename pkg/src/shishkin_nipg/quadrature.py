"""Legendre polynomials, Gauss / Gauss-Lobatto points and Lagrange bases on [-1, 1].

Everything here lives on the reference interval. Callers map to physical
elements themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_GAUSS_POINTS = 32
MAX_DEGREE = 10
MAX_LOBATTO_DEGREE = MAX_DEGREE

_ROOT_TOL = 1e-15
_MAX_ITER = 100


class ConvergenceError(RuntimeError):
    """Root iteration failed to reach the requested tolerance."""


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int

    def __len__(self):
        return len(self.nodes)


@dataclass(frozen=True, eq=False)
class LobattoPointSet:
    degree: int
    points: np.ndarray


def legendre_eval(n, x):
    """Return ``(P_n(x), P_n'(x))`` by the three-term recurrence.

    ``x`` may be a scalar or an array; the derivative recurrence
    ``P'_{m+1} = P'_{m-1} + (2m+1) P_m`` stays finite at ``x = +-1``.
    """
    if n < 0:
        raise ValueError(f"Legendre degree must be >= 0, got {n}")
    x = np.asarray(x, dtype=float)
    p_prev, p = np.ones_like(x), x.copy()
    dp_prev, dp = np.zeros_like(x), np.ones_like(x)
    if n == 0:
        return _unwrap(p_prev), _unwrap(dp_prev)
    for m in range(1, n):
        p_next = ((2 * m + 1) * x * p - m * p_prev) / (m + 1)
        dp_next = dp_prev + (2 * m + 1) * p
        p_prev, p = p, p_next
        dp_prev, dp = dp, dp_next
    return _unwrap(p), _unwrap(dp)


def _unwrap(a):
    return float(a) if a.ndim == 0 else a


def _bracketed_newton(fun, lo, hi, x0):
    """Newton iteration safeguarded by bisection on a sign-changing bracket."""
    f_lo = fun(lo)[0]
    x = x0 if lo < x0 < hi else 0.5 * (lo + hi)
    for _ in range(_MAX_ITER):
        val, der = fun(x)
        if val == 0.0:
            return x
        if np.sign(val) == np.sign(f_lo):
            lo, f_lo = x, val
        else:
            hi = x
        x_new = x - val / der if der != 0.0 else np.nan
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= _ROOT_TOL or hi - lo <= _ROOT_TOL:
            return x_new
        x = x_new
    raise ConvergenceError(
        f"root in [{lo!r}, {hi!r}] not resolved to {_ROOT_TOL} in {_MAX_ITER} iterations"
    )


def _symmetrize(points):
    points = 0.5 * (points - points[::-1])
    if len(points) % 2:
        points[len(points) // 2] = 0.0
    return points


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def gauss_rule(q):
    """q-point Gauss-Legendre rule on [-1, 1], exact to degree 2q - 1."""
    if q < 1:
        raise ValueError(f"number of Gauss points must be >= 1, got {q}")
    if q > MAX_GAUSS_POINTS:
        raise ValueError(f"at most {MAX_GAUSS_POINTS} Gauss points supported, got {q}")

    def fun(x):
        return legendre_eval(q, x)

    # Bruns' inequality: the i-th root angle lies in ((i-1/2)pi/(q+1/2), i pi/(q+1/2)).
    nodes = np.empty(q)
    for i in range(1, q + 1):
        th_lo = (i - 0.5) * np.pi / (q + 0.5)
        th_hi = i * np.pi / (q + 0.5)
        guess = np.cos((i - 0.25) * np.pi / (q + 0.5))
        nodes[q - i] = _bracketed_newton(fun, np.cos(th_hi), np.cos(th_lo), guess)
    nodes = _symmetrize(nodes)
    dp = legendre_eval(q, nodes)[1]
    weights = 2.0 / ((1.0 - nodes**2) * dp**2)
    return QuadratureRule(_frozen(nodes), _frozen(weights), 2 * q - 1)


@lru_cache(maxsize=None)
def graded_rule(q, levels):
    """Composite q-point Gauss rule on [-1, 1] refined geometrically toward +1.

    Breakpoints are 1 - 2^(1-j) for j = 0..levels, so the last piece has
    length 2^(1-levels). Resolves integrands with a boundary layer at the
    right end of the interval.
    """
    if levels < 0:
        raise ValueError(f"levels must be >= 0, got {levels}")
    base = gauss_rule(q)
    cuts = np.concatenate([1.0 - 2.0 ** (1.0 - np.arange(levels + 1)), [1.0]])
    lo, hi = cuts[:-1], cuts[1:]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi)[:, None] * 0.5 + half[:, None] * base.nodes[None, :]
    weights = half[:, None] * base.weights[None, :]
    return QuadratureRule(_frozen(nodes.ravel()), _frozen(weights.ravel()), base.exact_degree)


@lru_cache(maxsize=None)
def lobatto_points(k):
    """The k+1 Gauss-Lobatto points: +-1 and the roots of P_k'."""
    if k < 1:
        raise ValueError(f"Lobatto degree must be >= 1, got {k}")
    if k > MAX_LOBATTO_DEGREE:
        raise ValueError(f"Lobatto degree at most {MAX_LOBATTO_DEGREE}, got {k}")
    points = np.empty(k + 1)
    points[0], points[-1] = -1.0, 1.0
    if k >= 2:

        def fun(x):
            p, dp = legendre_eval(k, x)
            d2p = (2.0 * x * dp - k * (k + 1) * p) / (1.0 - x * x)
            return dp, d2p

        # Rolle: one root of P_k' between consecutive roots of P_k.
        gauss = gauss_rule(k).nodes
        for i in range(k - 1):
            lo, hi = gauss[i], gauss[i + 1]
            points[i + 1] = _bracketed_newton(fun, lo, hi, 0.5 * (lo + hi))
        points = _symmetrize(points)
        points[0], points[-1] = -1.0, 1.0
    return LobattoPointSet(k, _frozen(points))


def lobatto_weights(k):
    """Quadrature weights attached to ``lobatto_points(k)``."""
    pts = lobatto_points(k).points
    p = legendre_eval(k, pts)[0]
    return 2.0 / (k * (k + 1) * p**2)


def _check_distinct(points):
    points = np.asarray(points, dtype=float)
    if len(np.unique(points)) != len(points):
        raise ValueError("interpolation points must be pairwise distinct")
    return points


def lagrange_basis(points, x):
    """Values and derivatives of all Lagrange cardinal polynomials.

    Returns two arrays of shape ``(len(x), len(points))``.
    """
    points = _check_distinct(points)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = len(points)
    diff = x[:, None] - points[None, :]
    denom = points[:, None] - points[None, :]
    np.fill_diagonal(denom, 1.0)
    values = np.empty((len(x), n))
    derivs = np.zeros((len(x), n))
    for j in range(n):
        others = [m for m in range(n) if m != j]
        factors = diff[:, others] / denom[j, others]
        values[:, j] = np.prod(factors, axis=1)
        for a, m in enumerate(others):
            rest = np.delete(factors, a, axis=1)
            derivs[:, j] += np.prod(rest, axis=1) / denom[j, m]
    return values, derivs


def lagrange_basis_eval(points, j, x):
    """Value and derivative of the j-th cardinal polynomial at a scalar x."""
    points = _check_distinct(points)
    if not 0 <= j < len(points):
        raise IndexError(f"basis index {j} out of range for {len(points)} points")
    values, derivs = lagrange_basis(points, [x])
    return float(values[0, j]), float(derivs[0, j])
