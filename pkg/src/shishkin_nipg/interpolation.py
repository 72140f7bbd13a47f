"""Gauss-Lobatto interpolation, Gauss-Radau projection and their composite.

The composite applies the Radau projection on the coarse elements 1..N/2
and Lobatto interpolation on the fine elements N/2+1..N, so that u - Pi u
is continuous across the transition node.
"""

from __future__ import annotations

from enum import Enum
from functools import lru_cache

import numpy as np
import scipy.linalg

from .dgspace import DGFunction, OneSided, from_function, one_sided, reference_basis, reference_nodes
from .quadrature import gauss_rule, lagrange_basis, legendre_eval


class InterpolantKind(Enum):
    LOBATTO = "lobatto"
    GAUSS_RADAU = "gauss-radau"
    COMPOSITE = "composite"


def default_moment_points(k):
    return k + 6


def radau_local_matrix(k, q=None):
    """Local (k+1)x(k+1) system of the Radau projection in the nodal basis.

    Rows 0..k-1 hold moments against Legendre P_0..P_{k-1} on [-1, 1];
    the last row picks the right endpoint value.
    """
    q = default_moment_points(k) if q is None else q
    A = np.zeros((k + 1, k + 1))
    A[:k] = _weighted_legendre(k, q) @ reference_basis(k, gauss_rule(q).nodes)[0]
    A[k, k] = 1.0
    return A


@lru_cache(maxsize=None)
def _weighted_legendre(k, q):
    rule = gauss_rule(q)
    legendre = np.array([legendre_eval(m, rule.nodes)[0] for m in range(k)])
    return legendre.reshape(k, -1) * rule.weights


@lru_cache(maxsize=None)
def _radau_factor(k, q):
    return scipy.linalg.lu_factor(radau_local_matrix(k, q))


def interpolate_lobatto(mesh, k, g):
    """Lagrange interpolation of a continuous g at the mapped Lobatto nodes."""
    return from_function(mesh, k, g)


def _radau_coeffs(mesh, k, g, q):
    g = one_sided(g)
    lu_piv = _radau_factor(k, q)
    x = mesh.map_to_physical(gauss_rule(q).nodes)
    gx = np.broadcast_to(g.right(x), x.shape)
    rhs = np.empty((k + 1, mesh.N))
    rhs[:k] = _weighted_legendre(k, q) @ gx.T
    rhs[k] = np.broadcast_to(g.left(mesh.points[1:]), (mesh.N,))
    return scipy.linalg.lu_solve(lu_piv, rhs).T


def project_gauss_radau(mesh, k, g, q=None):
    """Element-wise p in P_k with (p - g, P_k-1) = 0 and p(x_i^-) = g(x_i^-)."""
    q = default_moment_points(k) if q is None else q
    return DGFunction(mesh, k, _radau_coeffs(mesh, k, g, q))


def interpolate_pi(mesh, k, g, q=None):
    """Radau projection on elements 1..N/2, Lobatto interpolation on N/2+1..N."""
    q = default_moment_points(k) if q is None else q
    half = mesh.N // 2
    coeffs = np.array(from_function(mesh, k, g).coeffs)
    coeffs[:half] = _radau_coeffs(mesh, k, g, q)[:half]
    return DGFunction(mesh, k, coeffs)


def interpolate(kind, mesh, k, g, q=None):
    kind = InterpolantKind(kind)
    if kind is InterpolantKind.LOBATTO:
        return interpolate_lobatto(mesh, k, g)
    if kind is InterpolantKind.GAUSS_RADAU:
        return project_gauss_radau(mesh, k, g, q)
    return interpolate_pi(mesh, k, g, q)


def dg_as_function(v):
    """Wrap a DGFunction as a one-sided callable on [0, 1] (for idempotence checks)."""
    pts = v.mesh.points

    def evaluate(x, side):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        idx = np.searchsorted(pts, flat, side="left" if side < 0 else "right")
        idx = np.clip(idx, 1, v.mesh.N) - 1
        h = v.mesh.widths[idx]
        xi = np.clip(2.0 * (flat - pts[idx]) / h - 1.0, -1.0, 1.0)
        phi, _ = lagrange_basis(reference_nodes(v.k), xi)
        return np.einsum("ij,ij->i", phi, v.coeffs[idx]).reshape(x.shape)

    return OneSided(lambda x: evaluate(x, -1), lambda x: evaluate(x, +1))
