"""Discontinuous piecewise polynomials in nodal Gauss-Lobatto form.

Element indices in the public API are 1-based (element i is [x_{i-1}, x_i]);
node indices run 0..N. Coefficient arrays are stored 0-based with shape
``(N, k + 1)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .quadrature import MAX_DEGREE, lagrange_basis, lobatto_points


@lru_cache(maxsize=None)
def reference_nodes(k):
    return lobatto_points(k).points


@lru_cache(maxsize=512)
def _basis_cached(k, xi):
    values, derivs = lagrange_basis(reference_nodes(k), np.array(xi))
    values.setflags(write=False)
    derivs.setflags(write=False)
    return values, derivs


def reference_basis(k, xi):
    """Nodal basis values and reference derivatives at points xi, shape (len(xi), k+1)."""
    return _basis_cached(k, tuple(np.atleast_1d(np.asarray(xi, dtype=float)).tolist()))


@dataclass(frozen=True)
class OneSided:
    """A function with separate left and right limits at every point."""

    left: Callable[[np.ndarray], np.ndarray]
    right: Callable[[np.ndarray], np.ndarray]


def one_sided(g):
    if isinstance(g, OneSided):
        return g
    return OneSided(g, g)


def jump_average(left, right):
    """Jumps and averages at nodes 0..N from one-sided limits.

    ``left[0]`` and ``right[-1]`` are ignored: at x_0 the jump is -u(x_0^+)
    and at x_N it is u(x_N^-); averages there are the one-sided value.
    """
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    jump = np.empty_like(left)
    avg = np.empty_like(left)
    jump[1:-1] = left[1:-1] - right[1:-1]
    avg[1:-1] = 0.5 * (left[1:-1] + right[1:-1])
    jump[0], avg[0] = -right[0], right[0]
    jump[-1], avg[-1] = left[-1], left[-1]
    return jump, avg


@dataclass(frozen=True)
class InterfaceValues:
    node: int
    left_limit: Optional[float]
    right_limit: Optional[float]
    jump: float
    average: float


@dataclass(frozen=True, eq=False)
class DGFunction:
    mesh: object
    k: int
    coeffs: np.ndarray

    def __post_init__(self):
        if not 1 <= self.k <= MAX_DEGREE:
            raise ValueError(f"degree must lie in 1..{MAX_DEGREE}, got {self.k}")
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != (self.mesh.N, self.k + 1):
            raise ValueError(
                f"coefficients must have shape {(self.mesh.N, self.k + 1)}, got {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, mesh, k):
        return cls(mesh, k, np.zeros((mesh.N, k + 1)))

    @classmethod
    def from_vector(cls, mesh, k, vec):
        return cls(mesh, k, np.reshape(vec, (mesh.N, k + 1)))

    @property
    def vector(self):
        """Coefficients flattened element-major (the solver's unknown ordering)."""
        return self.coeffs.reshape(-1)

    def eval(self, i, xi):
        """Value and physical derivative on element i (1-based) at reference xi."""
        if not 1 <= i <= self.mesh.N:
            raise IndexError(f"element index {i} outside 1..{self.mesh.N}")
        if not -1.0 <= xi <= 1.0:
            raise ValueError(f"reference coordinate {xi} outside [-1, 1]")
        phi, dphi = reference_basis(self.k, [xi])
        c = self.coeffs[i - 1]
        return float(phi[0] @ c), float(dphi[0] @ (c - c[0])) * 2.0 / self.mesh.widths[i - 1]

    @property
    def _shifted(self):
        # cardinal derivatives sum to zero, so shifting by c_0 is exact and kills cancellation
        return self.coeffs - self.coeffs[:, :1]

    def sample(self, xi):
        """Values and physical derivatives at reference points xi on every element."""
        phi, dphi = reference_basis(self.k, xi)
        vals = self.coeffs @ phi.T
        ders = (self._shifted @ dphi.T) * (2.0 / self.mesh.widths)[:, None]
        return vals, ders

    def traces(self):
        """One-sided limits (left, right) at nodes 0..N; NaN where undefined."""
        N = self.mesh.N
        left = np.full(N + 1, np.nan)
        right = np.full(N + 1, np.nan)
        left[1:] = self.coeffs[:, -1]
        right[:-1] = self.coeffs[:, 0]
        return left, right

    def derivative_traces(self):
        _, dphi = reference_basis(self.k, [-1.0, 1.0])
        scale = 2.0 / self.mesh.widths
        N = self.mesh.N
        left = np.full(N + 1, np.nan)
        right = np.full(N + 1, np.nan)
        shifted = self._shifted
        left[1:] = shifted @ dphi[1] * scale
        right[:-1] = shifted @ dphi[0] * scale
        return left, right

    def interface_values(self, i):
        N = self.mesh.N
        if not 0 <= i <= N:
            raise IndexError(f"node index {i} outside 0..{N}")
        left, right = self.traces()
        jump, avg = jump_average(left, right)
        return InterfaceValues(
            node=i,
            left_limit=None if i == 0 else float(left[i]),
            right_limit=None if i == N else float(right[i]),
            jump=float(jump[i]),
            average=float(avg[i]),
        )

    def nodes_physical(self):
        x = self.mesh.map_to_physical(reference_nodes(self.k))
        x[:, 0] = self.mesh.points[:-1]
        x[:, -1] = self.mesh.points[1:]
        return x

    def _check_compatible(self, other):
        if other.mesh is not self.mesh and not np.array_equal(other.mesh.points, self.mesh.points):
            raise ValueError("DG functions live on different meshes")
        if other.k != self.k:
            raise ValueError(f"degree mismatch: {self.k} vs {other.k}")

    def __add__(self, other):
        self._check_compatible(other)
        return DGFunction(self.mesh, self.k, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check_compatible(other)
        return DGFunction(self.mesh, self.k, self.coeffs - other.coeffs)

    def __mul__(self, alpha):
        return DGFunction(self.mesh, self.k, alpha * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self):
        return DGFunction(self.mesh, self.k, -self.coeffs)

    def to_csv(self, path):
        x = self.nodes_physical()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["element", "node_x", "value"])
            for i in range(self.mesh.N):
                for s in range(self.k + 1):
                    writer.writerow([i + 1, f"{x[i, s]:.16e}", f"{self.coeffs[i, s]:.16e}"])


def from_function(mesh, k, g):
    """Sample g at the mapped Lobatto nodes of every element.

    The left endpoint of each element takes the right limit g(x_{i-1}^+),
    the right endpoint takes the left limit g(x_i^-).
    """
    g = one_sided(g)
    x = DGFunction.zeros(mesh, k).nodes_physical()
    coeffs = np.empty_like(x)
    coeffs[:, :-1] = np.broadcast_to(g.right(x[:, :-1]), x[:, :-1].shape)
    coeffs[:, -1] = np.broadcast_to(g.left(x[:, -1]), x[:, -1].shape)
    return DGFunction(mesh, k, coeffs)
