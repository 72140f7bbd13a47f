"""Macro-element post-processing of a degree-k DG function to degree k+1.

Each macro element M_j = [x_{2j-2}, x_{2j}] carries 2k+1 points: the k+1
Lobatto points of its left base element followed by those of its right base
element, sharing x_{2j-1}. The k+2 points with indices
G = {0, 1, 3, ..., 2k-1, 2k} are interpolated. Every selected point is a
nodal point of the base space, so R v = R I_k v holds exactly. For odd k
the middle point (index k) sits on the interior node x_{2j-1}, where the
datum is the average of the two one-sided values.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dgspace import one_sided
from .mesh import macro_of
from .quadrature import lagrange_basis, lobatto_points


def selected_indices(k):
    return [0, *range(1, 2 * k, 2), 2 * k]


@lru_cache(maxsize=None)
def macro_reference_points(k):
    """The 2k+1 base Lobatto points of both halves, mapped to [-1, 1]."""
    t = lobatto_points(k).points
    pts = np.concatenate([0.5 * (t - 1.0), 0.5 * (t[1:] + 1.0)])
    pts[k] = 0.0
    pts.setflags(write=False)
    return pts


@lru_cache(maxsize=None)
def selected_reference_points(k):
    pts = np.array(macro_reference_points(k)[selected_indices(k)])
    pts.setflags(write=False)
    return pts


def macro_lobatto_points(macro, j, k):
    """The 2k+1 Lobatto points on macro element j (1-based)."""
    left = macro.macro_points[j - 1]
    H = macro.macro_widths[j - 1]
    pts = left + 0.5 * H * (macro_reference_points(k) + 1.0)
    pts[0], pts[k], pts[-1] = left, macro.base.points[2 * j - 1], macro.macro_points[j]
    return pts


@dataclass(frozen=True, eq=False)
class MacroPolyFunction:
    """Piecewise P_{k+1} on the macro mesh, stored as values at the selected points."""

    macro: object
    k: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != (self.macro.M, self.k + 2):
            raise ValueError(f"coefficients must have shape {(self.macro.M, self.k + 2)}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self):
        return self.k + 1

    def points_physical(self):
        eta = selected_reference_points(self.k)
        left = self.macro.macro_points[:-1, None]
        return left + 0.5 * self.macro.macro_widths[:, None] * (eta[None, :] + 1.0)

    def _basis(self, eta):
        return lagrange_basis(selected_reference_points(self.k), eta)

    def sample_on_base(self, xi):
        """Values and physical derivatives at reference points of every base element."""
        xi = np.asarray(xi, dtype=float)
        base = self.macro.base
        out_v = np.empty((base.N, len(xi)))
        out_d = np.empty((base.N, len(xi)))
        scale = 2.0 / self.macro.macro_widths
        for half, eta in ((0, 0.5 * (xi - 1.0)), (1, 0.5 * (xi + 1.0))):
            phi, dphi = self._basis(eta)
            out_v[half::2] = self.coeffs @ phi.T
            out_d[half::2] = (self.coeffs @ dphi.T) * scale[:, None]
        return out_v, out_d

    def traces(self):
        """One-sided limits at the macro nodes x_{2j}, j = 0..N/2."""
        phi, _ = self._basis(np.array([-1.0, 1.0]))
        M = self.macro.M
        left = np.full(M + 1, np.nan)
        right = np.full(M + 1, np.nan)
        left[1:] = self.coeffs @ phi[1]
        right[:-1] = self.coeffs @ phi[0]
        return left, right

    def to_csv(self, path):
        x = self.points_physical()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["macro", "point_x", "value"])
            for j in range(self.macro.M):
                for m in range(self.k + 2):
                    writer.writerow([j + 1, f"{x[j, m]:.16e}", f"{self.coeffs[j, m]:.16e}"])


def apply_R(v, macro):
    """Post-process a DG function v of degree k into a MacroPolyFunction."""
    if v.mesh is not macro.base and not np.array_equal(v.mesh.points, macro.base.points):
        raise ValueError("DG function and macro mesh live on different base meshes")
    k = v.k
    eta = selected_reference_points(k)
    left_side = eta < 0.0
    right_side = eta > 0.0
    data = np.empty((macro.M, k + 2))
    # eta in [-1, 0) lives on the left base element, (0, 1] on the right one
    # selected points are base nodes, so the data are coefficient reads
    idx = np.array(selected_indices(k))
    data[:, left_side] = v.coeffs[0::2][:, idx[left_side]]
    data[:, right_side] = v.coeffs[1::2][:, idx[right_side] - k]
    middle = ~(left_side | right_side)
    if middle.any():
        data[:, middle] = 0.5 * (v.coeffs[0::2, -1] + v.coeffs[1::2, 0])[:, None]
    return MacroPolyFunction(macro, k, data)


def apply_R_to_function(g, macro, k):
    """R applied to a function g on each macro element minus its midpoint.

    Macro endpoints take the limit from inside the macro element; for odd k
    the midpoint datum averages the two one-sided limits of g.
    """
    g = one_sided(g)
    w = MacroPolyFunction(macro, k, np.zeros((macro.M, k + 2)))
    x = w.points_physical()
    x[:, 0], x[:, -1] = macro.macro_points[:-1], macro.macro_points[1:]
    eta = selected_reference_points(k)
    data = np.broadcast_to(g.right(x), x.shape).copy()
    data[:, eta > 0] = np.broadcast_to(g.left(x[:, eta > 0]), x[:, eta > 0].shape)
    middle = eta == 0.0
    if middle.any():
        xm = macro.base.points[1::2]
        mid = 0.5 * (np.broadcast_to(g.left(xm), xm.shape) + np.broadcast_to(g.right(xm), xm.shape))
        data[:, middle] = mid[:, None]
    return MacroPolyFunction(macro, k, data)


def eval_macro(w, x):
    """Evaluate w at x in [0, 1]; macro nodes belong to the left macro element."""
    j = macro_of(w.macro, x)
    left = w.macro.macro_points[j - 1]
    eta = 2.0 * (x - left) / w.macro.macro_widths[j - 1] - 1.0
    phi, _ = w._basis(np.array([eta]))
    return float(phi[0] @ w.coeffs[j - 1])
