"""Piecewise-uniform Shishkin mesh with a layer at x = 1, plus its macro mesh."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class Partition:
    """Ordered nodes x_0 < ... < x_N of [x_0, x_N] carrying a diffusion scale."""

    N: int
    epsilon: float
    points: np.ndarray = field(repr=False)
    widths: np.ndarray = field(repr=False)

    def map_to_physical(self, xi):
        """Map reference coordinates to every element: shape ``(N, len(xi))``."""
        xi = np.asarray(xi, dtype=float)
        left = self.points[:-1, None]
        return left + 0.5 * self.widths[:, None] * (xi[None, :] + 1.0)


def partition(points, epsilon=1.0):
    """Arbitrary partition, mostly for hand-checkable single-element cases."""
    pts = np.array(points, dtype=float)
    if pts.ndim != 1 or len(pts) < 2 or np.any(np.diff(pts) <= 0):
        raise ValueError("partition points must be strictly increasing, at least two")
    widths = np.diff(pts)
    pts.setflags(write=False)
    widths.setflags(write=False)
    return Partition(len(pts) - 1, float(epsilon), pts, widths)


@dataclass(frozen=True, eq=False)
class ShishkinMesh(Partition):
    sigma: float = 1.0
    beta: float = 1.0
    tau: float = 0.5

    @property
    def transition(self):
        """Index of the transition node, x_{N/2} = 1 - tau."""
        return self.N // 2

    @property
    def is_uniform(self):
        return self.tau == 0.5


def _validate(N, epsilon, sigma, beta):
    if N < 4 or N % 2:
        raise ValueError(f"N must be an even integer >= 4, got {N}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if sigma < 1.0:
        raise ValueError(f"sigma must be >= 1, got {sigma}")
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")


def build_shishkin(N, epsilon, sigma, beta):
    """Shishkin mesh on [0, 1] with N/2 equal elements on each side of 1 - tau."""
    N = int(N)
    _validate(N, epsilon, sigma, beta)
    tau = min(0.5, sigma * epsilon / beta * np.log(N))
    half = N // 2
    i = np.arange(N + 1)
    # closed formula for both halves; fine part written as distance from 1
    points = np.where(i <= half, 2.0 * (1.0 - tau) * i / N, 1.0 - 2.0 * tau * (N - i) / N)
    points[0], points[half], points[N] = 0.0, 1.0 - tau, 1.0
    widths = np.where(np.arange(1, N + 1) <= half, 2.0 * (1.0 - tau) / N, 2.0 * tau / N)
    points.setflags(write=False)
    widths.setflags(write=False)
    return ShishkinMesh(
        N=N, epsilon=float(epsilon), points=points, widths=widths,
        sigma=float(sigma), beta=float(beta), tau=float(tau),
    )


def element_of(mesh, x):
    """1-based index i of the element [x_{i-1}, x_i] holding x; nodes go left."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x = {x} outside [0, 1]")
    i = int(np.searchsorted(mesh.points, x, side="left"))
    return max(i, 1)


def layer_levels(mesh):
    """Geometric grading depth that brings the last piece of every element below eps/8."""
    ratio = float(np.max(mesh.widths)) / mesh.epsilon
    return max(0, int(np.ceil(np.log2(ratio))) + 3) if ratio > 0.125 else 0


def assumption_warnings(mesh, C=1.0):
    """Messages for violated mesh/perturbation assumptions (never raises)."""
    msgs = []
    N, eps = mesh.N, mesh.epsilon
    if eps > C / N:
        msgs.append(f"epsilon={eps:g} > C/N={C / N:g}: layer-resolution assumption violated")
    if eps > C / N**2:
        msgs.append(f"epsilon={eps:g} > C/N^2={C / N**2:g}: improved-rate regime not met")
    return msgs


@dataclass(frozen=True, eq=False)
class MacroMesh:
    base: ShishkinMesh
    macro_points: np.ndarray = field(repr=False)
    macro_widths: np.ndarray = field(repr=False)

    @property
    def M(self):
        return len(self.macro_widths)


def build_macro(mesh):
    """Pair adjacent elements into N/2 macro elements M_j = [x_{2j-2}, x_{2j}]."""
    if mesh.N % 4:
        raise ValueError(f"macro mesh needs N divisible by 4, got N={mesh.N}")
    pts = np.array(mesh.points[::2])
    widths = mesh.widths[0::2] + mesh.widths[1::2]
    pts.setflags(write=False)
    widths.setflags(write=False)
    return MacroMesh(mesh, pts, widths)


def macro_of(macro, x):
    """1-based macro index j with x in [x_{2j-2}, x_{2j}]; ties go left."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x = {x} outside [0, 1]")
    j = int(np.searchsorted(macro.macro_points, x, side="left"))
    return max(j, 1)
