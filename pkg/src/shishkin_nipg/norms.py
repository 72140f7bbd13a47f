"""Energy norms of DG functions and of errors against exact solutions.

    ||v||^2 = eps sum ||v'||^2_{I_i} + gamma sum ||v||^2_{I_i} + sum rho_i [v(x_i)]^2

The discrete variant replaces the gradient integral on each element by the
k-point Gauss rule with weights normalized to the unit interval, so both
variants agree exactly on the DG space. Integrals involving an exact
solution use Gauss rules graded toward the right end of every element so
that the layer tail on the last coarse element is not missed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dgspace import jump_average
from .mesh import layer_levels
from .quadrature import gauss_rule, graded_rule

CONTINUOUS = "continuous"
DISCRETE = "discrete"


def default_error_points(k):
    return k + 6


@dataclass(frozen=True)
class NormReport:
    diffusion_part: float
    reaction_part: float
    jump_part: float
    kind: str = CONTINUOUS
    total: float = field(init=False)

    def __post_init__(self):
        if min(self.diffusion_part, self.reaction_part, self.jump_part) < 0:
            raise ValueError("norm parts must be nonnegative")
        object.__setattr__(
            self, "total", math.sqrt(self.diffusion_part + self.reaction_part + self.jump_part)
        )


def _element_rule(mesh, q, exact):
    return graded_rule(q, layer_levels(mesh)) if exact else gauss_rule(q)


def _pointwise_difference(u_exact, v, xi):
    """(u - v) and (u - v)' at reference points xi mapped to every element."""
    vals, ders = v.sample(xi)
    if u_exact is None:
        return -vals, -ders
    u, du = u_exact
    x = v.mesh.map_to_physical(xi)
    return np.broadcast_to(u(x), x.shape) - vals, np.broadcast_to(du(x), x.shape) - ders


def _trace_difference(u_exact, points, left, right):
    if u_exact is None:
        return -left, -right
    u_nodes = np.broadcast_to(u_exact[0](points), points.shape)
    return u_nodes - left, u_nodes - right


def _report(mesh, penalties, gamma, kind, q_err, u_exact, v, deg):
    if len(penalties) != mesh.N + 1:
        raise ValueError(f"need {mesh.N + 1} penalty values, got {len(penalties)}")
    if kind not in (CONTINUOUS, DISCRETE):
        raise ValueError(f"unknown norm kind {kind!r}")
    eps = mesh.epsilon
    half_h = 0.5 * mesh.widths

    rule = _element_rule(mesh, q_err, u_exact is not None)
    err, derr = _pointwise_difference(u_exact, v, rule.nodes)
    reaction = gamma * np.sum(half_h[:, None] * rule.weights * err**2)
    if kind == CONTINUOUS:
        diffusion = eps * np.sum(half_h[:, None] * rule.weights * derr**2)
    else:
        gauss = gauss_rule(deg)
        _, dg = _pointwise_difference(u_exact, v, gauss.nodes)
        # h_i * sum_j w_j v'(x_ij)^2 with w_j summing to one on each element
        diffusion = eps * np.sum(mesh.widths[:, None] * (0.5 * gauss.weights) * dg**2)

    left, right = v.traces()
    el, er = _trace_difference(u_exact, mesh.points, left, right)
    jump, _ = jump_average(el, er)
    jumps = np.sum(np.asarray(penalties.values) * jump**2)
    return NormReport(float(diffusion), float(reaction), float(jumps), kind)


def nipg_norm(v, penalties, gamma, q_err=None):
    """Continuous energy norm of a DG function (element integrals by Gauss)."""
    q_err = default_error_points(v.k) if q_err is None else q_err
    if q_err < v.k + 1:
        raise ValueError(f"q_err must be >= k+1={v.k + 1}")
    return _report(v.mesh, penalties, gamma, CONTINUOUS, q_err, None, v, v.k)


def discrete_nipg_norm(v, penalties, gamma):
    """Energy norm with the gradient sampled at the k Gauss points per element."""
    return _report(v.mesh, penalties, gamma, DISCRETE, v.k + 1, None, v, v.k)


def error_norm(u_exact, v, penalties, gamma, kind=CONTINUOUS, q_err=None):
    """||u - v|| for an exact pair (u, u') and a DG function v."""
    u, du = u_exact
    if du is None:
        raise ValueError("error norm needs the exact derivative")
    q_err = default_error_points(v.k) if q_err is None else q_err
    return _report(v.mesh, penalties, gamma, kind, q_err, (u, du), v, v.k)


def macro_error_norm(u_exact, w, penalties, gamma, q_err=None):
    """||u - w|| over the macro partition for a piecewise P_{k+1} function w.

    Integrals run over both halves of each macro element; jumps are taken at
    the macro nodes x_{2j} with the base penalties rho(x_{2j}).
    """
    base = w.macro.base
    if len(penalties) != base.N + 1:
        raise ValueError(f"need {base.N + 1} penalty values, got {len(penalties)}")
    q_err = default_error_points(w.k) if q_err is None else q_err
    eps = base.epsilon
    half_h = 0.5 * base.widths
    rule = _element_rule(base, q_err, u_exact is not None)
    vals, ders = w.sample_on_base(rule.nodes)
    if u_exact is None:
        err, derr = -vals, -ders
    else:
        x = base.map_to_physical(rule.nodes)
        err = np.broadcast_to(u_exact[0](x), x.shape) - vals
        derr = np.broadcast_to(u_exact[1](x), x.shape) - ders
    diffusion = eps * np.sum(half_h[:, None] * rule.weights * derr**2)
    reaction = gamma * np.sum(half_h[:, None] * rule.weights * err**2)
    left, right = w.traces()
    el, er = _trace_difference(u_exact, w.macro.macro_points, left, right)
    jump, _ = jump_average(el, er)
    jumps = np.sum(np.asarray(penalties.values)[::2] * jump**2)
    return NormReport(float(diffusion), float(reaction), float(jumps), CONTINUOUS)


def convergence_rate(e_N, e_2N):
    """Observed order (ln e_N - ln e_2N) / ln 2 between meshes N and 2N."""
    if e_N <= 0 or e_2N <= 0:
        raise ValueError("errors must be positive to form a rate")
    return (math.log(e_N) - math.log(e_2N)) / math.log(2.0)
