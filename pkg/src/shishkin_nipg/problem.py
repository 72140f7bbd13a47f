"""Convection-diffusion problems -eps u'' + a u' + b u = f on (0, 1), u(0) = u(1) = 0."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Func = Callable[[np.ndarray], np.ndarray]

_SAMPLES = 1001


@dataclass(frozen=True)
class Problem:
    """Coefficients and optional exact solution ``(u, u')``.

    All callables must be vectorized over numpy arrays and free of hidden
    state. ``gamma`` defaults to the sampled minimum of ``b - a'/2``.
    """

    epsilon: float
    a: Func
    a_prime: Func
    b: Func
    f: Func
    beta: float
    gamma: Optional[float] = None
    exact: Optional[tuple[Func, Func]] = None
    name: str = "custom"

    def __post_init__(self):
        # eps = 1 is admitted for non-singular oracle problems
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        x = np.linspace(0.0, 1.0, _SAMPLES)
        a = np.broadcast_to(self.a(x), x.shape)
        if np.any(a < self.beta):
            raise ValueError(f"a(x) >= beta={self.beta} violated (min {a.min():.3g})")
        reaction = np.broadcast_to(self.b(x) - 0.5 * self.a_prime(x), x.shape)
        if self.gamma is None:
            object.__setattr__(self, "gamma", float(reaction.min()))
        if self.gamma <= 0.0:
            raise ValueError(f"b - a'/2 >= gamma > 0 violated (gamma={self.gamma})")
        if np.any(reaction < self.gamma - 1e-12):
            raise ValueError(f"b - a'/2 >= gamma={self.gamma} violated (min {reaction.min():.3g})")
        if self.exact is not None:
            u = self.exact[0]
            ends = np.abs(u(np.array([0.0, 1.0])))
            if np.any(ends > 1e-12):
                raise ValueError(f"exact solution must vanish at 0 and 1, got {ends}")

    @property
    def u(self):
        if self.exact is None:
            raise ValueError(f"problem {self.name!r} has no exact solution")
        return self.exact[0]

    @property
    def du(self):
        if self.exact is None:
            raise ValueError(f"problem {self.name!r} has no exact solution")
        return self.exact[1]


def paper_test_problem(epsilon):
    """-eps u'' + (3 - x) u' + u = f with u = x (1 - exp(-2 (1 - x) / eps)).

    The exponent is negative so that the layer at x = 1 decays into the
    domain; with E = exp(-2 (1 - x) / eps) the source simplifies to
    f = 3 + E - 2 x (1 - x) E / eps.
    """
    eps = float(epsilon)

    def layer(x):
        return np.exp(-2.0 * (1.0 - np.asarray(x, dtype=float)) / eps)

    def u(x):
        x = np.asarray(x, dtype=float)
        return x * (1.0 - layer(x))

    def du(x):
        x = np.asarray(x, dtype=float)
        E = layer(x)
        return 1.0 - E - 2.0 * x * E / eps

    def f(x):
        x = np.asarray(x, dtype=float)
        E = layer(x)
        return 3.0 + E - 2.0 * x * (1.0 - x) * E / eps

    return Problem(
        epsilon=eps,
        a=lambda x: 3.0 - np.asarray(x, dtype=float),
        a_prime=lambda x: np.full_like(np.asarray(x, dtype=float), -1.0),
        b=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        f=f,
        beta=2.0,
        gamma=1.5,
        exact=(u, du),
        name="layer",
    )


def polynomial_problem(epsilon):
    """Smooth problem with u = x (1 - x), a = 2 + x, b = 1 (gamma = 1/2)."""
    eps = float(epsilon)

    def u(x):
        x = np.asarray(x, dtype=float)
        return x * (1.0 - x)

    def du(x):
        return 1.0 - 2.0 * np.asarray(x, dtype=float)

    def f(x):
        x = np.asarray(x, dtype=float)
        return 2.0 * eps + 2.0 - 2.0 * x - 3.0 * x**2

    return Problem(
        epsilon=eps,
        a=lambda x: 2.0 + np.asarray(x, dtype=float),
        a_prime=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        b=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        f=f,
        beta=2.0,
        gamma=0.5,
        exact=(u, du),
        name="poly",
    )


PROBLEMS = {
    "layer": paper_test_problem,
    "poly": polynomial_problem,
}


def get_problem(name, epsilon):
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return factory(epsilon)


def residual_check(problem, x):
    """|-eps u'' + a u' + b u - f| at x, with u'' from central differences of u'."""
    u, du = problem.u, problem.du
    h = min(1e-6, problem.epsilon / 100.0)
    x = float(x)
    d2u = (du(x + h) - du(x - h)) / (2.0 * h)
    res = -problem.epsilon * d2u + problem.a(x) * du(x) + problem.b(x) * u(x) - problem.f(x)
    return float(abs(res))
