"""Manufactured stationary solution on the unit sphere for convergence runs.

The target concentration is an equilibrium-like tanh band around the equator,

    c*(x) = (1 + tanh(x3 / (2 sqrt(2) eps))) / 2,

held constant in time.  The matching source term for the degenerate-mobility
flow is

    f = -div_G( M(c*) grad_G mu* ),   mu* = f0'(c*) - eps^2 lap_G c*.

Since c* depends on x3 only, the surface operators on the unit sphere reduce
to one-dimensional expressions in u = x3:

    lap_G g      = (1 - u^2) g'' - 2 u g'
    div_G(A grad_G g) = A lap_G g + (1 - u^2) A' g'

which sympy differentiates exactly; the resulting callables are vectorized
over point arrays and cached per epsilon.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
import sympy as sp

__all__ = ["ManufacturedSolution", "manufactured_solution"]


@dataclass(frozen=True)
class ManufacturedSolution:
    """Vectorized exact fields; every method maps (n, 3) points to (n,)."""

    epsilon: float
    _c: Callable
    _mu: Callable
    _f: Callable

    def _x3(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != 3:
            raise ValueError("points must have shape (n, 3)")
        return pts[..., 2]

    def concentration(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self._c(self._x3(points)), dtype=float)

    def chemical_potential(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self._mu(self._x3(points)), dtype=float)

    def forcing(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self._f(self._x3(points)), dtype=float)


@lru_cache(maxsize=None)
def manufactured_solution(epsilon: float) -> ManufacturedSolution:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    u = sp.symbols("u", real=True)
    eps = sp.nsimplify(epsilon, rational=True)

    c = (1 + sp.tanh(u / (2 * sp.sqrt(2) * eps))) / 2

    def lap(g):
        return (1 - u**2) * sp.diff(g, u, 2) - 2 * u * sp.diff(g, u)

    f0p = c * (1 - c) * (1 - 2 * c) / 2
    mu = f0p - eps**2 * lap(c)
    mob = c * (1 - c)  # c* lies strictly in (0, 1), no clamp needed
    f = -(mob * lap(mu) + (1 - u**2) * sp.diff(mob, u) * sp.diff(mu, u))

    def compile_scalar(expr):
        fn = sp.lambdify(u, expr, modules="numpy")

        def wrapped(x3, _fn=fn):
            arr = np.asarray(x3, dtype=float)
            return np.broadcast_to(np.asarray(_fn(arr), dtype=float), arr.shape).copy()

        return wrapped

    return ManufacturedSolution(
        epsilon=float(epsilon),
        _c=compile_scalar(c),
        _mu=compile_scalar(mu),
        _f=compile_scalar(f),
    )
