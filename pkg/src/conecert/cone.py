"""Sampled functions on [0,1] and the positivity cone used throughout.

The cone consists of nonnegative continuous functions whose minimum over a
subinterval [a,b] dominates ``c`` times their sup-norm.  Members are
represented by their values on a quadrature grid; the minimum over [a,b]
interpolates linearly at a and b when they are not nodes, which avoids
systematically overestimating the minimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .quadrature import Grid

__all__ = [
    "ConeSpec",
    "GridFunction",
    "norm_sup",
    "min_on_interval",
    "cone_member",
    "v_rho_boundary_distance",
]

#: quadrature-level noise must not flip membership decisions
DEFAULT_CONE_TOL = 1e-9


@dataclass(frozen=True)
class ConeSpec:
    """Interval [a,b] and constant c of the cone."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if not (0.0 <= self.a < self.b <= 1.0):
            raise DomainError(f"need 0 <= a < b <= 1, got a={self.a}, b={self.b}")
        if not (0.0 < self.c <= 1.0):
            raise DomainError(f"need c in (0,1], got c={self.c}")


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values sampled at the nodes of a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.shape != self.grid.nodes.shape:
            raise DomainError("values must match the grid nodes")
        if not np.all(np.isfinite(vals)):
            raise DomainError("grid function values must be finite")

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable) -> "GridFunction":
        return cls(grid=grid, values=np.asarray(fn(grid.nodes), dtype=float))

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid=grid, values=np.zeros_like(grid.nodes))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(grid=self.grid, values=values)

    def interp(self, s):
        return np.interp(s, self.grid.nodes, self.values)


def norm_sup(u: GridFunction) -> float:
    """Sup-norm on the grid: max of |values|."""
    return float(np.max(np.abs(u.values)))


def min_on_interval(u: GridFunction, a: float, b: float) -> float:
    """Minimum of the piecewise-linear interpolant over [a,b]."""
    nodes = u.grid.nodes
    if not (nodes[0] <= a < b <= nodes[-1]):
        raise DomainError(f"[{a},{b}] is not inside the grid span")
    inside = u.values[(nodes >= a) & (nodes <= b)]
    edge = np.interp([a, b], nodes, u.values)
    return float(min(inside.min(initial=np.inf), edge.min()))


def cone_member(u: GridFunction, spec: ConeSpec, tol: float = DEFAULT_CONE_TOL) -> bool:
    """Nonnegative and min over [a,b] at least c times the sup-norm, within tol."""
    if tol < 0:
        raise DomainError("tol must be nonnegative")
    if float(np.min(u.values)) < -tol:
        return False
    return min_on_interval(u, spec.a, spec.b) >= spec.c * norm_sup(u) - tol


def v_rho_boundary_distance(u: GridFunction, spec: ConeSpec, rho: float,
                            tol: float = DEFAULT_CONE_TOL) -> float:
    """Signed distance of a cone member to the set where min over [a,b] is rho.

    Zero means u sits on the boundary up to grid resolution; negative means
    the minimum is still below rho.
    """
    if not cone_member(u, spec, tol):
        raise DomainError("u is not a member of the cone")
    return min_on_interval(u, spec.a, spec.b) - float(rho)
