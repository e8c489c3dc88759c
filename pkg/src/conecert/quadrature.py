"""Weighted 1-D quadrature on [0,1] and extrema of parametric integrals.

Everything downstream (normalization constants, the integral operator, the
certifier) reduces to integrals of the form ``∫ k(t,s) g(s) f(s) ds`` on
subintervals of [0,1].  The workhorse here is the composite trapezoid rule
on a fixed partition; kernels with a kink on the diagonal ``s = t`` get the
kink inserted as an extra partition point so the rule stays exact for
piecewise-linear integrands.  Supremum/infimum scans over the ``t``
parameter run on a coarse grid of candidates and then refine once, locally,
around the arg-extremum.

All functions are pure; grids and weights are immutable after construction,
so everything here is safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, EvaluationError

__all__ = [
    "Grid",
    "Weight",
    "uniform_grid",
    "refine",
    "partition_weights",
    "trapezoid_nonuniform",
    "integrate_weighted",
    "ParamExtremum",
    "sup_param_integral",
    "inf_param_integral",
]


def partition_weights(nodes: np.ndarray) -> np.ndarray:
    """Composite-trapezoid weights for an arbitrary ordered partition."""
    h = np.diff(nodes)
    w = np.zeros_like(nodes)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


@dataclass(frozen=True, eq=False)
class Grid:
    """Ordered quadrature nodes on [0,1] with composite-rule weights."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or nodes.size < 2:
            raise DomainError("grid needs at least two nodes")
        if np.any(np.diff(nodes) <= 0):
            raise DomainError("grid nodes must be strictly increasing")
        if nodes[0] != 0.0 or nodes[-1] != 1.0:
            raise DomainError("grid must start at 0 and end at 1")
        if weights.shape != nodes.shape:
            raise DomainError("weights must match nodes")
        if np.any(weights < 0):
            raise DomainError("weights must be nonnegative")
        if abs(float(weights.sum()) - 1.0) > 1e-12:
            raise DomainError("weights must integrate the constant 1 to 1")

    @classmethod
    def from_nodes(cls, nodes) -> "Grid":
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes=nodes, weights=partition_weights(nodes))

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def spacing(self) -> float:
        """Largest cell width."""
        return float(np.max(np.diff(self.nodes)))


def uniform_grid(n: int) -> Grid:
    """Uniform grid with ``n`` nodes.  Node i is computed as i/(n-1) so the
    usual anchors (1/4, 1/2, 3/4 on a 401-node grid) are exact floats."""
    if n < 2:
        raise DomainError("uniform grid needs n >= 2")
    nodes = np.arange(n, dtype=float) / (n - 1)
    nodes[-1] = 1.0
    return Grid.from_nodes(nodes)


def refine(grid: Grid) -> Grid:
    """Insert cell midpoints, doubling the resolution."""
    nodes = grid.nodes
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    return Grid.from_nodes(np.sort(np.concatenate([nodes, mids])))


@dataclass(frozen=True, eq=False)
class Weight:
    """A pointwise-evaluable nonnegative weight ``g`` on (0,1).

    Either wraps a callable or linearly interpolates a table of samples.
    Genuinely non-evaluable weights (merely measurable g) are out of scope;
    they must be tabulated first.
    """

    fn: Callable | None = None
    table: tuple[np.ndarray, np.ndarray] | None = None
    label: str = "g"

    def __post_init__(self):
        if (self.fn is None) == (self.table is None):
            raise DomainError("Weight needs exactly one of fn or table")
        if self.table is not None:
            s, g = (np.asarray(a, dtype=float) for a in self.table)
            if s.ndim != 1 or s.shape != g.shape or s.size < 2:
                raise DomainError("weight table needs matching 1-D columns")
            if np.any(np.diff(s) <= 0):
                raise DomainError("weight table abscissae must increase")
            object.__setattr__(self, "table", (s, g))

    @classmethod
    def constant(cls, value: float = 1.0) -> "Weight":
        v = float(value)
        return cls(fn=lambda s: np.full_like(np.asarray(s, dtype=float), v),
                   label=repr(v))

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.fn is not None:
            out = np.asarray(self.fn(s), dtype=float)
            return np.broadcast_to(out, s.shape).copy() if out.shape != s.shape else out
        xs, ys = self.table
        return np.interp(s, xs, ys)


def _weight_values(weight: Weight, s: np.ndarray) -> np.ndarray:
    g = np.asarray(weight(s), dtype=float)
    if not np.all(np.isfinite(g)):
        bad = float(np.asarray(s).ravel()[np.flatnonzero(~np.isfinite(g))[0]])
        raise EvaluationError(f"weight {weight.label} is not finite at s={bad!r}")
    if np.any(g < -1e-12):
        bad = float(np.asarray(s).ravel()[np.flatnonzero(g < -1e-12)[0]])
        raise DomainError(f"weight {weight.label} is negative at s={bad!r}")
    return np.maximum(g, 0.0)


def trapezoid_nonuniform(xs: np.ndarray, ys: np.ndarray) -> float:
    h = np.diff(xs)
    return float(np.sum(0.5 * h * (ys[:-1] + ys[1:])))


def integrate_weighted(h: Callable, g: Weight, grid: Grid) -> float:
    """Composite-rule approximation of ``∫₀¹ h(s) g(s) ds``.

    Deterministic for a fixed grid.  Raises :class:`EvaluationError` naming
    the offending node if ``h`` is not finite there.
    """
    s = grid.nodes
    hv = np.asarray(h(s), dtype=float)
    if hv.shape != s.shape:
        hv = np.broadcast_to(hv, s.shape)
    if not np.all(np.isfinite(hv)):
        bad = float(s[np.flatnonzero(~np.isfinite(hv))[0]])
        raise EvaluationError(f"integrand is not finite at node s={bad!r}")
    gv = _weight_values(g, s)
    return float(np.dot(grid.weights, hv * gv))


@dataclass(frozen=True)
class ParamExtremum:
    """Extremum of ``t ↦ ∫ k(t,s) g(s) ds`` with one local refinement.

    ``coarse_value``/``coarse_t`` record the pre-refinement estimate.
    """

    value: float
    t_arg: float
    coarse_value: float
    coarse_t: float


def _kernel_eval(kernel):
    ev = getattr(kernel, "eval", None)
    if ev is None and callable(kernel):
        return kernel, False
    return ev, bool(getattr(kernel, "split_at_diagonal", False))


def _range_nodes(grid: Grid, lo: float, hi: float) -> np.ndarray:
    inner = grid.nodes[(grid.nodes > lo) & (grid.nodes < hi)]
    return np.unique(np.concatenate([[lo], inner, [hi]]))


def _integral_at(t: float, k_eval, split_diag: bool, weight: Weight,
                 s_part: np.ndarray) -> float:
    part = s_part
    if split_diag and s_part[0] < t < s_part[-1]:
        j = np.searchsorted(s_part, t)
        if s_part[j] != t and s_part[j - 1] != t:
            part = np.insert(s_part, j, t)
    kv = np.broadcast_to(
        np.asarray(k_eval(np.full_like(part, t), part), dtype=float), part.shape)
    gv = _weight_values(weight, part)
    vals = kv * gv
    if not np.all(np.isfinite(vals)):
        bad = float(part[np.flatnonzero(~np.isfinite(vals))[0]])
        raise EvaluationError(f"kernel integrand not finite at s={bad!r}, t={t!r}")
    return trapezoid_nonuniform(part, vals)


def _param_scan(kernel, weight: Weight, t_range, s_range, grid: Grid,
                mode: str, refine_points: int) -> ParamExtremum:
    t_lo, t_hi = (float(v) for v in t_range)
    s_lo, s_hi = (float(v) for v in s_range)
    if not (0.0 <= t_lo <= t_hi <= 1.0) or not (0.0 <= s_lo <= s_hi <= 1.0):
        raise DomainError("t_range and s_range must be subintervals of [0,1]")
    if t_lo > t_hi or s_lo >= s_hi:
        raise DomainError("empty parameter or integration range")

    k_eval, split_diag = _kernel_eval(kernel)
    s_part = _range_nodes(grid, s_lo, s_hi)
    t_cands = _range_nodes(grid, t_lo, t_hi) if t_lo < t_hi else np.array([t_lo])

    values = np.array([_integral_at(t, k_eval, split_diag, weight, s_part)
                       for t in t_cands])
    pick = np.argmax if mode == "sup" else np.argmin
    i = int(pick(values))
    coarse_value, coarse_t = float(values[i]), float(t_cands[i])

    lo = t_cands[max(i - 1, 0)]
    hi = t_cands[min(i + 1, t_cands.size - 1)]
    best_value, best_t = coarse_value, coarse_t
    if hi > lo:
        tt = np.linspace(lo, hi, refine_points)
        vv = np.array([_integral_at(t, k_eval, split_diag, weight, s_part)
                       for t in tt])
        j = int(pick(vv))
        better = vv[j] > best_value if mode == "sup" else vv[j] < best_value
        if better:
            best_value, best_t = float(vv[j]), float(tt[j])
    return ParamExtremum(value=best_value, t_arg=best_t,
                         coarse_value=coarse_value, coarse_t=coarse_t)


def sup_param_integral(kernel, g: Weight, t_range=(0.0, 1.0),
                       s_range=(0.0, 1.0), grid: Grid | None = None,
                       refine_points: int = 41) -> ParamExtremum:
    """Maximum over ``t`` of ``∫ k(t,s) g(s) ds`` with the maximizing t.

    The t candidates are the grid nodes inside ``t_range`` (plus its
    endpoints); one local refinement pass runs around the arg-max.
    """
    if grid is None:
        raise DomainError("a grid is required")
    return _param_scan(kernel, g, t_range, s_range, grid, "sup", refine_points)


def inf_param_integral(kernel, g: Weight, t_range=(0.0, 1.0),
                       s_range=(0.0, 1.0), grid: Grid | None = None,
                       refine_points: int = 41) -> ParamExtremum:
    """Dual of :func:`sup_param_integral`: the minimum and its minimizer."""
    if grid is None:
        raise DomainError("a grid is required")
    return _param_scan(kernel, g, t_range, s_range, grid, "inf", refine_points)
