"""Piecewise nonlinearities with declared jump curves.

A nonlinearity is a finite list of pieces, each a region predicate over
(t, u) together with a nonnegative formula, with jumps allowed only across
declared curves ``u = gamma(t)``.  Supremum and infimum bounds of ``f/rho``
over boxes are sampling based, with explicit one-sided samples along every
curve segment inside the box: sampled extrema of a discontinuous function
are unreliable exactly at jumps, so the jump values are probed from both
sides instead of hoping a grid point lands there.

Curves are classified against the differential equation
``gamma'' = -g(t) f(t, gamma(t))``: a curve solving it is viable, a curve
satisfying one of the strict one-sided inequalities with slack ``psi`` in an
eps-band around its graph is inviable.  Almost-everywhere conditions are
checked at grid nodes only, and a node failure fails the check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, CoverageError, DomainError, EvaluationError
from .expressions import Expr
from .quadrature import Grid, Weight

__all__ = [
    "Piece",
    "Curve",
    "Nonlinearity",
    "BoundsReport",
    "CurveCheck",
    "f_eval",
    "f_values",
    "f_upper",
    "f_lower",
    "growth_bound_value",
    "check_curve_viable",
    "check_curve_inviable",
    "classify_curve",
]

#: numeric strictness slack for the inviability inequalities (relative)
DEFAULT_STRICT_MARGIN = 1e-8
#: default viability tolerance for |gamma'' + g f| at the nodes
DEFAULT_VIABLE_TOL = 1e-8
#: default number of subintervals per box axis in bound scans; doubling it
#: refines the sample lattice in place, so bounds move monotonically
DEFAULT_DENSITY = 256

_SELECT_SHIFT = 1e-9


def _as_value_fn(obj) -> Callable:
    """Normalize a formula (Expr, callable or constant) to ``fn(t, u)``."""
    if isinstance(obj, Expr):
        return lambda t, u: np.broadcast_to(
            np.asarray(obj(t=t, u=u), dtype=float), np.shape(t)).copy()
    if callable(obj):
        return lambda t, u: np.broadcast_to(
            np.asarray(obj(t, u), dtype=float), np.shape(t)).copy()
    value = float(obj)
    return lambda t, u: np.full(np.shape(t), value)


def _as_region_fn(obj) -> Callable:
    if isinstance(obj, Expr):
        return lambda t, u: np.broadcast_to(
            np.asarray(obj(t=t, u=u), dtype=bool), np.shape(t)).copy()
    if callable(obj):
        return lambda t, u: np.broadcast_to(
            np.asarray(obj(t, u), dtype=bool), np.shape(t)).copy()
    raise DomainError("a piece region must be a predicate or a callable")


def _as_curve_fn(obj) -> Callable:
    if isinstance(obj, Expr):
        return lambda t: np.broadcast_to(
            np.asarray(obj(t=t), dtype=float), np.shape(t)).copy()
    if callable(obj):
        return lambda t: np.broadcast_to(
            np.asarray(obj(t), dtype=float), np.shape(t)).copy()
    value = float(obj)
    return lambda t: np.full(np.shape(t), value)


@dataclass(frozen=True, eq=False)
class Piece:
    """One branch of the nonlinearity: a region and its formula."""

    region: object
    f: object
    label: str = ""


@dataclass(frozen=True, eq=False)
class Curve:
    """A declared jump curve ``u = gamma(t)`` on a subinterval of [0,1].

    ``gamma2`` is the second derivative; when absent it is replaced by
    central finite differences and reports flag the substitution.  Inviable
    curves must carry the band half-width ``eps`` and the positive slack
    ``psi``.
    """

    domain: tuple[float, float]
    gamma: object
    gamma2: object = None
    kind: str = "unknown"
    eps: float | None = None
    psi: object = None
    label: str = ""

    def __post_init__(self):
        lo, hi = (float(v) for v in self.domain)
        if not (0.0 <= lo < hi <= 1.0):
            raise DomainError(f"curve domain [{lo},{hi}] must sit inside [0,1]")
        object.__setattr__(self, "domain", (lo, hi))
        if self.kind not in ("viable", "inviable", "unknown"):
            raise DomainError(f"unknown curve kind {self.kind!r}")
        if self.kind == "inviable" and (self.eps is None or self.psi is None):
            raise ConfigError(
                f"curve {self.label or self.domain} declared inviable "
                "needs both eps and psi"
            )


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """Pieces, curves and optional analytic bound overrides.

    ``growth_bound`` maps a radius r to an upper bound of f on
    [0,1] x [0,r]; when absent the bound is sampled.  ``sup_bound`` and
    ``inf_bound``, when supplied, override the sampled box extrema (they
    receive the box and must return the exact extremum of f, unscaled).
    """

    pieces: tuple
    curves: tuple = ()
    growth_bound: Callable | None = None
    sup_bound: Callable | None = None
    inf_bound: Callable | None = None

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "curves", tuple(self.curves))
        if not self.pieces:
            raise DomainError("a nonlinearity needs at least one piece")


def f_values(nl: Nonlinearity, t, u_eval, u_select=None) -> np.ndarray:
    """Vectorized piecewise evaluation.

    Pieces are tried in declaration order; the first whose region claims
    ``(t, u_select)`` supplies the formula, which is evaluated at the true
    ``(t, u_eval)``.  Separating selection from evaluation yields one-sided
    limit values at jump curves.  Points claimed by no piece raise
    :class:`CoverageError`.
    """
    t = np.asarray(t, dtype=float)
    u_eval = np.asarray(u_eval, dtype=float)
    u_sel = u_eval if u_select is None else np.asarray(u_select, dtype=float)
    out = np.full(t.shape, np.nan)
    claimed = np.zeros(t.shape, dtype=bool)
    for piece in nl.pieces:
        mask = _as_region_fn(piece.region)(t, u_sel) & ~claimed
        if np.any(mask):
            out[mask] = _as_value_fn(piece.f)(t[mask], u_eval[mask])
            claimed |= mask
    if not claimed.all():
        # a nudged selection point may have slipped off the covered set;
        # retry those at the unshifted ordinate before giving up
        left = ~claimed
        if u_select is not None:
            for piece in nl.pieces:
                mask = _as_region_fn(piece.region)(t, u_eval) & left
                if np.any(mask):
                    out[mask] = _as_value_fn(piece.f)(t[mask], u_eval[mask])
                    left &= ~mask
        if left.any():
            i = int(np.flatnonzero(left)[0])
            raise CoverageError(
                f"no piece claims (t={float(t.ravel()[i])!r}, "
                f"u={float(u_eval.ravel()[i])!r})"
            )
    if not np.all(np.isfinite(out)):
        i = int(np.flatnonzero(~np.isfinite(out))[0])
        raise EvaluationError(
            f"nonlinearity not finite at (t={float(t.ravel()[i])!r}, "
            f"u={float(u_eval.ravel()[i])!r})"
        )
    return out


def f_eval(nl: Nonlinearity, t: float, u: float, side: str = "on") -> float:
    """Evaluate f at a point, optionally as a one-sided limit in u.

    ``side='below'``/``'above'`` select the piece just under/over the point,
    which at a curve gives the limiting branch value; ``'on'`` selects the
    piece whose closed region claims the point itself.
    """
    if u < 0:
        raise DomainError(f"u must be nonnegative, got {u}")
    if side not in ("below", "above", "on"):
        raise DomainError(f"side must be below, above or on, got {side!r}")
    if side == "on":
        u_sel = u
    else:
        shift = _SELECT_SHIFT * max(1.0, abs(u))
        u_sel = max(u - shift, 0.0) if side == "below" else u + shift
    val = f_values(nl, np.array([t]), np.array([u]), np.array([u_sel]))
    return float(val[0])


@dataclass(frozen=True)
class BoundsReport:
    """A sampled (or user-supplied) extremum of f/rho over a box."""

    value: float
    method: str
    sample_count: int
    worst_point: tuple[float, float]
    rho: float
    eps: float

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "sample_count": self.sample_count,
            "worst_point": list(self.worst_point),
            "rho": self.rho,
            "eps": self.eps,
        }


def _box_extremum(nl: Nonlinearity, t_lo, t_hi, u_lo, u_hi,
                  density: int, mode: str):
    """Extremum of f over [t_lo,t_hi] x [u_lo,u_hi] with curve-aware samples.

    Returns (value, (t,u) argpoint, sample count).  Box corners are exact
    lattice points and doubling ``density`` refines the lattice in place, so
    suprema never decrease and infima never increase under refinement.
    """
    if t_hi < t_lo or u_hi < u_lo:
        raise DomainError("empty box")
    ts = np.linspace(t_lo, t_hi, density + 1)
    us = np.linspace(u_lo, u_hi, density + 1)
    T, U = (a.ravel() for a in np.meshgrid(ts, us, indexing="ij"))

    sign = 1.0 if mode == "max" else -1.0
    best = -np.inf
    best_pt = (float(T[0]), float(U[0]))
    count = 0
    claimed = np.zeros(T.shape, dtype=bool)
    # points on a shared curve belong to every piece touching it, and the
    # bound must see both branch values, so all claiming pieces contribute
    for piece in nl.pieces:
        mask = _as_region_fn(piece.region)(T, U)
        claimed |= mask
        if not np.any(mask):
            continue
        vals = _as_value_fn(piece.f)(T[mask], U[mask])
        if not np.all(np.isfinite(vals)):
            j = int(np.flatnonzero(~np.isfinite(vals))[0])
            raise EvaluationError(
                f"piece {piece.label or piece.f!r} not finite at "
                f"(t={float(T[mask][j])!r}, u={float(U[mask][j])!r})"
            )
        count += int(mask.sum())
        j = int(np.argmax(sign * vals))
        if sign * vals[j] > sign * best or not np.isfinite(best):
            best = float(vals[j])
            best_pt = (float(T[mask][j]), float(U[mask][j]))
    if not claimed.all():
        i = int(np.flatnonzero(~claimed)[0])
        raise CoverageError(
            f"no piece claims (t={float(T[i])!r}, u={float(U[i])!r})"
        )

    for curve in nl.curves:
        lo = max(curve.domain[0], t_lo)
        hi = min(curve.domain[1], t_hi)
        if lo > hi:
            continue
        tc = np.unique(np.concatenate([ts[(ts >= lo) & (ts <= hi)], [lo, hi]]))
        gv = _as_curve_fn(curve.gamma)(tc)
        inside = (gv >= u_lo) & (gv <= u_hi)
        if not np.any(inside):
            continue
        tc, gv = tc[inside], gv[inside]
        shift = _SELECT_SHIFT * np.maximum(1.0, np.abs(gv))
        for u_sel in (np.maximum(gv - shift, 0.0), gv + shift):
            vals = f_values(nl, tc, gv, u_sel)
            count += vals.size
            j = int(np.argmax(sign * vals))
            if sign * vals[j] > sign * best:
                best = float(vals[j])
                best_pt = (float(tc[j]), float(gv[j]))
    return best, best_pt, count


def f_upper(nl: Nonlinearity, rho: float, eps: float,
            density: int = DEFAULT_DENSITY) -> BoundsReport:
    """Supremum of f/rho over [0,1] x [0, rho+eps]."""
    if rho <= 0 or eps <= 0:
        raise DomainError("f_upper needs rho > 0 and eps > 0")
    if nl.sup_bound is not None:
        value = float(nl.sup_bound(0.0, 1.0, 0.0, rho + eps))
        return BoundsReport(value / rho, "user_supplied", 0,
                            (float("nan"), float("nan")), rho, eps)
    best, pt, count = _box_extremum(nl, 0.0, 1.0, 0.0, rho + eps, density, "max")
    return BoundsReport(best / rho, "sampled", count, pt, rho, eps)


def f_lower(nl: Nonlinearity, rho: float, eps: float, spec,
            density: int = DEFAULT_DENSITY) -> BoundsReport:
    """Infimum of f/rho over [a,b] x [c(rho-eps), rho/c + eps]."""
    if not (rho > eps >= 0):
        raise DomainError("f_lower needs rho > eps >= 0 (nonempty u-interval)")
    u_lo = spec.c * (rho - eps)
    u_hi = rho / spec.c + eps
    if nl.inf_bound is not None:
        value = float(nl.inf_bound(spec.a, spec.b, u_lo, u_hi))
        return BoundsReport(value / rho, "user_supplied", 0,
                            (float("nan"), float("nan")), rho, eps)
    best, pt, count = _box_extremum(nl, spec.a, spec.b, u_lo, u_hi, density, "min")
    return BoundsReport(best / rho, "sampled", count, pt, rho, eps)


def growth_bound_value(nl: Nonlinearity, r: float,
                       density: int = DEFAULT_DENSITY) -> float:
    """Upper bound of f on [0,1] x [0,r], user-supplied or sampled."""
    if r < 0:
        raise DomainError("radius must be nonnegative")
    if nl.growth_bound is not None:
        return float(nl.growth_bound(r))
    best, _, _ = _box_extremum(nl, 0.0, 1.0, 0.0, r, density, "max")
    return best


@dataclass(frozen=True)
class CurveCheck:
    """Outcome of a viability or inviability check."""

    label: str
    checked: str
    passed: bool
    worst_margin: float
    worst_point: tuple[float, float]
    inequality: str | None = None
    gamma2_source: str = "user"
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "checked": self.checked,
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "worst_point": list(self.worst_point),
            "inequality": self.inequality,
            "gamma2_source": self.gamma2_source,
            "note": self.note,
        }


def _domain_nodes(curve: Curve, grid: Grid) -> np.ndarray:
    lo, hi = curve.domain
    inner = grid.nodes[(grid.nodes > lo) & (grid.nodes < hi)]
    return np.unique(np.concatenate([[lo], inner, [hi]]))


def _gamma2_values(curve: Curve, ts: np.ndarray, h: float):
    """Second derivative at ts, from the user or by central differences."""
    if curve.gamma2 is not None:
        return _as_curve_fn(curve.gamma2)(ts), "user"
    lo, hi = curve.domain
    h = min(h, (hi - lo) / 2.0)
    gamma = _as_curve_fn(curve.gamma)
    base = np.clip(ts - h, lo, hi - 2.0 * h)
    vals = (gamma(base) - 2.0 * gamma(base + h) + gamma(base + 2.0 * h)) / h**2
    return vals, "finite_difference"


def check_curve_viable(curve: Curve, nl: Nonlinearity, g: Weight, grid: Grid,
                       tol: float = DEFAULT_VIABLE_TOL) -> CurveCheck:
    """Does the curve solve ``gamma'' = -g f(t, gamma)`` at every node?"""
    ts = _domain_nodes(curve, grid)
    gam = _as_curve_fn(curve.gamma)(ts)
    if np.any(gam < 0):
        i = int(np.flatnonzero(gam < 0)[0])
        raise DomainError(f"curve must be nonnegative, gamma({ts[i]})={gam[i]}")
    g2, source = _gamma2_values(curve, ts, grid.spacing)
    gv = np.asarray(g(ts), dtype=float)
    fv = f_values(nl, ts, gam)
    res = np.abs(g2 + gv * fv)
    i = int(np.argmax(res))
    return CurveCheck(
        label=curve.label,
        checked="viable",
        passed=bool(res[i] <= tol),
        worst_margin=float(tol - res[i]),
        worst_point=(float(ts[i]), float(gam[i])),
        gamma2_source=source,
        note=f"max |gamma'' + g f| = {float(res[i])!r} vs tol {tol!r}",
    )


def check_curve_inviable(curve: Curve, nl: Nonlinearity, g: Weight, grid: Grid,
                         n_y: int = 33,
                         strict_margin: float = DEFAULT_STRICT_MARGIN) -> CurveCheck:
    """Does one strict one-sided inequality hold across the eps-band?

    Checks, at every node t of the curve domain and every sample y of
    [gamma(t)-eps, gamma(t)+eps] ∩ [0,∞) (including both one-sided values
    at any curve crossing inside the band), whether

        gamma'' + psi < -g f(t,y)     (first inequality), or
        gamma'' - psi > -g f(t,y)     (second inequality).

    Strictness is enforced with a relative slack, since a sampled check
    cannot certify a strict inequality at zero margin.
    """
    if curve.eps is None or curve.psi is None:
        raise ConfigError("inviability check needs the curve's eps and psi")
    eps = float(curve.eps)
    ts = _domain_nodes(curve, grid)
    gam = _as_curve_fn(curve.gamma)(ts)
    g2, source = _gamma2_values(curve, ts, grid.spacing)
    psi = _as_curve_fn(curve.psi)(ts)
    if np.any(psi <= 0):
        i = int(np.flatnonzero(psi <= 0)[0])
        raise ConfigError(f"psi must be positive, psi({ts[i]})={psi[i]}")
    gv = np.asarray(g(ts), dtype=float)

    min1 = np.inf
    min2 = np.inf
    worst1 = worst2 = (float(ts[0]), float(gam[0]))
    scale = max(1.0, float(np.max(np.abs(g2))), float(np.max(psi)))

    for i, t in enumerate(ts):
        lo = max(gam[i] - eps, 0.0)
        hi = gam[i] + eps
        ys = list(np.linspace(lo, hi, n_y))
        sides = ["on"] * len(ys)
        for other in nl.curves:
            if other.domain[0] <= t <= other.domain[1]:
                yc = float(_as_curve_fn(other.gamma)(np.array([t]))[0])
                if lo <= yc <= hi:
                    ys.extend([yc, yc])
                    sides.extend(["below", "above"])
        for y, side in zip(ys, sides):
            fv = f_eval(nl, float(t), float(y), side)
            gf = gv[i] * fv
            scale = max(scale, abs(gf))
            m1 = (-gf) - (g2[i] + psi[i])
            m2 = (g2[i] - psi[i]) + gf
            if m1 < min1:
                min1, worst1 = m1, (float(t), float(y))
            if m2 < min2:
                min2, worst2 = m2, (float(t), float(y))

    thresh = strict_margin * scale
    if min1 >= min2:
        inequality, margin, worst = "first", min1, worst1
    else:
        inequality, margin, worst = "second", min2, worst2
    passed = bool(margin >= thresh)
    return CurveCheck(
        label=curve.label,
        checked="inviable",
        passed=passed,
        worst_margin=float(margin),
        worst_point=worst,
        inequality=inequality if passed else None,
        gamma2_source=source,
        note=(f"first inequality min margin {float(min1)!r}, "
              f"second {float(min2)!r}, strictness threshold {float(thresh)!r}"),
    )


def classify_curve(curve: Curve, nl: Nonlinearity, g: Weight, grid: Grid,
                   viable_tol: float = DEFAULT_VIABLE_TOL,
                   strict_margin: float = DEFAULT_STRICT_MARGIN) -> CurveCheck:
    """Check a curve against its declared kind; for ``unknown`` try both."""
    if curve.kind == "viable":
        return check_curve_viable(curve, nl, g, grid, viable_tol)
    if curve.kind == "inviable":
        return check_curve_inviable(curve, nl, g, grid,
                                    strict_margin=strict_margin)
    report = check_curve_viable(curve, nl, g, grid, viable_tol)
    if report.passed:
        return report
    if curve.eps is not None and curve.psi is not None:
        return check_curve_inviable(curve, nl, g, grid,
                                    strict_margin=strict_margin)
    return report
