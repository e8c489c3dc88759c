"""Discretized integral operator ``Tu(t) = ∫ k(t,s) g(s) f(s,u(s)) ds``.

The operator is evaluated at the grid nodes by a composite trapezoid rule
on a shared partition: the grid nodes plus every point where the linear
interpolant of u crosses a declared jump curve.  Crossings are located by
bisection (well past the grid-spacing-squared floor, down to rounding), and
the integrand takes one-sided values of f at the crossing so no O(h) error
concentrates at jumps.  Using one partition for every target node keeps the
discrete cone inequalities exact up to rounding: the kernel bounds
``c*Phi <= k <= Phi`` hold pointwise at the shared quadrature slots, with
shared nonnegative weights, so T maps the discrete cone into itself the
same way the continuous operator does.

The only solver is damped fixed-point iteration ``u <- (1-θ)u + θTu``: the
nonlinearity is discontinuous, so derivative-based steps are unreliable
across curves.  Annulus fixed points certified by the compression and
expansion inequalities are often repelling for this iteration (the certified
step example has a linearized gain near 17), so :func:`annulus_seed`
bisects a one-parameter family of operator images for a self-consistent
profile inside the annulus and hands it to the iteration as the initial
guess; the iteration then verifies the residual on its own terms.  When the
iteration stagnates anyway, the best iterate is returned flagged
unconverged: existence of a fixed point does not promise this iteration
finds it, and reporting "certified but not located" is the truthful outcome.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cone import (
    DEFAULT_CONE_TOL,
    ConeSpec,
    GridFunction,
    cone_member,
    min_on_interval,
    norm_sup,
)
from .errors import (
    AdmissibilityError,
    DegenerateWeightError,
    DivergenceError,
    DomainError,
    EvaluationError,
)
from .kernels import Kernel, verify_h4
from .nonlinearity import Nonlinearity, _as_curve_fn, f_values, growth_bound_value
from .quadrature import Grid, Weight, integrate_weighted

__all__ = [
    "Problem",
    "Solution",
    "QBoundReport",
    "ProbeReport",
    "make_problem",
    "apply_T",
    "residual",
    "solve_fixed_point",
    "q_bound_check",
    "random_cone_member",
    "cone_mapping_probe",
    "annulus_seed",
]

_SIDE_BLEND = 1e-6


@dataclass(frozen=True, eq=False)
class Problem:
    """Kernel, weight, nonlinearity and grid, verified at construction."""

    kernel: Kernel
    weight: Weight
    f: Nonlinearity
    grid: Grid

    @property
    def cone(self) -> ConeSpec:
        return self.kernel.cone


def make_problem(kernel: Kernel, weight: Weight, f: Nonlinearity,
                 grid: Grid, h4_tol: float = 1e-9) -> Problem:
    """Assemble a problem, enforcing the kernel bounds and a usable weight."""
    report = verify_h4(kernel, grid, tol=h4_tol)
    if not report.passed:
        raise AdmissibilityError(
            "kernel bounds fail on the grid: "
            f"upper margin {report.upper_margin!r} at {report.upper_worst}, "
            f"lower margin {report.lower_margin!r} at {report.lower_worst}"
        )
    if integrate_weighted(kernel.phi, weight, grid) <= 0.0:
        raise DegenerateWeightError(
            "the envelope-weighted integral of g must be positive"
        )
    return Problem(kernel=kernel, weight=weight, f=f, grid=grid)


def _curve_splits(u: GridFunction, curve, iters: int = 60) -> list[float]:
    """Crossings of the interpolant of u with one curve, plus the curve's
    domain endpoints (f may change branch there)."""
    nodes = u.grid.nodes
    lo, hi = curve.domain
    gamma = _as_curve_fn(curve.gamma)
    breaks = np.unique(np.concatenate([
        [lo], nodes[(nodes > lo) & (nodes < hi)], [hi]]))
    phi = np.interp(breaks, nodes, u.values) - gamma(breaks)

    splits = [p for p in (lo, hi) if 0.0 < p < 1.0]
    for j in range(breaks.size - 1):
        a, b = float(breaks[j]), float(breaks[j + 1])
        fa, fb = float(phi[j]), float(phi[j + 1])
        if fa == 0.0:
            splits.append(a)
            continue
        if fa * fb >= 0.0:
            continue
        for _ in range(iters):
            mid = 0.5 * (a + b)
            fm = float(np.interp(mid, nodes, u.values) - gamma(np.array(mid)))
            if fm == 0.0:
                a = b = mid
                break
            if (fm > 0.0) == (fa > 0.0):
                a, fa = mid, fm
            else:
                b = mid
        splits.append(0.5 * (a + b))
    if float(phi[-1]) == 0.0:
        splits.append(float(breaks[-1]))
    return splits


def _partition_with_splits(problem: Problem, u: GridFunction) -> np.ndarray:
    nodes = problem.grid.nodes
    splits = []
    for curve in problem.f.curves:
        splits.extend(_curve_splits(u, curve))
    if not splits:
        return nodes
    extra = np.asarray(sorted(splits), dtype=float)
    part = np.unique(np.concatenate([nodes, extra]))
    # drop points that collapsed onto a node to within rounding
    keep = np.concatenate([[True], np.diff(part) > 1e-14])
    return part[keep]


def _integrand_coefficients(problem: Problem, u: GridFunction):
    """Partition points with aggregated trapezoid coefficients.

    Each segment contributes two one-sided slots; slots sharing a partition
    point share the kernel column, so their coefficients are summed there.
    """
    part = _partition_with_splits(problem, u)
    uP = np.interp(part, problem.grid.nodes, np.maximum(u.values, 0.0))
    h = np.diff(part)
    uL, uR = uP[:-1], uP[1:]
    u_mid = 0.5 * (uL + uR)

    s_slots = np.concatenate([part[:-1], part[1:]])
    u_eval = np.concatenate([uL, uR])
    # select the piece from just inside the segment: at a crossing this
    # produces the one-sided limit, elsewhere it changes nothing
    u_sel = np.maximum(
        u_eval + _SIDE_BLEND * (np.concatenate([u_mid, u_mid]) - u_eval), 0.0)
    fv = f_values(problem.f, s_slots, u_eval, u_sel)
    gv = np.asarray(problem.weight(s_slots), dtype=float)
    if np.any(gv < -1e-12):
        bad = float(s_slots[np.flatnonzero(gv < -1e-12)[0]])
        raise DomainError(f"weight is negative at s={bad!r}")
    slot_coef = np.concatenate([0.5 * h, 0.5 * h]) * np.maximum(gv, 0.0) * fv

    n_seg = part.size - 1
    coef = np.zeros(part.size)
    coef[:-1] += slot_coef[:n_seg]
    coef[1:] += slot_coef[n_seg:]
    return part, coef


def _node_kernel_matrix(problem: Problem) -> np.ndarray:
    cached = getattr(problem, "_node_kernel", None)
    if cached is None:
        nodes = problem.grid.nodes
        cached = np.broadcast_to(
            np.asarray(problem.kernel.eval(nodes[:, None], nodes[None, :]),
                       dtype=float),
            (nodes.size, nodes.size)).copy()
        object.__setattr__(problem, "_node_kernel", cached)
    return cached


def apply_T(problem: Problem, u: GridFunction) -> GridFunction:
    """One application of the integral operator at the grid nodes."""
    if u.grid is not problem.grid and not np.array_equal(u.grid.nodes,
                                                         problem.grid.nodes):
        raise DomainError("u must live on the problem grid")
    if float(np.min(u.values)) < -1e-9:
        raise DomainError("u must be nonnegative at the nodes")
    part, coef = _integrand_coefficients(problem, u)
    nodes = problem.grid.nodes

    pos = np.searchsorted(nodes, part)
    pos = np.minimum(pos, nodes.size - 1)
    is_node = nodes[pos] == part
    K = np.empty((nodes.size, part.size))
    K[:, is_node] = _node_kernel_matrix(problem)[:, pos[is_node]]
    if np.any(~is_node):
        K[:, ~is_node] = np.broadcast_to(
            np.asarray(problem.kernel.eval(nodes[:, None],
                                           part[~is_node][None, :]),
                       dtype=float),
            (nodes.size, int(np.sum(~is_node))))
    out = K @ coef
    if not np.all(np.isfinite(out)):
        i = int(np.flatnonzero(~np.isfinite(out))[0])
        raise EvaluationError(
            f"operator value not finite at t={float(nodes[i])!r}"
        )
    return GridFunction(grid=problem.grid, values=out)


def residual(problem: Problem, u: GridFunction) -> float:
    """Sup-norm of u - Tu on the grid."""
    return float(np.max(np.abs(u.values - apply_T(problem, u).values)))


@dataclass(frozen=True)
class QBoundReport:
    """Derivative-increment check against the integral of M(t) = g(t) R."""

    passed: bool
    worst_margin: float
    tol: float
    bound_R: float

    def __bool__(self) -> bool:
        return self.passed


def q_bound_check(u: GridFunction, problem: Problem,
                  R: float | None = None) -> QBoundReport:
    """Check ``|u'(t) - u'(s)| <= ∫ₛᵗ g(r) R dr`` on finite differences.

    R defaults to the sampled growth bound of f at radius ``(sup u)/c``.
    The comparison tolerance is grid-order: forward differences sit within
    h * max(M) of the true derivative at cell midpoints.
    """
    nodes = u.grid.nodes
    if R is None:
        r = norm_sup(u) / problem.cone.c
        R = growth_bound_value(problem.f, r)
    M = np.asarray(problem.weight(nodes), dtype=float) * float(R)
    h = np.diff(nodes)
    d = np.diff(u.values) / h
    C_nodes = np.concatenate([[0.0], np.cumsum(0.5 * h * (M[:-1] + M[1:]))])
    C_mid = 0.5 * (C_nodes[:-1] + C_nodes[1:])

    # |d_k - d_j| <= C_k - C_j for all j < k  <=>  d-C non-increasing
    # and d+C non-decreasing; margins via running extrema
    a = d - C_mid
    run_min = np.minimum.accumulate(a)
    viol_a = float(np.max(a[1:] - run_min[:-1])) if a.size > 1 else 0.0
    b = d + C_mid
    run_max = np.maximum.accumulate(b)
    viol_b = float(np.max(run_max[:-1] - b[1:])) if b.size > 1 else 0.0
    worst = max(viol_a, viol_b, 0.0)

    tol = 2.0 * float(np.max(h)) * float(np.max(M, initial=0.0)) + 1e-9
    return QBoundReport(passed=bool(worst <= tol), worst_margin=worst,
                        tol=tol, bound_R=float(R))


@dataclass(frozen=True, eq=False)
class Solution:
    """Solver output with its validation flags."""

    u: GridFunction
    residual_sup: float
    iterations: int
    converged: bool
    in_cone: bool
    norm: float
    annulus_ok: bool | None
    q_bound_ok: bool
    q_report: QBoundReport


def _annulus_of(certificate) -> tuple[float, float] | None:
    if certificate is None:
        return None
    ann = getattr(certificate, "annulus", certificate)
    lo, hi = (float(v) for v in ann)
    return lo, hi


def solve_fixed_point(problem: Problem, init: GridFunction,
                      theta: float = 0.5, tol: float = 1e-8,
                      max_iter: int = 200, certificate=None,
                      cone_tol: float = DEFAULT_CONE_TOL) -> Solution:
    """Damped fixed-point iteration from a cone member.

    Stops when the residual drops below ``tol``; raises
    :class:`DivergenceError` when iterates leave the admissible ball, and
    returns the best iterate flagged unconverged when progress stalls
    (for example when the iteration stagnates across a jump curve; this is
    reported, not hidden).
    """
    if not (0.0 < theta <= 1.0):
        raise DomainError("theta must lie in (0, 1]")
    if not cone_member(init, problem.cone, cone_tol):
        raise DomainError("the initial iterate must belong to the cone")

    annulus = _annulus_of(certificate)
    if annulus is not None:
        guard = 10.0 * annulus[1] / problem.cone.c
    else:
        guard = 1e8 * max(1.0, norm_sup(init))

    u = init
    best_u, best_res, best_iter = init, np.inf, 0
    trace = []
    converged = False
    iterations = 0
    stall_window = 25

    for k in range(max_iter + 1):
        Tu = apply_T(problem, u)
        res = float(np.max(np.abs(u.values - Tu.values)))
        trace.append(norm_sup(u))
        if res < best_res:
            best_u, best_res, best_iter = u, res, k
        if res <= tol:
            converged = True
            iterations = k
            break
        if trace[-1] > guard:
            raise DivergenceError(
                f"iterate norm {trace[-1]!r} exceeded the guard {guard!r} "
                f"after {k} iterations", trace)
        if k - best_iter >= stall_window:
            iterations = k
            break
        if k == max_iter:
            iterations = k
            break
        u = u.with_values((1.0 - theta) * u.values + theta * Tu.values)

    u = best_u
    final_res = best_res if np.isfinite(best_res) else residual(problem, u)
    nrm = norm_sup(u)
    in_cone = cone_member(u, problem.cone, cone_tol)

    annulus_ok = None
    growth_radius = None
    if annulus is not None:
        lo, hi = annulus
        annulus_ok = bool(lo + cone_tol < nrm < hi - cone_tol)
        growth_radius = hi / problem.cone.c
    if growth_radius is not None:
        q_report = q_bound_check(u, problem,
                                 R=growth_bound_value(problem.f, growth_radius))
    else:
        q_report = q_bound_check(u, problem)

    return Solution(
        u=u,
        residual_sup=float(final_res),
        iterations=iterations,
        converged=converged,
        in_cone=in_cone,
        norm=nrm,
        annulus_ok=annulus_ok,
        q_bound_ok=q_report.passed,
        q_report=q_report,
    )


def _phi_bump(problem: Problem) -> np.ndarray:
    """Envelope shape normalized to sup 1 (falls back to the constant 1)."""
    phi = np.asarray(problem.kernel.phi(problem.grid.nodes), dtype=float)
    top = float(np.max(phi))
    return phi / top if top > 0 else np.ones_like(phi)


def random_cone_member(problem: Problem, rng: np.random.Generator,
                       amp_range: tuple[float, float] = (0.1, 20.0),
                       noise: float = 0.3) -> GridFunction:
    """A seeded random cone member: an envelope-shaped bump of log-uniform
    amplitude plus nonnegative noise, then shifted up just enough that the
    minimum over [a,b] dominates c times the sup-norm."""
    spec = problem.cone
    lo, hi = amp_range
    lam = 10.0 ** rng.uniform(np.log10(lo), np.log10(hi))
    vals = lam * (_phi_bump(problem) + noise * rng.random(problem.grid.n))
    u = GridFunction(grid=problem.grid, values=vals)
    if spec.c >= 1.0:
        return u.with_values(np.full_like(vals, norm_sup(u)))
    gap = spec.c * norm_sup(u) - min_on_interval(u, spec.a, spec.b)
    if gap > 0:
        u = u.with_values(vals + gap / (1.0 - spec.c))
    return u


@dataclass(frozen=True)
class ProbeReport:
    """Outcome of the random cone-mapping probe."""

    trials: int
    failures: int
    seed: int
    tol: float
    examples: tuple

    @property
    def passed(self) -> bool:
        return self.failures == 0


def cone_mapping_probe(problem: Problem, trials: int = 1000, seed: int = 0,
                       tol: float = DEFAULT_CONE_TOL) -> ProbeReport:
    """Push random cone members through T and count cone violations."""
    rng = np.random.default_rng(seed)
    failures = 0
    examples = []
    for k in range(trials):
        u = random_cone_member(problem, rng)
        Tu = apply_T(problem, u)
        if not cone_member(Tu, problem.cone, tol):
            failures += 1
            if len(examples) < 5:
                gap = (min_on_interval(Tu, problem.cone.a, problem.cone.b)
                       - problem.cone.c * norm_sup(Tu))
                examples.append((k, float(gap)))
    return ProbeReport(trials=trials, failures=failures, seed=seed, tol=tol,
                       examples=tuple(examples))


def annulus_seed(problem: Problem, r_min: float, r_max: float,
                 coarse: int = 96, refined: int = 64,
                 max_bisect: int = 90, seed_tol: float = 1e-10) -> GridFunction:
    """Search a one-parameter family of operator images for a profile that
    is numerically self-consistent inside the annulus ``r_min < ||u|| < r_max``.

    Candidates are ``v(λ) = T(λ·base)`` for a cone-shaped base profile; the
    scalar growth indicator ``β(λ) = ||T(v)|| - ||v||`` changes sign at a
    fixed point, so a sign change between candidates whose norms lie in the
    annulus is bisected to rounding.  For piecewise-constant nonlinearities
    the image family is exactly one-dimensional and the bisected profile is
    a fixed point of the discrete operator to near machine precision;
    otherwise this is a best-effort seed and the iteration decides.
    """
    if not (0.0 < r_min < r_max):
        raise DomainError("need 0 < r_min < r_max")
    spec = problem.cone
    base = spec.c + (1.0 - spec.c) * _phi_bump(problem)  # sup 1, in the cone

    best: dict = {"v": None, "res": np.inf}

    def candidate(lam: float):
        v = apply_T(problem, GridFunction(problem.grid, lam * base))
        Tv = apply_T(problem, v)
        beta = norm_sup(Tv) - norm_sup(v)
        res = float(np.max(np.abs(v.values - Tv.values)))
        if res < best["res"] and r_min < norm_sup(v) < r_max:
            best["v"], best["res"] = v, res
        return v, beta, res

    def touches_window(n0: float, n1: float) -> bool:
        return max(n0, n1) > r_min and min(n0, n1) < r_max

    lams = list(np.geomspace(max(1e-8, 0.2 * r_min),
                             1.25 * r_max / spec.c, coarse))
    cands = [candidate(l) for l in lams]
    if best["res"] > seed_tol:
        # refine across every coarse cell whose norms touch the annulus:
        # image norms can climb a square-root cliff at a jump threshold,
        # so the window may fall entirely between coarse candidates
        refine_cells = [
            j for j in range(len(lams) - 1)
            if touches_window(norm_sup(cands[j][0]), norm_sup(cands[j + 1][0]))
        ]
        for j in refine_cells:
            extra = np.linspace(lams[j], lams[j + 1],
                                max(refined // max(len(refine_cells), 1), 8))
            for lam in extra[1:-1]:
                lams.append(float(lam))
                cands.append(candidate(lam))
        order = np.argsort(lams)
        lams = [lams[i] for i in order]
        cands = [cands[i] for i in order]

    if best["res"] > seed_tol:
        # β <= 0 just below a fixed point of the family, > 0 just above it;
        # bisection of an upward sign change converges to the crossing even
        # when the lower endpoint sits on a β = 0 plateau outside the window
        for j in range(len(cands) - 1):
            _, b0, _ = cands[j]
            _, b1, _ = cands[j + 1]
            n0, n1 = norm_sup(cands[j][0]), norm_sup(cands[j + 1][0])
            if not (b0 <= 0.0 < b1 and touches_window(n0, n1)):
                continue
            lo, hi = float(lams[j]), float(lams[j + 1])
            for _ in range(max_bisect):
                mid = 0.5 * (lo + hi)
                _, beta, _ = candidate(mid)
                if best["res"] <= seed_tol:
                    break
                if beta <= 0.0:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= 1e-17 * max(1.0, hi):
                    break
            if best["res"] <= seed_tol:
                break

    if best["v"] is None:
        raise DomainError(
            f"no candidate profile found with norm in ({r_min}, {r_max})"
        )
    return best["v"]
