"""Existence certificates for positive fixed points of the integral operator.

Two normalization constants summarize the kernel and weight:

    1/m      = sup over t in [0,1] of ∫₀¹ k(t,s) g(s) ds,
    1/M(a,b) = inf over t in [a,b] of ∫ₐᵇ k(t,s) g(s) ds.

A certificate checks a pair of strict inequalities at two radii, in one of
two admissible orderings:

    branch (a): rho1/c < rho2, lower bound at rho1 and upper bound at rho2;
    branch (b): rho1 < rho2, upper bound at rho1 and lower bound at rho2;

where the upper condition is ``sup f/rho < m`` on [0,1] x [0, rho+eps] and
the lower condition is ``inf f/rho > M(a,b)`` on the cone box.  On top of
the numeric inequalities, every declared jump curve must pass its viability
or inviability classification: that is the structural surrogate for the
fixed-point-compatibility condition on the discontinuity set, which is not
directly computable in function space.

Certificates are emitted on failure too, with per-condition margins, so
radius and eps scans can see how far each condition is from passing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWeightError, DomainError, OrderingError
from .nonlinearity import (
    DEFAULT_DENSITY,
    DEFAULT_STRICT_MARGIN,
    DEFAULT_VIABLE_TOL,
    BoundsReport,
    classify_curve,
    f_lower,
    f_upper,
)
from .quadrature import Grid, Weight, inf_param_integral, integrate_weighted, sup_param_integral

__all__ = [
    "Condition",
    "Certificate",
    "compute_m",
    "compute_M",
    "certify",
    "certificate_to_dict",
    "certificate_json",
]


def compute_m(kernel, g: Weight, grid: Grid) -> float:
    """Reciprocal of the full-range sup of ``∫ k(t,s) g(s) ds``."""
    sup = sup_param_integral(kernel, g, (0.0, 1.0), (0.0, 1.0), grid)
    if sup.value <= 0.0:
        raise DegenerateWeightError(
            "sup of the kernel integral vanishes; the weight is degenerate"
        )
    return 1.0 / sup.value


def compute_M(kernel, g: Weight, spec, grid: Grid) -> float:
    """Reciprocal of the inf of ``∫ₐᵇ k(t,s) g(s) ds`` over t in [a,b]."""
    phi_g = integrate_weighted(kernel.phi, g, grid)
    if phi_g <= 0.0:
        raise DegenerateWeightError(
            "the envelope-weighted integral of g vanishes on [0,1]"
        )
    inf = inf_param_integral(kernel, g, (spec.a, spec.b), (spec.a, spec.b), grid)
    if inf.value <= 0.0:
        raise DegenerateWeightError(
            "inf of the kernel integral vanishes on the cone interval"
        )
    return 1.0 / inf.value


@dataclass(frozen=True)
class Condition:
    """One strict inequality and its numeric margin."""

    name: str
    passed: bool
    margin: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "margin": self.margin, "detail": self.detail}


@dataclass(frozen=True, eq=False)
class Certificate:
    """Outcome of a certification run, pass or fail."""

    m: float
    M_ab: float
    rho1: float
    rho2: float
    eps: float
    margin: float
    branch: str
    f_upper_at_rho: BoundsReport
    f_lower_at_rho: BoundsReport
    conditions: tuple[Condition, ...]
    annulus: tuple[float, float]
    curve_reports: tuple
    verdict: str
    meta: dict

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"


def _strict(value_low: float, value_high: float, margin: float) -> tuple[bool, float]:
    """Strictly value_low < value_high, with relative slack."""
    gap = value_high - value_low
    scale = max(1.0, abs(value_low), abs(value_high))
    return bool(gap >= margin * scale), float(gap)


def _branch_conditions(branch: str, nl, spec, rho1, rho2, eps, m, M_ab,
                       margin, density):
    """Evaluate the two numeric inequalities of a branch."""
    if branch == "a":
        low = f_lower(nl, rho1, eps, spec, density)
        up = f_upper(nl, rho2, eps, density)
        ok_low, gap_low = _strict(M_ab, low.value, margin)
        ok_up, gap_up = _strict(up.value, m, margin)
        conditions = (
            Condition("f_lower_above_M_at_rho1", ok_low, gap_low,
                      f"f_lower({rho1},{eps})={low.value!r} vs M={M_ab!r}"),
            Condition("f_upper_below_m_at_rho2", ok_up, gap_up,
                      f"f_upper({rho2},{eps})={up.value!r} vs m={m!r}"),
        )
    else:
        up = f_upper(nl, rho1, eps, density)
        low = f_lower(nl, rho2, eps, spec, density)
        ok_up, gap_up = _strict(up.value, m, margin)
        ok_low, gap_low = _strict(M_ab, low.value, margin)
        conditions = (
            Condition("f_upper_below_m_at_rho1", ok_up, gap_up,
                      f"f_upper({rho1},{eps})={up.value!r} vs m={m!r}"),
            Condition("f_lower_above_M_at_rho2", ok_low, gap_low,
                      f"f_lower({rho2},{eps})={low.value!r} vs M={M_ab!r}"),
        )
    return conditions, up, low


def certify(problem, rho1: float, rho2: float, eps: float,
            margin: float = 1e-8, branch: str | None = None,
            density: int = DEFAULT_DENSITY,
            viable_tol: float = DEFAULT_VIABLE_TOL,
            strict_margin: float = DEFAULT_STRICT_MARGIN,
            meta: dict | None = None) -> "Certificate":
    """Certify existence of a positive fixed point between two radii.

    Tries branch (a) when ``rho1/c < rho2`` and branch (b) when
    ``rho1 < rho2`` (both, in that order, unless ``branch`` pins one); the
    first branch whose inequalities both hold is recorded.  The verdict is
    ``certified`` only if some branch passes and every declared curve passes
    its classification.
    """
    rho1, rho2, eps = float(rho1), float(rho2), float(eps)
    if rho1 <= 0 or rho2 <= 0:
        raise DomainError("radii must be positive")
    if rho1 == rho2:
        raise OrderingError("rho1 and rho2 must differ")
    if eps <= 0:
        raise DomainError("eps must be positive")
    if margin < 0:
        raise DomainError("margin must be nonnegative")

    spec = problem.cone
    nl = problem.f
    m = compute_m(problem.kernel, problem.weight, problem.grid)
    M_ab = compute_M(problem.kernel, problem.weight, spec, problem.grid)

    admissible = []
    if branch in (None, "a") and rho1 / spec.c < rho2:
        admissible.append("a")
    if branch in (None, "b") and rho1 < rho2:
        admissible.append("b")
    if not admissible:
        hint = f"requested branch {branch!r}" if branch else "either branch"
        raise OrderingError(
            f"radii rho1={rho1}, rho2={rho2} (c={spec.c}) fit {hint} in no "
            "admissible ordering"
        )

    evaluated = []
    for cand in admissible:
        conditions, up, low = _branch_conditions(
            cand, nl, spec, rho1, rho2, eps, m, M_ab, margin, density)
        evaluated.append((cand, conditions, up, low))
        if all(c.passed for c in conditions):
            break

    # keep the passing branch, otherwise the admissible one that came closest
    def worst(entry):
        return min(c.margin for c in entry[1])

    passing = [e for e in evaluated if all(c.passed for c in e[1])]
    chosen = passing[0] if passing else max(evaluated, key=worst)
    branch_used, conditions, up, low = chosen

    curve_reports = tuple(
        classify_curve(c, nl, problem.weight, problem.grid,
                       viable_tol=viable_tol, strict_margin=strict_margin)
        for c in nl.curves
    )
    curves_ok = all(r.passed for r in curve_reports)
    curve_margin = min((r.worst_margin for r in curve_reports), default=np.inf)
    conditions = conditions + (
        Condition(
            "curves_admissible",
            curves_ok,
            float(curve_margin) if np.isfinite(curve_margin) else 0.0,
            f"{len(curve_reports)} declared curve(s)",
        ),
    )

    verdict = "certified" if all(c.passed for c in conditions) else "not_certified"
    return Certificate(
        m=float(m),
        M_ab=float(M_ab),
        rho1=rho1,
        rho2=rho2,
        eps=eps,
        margin=float(margin),
        branch=branch_used,
        f_upper_at_rho=up,
        f_lower_at_rho=low,
        conditions=conditions,
        annulus=(min(rho1, rho2), max(rho1, rho2)),
        curve_reports=curve_reports,
        verdict=verdict,
        meta=dict(meta or {}),
    )


def certificate_to_dict(cert: Certificate) -> dict:
    return {
        "m": cert.m,
        "M_ab": cert.M_ab,
        "rho1": cert.rho1,
        "rho2": cert.rho2,
        "eps": cert.eps,
        "margin": cert.margin,
        "branch": cert.branch,
        "f_upper_at_rho": cert.f_upper_at_rho.to_dict(),
        "f_lower_at_rho": cert.f_lower_at_rho.to_dict(),
        "conditions": [c.to_dict() for c in cert.conditions],
        "annulus": list(cert.annulus),
        "curve_reports": [r.to_dict() for r in cert.curve_reports],
        "verdict": cert.verdict,
        "meta": cert.meta,
    }


def certificate_json(cert: Certificate) -> str:
    """Canonical JSON rendering; byte-identical for identical inputs."""
    import json

    return json.dumps(certificate_to_dict(cert), sort_keys=True, indent=2) + "\n"
