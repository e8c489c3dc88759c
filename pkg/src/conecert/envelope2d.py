"""Closed-convex-envelope approximation for maps of the first quadrant.

For an operator T on the cone K = {(x,y): x,y >= 0} and a point x, the
envelope is the intersection over eps > 0 of the closed convex hulls of
T(B(x,eps) ∩ K).  Here the intersection over all eps is approximated by a
finite descending ladder: each rung samples the clipped ball, maps the
samples through T, and takes a 2-D convex hull (standard monotone chain,
collinear points dropped).  All rungs draw from one shared master sample
set filtered by distance, so the sampled balls, and therefore the hulls,
are nested by construction.  The ladder is declared converged when
successive hulls stop moving in Hausdorff distance; the last hull stands in
for the intersection.  No rigorous inner/outer bracketing is attempted.

At a continuity point the envelope collapses to the single image point; the
interesting behaviour is at discontinuities, where the hull picks up every
one-sided limit the samples can reach.  :func:`polar_jump_operator` builds
the standard worked example: a map that collapses everything off a circle
of radius r to the origin and swaps the two octants of the circle, whose
envelope at the diagonal point is the full triangle spanned by (0,0), (r,0)
and (0,r), and which has no fixed point at all in the closed annulus
between r and any larger radius.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "convex_hull",
    "polygon_diameter",
    "point_hull_distance",
    "hausdorff_distance",
    "sample_ball_cone",
    "EnvelopeApprox",
    "cc_envelope",
    "envelope_condition_check",
    "AnnulusScanReport",
    "annulus_fixed_point_scan",
    "usc_sequence_probe",
    "polar_jump_operator",
]

DEFAULT_EPS_LADDER = (0.1, 0.05, 0.01, 0.005, 0.001)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> np.ndarray:
    """Monotone-chain convex hull, counterclockwise, collinear points dropped.

    Degenerate inputs are handled: one distinct point gives a 1-vertex
    "hull", collinear points give the extreme pair.
    """
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if pts.shape[0] == 0:
        raise DomainError("convex hull of an empty point set")
    if pts.shape[0] <= 2:
        return pts
    span = float(np.max(pts) - np.min(pts))
    eps = 1e-12 * max(span, 1.0) ** 2

    ordered = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    lower: list = []
    for p in ordered:
        while len(lower) > 1 and _cross(lower[-2], lower[-1], p) <= eps:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in ordered[::-1]:
        while len(upper) > 1 and _cross(upper[-2], upper[-1], p) <= eps:
            upper.pop()
        upper.append(p)
    hull = np.array(lower[:-1] + upper[:-1])
    return hull if hull.shape[0] >= 3 else np.unique(hull, axis=0)


def polygon_diameter(verts) -> float:
    verts = np.asarray(verts, dtype=float).reshape(-1, 2)
    if verts.shape[0] < 2:
        return 0.0
    d = verts[:, None, :] - verts[None, :, :]
    return float(np.sqrt(np.max(np.sum(d * d, axis=-1))))


def _segment_distance(p, a, b) -> float:
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    ab = b - a
    den = float(ab @ ab)
    t = 0.0 if den == 0.0 else float(np.clip((p - a) @ ab / den, 0.0, 1.0))
    return float(np.hypot(*(p - (a + t * ab))))


def point_hull_distance(p, verts) -> float:
    """Distance from a point to a filled convex polygon (0 inside)."""
    verts = np.asarray(verts, dtype=float).reshape(-1, 2)
    p = np.asarray(p, dtype=float)
    if verts.shape[0] == 1:
        return float(np.hypot(*(p - verts[0])))
    if verts.shape[0] == 2:
        return _segment_distance(p, verts[0], verts[1])
    span = float(np.max(verts) - np.min(verts))
    eps = 1e-12 * max(span, 1.0) ** 2
    inside = all(
        _cross(verts[i], verts[(i + 1) % len(verts)], p) >= -eps
        for i in range(len(verts))
    )
    if inside:
        return 0.0
    return min(
        _segment_distance(p, verts[i], verts[(i + 1) % len(verts)])
        for i in range(len(verts))
    )


def hausdorff_distance(A, B) -> float:
    """Set Hausdorff distance between two filled convex polygons.

    For convex sets the directed distance is attained at a vertex, so the
    maximum over vertices of the point-to-polygon distance is exact.
    """
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    B = np.asarray(B, dtype=float).reshape(-1, 2)
    d_ab = max(point_hull_distance(a, B) for a in A)
    d_ba = max(point_hull_distance(b, A) for b in B)
    return float(max(d_ab, d_ba))


def sample_ball_cone(x, eps: float, n_radial: int = 17,
                     n_angular: int = 121) -> np.ndarray:
    """Deterministic samples of the closed eps-ball around x clipped to the
    first quadrant.

    Polar product samples around the origin, always including the exact
    ring through x (discontinuities on circles are a measure-zero set a
    blind lattice would miss), the center itself, and the chord points
    where the ball meets the axes (they generate hull extremes).
    """
    x = np.asarray(x, dtype=float)
    if eps <= 0:
        raise DomainError("eps must be positive")
    if x[0] < 0 or x[1] < 0:
        raise DomainError("the center must lie in the closed first quadrant")
    r0 = float(np.hypot(x[0], x[1]))
    if r0 == 0.0:
        radii = np.linspace(0.0, eps, n_radial)
        angles = np.linspace(0.0, np.pi / 2, n_angular)
    else:
        radii = np.unique(np.concatenate([
            np.linspace(max(r0 - eps, 0.0), r0 + eps, n_radial), [r0]]))
        th0 = float(np.arctan2(x[1], x[0]))
        half = float(np.arcsin(min(1.0, eps / r0))) + 1e-9
        angles = np.unique(np.concatenate([
            np.linspace(max(0.0, th0 - half), min(np.pi / 2, th0 + half),
                        n_angular),
            [np.clip(th0, 0.0, np.pi / 2)]]))
    R, TH = np.meshgrid(radii, angles, indexing="ij")
    pts = np.stack([R * np.cos(TH), R * np.sin(TH)], axis=-1).reshape(-1, 2)

    extras = [x]
    if x[1] <= eps:
        w = float(np.sqrt(max(eps ** 2 - x[1] ** 2, 0.0)))
        extras += [[x[0] - w, 0.0], [x[0] + w, 0.0]]
    if x[0] <= eps:
        w = float(np.sqrt(max(eps ** 2 - x[0] ** 2, 0.0)))
        extras += [[0.0, x[1] - w], [0.0, x[1] + w]]
    pts = np.vstack([pts, np.asarray(extras, dtype=float)])

    pts[np.abs(pts) < 1e-300] = 0.0
    dist = np.hypot(pts[:, 0] - x[0], pts[:, 1] - x[1])
    keep = (dist <= eps * (1.0 + 1e-12)) & (pts[:, 0] >= 0.0) & (pts[:, 1] >= 0.0)
    pts = pts[keep]
    if pts.shape[0] == 0:
        raise DomainError("the sampled ball does not meet the cone")
    return np.unique(pts, axis=0)


@dataclass(frozen=True, eq=False)
class EnvelopeApprox:
    """Per-rung hulls and the hull standing in for the intersection."""

    x: np.ndarray
    eps_ladder: tuple[float, ...]
    hulls: tuple
    intersection: np.ndarray
    converged: bool
    hausdorff_steps: tuple[float, ...]


def _apply_op(T: Callable, pts: np.ndarray) -> np.ndarray:
    return np.array([T((float(p[0]), float(p[1]))) for p in pts], dtype=float)


def cc_envelope(T: Callable, x, eps_ladder: Sequence[float] | None = None,
                n_radial: int = 17, n_angular: int = 121,
                conv_tol: float = 1e-4) -> EnvelopeApprox:
    """Approximate the closed-convex envelope of T at x.

    The default ladder is (0.1, 0.05, 0.01, 0.005, 0.001) times ``|x|``
    (absolute when x is the origin).  Convergence means the Hausdorff
    distance between the last two hulls fell below ``conv_tol``.
    """
    x = np.asarray(x, dtype=float)
    if eps_ladder is None:
        scale = float(np.hypot(x[0], x[1])) or 1.0
        eps_ladder = tuple(e * scale for e in DEFAULT_EPS_LADDER)
    eps_ladder = tuple(float(e) for e in eps_ladder)
    if not eps_ladder or any(e <= 0 for e in eps_ladder):
        raise DomainError("the eps ladder must be positive")
    if any(b >= a for a, b in zip(eps_ladder, eps_ladder[1:])):
        raise DomainError("the eps ladder must be strictly decreasing")

    master = np.unique(np.vstack([
        sample_ball_cone(x, e, n_radial, n_angular) for e in eps_ladder
    ]), axis=0)
    images = _apply_op(T, master)
    dist = np.hypot(master[:, 0] - x[0], master[:, 1] - x[1])

    hulls = []
    for e in eps_ladder:
        sub = images[dist <= e * (1.0 + 1e-12)]
        if sub.shape[0] == 0:
            raise DomainError(f"no samples inside the {e}-ball")
        hulls.append(convex_hull(sub))

    steps = tuple(
        hausdorff_distance(hulls[i], hulls[i + 1]) for i in range(len(hulls) - 1)
    )
    converged = bool(steps[-1] < conv_tol) if steps else True
    return EnvelopeApprox(
        x=x,
        eps_ladder=eps_ladder,
        hulls=tuple(hulls),
        intersection=hulls[-1],
        converged=converged,
        hausdorff_steps=steps,
    )


def envelope_condition_check(T: Callable, x, approx: EnvelopeApprox | None = None,
                             tol: float = 1e-9, **envelope_kwargs) -> bool:
    """Is the point compatible with its envelope?

    True when x stays clear of the envelope (distance above tol), or when it
    actually is a fixed point of T to within tol; an envelope that contains
    x without x being fixed is the failure mode this flags.
    """
    x = np.asarray(x, dtype=float)
    if approx is None:
        approx = cc_envelope(T, x, **envelope_kwargs)
    if point_hull_distance(x, approx.intersection) > tol:
        return True
    Tx = np.asarray(T((float(x[0]), float(x[1]))), dtype=float)
    return bool(np.hypot(*(x - Tx)) <= tol)


@dataclass(frozen=True)
class AnnulusScanReport:
    """Minimum fixed-point residual over a polar grid of the annulus."""

    min_residual: float
    argmin: tuple[float, float]
    argmin_polar: tuple[float, float]
    n: int
    r_in: float
    r_out: float


def annulus_fixed_point_scan(T: Callable, r_in: float, r_out: float,
                             n: int = 200) -> AnnulusScanReport:
    """Scan |x - Tx| over the cone part of the annulus r_in <= |x| <= r_out."""
    if not (0.0 < r_in < r_out):
        raise DomainError("need 0 < r_in < r_out")
    radii = np.linspace(r_in, r_out, n)
    angles = np.linspace(0.0, np.pi / 2, n)
    best = np.inf
    arg = (r_in, 0.0)
    for rho in radii:
        for th in angles:
            p = (float(rho * np.cos(th)), float(rho * np.sin(th)))
            q = T(p)
            res = float(np.hypot(p[0] - q[0], p[1] - q[1]))
            if res < best:
                best = res
                arg = (rho, th)
    point = (float(arg[0] * np.cos(arg[1])), float(arg[0] * np.sin(arg[1])))
    return AnnulusScanReport(min_residual=best, argmin=point,
                             argmin_polar=(float(arg[0]), float(arg[1])),
                             n=n, r_in=float(r_in), r_out=float(r_out))


def usc_sequence_probe(T: Callable, x_seq, y_seq, tol: float = 1e-6,
                       **envelope_kwargs) -> bool:
    """Sequential upper-semicontinuity probe.

    For finite convergent sequences x_n -> x and y_n taken from the
    envelopes at x_n, the limit y must land in the envelope at x; the last
    elements stand in for the limits.
    """
    x_seq = np.asarray(x_seq, dtype=float).reshape(-1, 2)
    y_seq = np.asarray(y_seq, dtype=float).reshape(-1, 2)
    if x_seq.shape[0] == 0 or y_seq.shape[0] == 0:
        raise DomainError("sequences must be nonempty")
    approx = cc_envelope(T, x_seq[-1], **envelope_kwargs)
    return bool(point_hull_distance(y_seq[-1], approx.intersection) <= tol)


def polar_jump_operator(r: float, radius_tol: float = 1e-9) -> Callable:
    """The worked discontinuous quadrant map.

    Points off the circle of radius r go to the origin; on the circle, the
    lower octant (polar angle below pi/4) maps to (0, r) and the upper
    octant, diagonal included, maps to (r, 0).  The circle test uses a small
    tolerance so exact-ring samples survive floating-point round trips.
    """
    r = float(r)
    if r <= 0:
        raise DomainError("the circle radius must be positive")
    quarter_pi = np.pi / 4.0

    def op(p):
        px, py = float(p[0]), float(p[1])
        rho = float(np.hypot(px, py))
        if abs(rho - r) > radius_tol:
            return (0.0, 0.0)
        theta = float(np.arctan2(py, px))
        if theta >= quarter_pi - 1e-12:
            return (r, 0.0)
        return (0.0, r)

    return op
