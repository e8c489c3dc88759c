"""Green's function for separated two-point boundary conditions.

The boundary value problem ``u'' + g f = 0`` with conditions
``alpha*u(0) - beta*u'(0) = 0`` and ``gamma*u(1) + delta*u'(1) = 0`` has the
kernel

    G(t,s) = (gamma + delta - gamma*t)(beta + alpha*s) / Gamma   if s <= t,
             (beta + alpha*t)(gamma + delta - gamma*s) / Gamma   otherwise,

with ``Gamma = gamma*beta + alpha*gamma + alpha*delta > 0``.  The diagonal
``t = s`` is assigned to the first branch; both branches agree there, the
choice is fixed only for bit-reproducibility.

The module also builds the upper envelope ``Phi(s) = G(s,s)``, the cone
constant c for a chosen interval [a,b], and a grid check of the two-sided
kernel bounds ``c*Phi(s) <= k(t,s) <= Phi(s)``.  Custom kernels are
accepted as long as they come with their own envelope and cone constant;
the bound check is then mandatory before certification.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cone import ConeSpec
from .errors import AdmissibilityError, ParameterError
from .quadrature import Grid

__all__ = [
    "BoundaryParams",
    "Kernel",
    "H4Report",
    "green_eval",
    "phi_of",
    "cone_params",
    "green_kernel",
    "verify_h4",
]


@dataclass(frozen=True)
class BoundaryParams:
    """Separated-boundary-condition coefficients, all nonnegative."""

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be nonnegative")
        if self.Gamma <= 0:
            raise ParameterError(
                "gamma*beta + alpha*gamma + alpha*delta must be positive, "
                f"got {self.Gamma}"
            )

    @property
    def Gamma(self) -> float:
        return self.gamma * self.beta + self.alpha * self.gamma + self.alpha * self.delta


def green_eval(bc: BoundaryParams, t, s):
    """Evaluate the Green's function; broadcasts over array arguments."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    a, b, g, d = bc.alpha, bc.beta, bc.gamma, bc.delta
    lower = (g + d - g * t) * (b + a * s)   # s <= t
    upper = (b + a * t) * (g + d - g * s)   # s > t
    out = np.where(s <= t, lower, upper) / bc.Gamma
    return float(out) if out.ndim == 0 else out


def phi_of(bc: BoundaryParams) -> Callable:
    """Diagonal upper envelope ``Phi(s) = G(s,s)``."""
    a, b, g, d, G = bc.alpha, bc.beta, bc.gamma, bc.delta, bc.Gamma

    def phi(s):
        s = np.asarray(s, dtype=float)
        out = (g + d - g * s) * (b + a * s) / G
        return float(out) if out.ndim == 0 else out

    return phi


def cone_params(bc: BoundaryParams, a: float, b: float) -> ConeSpec:
    """Validate the interval [a,b] and compute the cone constant c.

    The admissibility constraints are ``-beta/alpha < a`` and
    ``b < 1 + delta/gamma``; a vanishing alpha (resp. gamma) makes the lower
    (resp. upper) constraint vacuous.  Then

        c = min((gamma+delta-gamma*b)/(gamma+delta), (beta+alpha*a)/(alpha+beta)).
    """
    a, b = float(a), float(b)
    if not (0.0 <= a < b <= 1.0):
        raise AdmissibilityError(f"need 0 <= a < b <= 1, got a={a}, b={b}")
    violations = []
    if bc.alpha > 0 and not (-bc.beta / bc.alpha < a):
        violations.append(
            f"-beta/alpha < a fails ({-bc.beta / bc.alpha} < {a})")
    if bc.gamma > 0 and not (b < 1.0 + bc.delta / bc.gamma):
        violations.append(
            f"b < 1 + delta/gamma fails ({b} < {1.0 + bc.delta / bc.gamma})")
    if violations:
        raise AdmissibilityError("inadmissible cone interval: "
                                 + "; ".join(violations))
    c = min(
        (bc.gamma + bc.delta - bc.gamma * b) / (bc.gamma + bc.delta),
        (bc.beta + bc.alpha * a) / (bc.alpha + bc.beta),
    )
    if not (0.0 < c <= 1.0):
        raise AdmissibilityError(f"derived cone constant c={c} is not in (0,1]")
    return ConeSpec(a=a, b=b, c=float(c))


@dataclass(frozen=True, eq=False)
class Kernel:
    """An evaluable kernel with upper envelope and cone data.

    ``eval`` must broadcast over numpy arrays.  ``split_at_diagonal`` marks
    kernels with a kink on s = t so quadrature can insert the kink as a
    partition point.
    """

    eval: Callable
    phi: Callable
    cone: ConeSpec
    split_at_diagonal: bool = False
    label: str = "custom"


def green_kernel(bc: BoundaryParams, a: float, b: float) -> Kernel:
    """Kernel object for the separated-boundary-condition problem."""
    spec = cone_params(bc, a, b)
    return Kernel(
        eval=lambda t, s: green_eval(bc, t, s),
        phi=phi_of(bc),
        cone=spec,
        split_at_diagonal=True,
        label="green",
    )


@dataclass(frozen=True)
class H4Report:
    """Grid check of ``k <= Phi`` everywhere and ``c*Phi <= k`` on [a,b]."""

    passed: bool
    upper_margin: float
    upper_worst: tuple[float, float]
    lower_margin: float
    lower_worst: tuple[float, float]
    tol: float

    def __bool__(self) -> bool:
        return self.passed


def verify_h4(kernel: Kernel, grid: Grid, tol: float = 1e-12) -> H4Report:
    """Check both kernel bounds on the grid product.

    Reports the worst margin of each inequality and the violating (t,s)
    pair, if any.  Never raises; the report carries the outcome.
    """
    s = grid.nodes
    phi = np.broadcast_to(np.asarray(kernel.phi(s), dtype=float), s.shape)

    t_all = s
    K_all = np.broadcast_to(
        np.asarray(kernel.eval(t_all[:, None], s[None, :]), dtype=float),
        (t_all.size, s.size))
    upper = phi[None, :] - K_all
    iu = np.unravel_index(np.argmin(upper), upper.shape)
    upper_margin = float(upper[iu])
    upper_worst = (float(t_all[iu[0]]), float(s[iu[1]]))

    spec = kernel.cone
    t_ab = np.unique(np.concatenate([
        s[(s >= spec.a) & (s <= spec.b)], [spec.a, spec.b]]))
    K_ab = np.broadcast_to(
        np.asarray(kernel.eval(t_ab[:, None], s[None, :]), dtype=float),
        (t_ab.size, s.size))
    lower = K_ab - spec.c * phi[None, :]
    il = np.unravel_index(np.argmin(lower), lower.shape)
    lower_margin = float(lower[il])
    lower_worst = (float(t_ab[il[0]]), float(s[il[1]]))

    return H4Report(
        passed=bool(upper_margin >= -tol and lower_margin >= -tol),
        upper_margin=upper_margin,
        upper_worst=upper_worst,
        lower_margin=lower_margin,
        lower_worst=lower_worst,
        tol=tol,
    )
