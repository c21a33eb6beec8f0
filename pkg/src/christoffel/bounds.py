"""Quantitative bounds on the scaled Christoffel function and the threshold scan.

Pure formula territory: a lower bound inside the support at distance delta
from its boundary, an upper bound outside at distance delta, the binomial
growth estimate behind it, and the smallest degree at which the outside
bound drops below the inside threshold.  Everything overflow-prone runs in
log space.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, exp, lgamma, log, pi, sqrt

import numpy as np

LOG2 = log(2.0)
DK_TIE_TOL = 1e-12


def sphere_surface_area(p: int) -> float:
    """Surface area of the p-dimensional unit sphere embedded in R^(p+1)."""
    if p < 1:
        raise ValueError("dimension must be >= 1")
    return 2.0 * pi ** ((p + 1) / 2.0) / exp(lgamma((p + 1) / 2.0))


@dataclass(frozen=True)
class GeometryDescriptor:
    """Geometry of the support set entering the threshold formulas.

    diameter and volume may be upper bounds of the true quantities; the
    inequalities remain valid.  w_minus is the essential lower bound of the
    density in the weighted variant.
    """

    dimension: int
    diameter: float
    volume: float
    w_minus: float | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.diameter <= 0 or self.volume <= 0:
            raise ValueError("diameter and volume must be positive")
        if self.w_minus is not None and self.w_minus <= 0:
            raise ValueError("w_minus must be positive")

    @property
    def omega(self) -> float:
        return sphere_surface_area(self.dimension)


def chebyshev(d: int, t):
    """Chebyshev polynomial T_d(t), scalar or array.

    Three-term recurrence on |t| <= 1; for t > 1 the explicit form
    ((t + sqrt(t^2-1))^d + (t + sqrt(t^2-1))^(-d)) / 2, and parity
    T_d(-t) = (-1)^d T_d(t) for t < -1.
    """
    if d < 0:
        raise ValueError("degree must be >= 0")
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.empty_like(t)

    inner = np.abs(t) <= 1.0
    if inner.any():
        u = t[inner]
        prev = np.ones_like(u)
        if d == 0:
            out[inner] = prev
        else:
            cur = u.copy()
            for _ in range(d - 1):
                prev, cur = cur, 2.0 * u * cur - prev
            out[inner] = cur
    if (~inner).any():
        u = np.abs(t[~inner])
        w = u + np.sqrt(u * u - 1.0)
        val = 0.5 * (w**d + w ** (-d))
        sign = np.where(t[~inner] < 0, (-1.0) ** d, 1.0)
        out[~inner] = sign * val
    return float(out[0]) if scalar else out


def needle_polynomial(d: int, delta: float, x, y):
    """Localization polynomial of degree 2d centered at x inside the unit ball.

    q(y) = T_d(1 + delta^2 - ||y - x||^2) / T_d(1 + delta^2); equals 1 at
    the center, stays in [-1, 1] on the unit ball, and is at most
    2^(1 - delta*d) in absolute value on the ball outside B_delta(x).
    """
    if d < 1:
        raise ValueError("degree must be >= 1")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if sqrt(float(x @ x)) > 1.0 + 1e-12:
        raise ValueError("center must lie in the closed unit ball")
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    y2 = np.atleast_2d(y)
    r2 = np.sum((y2 - x) ** 2, axis=1)
    vals = chebyshev(d, 1.0 + delta**2 - r2) / chebyshev(d, 1.0 + delta**2)
    return float(vals[0]) if single else vals


def lower_bound_inside(
    d: int, delta: float, geom: GeometryDescriptor, weighted: bool = False
) -> float:
    """Lower bound on s(d) * Lambda(x) at points deeper than delta inside the support.

    (delta^p * omega_p * w) * (d+1)(d+2)(d+3) / ((d+p+1)(d+p+2)(2d+p+6))
    with w = 1/volume, or w_minus in the weighted variant.
    """
    p = geom.dimension
    w = _density_floor(geom, weighted)
    return (
        delta**p
        * geom.omega
        * w
        * ((d + 1) * (d + 2) * (d + 3))
        / ((d + p + 1) * (d + p + 2) * (2 * d + p + 6))
    )


def _density_floor(geom: GeometryDescriptor, weighted: bool) -> float:
    if weighted:
        if geom.w_minus is None:
            raise ValueError("weighted threshold needs geom.w_minus")
        return geom.w_minus
    return 1.0 / geom.volume


def alpha_threshold(
    d: int, delta: float, geom: GeometryDescriptor, weighted: bool = False
) -> float:
    """Membership threshold for the super-level set at degree d and margin delta.

    Identical to lower_bound_inside by construction: the set
    {x : s(d) Lambda(x) >= alpha} then provably contains the delta-erosion
    of the support.
    """
    return lower_bound_inside(d, delta, geom, weighted=weighted)


def log_upper_bound_outside(d: int, delta: float, geom: GeometryDescriptor) -> float:
    """Natural log of upper_bound_outside; safe for degrees in the thousands."""
    p = geom.dimension
    return (
        (3.0 - delta * d / (delta + geom.diameter)) * LOG2
        + p * log(float(d))
        + p * (1.0 - log(float(p)))
        + p * p / d
    )


def upper_bound_outside(d: int, delta: float, geom: GeometryDescriptor) -> float:
    """Upper bound on s(d) * Lambda(x) at points at distance >= delta from the support.

    2^(3 - delta*d/(delta + diam)) * d^p * (e/p)^p * exp(p^2/d); decays
    geometrically in d for every fixed delta.
    """
    if d < 1:
        raise ValueError("degree must be >= 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    return exp(log_upper_bound_outside(d, delta, geom))


def binomial_bound(p: int, d: int) -> float:
    """Upper estimate d^p (e/p)^p exp(p^2/d) for the binomial C(p+d, d)."""
    if d < 1:
        raise ValueError("degree must be >= 1")
    return exp(p * log(float(d)) + p * (1.0 - log(float(p))) + p * p / d)


def robbins_factorial_ratio(n: int) -> float:
    """n! / (sqrt(2 pi n) n^n e^(-n)), evaluated in log space.

    Sandwiched between exp(1/(12n+1)) and exp(1/(12n)) for every n >= 1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return exp(lgamma(n + 1) - 0.5 * log(2.0 * pi * n) - n * log(float(n)) + n)


def _log_alpha(d: int, delta: float, geom: GeometryDescriptor, weighted: bool) -> float:
    p = geom.dimension
    w = _density_floor(geom, weighted)
    return (
        p * log(delta)
        + log(geom.omega)
        + log(w)
        + log(float((d + 1) * (d + 2) * (d + 3)))
        - log(float((d + p + 1) * (d + p + 2) * (2 * d + p + 6)))
    )


def compute_dk(
    delta: float,
    geom: GeometryDescriptor,
    weighted: bool = False,
    d_cap: int = 10000,
) -> int:
    """Smallest degree at which the outside upper bound sinks below alpha_threshold.

    Linear scan from d = 1; both sides are compared on logarithms with ties
    within 1e-12 resolved toward the smaller degree.  Raises when the scan
    exhausts d_cap, which signals that delta is too small for the cap.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    for d in range(1, d_cap + 1):
        if log_upper_bound_outside(d, delta, geom) <= _log_alpha(d, delta, geom, weighted) + DK_TIE_TOL:
            return d
    raise ValueError(
        f"no degree up to d_cap={d_cap} satisfies the threshold inequality for delta={delta}"
    )


def dk_inequality_holds(
    d: int, delta: float, geom: GeometryDescriptor, weighted: bool = False
) -> bool:
    """Predicate form of the threshold inequality at a given degree."""
    return log_upper_bound_outside(d, delta, geom) <= _log_alpha(d, delta, geom, weighted) + DK_TIE_TOL


def binomial_exact(p: int, d: int) -> int:
    """C(p+d, d), exact integer arithmetic; the quantity binomial_bound dominates."""
    return comb(p + d, d)
