"""Potential of the closed 1-form ``sum_i (K_i - k_i) du_i`` and its Lyapunov gap.

Because the form is closed, its integral depends only on the endpoints.
Values are obtained by adaptive Gauss-Kronrod quadrature along straight
segments (QUADPACK through :func:`scipy.integrate.quad`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import geometry as geo
from .complex import Geometry, as_angles

DOMAIN_MARGIN = 1e-8
SIMPLEX_TOL = 1e-9


class DomainError(ValueError):
    """Evaluation point outside the region where the potential is defined."""


@dataclass
class PotentialContext:
    base_point: np.ndarray
    target: np.ndarray
    geometry: Geometry
    quadrature_tol: float = 1e-10

    def __post_init__(self):
        self.base_point = np.asarray(self.base_point, dtype=float)
        self.target = np.asarray(self.target, dtype=float)
        self.geometry = Geometry.parse(self.geometry)
        _check_point(self, self.base_point)


def _check_point(ctx, u):
    if u.shape != ctx.base_point.shape:
        raise ValueError(f"expected {ctx.base_point.size} coordinates, got shape {u.shape}")
    if ctx.geometry.is_hyperbolic:
        if not np.all(u < -DOMAIN_MARGIN):
            raise DomainError("hyperbolic coordinates must stay below -1e-8")
    else:
        drift = abs(float(np.sum(u) - np.sum(ctx.base_point)))
        if drift > SIMPLEX_TOL:
            raise DomainError(f"Euclidean point is off the constant-sum slice (drift {drift:.3e})")


def segment_integral(ctx, cx, theta, a, b):
    """Integral of the 1-form along the straight segment from ``a`` to ``b``."""
    theta = as_angles(theta, cx)
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    if not np.any(d):
        return 0.0

    def integrand(s):
        kk = geo.curvatures(cx, theta, a + s * d, ctx.geometry)
        return float((kk - ctx.target) @ d)

    val, _ = quad(integrand, 0.0, 1.0, epsabs=ctx.quadrature_tol, epsrel=0.0, limit=200)
    return val


def path_integral(ctx, cx, theta, points):
    """Integral along the polyline through ``points``."""
    pts = [np.asarray(p, dtype=float) for p in points]
    for p in pts:
        _check_point(ctx, p)
    return float(sum(segment_integral(ctx, cx, theta, p, q) for p, q in zip(pts, pts[1:])))


def psi(ctx, cx, theta, u, via=()):
    """Potential at ``u`` relative to the context base point.

    ``via`` lists optional intermediate waypoints; by closedness the value
    does not depend on them.
    """
    return path_integral(ctx, cx, theta, [ctx.base_point, *via, u])


def lambda_fn(ctx, cx, theta, u, u_star):
    """``Psi(u) - Psi(u_star)``, integrated directly from ``u_star`` to ``u``."""
    return path_integral(ctx, cx, theta, [u_star, u])


def attach_lyapunov(report, cx, theta, target):
    """Fill ``lam`` on every trajectory sample with the fixed point as ``u_star``."""
    u_star = report.final_u
    ctx = PotentialContext(u_star, target, report.geometry)
    for s in report.trajectory:
        s.lam = lambda_fn(ctx, cx, theta, s.u, u_star)
    return report
