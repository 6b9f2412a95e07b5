"""Thurston's construction: lengths, center angles, curvature and its Jacobian.

Radii ``r`` and coordinates ``u`` are related by ``u = ln tanh(r/2)`` in
hyperbolic geometry and ``u = ln r`` in Euclidean geometry.  All curvature
routines take ``u`` and convert internally.
"""

from __future__ import annotations

import logging

import numpy as np

from . import _kernels
from .complex import Geometry, as_angles

log = logging.getLogger(__name__)

# cosine values clamped further than this outside [-1, 1] are logged
CLAMP_WARN = 1e-12


def _clamped_arccos(c):
    c = np.asarray(c, dtype=float)
    excess = np.max(np.abs(c) - 1.0, initial=0.0)
    if excess > CLAMP_WARN:
        log.warning("cosine clamped by %.3e before arccos", excess)
    return np.arccos(np.clip(c, -1.0, 1.0))


# ---------------------------------------------------------------------------
# coordinates
# ---------------------------------------------------------------------------

def to_coords(r, geometry):
    """Map radii to u-coordinates.

    The hyperbolic branch evaluates ``ln tanh(r/2)`` as
    ``log1p(-2 e^-r / (1 + e^-r))`` so large radii keep full relative
    precision instead of rounding ``tanh`` to 1.
    """
    geometry = Geometry.parse(geometry)
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise ValueError("radii must be positive")
    if geometry.is_hyperbolic:
        t = np.exp(-r)
        return np.log1p(-2.0 * t / (1.0 + t))
    return np.log(r)


def from_coords(u, geometry):
    """Inverse of :func:`to_coords`.  Hyperbolic coordinates must be negative."""
    geometry = Geometry.parse(geometry)
    u = np.asarray(u, dtype=float)
    if geometry.is_hyperbolic:
        if np.any(~(u < 0)):
            raise ValueError("hyperbolic u-coordinates must be negative")
        # r = 2 artanh(e^u) = log1p(e^u) - log(-expm1(u))
        return np.log1p(np.exp(u)) - np.log(-np.expm1(u))
    if not np.all(np.isfinite(u)):
        raise ValueError("u-coordinates must be finite")
    return np.exp(u)


def _check_edge_args(ri, rj, theta):
    ri = np.asarray(ri, dtype=float)
    rj = np.asarray(rj, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(~((theta > 0) & (theta < np.pi))):
        raise ValueError("theta must lie in (0, pi)")
    if np.any(~(ri > 0)) or np.any(~(rj > 0)):
        raise ValueError("radii must be positive")
    return ri, rj, theta


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def edge_length(ri, rj, theta, geometry):
    """Length of the edge joining two circles meeting at exterior angle theta.

    Hyperbolic lengths are computed as ``asinh(sinh l)`` with ``sinh l``
    formed from a sum of squares, which avoids ``arccosh`` of arguments
    near 1 when both radii are small.
    """
    geometry = Geometry.parse(geometry)
    ri, rj, theta = _check_edge_args(ri, rj, theta)
    _, _, length, _, _ = _kernels.np_edge_terms(ri, rj, theta, geometry.is_hyperbolic)
    return _scalar(length)


def center_angle(ri, rj, theta, geometry):
    """Inner angle at the center of circle i in the two-circle triangle."""
    geometry = Geometry.parse(geometry)
    ri, rj, theta = _check_edge_args(ri, rj, theta)
    th_i, _, _, _, _ = _kernels.np_edge_terms(ri, rj, theta, geometry.is_hyperbolic)
    return _scalar(th_i)


def center_angle_derivatives(ri, rj, theta, geometry):
    """``(d vartheta_i / d u_i, d vartheta_i / d u_j)``."""
    geometry = Geometry.parse(geometry)
    ri, rj, theta = _check_edge_args(ri, rj, theta)
    _, _, _, dd, do = _kernels.np_edge_terms(ri, rj, theta, geometry.is_hyperbolic)
    return _scalar(dd), _scalar(do)


def center_angle_cosine_rule(ri, rj, theta, geometry):
    """Same angle as :func:`center_angle` through the law of cosines.

    Slower and less accurate near degenerate configurations; kept as an
    independent route for cross-checks.
    """
    geometry = Geometry.parse(geometry)
    ri, rj, theta = _check_edge_args(ri, rj, theta)
    length = edge_length(ri, rj, theta, geometry)
    if geometry.is_hyperbolic:
        c = (np.cosh(ri) * np.cosh(length) - np.cosh(rj)) / (np.sinh(ri) * np.sinh(length))
    else:
        c = (ri * ri + length * length - rj * rj) / (2.0 * ri * length)
    return _scalar(_clamped_arccos(c))


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def _prepare(cx, theta, u, geometry):
    geometry = Geometry.parse(geometry)
    theta = as_angles(theta, cx)
    u = np.asarray(u, dtype=float)
    if u.shape != (cx.num_vertices,):
        raise ValueError(f"expected {cx.num_vertices} coordinates, got shape {u.shape}")
    r = from_coords(u, geometry)
    return geometry, theta, r


def curvatures(cx, theta, u, geometry, face_check=False):
    """Discrete curvature ``K_i = 2 pi - sigma(v_i)`` at every vertex.

    Each face corner at ``v_i`` collects the center angles of its two
    flanking edges, and on a closed surface each edge borders two faces, so
    ``sigma(v_i)`` is twice the sum of center angles over edge ends at
    ``v_i``.  With ``face_check`` the face-corner sum is evaluated too and
    the two must agree to 1e-12.
    """
    geometry, theta, r = _prepare(cx, theta, u, geometry)
    k = _kernels.curvature(cx.num_vertices, cx.tail, cx.head, r, theta,
                           geometry.is_hyperbolic)
    if face_check:
        kf = 2.0 * np.pi - corner_angle_sums(cx, theta, r, geometry)
        gap = np.max(np.abs(k - kf), initial=0.0)
        if gap > 1e-12:
            raise AssertionError(f"edge and face-corner curvature differ by {gap:.3e}")
    return k


def end_angles(cx, theta, r, geometry):
    """Center angles at the tail and head end of every edge."""
    geometry = Geometry.parse(geometry)
    r = np.asarray(r, dtype=float)
    th_t, th_h, _, _, _ = _kernels.np_edge_terms(r[cx.tail], r[cx.head], theta,
                                                geometry.is_hyperbolic)
    return th_t, th_h


def corner_angles(cx, theta, r, geometry):
    """Inner angle of every face at every corner, shape (F, 3).

    Corner ``k`` sits at the start vertex of side ``k``, between side
    ``k - 1`` (arriving) and side ``k`` (leaving).
    """
    th_t, th_h = end_angles(cx, theta, r, geometry)
    out = np.zeros((cx.num_faces, 3))
    for f in range(cx.num_faces):
        for k in range(3):
            e_out, d_out = cx.faces[f, k]
            e_in, d_in = cx.faces[f, (k - 1) % 3]
            # leaving side starts at its tail if d > 0; arriving side ends at its head if d > 0
            a = th_t[e_out] if d_out > 0 else th_h[e_out]
            b = th_h[e_in] if d_in > 0 else th_t[e_in]
            out[f, k] = a + b
    return out


def corner_angle_sums(cx, theta, r, geometry):
    """sigma(v) summed face corner by face corner."""
    ca = corner_angles(cx, theta, r, geometry)
    sigma = np.zeros(cx.num_vertices)
    for f in range(cx.num_faces):
        for k, v in enumerate(cx.face_vertices(f)):
            sigma[v] += ca[f, k]
    return sigma


def jacobian(cx, theta, u, geometry):
    """Symmetric matrix ``L[j, i] = dK_j / du_i``.

    Off-diagonal entries collect ``-2 d vartheta_j / d u_i`` over every edge
    joining ``i`` and ``j``; a self-loop contributes four diagonal terms
    (two ends, each depending on the vertex through both arguments).
    """
    geometry, theta, r = _prepare(cx, theta, u, geometry)
    _, jac = _kernels.curvature_jacobian(cx.num_vertices, cx.tail, cx.head, r, theta,
                                         geometry.is_hyperbolic)
    return jac


def curvatures_and_jacobian(cx, theta, u, geometry):
    geometry, theta, r = _prepare(cx, theta, u, geometry)
    return _kernels.curvature_jacobian(cx.num_vertices, cx.tail, cx.head, r, theta,
                                       geometry.is_hyperbolic)


def total_area(cx, theta, r, geometry=Geometry.HYPERBOLIC):
    """Hyperbolic area of the glued surface.

    Each face splits into three sub-triangles (two centers plus the common
    intersection point); the sub-triangle of edge ``e`` has angles
    ``vartheta_i``, ``vartheta_j`` and ``pi - theta_e``, hence area
    ``theta_e - vartheta_i - vartheta_j``.  Every edge owns two of them.
    """
    if not Geometry.parse(geometry).is_hyperbolic:
        raise ValueError("total_area is only defined for hyperbolic geometry")
    theta = as_angles(theta, cx)
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise ValueError("radii must be positive")
    th_t, th_h = end_angles(cx, theta, r, Geometry.HYPERBOLIC)
    return float(2.0 * np.sum(theta - th_t - th_h))
