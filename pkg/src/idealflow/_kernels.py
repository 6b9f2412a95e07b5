"""Per-edge kernels for the two-circle configuration.

Every edge e = [v_i, v_j] with exterior intersection angle theta carries a
triangle (v_i, v_j, p) where p is an intersection point of the two circles.
The angle of that triangle at p is pi - theta, so the inner angles at the
centers follow from the four-part formula:

    tan(vartheta_i) = sin(theta) S(r_j) / (C(r_j) S(r_i) + S(r_j) C(r_i) cos(theta))

with (S, C) = (sinh, cosh) in hyperbolic geometry and (S, C) = (r, 1) in
Euclidean geometry.  The denominator and numerator have squared norm
S(l)^2 where l is the edge length, which gives a stable length formula
(l = asinh(hypot(...)) instead of arccosh of a number close to 1).

Derivatives are taken with respect to u = ln tanh(r/2) (hyperbolic) or
u = ln r (Euclidean):

    d vartheta_i / d u_i = -sin(theta) S_i S_j C(l) / S(l)^2
    d vartheta_i / d u_j =  sin(theta) S_i S_j / S(l)^2

where C(l) = 1 in the Euclidean case.  Both are symmetric in (i, j).

Two backends live here: numba ``@njit`` loops, and vectorized numpy.  The
numba path is used unless ``IDEALFLOW_DISABLE_NUMBA`` is set to a truthy
value or numba fails to import.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None


def _env_flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and not _env_flag("IDEALFLOW_DISABLE_NUMBA")


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _trig(r, hyperbolic):
    if hyperbolic:
        return np.sinh(r), np.cosh(r)
    return r, np.ones_like(r)


def np_edge_terms(ri, rj, theta, hyperbolic):
    """Return (vartheta_i, vartheta_j, length, d_diag, d_off) for edge arrays."""
    si, ci = _trig(ri, hyperbolic)
    sj, cj = _trig(rj, hyperbolic)
    st = np.sin(theta)
    ct = np.cos(theta)
    yi = st * sj
    xi = cj * si + sj * ci * ct
    yj = st * si
    xj = ci * sj + si * cj * ct
    th_i = np.arctan2(yi, xi)
    th_j = np.arctan2(yj, xj)
    # both norms equal sinh l; averaging keeps the result exactly swap-symmetric
    sl = 0.5 * (np.hypot(xi, yi) + np.hypot(xj, yj))
    if hyperbolic:
        length = np.arcsinh(sl)
        cl = np.sqrt(1.0 + sl * sl)
    else:
        length = sl
        cl = 1.0
    prod = st * si * sj / (sl * sl)
    return th_i, th_j, length, -prod * cl, prod


# np.add.at applies updates in index order, so interleaving the per-edge terms
# reproduces the summation order of the numba loops exactly

def _angle_sums(n, tail, head, th_t, th_h):
    sigma = np.zeros(n)
    np.add.at(sigma, np.column_stack((tail, head)).ravel(), np.column_stack((th_t, th_h)).ravel())
    return sigma


def np_curvature(n, tail, head, r, theta, hyperbolic):
    th_t, th_h, _, _, _ = np_edge_terms(r[tail], r[head], theta, hyperbolic)
    return 2.0 * np.pi - 2.0 * _angle_sums(n, tail, head, th_t, th_h)


def np_curvature_jacobian(n, tail, head, r, theta, hyperbolic):
    th_t, th_h, _, dd, do = np_edge_terms(r[tail], r[head], theta, hyperbolic)
    sigma = _angle_sums(n, tail, head, th_t, th_h)
    slots = np.column_stack((tail * n + tail, head * n + head, tail * n + head, head * n + tail))
    terms = np.column_stack((-2.0 * dd, -2.0 * dd, -2.0 * do, -2.0 * do))
    jac = np.zeros(n * n)
    np.add.at(jac, slots.ravel(), terms.ravel())
    return 2.0 * np.pi - 2.0 * sigma, jac.reshape(n, n)


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

if NUMBA_AVAILABLE:

    @numba.njit(cache=True, error_model="numpy")
    def _nb_edge(ri, rj, theta, hyperbolic):
        if hyperbolic:
            si = np.sinh(ri)
            ci = np.cosh(ri)
            sj = np.sinh(rj)
            cj = np.cosh(rj)
        else:
            si = ri
            ci = 1.0
            sj = rj
            cj = 1.0
        st = np.sin(theta)
        ct = np.cos(theta)
        yi = st * sj
        xi = cj * si + sj * ci * ct
        yj = st * si
        xj = ci * sj + si * cj * ct
        th_i = np.arctan2(yi, xi)
        th_j = np.arctan2(yj, xj)
        sl = 0.5 * (np.hypot(xi, yi) + np.hypot(xj, yj))
        if hyperbolic:
            cl = np.sqrt(1.0 + sl * sl)
        else:
            cl = 1.0
        prod = st * si * sj / (sl * sl)
        return th_i, th_j, -prod * cl, prod

    @numba.njit(cache=True, error_model="numpy")
    def nb_curvature(n, tail, head, r, theta, hyperbolic):
        sigma = np.zeros(n)
        for e in range(tail.shape[0]):
            a = tail[e]
            b = head[e]
            th_a, th_b, _, _ = _nb_edge(r[a], r[b], theta[e], hyperbolic)
            sigma[a] += th_a
            sigma[b] += th_b
        out = np.empty(n)
        for i in range(n):
            out[i] = 2.0 * np.pi - 2.0 * sigma[i]
        return out

    @numba.njit(cache=True, error_model="numpy")
    def nb_curvature_jacobian(n, tail, head, r, theta, hyperbolic):
        sigma = np.zeros(n)
        jac = np.zeros((n, n))
        for e in range(tail.shape[0]):
            a = tail[e]
            b = head[e]
            th_a, th_b, dd, do = _nb_edge(r[a], r[b], theta[e], hyperbolic)
            sigma[a] += th_a
            sigma[b] += th_b
            jac[a, a] -= 2.0 * dd
            jac[b, b] -= 2.0 * dd
            jac[a, b] -= 2.0 * do
            jac[b, a] -= 2.0 * do
        out = np.empty(n)
        for i in range(n):
            out[i] = 2.0 * np.pi - 2.0 * sigma[i]
        return out, jac


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def curvature(n, tail, head, r, theta, hyperbolic, backend=None):
    """Curvature vector K from radii via the edge-end summation."""
    if (backend or backend_name()) == "numba":
        return nb_curvature(n, tail, head, r, theta, bool(hyperbolic))
    return np_curvature(n, tail, head, r, theta, hyperbolic)


def curvature_jacobian(n, tail, head, r, theta, hyperbolic, backend=None):
    """Curvature vector K and Jacobian dK/du from radii."""
    if (backend or backend_name()) == "numba":
        return nb_curvature_jacobian(n, tail, head, r, theta, bool(hyperbolic))
    return np_curvature_jacobian(n, tail, head, r, theta, hyperbolic)
