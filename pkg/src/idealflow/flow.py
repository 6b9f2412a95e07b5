"""Prescribed-curvature solvers: Calabi flow, Ricci flow, Newton's method.

All three evolve the u-coordinates.  The Calabi flow is

    du/dt = -L (K - k),      L = dK/du symmetric,

which is gradient descent on the energy C(u) = |K - k|^2 up to a factor
1/2.  The Ricci flow ``du/dt = -(K - k)`` and a damped Newton iteration on
``K(u) = k`` reach the same fixed point and serve as cross-checks.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import linalg

from . import geometry as geo
from .attainability import MAX_ENUMERATION_VERTICES, check_target
from .complex import Geometry, as_angles, check_c1, C1_TOL

RESIDUAL_TOL_ENV = "IDEALFLOW_RESIDUAL_TOL"
# trial points with radii outside these ranges are rejected like domain violations;
# they keep r_i r_j and sinh(l)^2 (l <= r_i + r_j) clear of overflow and underflow
# largest Newton update (max-norm in u) tried before backtracking; keeps early
# iterates away from the saturated region where some radius collapses
NEWTON_MAX_STEP = 1.0
RADIUS_BOUNDS = {"euclidean": (1e-150, 1e150), "hyperbolic": (1e-150, 170.0)}


def _default_residual_tol():
    return float(os.environ.get(RESIDUAL_TOL_ENV, "1e-10"))


class PreconditionError(ValueError):
    """Angles violate (C1) or the target is not attainable."""


class ConvergenceError(RuntimeError):
    """The solver stopped without reaching the residual tolerance.

    The partial :class:`SolveReport` is attached as ``report``.
    """

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


@dataclass
class SolverConfig:
    residual_tol: float = field(default_factory=_default_residual_tol)
    max_steps: int = 1_000_000
    dt_init: float = 0.1
    dt_min: float = 1e-12
    dt_max: float = 10.0
    trajectory_stride: int = 1
    # mixed absolute/relative local error tolerance of the embedded pair, on u
    local_tol: float = 1e-9
    check_preconditions: bool = True
    check_attainability: bool = True
    track_potential: bool = False

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if not 0 < self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if self.max_steps < 0 or self.trajectory_stride < 1:
            raise ValueError("max_steps must be >= 0 and trajectory_stride >= 1")
        if not self.local_tol > 0:
            raise ValueError("local_tol must be positive")

    def to_dict(self):
        return asdict(self)


@dataclass
class Sample:
    t: float
    residual: float
    energy: float
    sum_u: float
    u: np.ndarray
    lam: float | None = None


@dataclass
class SolveReport:
    solver: str
    geometry: str
    converged: bool
    status: str
    final_u: np.ndarray
    final_r: np.ndarray
    final_K: np.ndarray
    final_residual: float
    steps: int
    accepted: int
    rejected: int
    trajectory: list

    @property
    def energies(self):
        return np.array([s.energy for s in self.trajectory])

    @property
    def times(self):
        return np.array([s.t for s in self.trajectory])

    @property
    def sum_u(self):
        return np.array([s.sum_u for s in self.trajectory])

    def to_dict(self, with_trajectory=False):
        out = {
            "solver": self.solver,
            "geometry": self.geometry,
            "converged": self.converged,
            "status": self.status,
            "final_u": self.final_u.tolist(),
            "final_r": self.final_r.tolist(),
            "final_K": self.final_K.tolist(),
            "final_residual": self.final_residual,
            "steps": self.steps,
            "integrator_stats": {"accepted": self.accepted, "rejected": self.rejected},
        }
        if with_trajectory:
            out["trajectory"] = [
                {"t": s.t, "residual": s.residual, "energy": s.energy, "sum_u": s.sum_u,
                 "lambda": s.lam}
                for s in self.trajectory
            ]
        return out


class _Problem:
    """Curvature evaluation bound to one complex, angle set and target."""

    def __init__(self, cx, theta, target, geometry):
        self.cx = cx
        self.theta = as_angles(theta, cx)
        self.k = np.asarray(target, dtype=float)
        if self.k.shape != (cx.num_vertices,):
            raise ValueError(f"target has {self.k.size} entries, complex has "
                             f"{cx.num_vertices} vertices")
        self.geometry = Geometry.parse(geometry)

    def in_domain(self, u):
        if not np.all(np.isfinite(u)):
            return False
        if self.geometry.is_hyperbolic and not np.all(u < 0):
            return False
        # radii must stay representable for the kernels, which form products of sinh r (or r)
        with np.errstate(over="ignore", under="ignore", divide="ignore"):
            r = geo.from_coords(u, self.geometry) if self.geometry.is_hyperbolic else np.exp(u)
        lo, hi = RADIUS_BOUNDS[self.geometry.value]
        return bool(np.all((r > lo) & (r < hi)))

    def curvature(self, u):
        return geo.curvatures(self.cx, self.theta, u, self.geometry)

    def curvature_jacobian(self, u):
        return geo.curvatures_and_jacobian(self.cx, self.theta, u, self.geometry)


def calabi_velocity(cx, theta, target, u, geometry):
    """Right-hand side ``-L (K - k)`` of the Calabi flow at ``u``."""
    prob = _Problem(cx, theta, target, geometry)
    if not prob.in_domain(np.asarray(u, dtype=float)):
        raise ValueError("u lies outside the coordinate domain")
    kk, jac = prob.curvature_jacobian(u)
    return -jac @ (kk - prob.k)


def ricci_velocity(cx, theta, target, u, geometry):
    prob = _Problem(cx, theta, target, geometry)
    if not prob.in_domain(np.asarray(u, dtype=float)):
        raise ValueError("u lies outside the coordinate domain")
    return -(prob.curvature(u) - prob.k)


def energy(cx, theta, target, u, geometry):
    """``C(u) = sum_i (K_i - k_i)^2``."""
    prob = _Problem(cx, theta, target, geometry)
    d = prob.curvature(u) - prob.k
    return float(d @ d)


def normalize_scale(u):
    """Shift Euclidean coordinates to zero mean (unit geometric-mean radius)."""
    u = np.asarray(u, dtype=float)
    return u - u.mean()


def _check_preconditions(prob, config):
    if not config.check_preconditions:
        return
    dev = check_c1(prob.cx, prob.theta)
    if dev.size and np.max(np.abs(dev)) > C1_TOL:
        f = int(np.argmax(np.abs(dev)))
        raise PreconditionError(f"angle sum of face {f} deviates from pi by {dev[f]:.3e}")
    if config.check_attainability and prob.cx.num_vertices <= MAX_ENUMERATION_VERTICES:
        rep = check_target(prob.cx, prob.theta, prob.k, prob.geometry)
        if not rep.attainable:
            raise PreconditionError(
                f"target is not {prob.geometry.value} attainable "
                f"({rep.failed_condition.value}, witness {list(rep.witness_subset or [])})")


def _initial_u(r0, prob):
    r0 = np.asarray(r0, dtype=float)
    if r0.shape != (prob.cx.num_vertices,):
        raise ValueError(f"r0 has {r0.size} entries, complex has {prob.cx.num_vertices} vertices")
    return geo.to_coords(r0, prob.geometry)


class _Recorder:
    def __init__(self, stride):
        self.stride = stride
        self.samples = []
        self._last = None

    def record(self, step, t, u, resid, c, force=False):
        if force or step % self.stride == 0:
            if self._last == step:
                return
            self.samples.append(Sample(float(t), float(resid), float(c),
                                       float(np.sum(u)), np.array(u, dtype=float)))
            self._last = step


def _finish(name, prob, config, u, kk, steps, accepted, rejected, rec, status):
    resid = float(np.max(np.abs(kk - prob.k), initial=0.0))
    report = SolveReport(
        solver=name,
        geometry=prob.geometry.value,
        converged=status == "converged",
        status=status,
        final_u=np.array(u),
        final_r=geo.from_coords(u, prob.geometry),
        final_K=np.array(kk),
        final_residual=resid,
        steps=steps,
        accepted=accepted,
        rejected=rejected,
        trajectory=rec.samples,
    )
    if report.converged and config.track_potential:
        from .potential import attach_lyapunov
        attach_lyapunov(report, prob.cx, prob.theta, prob.k)
    if not report.converged:
        raise ConvergenceError(f"{name} stopped: {status} (residual {resid:.3e})", report)
    return report


# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = _DP_B - np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def _integrate(name, prob, r0, config, rhs):
    """Adaptive DP5(4) integration of ``du/dt = rhs(u, K, L)``.

    A step is accepted only if the local error estimate passes, the energy
    does not increase and every stage stays inside the coordinate domain;
    otherwise dt is reduced and the step retried.
    """
    _check_preconditions(prob, config)
    u = _initial_u(r0, prob)
    kk, jac = prob.curvature_jacobian(u)
    resid = float(np.max(np.abs(kk - prob.k), initial=0.0))
    c = float((kk - prob.k) @ (kk - prob.k))
    f0 = rhs(u, kk, jac)

    rec = _Recorder(config.trajectory_stride)
    t = 0.0
    dt = config.dt_init
    accepted = rejected = 0
    rec.record(0, t, u, resid, c, force=True)
    if resid <= config.residual_tol:
        return _finish(name, prob, config, u, kk, 0, 0, 0, rec, "converged")

    tol = config.local_tol
    status = "max-steps"
    while accepted < config.max_steps:
        if dt < config.dt_min:
            status = "step-underflow"
            break
        stages = [f0]
        ok = True
        for s in range(1, 7):
            us = u + dt * sum(a * ks for a, ks in zip(_DP_A[s], stages))
            if not prob.in_domain(us):
                ok = False
                break
            if s < 6:
                ks_k, ks_j = prob.curvature_jacobian(us)
                stages.append(rhs(us, ks_k, ks_j))
            else:
                u_new = us
        if not ok:
            rejected += 1
            dt *= 0.5
            continue

        k_new, j_new = prob.curvature_jacobian(u_new)
        f_new = rhs(u_new, k_new, j_new)
        stages.append(f_new)
        err_vec = dt * sum(e * ks for e, ks in zip(_DP_E, stages) if e != 0.0)
        scale = tol * (1.0 + np.maximum(np.abs(u), np.abs(u_new)))
        err = float(np.max(np.abs(err_vec) / scale))
        d_new = k_new - prob.k
        c_new = float(d_new @ d_new)

        if err > 1.0 or c_new > c:
            rejected += 1
            if err > 1.0:
                dt *= max(0.2, 0.9 * err ** -0.2)
            else:
                dt *= 0.5
            continue

        accepted += 1
        t += dt
        u, kk, c, f0 = u_new, k_new, c_new, f_new
        resid = float(np.max(np.abs(d_new), initial=0.0))
        done = resid <= config.residual_tol
        rec.record(accepted, t, u, resid, c, force=done)
        if done:
            status = "converged"
            break
        grow = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
        dt = min(config.dt_max, dt * max(1.0, grow))

    rec.record(accepted, t, u, resid, c, force=True)
    return _finish(name, prob, config, u, kk, accepted, accepted, rejected, rec, status)


def run_calabi(cx, theta, target, r0, geometry, config=None):
    """Integrate the Calabi flow from radii ``r0`` to curvature ``target``."""
    prob = _Problem(cx, theta, target, geometry)
    k = prob.k
    return _integrate("calabi", prob, r0, config or SolverConfig(),
                      lambda u, kk, jac: -jac @ (kk - k))


def run_ricci(cx, theta, target, r0, geometry, config=None):
    """Integrate the Ricci flow ``du/dt = -(K - k)``."""
    prob = _Problem(cx, theta, target, geometry)
    k = prob.k
    return _integrate("ricci", prob, r0, config or SolverConfig(),
                      lambda u, kk, jac: -(kk - k))


def run_newton(cx, theta, target, r0, geometry, config=None):
    """Damped Newton iteration on ``K(u) = k``.

    The Euclidean Jacobian has the constant vector as kernel; the update is
    solved on the zero-mean subspace via ``(L + 11^T / N) x = K - k`` and
    then projected, so the coordinate sum is preserved.
    """
    config = config or SolverConfig()
    prob = _Problem(cx, theta, target, geometry)
    _check_preconditions(prob, config)
    u = _initial_u(r0, prob)
    n = cx.num_vertices
    euclid = not prob.geometry.is_hyperbolic

    rec = _Recorder(config.trajectory_stride)
    kk, jac = prob.curvature_jacobian(u)
    d = kk - prob.k
    c = float(d @ d)
    resid = float(np.max(np.abs(d), initial=0.0))
    rec.record(0, 0.0, u, resid, c, force=True)
    it = rejected = 0
    status = "max-steps"
    while True:
        if resid <= config.residual_tol:
            status = "converged"
            break
        if it >= config.max_steps:
            break
        rhs = d
        mat = jac
        if euclid:
            rhs = d - d.mean()
            mat = jac + np.full((n, n), 1.0 / n)
        try:
            step = linalg.cho_solve(linalg.cho_factor(mat), rhs)
        except linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(
                f"Newton system is not positive definite at iteration {it}") from exc
        if euclid:
            step -= step.mean()

        alpha = min(1.0, NEWTON_MAX_STEP / max(float(np.max(np.abs(step))), 1e-300))
        while alpha >= config.dt_min:
            u_try = u - alpha * step
            if prob.in_domain(u_try):
                k_try, j_try = prob.curvature_jacobian(u_try)
                d_try = k_try - prob.k
                c_try = float(d_try @ d_try)
                if c_try < c:
                    break
            rejected += 1
            alpha *= 0.5
        else:
            status = "step-underflow"
            break
        it += 1
        u, kk, jac, d, c = u_try, k_try, j_try, d_try, c_try
        resid = float(np.max(np.abs(d), initial=0.0))
        rec.record(it, float(it), u, resid, c, force=resid <= config.residual_tol)

    rec.record(it, float(it), u, resid, c, force=True)
    return _finish("newton", prob, config, u, kk, it, it, rejected, rec, status)


SOLVERS = {"calabi": run_calabi, "ricci": run_ricci, "newton": run_newton}


def log_rate(report, floor=1e-24):
    """Least-squares slope of ln C against t over the trailing half of samples.

    Samples with energy at or below ``floor`` are dropped.  Returns nan when
    fewer than two samples remain.
    """
    samples = report.trajectory[len(report.trajectory) // 2:]
    pts = [(s.t, math.log(s.energy)) for s in samples if s.energy > floor]
    if len(pts) < 2:
        return float("nan")
    t, y = np.array(pts).T
    return float(np.polyfit(t, y, 1)[0])
