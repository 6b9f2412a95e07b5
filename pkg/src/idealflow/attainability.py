"""Exhaustive check of the subset inequalities characterizing attainable curvature.

For a nonempty vertex set ``A`` the inequality reads

    sum_{i in A} k_i  >  2 pi |A| - 2 * sum of theta(e) over edges touching A

strictly for every ``A`` in hyperbolic geometry.  In Euclidean geometry it
must hold with ``>=`` for every ``A`` and with equality exactly at ``A = V``.
Edges are counted as elements of E, so parallel edges count separately and
a loop counts once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .complex import Geometry, as_angles

MAX_ENUMERATION_VERTICES = 25
SLACK_TOL = 1e-9
# subsets per vectorized batch
CHUNK = 1 << 15


class ScaleGuardError(ValueError):
    """Too many vertices for subset enumeration."""


class FailedCondition(str, Enum):
    NONE = "none"
    UPPER_BOUND = "upper-bound"
    SUBSET_INEQUALITY = "subset-inequality"
    EQUALITY_AT_V = "equality-at-V"


@dataclass
class AttainabilityReport:
    attainable: bool
    failed_condition: FailedCondition
    witness_subset: tuple | None
    margin: float
    worst_subset: tuple = field(default=())

    def to_dict(self):
        return {
            "attainable": self.attainable,
            "failed_condition": self.failed_condition.value,
            "witness_subset": None if self.witness_subset is None else list(self.witness_subset),
            "margin": self.margin,
            "worst_subset": list(self.worst_subset),
        }


def boundary_theta_sum(cx, theta, subset):
    """Sum of theta over edges with at least one endpoint in ``subset``."""
    subset = sorted(set(int(v) for v in subset))
    if not subset:
        raise ValueError("subset must be nonempty")
    if subset[0] < 0 or subset[-1] >= cx.num_vertices:
        raise IndexError("subset vertex out of range")
    theta = np.asarray(theta, dtype=float)
    mask = np.zeros(cx.num_vertices, dtype=bool)
    mask[subset] = True
    touches = mask[cx.tail] | mask[cx.head]
    return float(theta[touches].sum())


def _subset_slacks(cx, theta, k, start=1, stop=None):
    """Slack ``sum_A k - (2 pi |A| - 2 sum theta)`` for subsets start .. stop-1.

    Subsets are indexed by bitmask (bit i set means vertex i in A).
    """
    n = cx.num_vertices
    stop = (1 << n) if stop is None else stop
    masks = np.arange(start, stop, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    ksum = bits @ k
    size = bits.sum(axis=1)
    touch = bits[:, cx.tail] | bits[:, cx.head]
    tsum = touch @ theta
    return masks, ksum - (2.0 * np.pi * size - 2.0 * tsum)


def _min_slack(cx, theta, k, stop):
    """First subset (in bitmask order) attaining the minimum slack below ``stop``."""
    best_mask, best = 0, np.inf
    for lo in range(1, stop, CHUNK):
        masks, slack = _subset_slacks(cx, theta, k, lo, min(lo + CHUNK, stop))
        j = int(np.argmin(slack))
        if slack[j] < best:
            best_mask, best = int(masks[j]), float(slack[j])
    return best_mask, best


def _members(mask, n):
    return tuple(i for i in range(n) if (mask >> i) & 1)


def check_target(cx, theta, target, geometry, tol=SLACK_TOL):
    """Decide whether ``target`` lies in the image of the curvature map.

    Condition (C1) on ``theta`` is not checked here.  The reported margin is
    the smallest slack over all checks (upper bound ``2 pi - k_i`` included;
    for Euclidean geometry the ``A = V`` equality is excluded from the
    margin and checked separately).
    """
    geometry = Geometry.parse(geometry)
    n = cx.num_vertices
    if n > MAX_ENUMERATION_VERTICES:
        raise ScaleGuardError(
            f"{n} vertices exceed the enumeration guard of {MAX_ENUMERATION_VERTICES}")
    theta = as_angles(theta, cx)
    k = np.asarray(target, dtype=float)
    if k.shape != (n,):
        raise ValueError(f"target has {k.size} entries, complex has {n} vertices")

    upper = 2.0 * np.pi - k
    i_up = int(np.argmin(upper))
    full = (1 << n) - 1
    # Euclidean: A = V is held to equality, every other subset to strict inequality
    stop = full + 1 if geometry.is_hyperbolic else full
    worst_mask, worst_slack = _min_slack(cx, theta, k, stop)
    margin = float(min(upper[i_up], worst_slack))
    worst = _members(worst_mask, n)

    if upper[i_up] <= tol:
        return AttainabilityReport(False, FailedCondition.UPPER_BOUND, (i_up,), margin, worst)
    if worst_slack <= tol:
        return AttainabilityReport(False, FailedCondition.SUBSET_INEQUALITY, worst, margin, worst)
    if not geometry.is_hyperbolic:
        eq = float(_subset_slacks(cx, theta, k, full, full + 1)[1][0])
        if abs(eq) > tol:
            return AttainabilityReport(False, FailedCondition.EQUALITY_AT_V,
                                       tuple(range(n)), margin, worst)
    return AttainabilityReport(True, FailedCondition.NONE, None, margin, worst)
