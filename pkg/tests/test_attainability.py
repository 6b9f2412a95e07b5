import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from idealflow import geometry as geo
from idealflow.attainability import (
    MAX_ENUMERATION_VERTICES,
    FailedCondition,
    ScaleGuardError,
    boundary_theta_sum,
    check_target,
)
from idealflow.complex import Geometry, load_complex

from conftest import genus2_angles, random_radii

H, E = Geometry.HYPERBOLIC, Geometry.EUCLIDEAN
TWO_PI = 2 * math.pi


def oracle(cx, theta, k, geometry, tol=1e-9):
    """Set-based restatement of the conditions, independent of the bitmask code."""
    n = cx.num_vertices
    if any(x >= TWO_PI - tol for x in k):
        return False
    edges = list(zip(cx.tail.tolist(), cx.head.tolist()))
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            a = set(subset)
            rhs = TWO_PI * len(a) - 2 * sum(t for (p, q), t in zip(edges, theta) if p in a or q in a)
            slack = sum(k[i] for i in a) - rhs
            if geometry is E and len(a) == n:
                if abs(slack) > tol:
                    return False
            elif slack <= tol:
                return False
    return True


# --- boundary sums ---------------------------------------------------------

def test_boundary_sum_whole_set(any_fixture):
    _, cx, theta = any_fixture
    assert boundary_theta_sum(cx, theta, range(cx.num_vertices)) == pytest.approx(theta.sum(), rel=1e-15)


def test_boundary_sum_examples(torus1, genus2):
    assert boundary_theta_sum(*torus1, [0]) == pytest.approx(math.pi, rel=1e-15)
    assert boundary_theta_sum(*genus2, [0]) == pytest.approx(TWO_PI, rel=1e-15)


def test_boundary_sum_counts_parallel_edges():
    doc = {"num_vertices": 2, "edges": [[0, 1], [0, 1], [0, 1], [0, 0], [1, 1], [0, 1]],
           "faces": [[[0, 1], [3, 1], [1, -1]], [[1, 1], [4, 1], [2, -1]],
                     [[2, 1], [5, -1], [0, -1]], [[3, -1], [5, 1], [4, -1]]]}
    cx = load_complex(doc, check=False)
    theta = np.arange(1, 7) * 0.1
    assert boundary_theta_sum(cx, theta, [0]) == pytest.approx(0.1 + 0.2 + 0.3 + 0.4 + 0.6)


def test_boundary_sum_errors(torus1):
    with pytest.raises(ValueError):
        boundary_theta_sum(*torus1, [])
    with pytest.raises(IndexError):
        boundary_theta_sum(*torus1, [1])


# --- worked examples---------------------------------------------------------

def test_one_vertex_torus_flat(torus1):
    rep = check_target(*torus1, [0.0], E)
    assert rep.attainable and rep.failed_condition is FailedCondition.NONE
    assert rep.witness_subset is None


def test_upper_bound(any_fixture):
    _, cx, theta = any_fixture
    for g in (H, E):
        k = np.zeros(cx.num_vertices)
        k[-1] = TWO_PI
        rep = check_target(cx, theta, k, g)
        assert not rep.attainable
        assert rep.failed_condition is FailedCondition.UPPER_BOUND
        assert rep.witness_subset == (cx.num_vertices - 1,)


def test_genus2_boundary_case_rejected(genus2):
    cx, _ = genus2
    rep = check_target(cx, genus2_angles(math.pi / 8), [0.0, 0.0], H)
    assert not rep.attainable
    assert rep.failed_condition is FailedCondition.SUBSET_INEQUALITY
    assert rep.witness_subset == (0,)
    assert abs(rep.margin) < 1e-12


def test_genus2_canonical_attainable(genus2):
    rep = check_target(*genus2, [0.0, 0.0], H)
    assert rep.attainable
    # subsets {c}, {v}, V have slacks 2pi, 6pi, 4pi by hand
    assert rep.margin == pytest.approx(TWO_PI, rel=1e-14)
    assert rep.worst_subset == (0,)


def test_euclidean_equality_failure(torus2):
    rep = check_target(*torus2, [0.1, 0.0], E)
    assert not rep.attainable
    assert rep.failed_condition is FailedCondition.EQUALITY_AT_V


def test_size_mismatch(torus2):
    with pytest.raises(ValueError):
        check_target(*torus2, [0.0], H)


def test_scale_guard():
    n = MAX_ENUMERATION_VERTICES + 1

    class Big:
        num_vertices = n

    with pytest.raises(ScaleGuardError):
        check_target(Big(), np.zeros(0), np.zeros(n), H)


def test_report_dict(genus2):
    d = check_target(genus2[0], genus2_angles(math.pi / 8), [0.0, 0.0], H).to_dict()
    assert d["failed_condition"] == "subset-inequality" and d["witness_subset"] == [0]


# --- properties -------------------------------------------------------------

@pytest.mark.parametrize("g", [H, E])
def test_forward_direction(any_fixture, g):
    _, cx, theta = any_fixture
    rng = np.random.default_rng(31)
    for _ in range(100):
        r = random_radii(rng, cx.num_vertices)
        k = geo.curvatures(cx, theta, geo.to_coords(r, g), g)
        rep = check_target(cx, theta, k, g)
        assert rep.attainable, rep


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(-4.0, 7.0), min_size=2, max_size=2),
       st.lists(st.floats(0.05, 3.1), min_size=12, max_size=12),
       st.sampled_from([H, E]))
def test_matches_set_oracle(k, theta, g):
    from idealflow.complex import load_fixture
    cx, _ = load_fixture("genus2")
    theta = np.array(theta)
    if g is E:
        # place the target on the equality hyperplane so both branches get exercised
        k[1] = (TWO_PI * 2 - 2 * theta.sum()) - k[0]
    if min(abs(TWO_PI - x) for x in k) < 1e-6:
        return
    assert check_target(cx, theta, k, g).attainable == oracle(cx, theta, k, g)


def test_enlarging_angles_never_shrinks_slack(genus2):
    cx, theta = genus2
    rng = np.random.default_rng(8)
    for _ in range(50):
        k = rng.uniform(-3, 3, 2)
        bump = rng.uniform(0, 0.3, cx.num_edges)
        a = check_target(cx, theta, k, H).margin
        b = check_target(cx, np.minimum(theta + bump, math.pi - 1e-3), k, H).margin
        # upper bound part of the margin is unchanged, subset slacks only grow
        assert b >= a - 1e-12


def test_deterministic_witness(genus2):
    cx, _ = genus2
    th = genus2_angles(0.3)
    reps = [check_target(cx, th, [-5.0, -5.0], H) for _ in range(3)]
    assert len({r.witness_subset for r in reps}) == 1
    assert reps[0].witness_subset is not None
