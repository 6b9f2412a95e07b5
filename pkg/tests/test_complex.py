import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from idealflow.complex import (
    Geometry,
    InvalidComplexError,
    MeshFormatError,
    MeshIndexError,
    SurfaceComplex,
    as_angles,
    check_c1,
    dump_complex,
    fixture_path,
    incident_edge_ends,
    load_angles,
    load_complex,
    validate,
)

from conftest import genus2_angles

TORUS1 = {
    "num_vertices": 1,
    "edges": [[0, 0], [0, 0], [0, 0]],
    "faces": [[[0, 1], [1, 1], [2, -1]], [[2, 1], [0, -1], [1, -1]]],
}


def test_torus_document_loads():
    cx = load_complex(json.dumps(TORUS1))
    assert (cx.num_vertices, cx.num_edges, cx.num_faces) == (1, 3, 2)
    assert cx.euler_characteristic == 0


def test_genus2_euler_characteristic(genus2):
    cx, _ = genus2
    assert (cx.num_vertices, cx.num_edges, cx.num_faces) == (2, 12, 8)
    assert cx.euler_characteristic == 2 - 12 + 8 == -2


def test_edge_in_three_faces_rejected():
    doc = dict(TORUS1)
    doc["faces"] = TORUS1["faces"] + [[[0, 1], [1, 1], [2, -1]]]
    with pytest.raises(InvalidComplexError, match="edge 0 is used by 3"):
        load_complex(json.dumps(doc))


@pytest.mark.parametrize("text", ["{", "[]", '{"num_vertices": 1}',
                                  '{"num_vertices": 1.5, "edges": [], "faces": []}',
                                  '{"num_vertices": 1, "edges": [[0]], "faces": []}'])
def test_malformed_documents(text):
    with pytest.raises(MeshFormatError):
        load_complex(text)


def test_quad_face_is_a_format_error():
    doc = {"num_vertices": 1, "edges": [[0, 0]] * 4,
           "faces": [[[0, 1], [1, 1], [2, 1], [3, 1]]]}
    with pytest.raises(MeshFormatError, match="triangles"):
        load_complex(json.dumps(doc))


def test_index_errors():
    doc = dict(TORUS1, edges=[[0, 0], [0, 1], [0, 0]])
    with pytest.raises(MeshIndexError):
        load_complex(json.dumps(doc))
    doc = dict(TORUS1, faces=[[[0, 1], [1, 1], [7, -1]], [[2, 1], [0, -1], [1, -1]]])
    with pytest.raises(MeshIndexError):
        load_complex(json.dumps(doc))


def test_bad_direction_flag():
    doc = dict(TORUS1, faces=[[[0, 1], [1, 2], [2, -1]], [[2, 1], [0, -1], [1, -1]]])
    with pytest.raises(MeshFormatError):
        load_complex(json.dumps(doc))


def test_validate_torus():
    cx = load_complex(json.dumps(TORUS1))
    rep = validate(cx, "euclidean")
    assert rep.ok and rep.euler_characteristic == 0
    rep = validate(cx, "hyperbolic")
    assert not rep.ok
    assert any("chi must be negative" in v for v in rep.violations)


def test_validate_genus2(genus2):
    rep = validate(genus2[0], Geometry.HYPERBOLIC)
    assert rep.ok and rep.euler_characteristic == -2
    assert not validate(genus2[0], Geometry.EUCLIDEAN).ok


def test_validate_reports_orientation_and_chain():
    faces = [[[0, 1], [1, 1], [2, -1]], [[2, -1], [0, -1], [1, -1]]]
    cx = SurfaceComplex(1, TORUS1["edges"], faces)
    rep = validate(cx, "euclidean")
    assert any("same direction" in v for v in rep.violations)

    # two vertices; face walk breaks at the second side
    cx = SurfaceComplex(2, [[0, 1], [0, 1], [1, 0]],
                        [[[0, 1], [1, 1], [2, 1]], [[2, -1], [1, -1], [0, -1]]])
    rep = validate(cx, "euclidean")
    assert any("side 0 ends at vertex 1 but side 1 starts at vertex 0" in v
               for v in rep.violations)


def test_validate_disconnected_and_isolated():
    cx = SurfaceComplex(2, TORUS1["edges"], TORUS1["faces"])
    rep = validate(cx, "euclidean")
    assert "vertex 1 has no incident edges" in rep.violations
    assert "complex is not connected" in rep.violations
    assert rep.euler_characteristic == 1


def test_check_c1_examples(torus1, genus2):
    cx, _ = torus1
    assert np.allclose(check_c1(cx, [math.pi / 3] * 3), 0.0, atol=1e-15)
    assert np.allclose(check_c1(cx, [math.pi / 2] * 3), math.pi / 2)
    cx, theta = genus2
    assert np.max(np.abs(check_c1(cx, theta))) < 1e-12
    with pytest.raises(ValueError):
        check_c1(cx, theta[:-1])


def test_incident_edge_ends(torus1, genus2):
    assert len(incident_edge_ends(torus1[0], 0)) == 6
    cx = genus2[0]
    ends = incident_edge_ends(cx, 0)
    assert len(ends) == 8
    assert all(cx.num_edges - 8 <= e for e, _ in ends)
    assert len(incident_edge_ends(cx, 1)) == 8 + 2 * 4
    lonely = SurfaceComplex(2, TORUS1["edges"], TORUS1["faces"])
    assert incident_edge_ends(lonely, 1) == []


def test_as_angles_range(torus1):
    cx, _ = torus1
    with pytest.raises(ValueError):
        as_angles([0.0, 1.0, 1.0], cx)
    with pytest.raises(ValueError):
        as_angles([math.pi, 1.0, 1.0], cx)


def test_two_e_equals_three_f(any_fixture):
    _, cx, _ = any_fixture
    assert 2 * cx.num_edges == 3 * cx.num_faces


def test_round_trip(any_fixture):
    _, cx, theta = any_fixture
    text = dump_complex(cx, theta)
    again = load_complex(text)
    assert again.same_as(cx)
    assert np.array_equal(load_angles(text), theta)
    assert dump_complex(again, theta) == text


def test_fixture_files_exist():
    for name in ("torus1", "torus2", "genus2"):
        assert fixture_path(name).is_file()


def test_complex_is_immutable(genus2):
    cx = genus2[0]
    with pytest.raises(ValueError):
        cx.edges[0, 0] = 1
    with pytest.raises(AttributeError):
        cx.num_vertices = 3


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, math.pi / 2 - 0.05))
def test_genus2_c1_family(spoke):
    cx = load_complex(fixture_path("genus2").read_text())
    assert np.max(np.abs(check_c1(cx, genus2_angles(spoke)))) < 1e-12


@pytest.mark.parametrize("m", [3, 5])
def test_grid_torus(m):
    from idealflow.complex import grid_torus
    cx, theta = grid_torus(m)
    assert (cx.num_vertices, cx.num_edges, cx.num_faces) == (m * m, 3 * m * m, 2 * m * m)
    assert cx.euler_characteristic == 0
    assert validate(cx, "euclidean").ok
    assert np.max(np.abs(check_c1(cx, theta))) == 0.0
    # six incident edges per vertex on the regular grid
    assert all(len(incident_edge_ends(cx, v)) == 6 for v in range(cx.num_vertices))


def test_grid_torus_too_small():
    from idealflow.complex import grid_torus
    with pytest.raises(ValueError):
        grid_torus(2)
