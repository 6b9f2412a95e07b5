"""Triangulations of closed oriented surfaces as Delta-complexes.

Faces reference directed edges rather than vertex triples, so self-loops and
multiple edges between the same pair of vertices are representable.  The
one-vertex torus (three loops, two faces) is the smallest example.

Mesh documents are JSON objects::

    {
      "name": "torus1",
      "num_vertices": 1,
      "edges": [[0, 0], [0, 0], [0, 0]],
      "faces": [[[0, 1], [1, 1], [2, -1]], [[2, 1], [0, -1], [1, -1]]],
      "theta": [1.0471975511965976, 1.0471975511965976, 1.0471975511965976]
    }

A face entry ``[e, +1]`` traverses edge ``e`` from tail to head, ``[e, -1]``
from head to tail.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

C1_TOL = 1e-12


class Geometry(str, Enum):
    """Background geometry the triangles are built in."""

    HYPERBOLIC = "hyperbolic"
    EUCLIDEAN = "euclidean"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown geometry {value!r}") from None

    @property
    def is_hyperbolic(self):
        return self is Geometry.HYPERBOLIC


class MeshFormatError(ValueError):
    """Malformed mesh document."""


class MeshIndexError(IndexError):
    """Edge or vertex reference out of range."""


class InvalidComplexError(ValueError):
    """A complex that violates a structural invariant."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SurfaceComplex:
    """Triangulated closed surface with directed-edge faces.

    Parameters
    ----------
    num_vertices : int
        Number of vertices N.
    edges : array_like, shape (E, 2)
        ``(tail, head)`` vertex ids per edge.
    faces : array_like, shape (F, 3, 2)
        Per face, three ``(edge_id, direction)`` sides with direction +1/-1.
    name : str, optional

    Only index ranges and array shapes are checked on construction; use
    :func:`validate` for the topological invariants.
    """

    num_vertices: int
    edges: np.ndarray
    faces: np.ndarray
    name: str = ""
    _sides_of_edge: tuple = field(init=False, repr=False)
    _edge_ends: tuple = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.num_vertices)
        if n < 0:
            raise MeshIndexError("num_vertices must be non-negative")
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        faces = np.asarray(self.faces, dtype=np.int64)
        if faces.size == 0:
            faces = faces.reshape(0, 3, 2)
        if faces.ndim != 3 or faces.shape[2] != 2:
            raise MeshFormatError("faces must be lists of [edge, direction] pairs")
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            bad = int(np.flatnonzero((edges < 0) | (edges >= n))[0] // 2)
            raise MeshIndexError(f"edge {bad} references a vertex outside 0..{n - 1}")
        if faces.size:
            eids = faces[:, :, 0]
            if eids.min() < 0 or eids.max() >= len(edges):
                f = int(np.flatnonzero(((eids < 0) | (eids >= len(edges))).any(axis=1))[0])
                raise MeshIndexError(f"face {f} references an edge outside 0..{len(edges) - 1}")
            if not np.isin(faces[:, :, 1], (-1, 1)).all():
                f = int(np.flatnonzero(~np.isin(faces[:, :, 1], (-1, 1)).all(axis=1))[0])
                raise MeshFormatError(f"face {f} has a direction flag other than +1/-1")

        object.__setattr__(self, "num_vertices", n)
        object.__setattr__(self, "edges", _frozen(edges, np.int64))
        object.__setattr__(self, "faces", _frozen(faces, np.int64))

        sides = [[] for _ in range(len(edges))]
        for f, face in enumerate(faces):
            for k, (e, _) in enumerate(face):
                sides[e].append((f, k))
        object.__setattr__(self, "_sides_of_edge", tuple(tuple(s) for s in sides))

        ends = [[] for _ in range(n)]
        for e, (a, b) in enumerate(edges):
            ends[a].append((e, 0))
            ends[b].append((e, 1))
        object.__setattr__(self, "_edge_ends", tuple(tuple(x) for x in ends))

    @property
    def num_edges(self):
        return len(self.edges)

    @property
    def num_faces(self):
        return len(self.faces)

    @property
    def euler_characteristic(self):
        return self.num_vertices - self.num_edges + self.num_faces

    @property
    def tail(self):
        return self.edges[:, 0]

    @property
    def head(self):
        return self.edges[:, 1]

    def sides_of_edge(self, e):
        """Face sides ``(face, slot)`` that use edge ``e``."""
        return self._sides_of_edge[e]

    def side_vertices(self, f, k):
        """Start and end vertex of side ``k`` of face ``f`` along the face walk."""
        e, d = self.faces[f, k]
        a, b = self.edges[e]
        return (int(a), int(b)) if d > 0 else (int(b), int(a))

    def face_vertices(self, f):
        """Corner vertices of face ``f``; corner ``k`` is the start of side ``k``."""
        return tuple(self.side_vertices(f, k)[0] for k in range(3))

    def same_as(self, other):
        return (
            self.num_vertices == other.num_vertices
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.faces, other.faces)
        )


def incident_edge_ends(cx, v):
    """Edge ends at vertex ``v`` as ``(edge, end)`` with end 0 = tail, 1 = head.

    A self-loop at ``v`` appears twice, once per end.
    """
    if not 0 <= v < cx.num_vertices:
        raise MeshIndexError(f"vertex {v} out of range")
    return list(cx._edge_ends[v])


def as_angles(theta, cx):
    """Validate an angle assignment against ``cx`` and return a float array."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (cx.num_edges,):
        raise ValueError(
            f"angle assignment has {theta.size} entries, complex has {cx.num_edges} edges"
        )
    bad = np.flatnonzero(~((theta > 0) & (theta < np.pi)))
    if bad.size:
        raise ValueError(f"theta[{bad[0]}] = {theta[bad[0]]!r} is outside (0, pi)")
    return theta


@dataclass
class ValidationReport:
    euler_characteristic: int
    violations: list

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {
            "ok": self.ok,
            "euler_characteristic": self.euler_characteristic,
            "violations": list(self.violations),
        }


def _structural_violations(cx):
    out = []
    for e in range(cx.num_edges):
        sides = cx.sides_of_edge(e)
        if len(sides) != 2:
            out.append(f"edge {e} is used by {len(sides)} face sides, expected 2")
            continue
        (f0, k0), (f1, k1) = sides
        if cx.faces[f0, k0, 1] == cx.faces[f1, k1, 1]:
            out.append(
                f"edge {e} is traversed in the same direction by faces {f0} and {f1}"
                " (inconsistent orientation)"
            )

    for f in range(cx.num_faces):
        walk = [cx.side_vertices(f, k) for k in range(3)]
        for k in range(3):
            if walk[k][1] != walk[(k + 1) % 3][0]:
                out.append(f"face {f}: side {k} ends at vertex {walk[k][1]} but side "
                           f"{(k + 1) % 3} starts at vertex {walk[(k + 1) % 3][0]}")
                break

    isolated = [v for v in range(cx.num_vertices) if not cx._edge_ends[v]]
    for v in isolated:
        out.append(f"vertex {v} has no incident edges")

    if cx.num_vertices and not _connected(cx):
        out.append("complex is not connected")
    return out


def _connected(cx):
    n = cx.num_vertices
    adj = [[] for _ in range(n)]
    for a, b in cx.edges:
        adj[a].append(int(b))
        adj[b].append(int(a))
    seen = {0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == n


def validate(cx, geometry):
    """Check structural invariants and the geometry/Euler characteristic match.

    Never raises for a bad complex; every problem becomes a report entry.
    """
    geometry = Geometry.parse(geometry)
    chi = cx.euler_characteristic
    violations = _structural_violations(cx)
    if 2 * cx.num_edges != 3 * cx.num_faces:
        violations.append(f"2E = {2 * cx.num_edges} differs from 3F = {3 * cx.num_faces}")
    if geometry is Geometry.HYPERBOLIC and chi >= 0:
        violations.append(f"chi must be negative for hyperbolic geometry (chi = {chi})")
    if geometry is Geometry.EUCLIDEAN and chi != 0:
        violations.append(f"chi must be zero for Euclidean geometry (chi = {chi})")
    return ValidationReport(chi, violations)


def check_c1(cx, theta):
    """Per-face deviation of the angle sum from pi.

    The condition holds when every entry is below ``C1_TOL`` in magnitude.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (cx.num_edges,):
        raise ValueError(
            f"angle assignment has {theta.size} entries, complex has {cx.num_edges} edges"
        )
    if cx.num_faces == 0:
        return np.zeros(0)
    return theta[cx.faces[:, :, 0]].sum(axis=1) - np.pi


def satisfies_c1(cx, theta, tol=C1_TOL):
    return bool(np.all(np.abs(check_c1(cx, theta)) <= tol))


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def _parse_document(document):
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise MeshFormatError(f"invalid JSON: {exc}") from exc
    else:
        data = document
    if not isinstance(data, dict):
        raise MeshFormatError("mesh document must be a JSON object")
    for key in ("num_vertices", "edges", "faces"):
        if key not in data:
            raise MeshFormatError(f"missing key {key!r}")
    n = data["num_vertices"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise MeshFormatError("num_vertices must be an integer")

    def int_pairs(rows, what):
        if not isinstance(rows, list):
            raise MeshFormatError(f"{what} must be an array")
        for row in rows:
            if (not isinstance(row, list) or len(row) != 2
                    or not all(isinstance(x, int) and not isinstance(x, bool) for x in row)):
                raise MeshFormatError(f"{what} entries must be 2-element integer arrays, got {row!r}")
        return rows

    edges = int_pairs(data["edges"], "edges")
    faces = data["faces"]
    if not isinstance(faces, list):
        raise MeshFormatError("faces must be an array")
    for i, face in enumerate(faces):
        if not isinstance(face, list) or len(face) != 3:
            raise MeshFormatError(f"face {i} must have exactly 3 sides (only triangles are supported)")
        int_pairs(face, f"face {i}")
    theta = data.get("theta")
    if theta is not None:
        if (not isinstance(theta, list)
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in theta)):
            raise MeshFormatError("theta must be an array of numbers")
        if len(theta) != len(edges):
            raise MeshFormatError(f"theta has {len(theta)} entries for {len(edges)} edges")
    name = data.get("name", "")
    if not isinstance(name, str):
        raise MeshFormatError("name must be a string")
    return n, edges, faces, theta, name


def load_complex(document, check=True):
    """Build a :class:`SurfaceComplex` from a mesh document (text or parsed dict).

    With ``check`` (the default) the closed-surface invariants are enforced
    and :class:`InvalidComplexError` is raised when any fails.
    """
    n, edges, faces, _, name = _parse_document(document)
    cx = SurfaceComplex(n, np.array(edges, dtype=np.int64).reshape(-1, 2),
                        np.array(faces, dtype=np.int64).reshape(-1, 3, 2), name=name)
    if check:
        problems = _structural_violations(cx)
        if problems:
            raise InvalidComplexError(problems)
    return cx


def load_angles(document):
    """The optional ``theta`` array of a mesh document, or None."""
    theta = _parse_document(document)[3]
    return None if theta is None else np.array(theta, dtype=float)


def read_mesh(path, check=True):
    """Read a mesh file; returns ``(complex, theta or None)``."""
    text = Path(path).read_text(encoding="utf-8")
    return load_complex(text, check=check), load_angles(text)


def dump_complex(cx, theta=None, indent=None):
    """Serialize to the mesh document format."""
    doc = {
        "num_vertices": cx.num_vertices,
        "edges": cx.edges.tolist(),
        "faces": cx.faces.tolist(),
    }
    if cx.name:
        doc["name"] = cx.name
    if theta is not None:
        doc["theta"] = [float(x) for x in theta]
    return json.dumps(doc, indent=indent)


def fixture_path(name):
    """Path of a bundled mesh fixture (``torus1``, ``torus2``, ``genus2``)."""
    stem = name[:-5] if name.endswith(".json") else name
    path = Path(__file__).parent / "fixtures" / f"{stem}.json"
    if not path.exists():
        raise FileNotFoundError(path)
    return path


def load_fixture(name):
    return read_mesh(fixture_path(name))


def grid_torus(m, theta=np.pi / 3):
    """Regular ``m x m`` triangulated torus with every angle equal to ``theta``.

    Vertex ``(i, j)`` has id ``i + m j``.  Each grid cell carries a horizontal,
    a vertical and a diagonal edge and is split into two faces.  The default
    angle satisfies (C1).
    """
    if m < 3:
        raise ValueError("grid torus needs m >= 3")
    vid = lambda i, j: (i % m) + m * (j % m)
    edges = []
    for j in range(m):
        for i in range(m):
            edges += [[vid(i, j), vid(i + 1, j)],       # horizontal
                      [vid(i, j), vid(i, j + 1)],       # vertical
                      [vid(i, j), vid(i + 1, j + 1)]]   # diagonal
    eid = lambda i, j, kind: 3 * vid(i, j) + kind
    faces = []
    for j in range(m):
        for i in range(m):
            faces.append([[eid(i, j, 0), 1], [eid(i + 1, j, 1), 1], [eid(i, j, 2), -1]])
            faces.append([[eid(i, j, 2), 1], [eid(i, j + 1, 0), -1], [eid(i, j, 1), -1]])
    cx = load_complex({"num_vertices": m * m, "edges": edges, "faces": faces,
                       "name": f"grid-torus-{m}"})
    return cx, np.full(cx.num_edges, float(theta))
