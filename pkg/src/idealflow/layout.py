"""Development of the glued metric into the plane or the Poincare disk, and SVG output.

Faces are placed breadth-first along a spanning tree of the face adjacency
graph.  The root face has its first corner at the origin and its first side
along the positive real axis.  Each face carries the intersection point of
its three circles (the degenerate interstice), placed from the two-circle
configuration on its first side.  Non-tree edges are seams; the two copies
of a seam edge are not identified in the chart.

Points are complex numbers.  Hyperbolic charts use the unit disk model and
move points with the isometries ``z -> (z + a) / (1 + conj(a) z)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .complex import Geometry, as_angles

COINCIDE_TOL = 1e-7


class DegenerateTriangleError(ValueError):
    pass


# ---------------------------------------------------------------------------
# model-specific primitives
# ---------------------------------------------------------------------------

def disk_distance(z, w):
    """Hyperbolic distance in the Poincare disk."""
    return 2.0 * np.arctanh(abs(z - w) / abs(1.0 - np.conj(z) * w))


def _to_origin(a, z):
    return (z - a) / (1.0 - np.conj(a) * z)


def _from_origin(a, z):
    return (z + a) / (1.0 + np.conj(a) * z)


def place_point(a, b, dist, angle, geometry):
    """Point at distance ``dist`` from ``a``, turned ``angle`` counterclockwise from ``a -> b``."""
    if geometry.is_hyperbolic:
        w = _to_origin(a, b)
        direction = w / abs(w)
        z = np.tanh(dist / 2.0) * direction * np.exp(1j * angle)
        return complex(_from_origin(a, z))
    direction = (b - a) / abs(b - a)
    return complex(a + dist * direction * np.exp(1j * angle))


def chart_distance(z, w, geometry):
    return float(disk_distance(z, w)) if geometry.is_hyperbolic else float(abs(z - w))


def _angle_from_sides(opposite, s1, s2, geometry):
    """Angle between sides ``s1`` and ``s2`` of a triangle, given the third side."""
    if geometry.is_hyperbolic:
        c = (np.cosh(s1) * np.cosh(s2) - np.cosh(opposite)) / (np.sinh(s1) * np.sinh(s2))
    else:
        c = (s1 * s1 + s2 * s2 - opposite * opposite) / (2.0 * s1 * s2)
    if not np.isfinite(c) or abs(c) > 1.0 + 1e-9:
        raise DegenerateTriangleError(f"side lengths {opposite}, {s1}, {s2} violate the triangle inequality")
    return float(geo._clamped_arccos(c))


def disk_circle(center, radius):
    """Euclidean center and radius of a hyperbolic circle in the disk model."""
    s = abs(center)
    d0 = 2.0 * np.arctanh(s) if s > 0 else 0.0
    direction = center / s if s > 0 else 1.0 + 0j
    near = np.tanh((d0 - radius) / 2.0)
    far = np.tanh((d0 + radius) / 2.0)
    return complex(0.5 * (near + far) * direction), float(0.5 * (far - near))


# ---------------------------------------------------------------------------
# development
# ---------------------------------------------------------------------------

@dataclass
class PlacedFace:
    face: int
    vertices: tuple
    corners: tuple
    interstice: complex
    edges: tuple = ()
    parent: int | None = None
    via_edge: int | None = None


@dataclass
class CircleInstance:
    vertex: int
    center: complex
    radius: float


@dataclass
class DevelopedLayout:
    geometry: Geometry
    charts: list = field(default_factory=list)
    circles: list = field(default_factory=list)
    tree_edges: list = field(default_factory=list)
    seam_edges: list = field(default_factory=list)

    def chart_of(self, f):
        for pf in self.charts:
            if pf.face == f:
                return pf
        raise KeyError(f)


def _side_lengths(cx, theta, r, geometry):
    _, _, length, _, _ = geo._kernels.np_edge_terms(r[cx.tail], r[cx.head], theta,
                                                    geometry.is_hyperbolic)
    return length


def _place_face(cx, f, shift, start, end, lengths, r, theta, geometry):
    """Place face ``f`` with side ``shift`` running from ``start`` to ``end``."""
    order = [(shift + i) % 3 for i in range(3)]
    verts = cx.face_vertices(f)
    e0, e1, e2 = (int(cx.faces[f, k, 0]) for k in order)
    l0, l1, l2 = lengths[e0], lengths[e1], lengths[e2]
    angle = _angle_from_sides(l1, l0, l2, geometry)
    third = place_point(start, end, l2, angle, geometry)

    v_start, v_end = verts[order[0]], verts[order[1]]
    th = geo.center_angle(r[v_start], r[v_end], theta[e0], geometry)
    p = place_point(start, end, r[v_start], th, geometry)

    corners = [0j, 0j, 0j]
    corners[order[0]], corners[order[1]], corners[order[2]] = start, end, third
    return tuple(corners), p


def develop(cx, theta, r, geometry):
    """Lay out every face of ``cx`` in one chart along a breadth-first face tree."""
    geometry = Geometry.parse(geometry)
    theta = as_angles(theta, cx)
    r = np.asarray(r, dtype=float)
    if r.shape != (cx.num_vertices,) or np.any(~(r > 0)):
        raise ValueError("need one positive radius per vertex")
    layout = DevelopedLayout(geometry)
    if cx.num_faces == 0:
        return layout
    lengths = _side_lengths(cx, theta, r, geometry)

    start = 0j
    end = complex(np.tanh(lengths[cx.faces[0, 0, 0]] / 2.0)) if geometry.is_hyperbolic \
        else complex(lengths[cx.faces[0, 0, 0]])
    corners, p = _place_face(cx, 0, 0, start, end, lengths, r, theta, geometry)
    placed = {0: PlacedFace(0, cx.face_vertices(0), corners, p, _face_edges(cx, 0))}
    order = [0]
    tree = set()
    queue = deque([0])
    while queue:
        f = queue.popleft()
        pf = placed[f]
        for k in range(3):
            e = int(cx.faces[f, k, 0])
            for g, kg in cx.sides_of_edge(e):
                if (g, kg) == (f, k) or g in placed:
                    continue
                # the neighbour walks the shared edge the other way
                a = pf.corners[k]
                b = pf.corners[(k + 1) % 3]
                corners, p = _place_face(cx, g, kg, b, a, lengths, r, theta, geometry)
                placed[g] = PlacedFace(g, cx.face_vertices(g), corners, p, _face_edges(cx, g),
                                       parent=f, via_edge=e)
                order.append(g)
                tree.add(e)
                queue.append(g)

    layout.charts = [placed[f] for f in order]
    layout.tree_edges = sorted(tree)
    layout.seam_edges = sorted(set(range(cx.num_edges)) - tree)
    layout.circles = _circle_instances(layout, r)
    return layout


def _face_edges(cx, f):
    return tuple(int(e) for e in cx.faces[f, :, 0])


def _circle_instances(layout, r):
    out = []
    for pf in layout.charts:
        for v, z in zip(pf.vertices, pf.corners):
            if any(c.vertex == v and abs(c.center - z) < COINCIDE_TOL for c in out):
                continue
            out.append(CircleInstance(v, z, float(r[v])))
    return out


def interstice_angle_sums(layout):
    """Per face, the sum of the three angles at the interstice point."""
    sums = []
    for pf in layout.charts:
        p = pf.interstice
        if layout.geometry.is_hyperbolic:
            dirs = [_to_origin(p, z) for z in pf.corners]
        else:
            dirs = [z - p for z in pf.corners]
        total = 0.0
        for i in range(3):
            a, b = dirs[i], dirs[(i + 1) % 3]
            total += abs(np.angle(b / a))
        sums.append(total)
    return np.array(sums)


def star_closure(cx, theta, r, geometry, v):
    """Rotation left over after developing the full star of ``v`` around one copy of it.

    Corners at ``v`` are visited in cyclic order; each face is laid out from
    the previously placed edge using only the three side lengths.  Returns
    the signed angle (in (-pi, pi]) between the first edge direction and the
    direction of the same edge after the full turn, together with the total
    turning angle (which equals ``2 pi - K_v``).
    """
    geometry = Geometry.parse(geometry)
    theta = as_angles(theta, cx)
    r = np.asarray(r, dtype=float)
    lengths = _side_lengths(cx, theta, r, geometry)
    corners = [(f, k) for f in range(cx.num_faces) for k in range(3)
               if cx.face_vertices(f)[k] == v]
    if not corners:
        raise ValueError(f"vertex {v} has no face corners")

    # corner (f, k) lies between arriving side k-1 and leaving side k; turning
    # counterclockwise moves from side k to side k-1, whose other use is the next corner
    f, k = corners[0]
    first_dir = 1.0 + 0j
    direction = first_dir
    total = 0.0
    visited = 0
    while True:
        e_out = int(cx.faces[f, k, 0])
        e_in = int(cx.faces[f, (k - 1) % 3, 0])
        e_opp = int(cx.faces[f, (k + 1) % 3, 0])
        angle = _angle_from_sides(lengths[e_opp], lengths[e_out], lengths[e_in], geometry)
        direction = direction * np.exp(1j * angle)
        total += angle
        visited += 1
        g, kg = [s for s in cx.sides_of_edge(e_in) if s != (f, (k - 1) % 3)][0]
        # the next corner at v is where side kg leaves v
        f, k = g, kg
        if (f, k) == corners[0] or visited > 3 * cx.num_faces:
            break
    if visited != len(corners):
        raise ValueError(f"link of vertex {v} is not a single cycle")
    return float(np.angle(direction / first_dir)), total


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

@dataclass
class SvgOptions:
    size: float = 800.0
    margin: float = 20.0
    stroke_width: float = 1.0
    circle_stroke: str = "#1f77b4"
    edge_stroke: str = "#222222"
    seam_stroke: str = "#d62728"
    spoke_stroke: str = "#999999"
    draw_spokes: bool = True


def _fmt(x):
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _Frame:
    def __init__(self, layout, opts):
        if layout.geometry.is_hyperbolic:
            lo, hi = -1.0 + 0j, 1.0 + 0j
            xmin, xmax, ymin, ymax = -1.0, 1.0, -1.0, 1.0
        else:
            xs, ys = [], []
            for c in layout.circles:
                xs += [c.center.real - c.radius, c.center.real + c.radius]
                ys += [c.center.imag - c.radius, c.center.imag + c.radius]
            for pf in layout.charts:
                for z in (*pf.corners, pf.interstice):
                    xs.append(z.real)
                    ys.append(z.imag)
            if not xs:
                xs, ys = [0.0, 1.0], [0.0, 1.0]
            xmin, xmax, ymin, ymax = min(xs), max(xs), min(ys), max(ys)
        span = max(xmax - xmin, ymax - ymin, 1e-12)
        self.scale = (opts.size - 2 * opts.margin) / span
        self.xmin, self.ymax = xmin, ymax
        self.margin = opts.margin

    def xy(self, z):
        return (self.margin + (z.real - self.xmin) * self.scale,
                self.margin + (self.ymax - z.imag) * self.scale)

    def length(self, d):
        return d * self.scale


def _geodesic_path(frame, a, b, hyperbolic):
    x0, y0 = frame.xy(a)
    x1, y1 = frame.xy(b)
    if hyperbolic:
        cross = a.real * b.imag - a.imag * b.real
        if abs(cross) > 1e-12:
            # circle through a, b and the inversion of a in the unit circle
            inv = a / abs(a) ** 2 if abs(a) > 1e-12 else None
            if inv is not None:
                center = _circumcenter(a, b, inv)
                rad = frame.length(abs(a - center))
                # the arc from a to b not containing the inversion point
                sweep = 0 if cross > 0 else 1
                return (f'M {_fmt(x0)} {_fmt(y0)} A {_fmt(rad)} {_fmt(rad)} 0 0 {sweep} '
                        f'{_fmt(x1)} {_fmt(y1)}')
    return f"M {_fmt(x0)} {_fmt(y0)} L {_fmt(x1)} {_fmt(y1)}"


def _circumcenter(a, b, c):
    d = 2.0 * (a.real * (b.imag - c.imag) + b.real * (c.imag - a.imag) + c.real * (a.imag - b.imag))
    aa, bb, cc = abs(a) ** 2, abs(b) ** 2, abs(c) ** 2
    x = (aa * (b.imag - c.imag) + bb * (c.imag - a.imag) + cc * (a.imag - b.imag)) / d
    y = (aa * (c.real - b.real) + bb * (a.real - c.real) + cc * (b.real - a.real)) / d
    return complex(x, y)


def to_svg(layout, options=None):
    """Standalone SVG 1.1 drawing of a developed layout.

    Output depends only on the layout and options, so identical inputs give
    byte-identical documents.
    """
    opts = options or SvgOptions()
    size = _fmt(opts.size)
    lines = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" '
        f'height="{size}" viewBox="0 0 {size} {size}">',
    ]
    if not layout.charts:
        lines.append("</svg>")
        return "\n".join(lines) + "\n"

    frame = _Frame(layout, opts)
    hyp = layout.geometry.is_hyperbolic
    sw = _fmt(opts.stroke_width)
    if hyp:
        cx_, cy_ = frame.xy(0j)
        lines.append(f'<circle class="boundary" cx="{_fmt(cx_)}" cy="{_fmt(cy_)}" '
                     f'r="{_fmt(frame.length(1.0))}" fill="none" stroke="#000000" '
                     f'stroke-width="{sw}"/>')

    lines.append('<g class="circles" fill="none" '
                 f'stroke="{opts.circle_stroke}" stroke-width="{sw}">')
    for c in layout.circles:
        center, radius = disk_circle(c.center, c.radius) if hyp else (c.center, c.radius)
        x, y = frame.xy(center)
        lines.append(f'<circle data-vertex="{c.vertex}" cx="{_fmt(x)}" cy="{_fmt(y)}" '
                     f'r="{_fmt(frame.length(radius))}"/>')
    lines.append("</g>")

    if opts.draw_spokes:
        lines.append(f'<g class="spokes" fill="none" stroke="{opts.spoke_stroke}" '
                     f'stroke-width="{_fmt(opts.stroke_width * 0.5)}">')
        for pf in layout.charts:
            for z in pf.corners:
                lines.append(f'<path d="{_geodesic_path(frame, pf.interstice, z, hyp)}"/>')
        lines.append("</g>")

    tree = set(layout.tree_edges)
    drawn = set()
    lines.append(f'<g class="edges" fill="none" stroke-width="{sw}">')
    for pf in layout.charts:
        for k in range(3):
            a, b = pf.corners[k], pf.corners[(k + 1) % 3]
            ends = sorted([(round(a.real, 6), round(a.imag, 6)), (round(b.real, 6), round(b.imag, 6))])
            key = tuple(ends)
            if key in drawn:
                continue
            drawn.add(key)
            e = pf.edges[k]
            if e in tree:
                style = f'stroke="{opts.edge_stroke}"'
            else:
                style = f'stroke="{opts.seam_stroke}" stroke-dasharray="4 3"'
            lines.append(f'<path data-edge="{e}" {style} d="{_geodesic_path(frame, a, b, hyp)}"/>')
    lines.append("</g>")

    # center dots are paths so that <circle> elements map one-to-one onto instances
    dot = opts.stroke_width * 1.5
    lines.append('<g class="centers" fill="#000000">')
    for c in layout.circles:
        x, y = frame.xy(c.center)
        lines.append(f'<path data-vertex="{c.vertex}" d="M {_fmt(x - dot)} {_fmt(y)} '
                     f'a {_fmt(dot)} {_fmt(dot)} 0 1 0 {_fmt(2 * dot)} 0 '
                     f'a {_fmt(dot)} {_fmt(dot)} 0 1 0 {_fmt(-2 * dot)} 0 z"/>')
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"

