"""Hexagonal-lattice geometry: coordinates, edge typing, finite geometries.

The lattice uses a two-vertex unit cell: cell (x, y) holds one White and one
Black vertex, with adjacency

    White(x, y) -- Black(x, y)      horizontal a-edge
    White(x, y) -- Black(x, y-1)    b-edge
    White(x, y) -- Black(x-1, y)    c-edge

so each edge is owned by exactly one White vertex and the edge kind is a pure
function of direction.  Moving counter-clockwise around any vertex meets the
a-, b-, c-edges in cyclic order, and the bit position of an edge in a vertex
code equals its kind as seen from either endpoint.

Finite geometries are the L x L torus and the w x h planar window.  Square
boxes (n x n rhombi of unit cells) carry the vertex classification used by
the surgery module: a box vertex is type I/II/III according to whether 3/2/1
of its neighbors lie inside the box, and exactly two type III vertices sit at
opposite corners.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import GeometryError, MarginError

WHITE, BLACK = 0, 1
KIND_A, KIND_B, KIND_C = 0, 1, 2
KIND_NAMES = "abc"

TYPE_I, TYPE_II, TYPE_III = 1, 2, 3


class VertexId(NamedTuple):
    sub: int  # WHITE or BLACK
    x: int
    y: int

    def __repr__(self):
        return f"{'WB'[self.sub]}({self.x},{self.y})"


class EdgeId(NamedTuple):
    x: int  # owner cell (the White endpoint's cell for in-range edges)
    y: int
    kind: int

    def __repr__(self):
        return f"{KIND_NAMES[self.kind]}({self.x},{self.y})"


class Neighbor(NamedTuple):
    vertex: VertexId
    edge: EdgeId
    kind: int
    exterior: bool


def _raw_neighbors(v):
    """The three neighbors of `v` in (a, b, c) order, before wrapping."""
    s, x, y = v
    if s == WHITE:
        return (
            (VertexId(BLACK, x, y), EdgeId(x, y, KIND_A)),
            (VertexId(BLACK, x, y - 1), EdgeId(x, y, KIND_B)),
            (VertexId(BLACK, x - 1, y), EdgeId(x, y, KIND_C)),
        )
    return (
        (VertexId(WHITE, x, y), EdgeId(x, y, KIND_A)),
        (VertexId(WHITE, x, y + 1), EdgeId(x, y + 1, KIND_B)),
        (VertexId(WHITE, x + 1, y), EdgeId(x + 1, y, KIND_C)),
    )


def _raw_endpoints(e):
    """(white, black) endpoints of an edge, before wrapping."""
    x, y, k = e
    if k == KIND_A:
        return VertexId(WHITE, x, y), VertexId(BLACK, x, y)
    if k == KIND_B:
        return VertexId(WHITE, x, y), VertexId(BLACK, x, y - 1)
    return VertexId(WHITE, x, y), VertexId(BLACK, x - 1, y)


class Geometry:
    """Shared indexing and cached incidence arrays for finite geometries."""

    mode = "abstract"

    def __init__(self):
        self._arrays = None

    # subclasses: canon_vertex, contains_vertex, vertex_index, vertex_at,
    # canon_edge, edge_index, edge_at, neighbors, exterior_presence

    def vertices(self):
        for i in range(self.n_vertices):
            yield self.vertex_at(i)

    def edges(self):
        for i in range(self.n_edges):
            yield self.edge_at(i)

    def endpoints(self, e):
        w, b = _raw_endpoints(e)
        return self.canon_vertex(w), self.canon_vertex(b)

    def find_edge(self, u, v):
        """The edge joining two adjacent vertices, or None."""
        v = self.canon_vertex(v)
        for nb in self.neighbors(u):
            if not nb.exterior and nb.vertex == v:
                return nb.edge
        return None

    def _build_arrays(self):
        nv, ne = self.n_vertices, self.n_edges
        inc = np.full((nv, 3), -1, np.int32)
        nbr = np.full((nv, 3), -1, np.int32)
        base = np.zeros(nv, np.uint8)
        for i in range(nv):
            for nb in self.neighbors(self.vertex_at(i)):
                if nb.exterior:
                    if self.exterior_presence(nb.edge):
                        base[i] |= 1 << nb.kind
                else:
                    inc[i, nb.kind] = self.edge_index(nb.edge)
                    nbr[i, nb.kind] = self.vertex_index(nb.vertex)
        ends = np.empty((ne, 2), np.int32)
        kinds = np.empty(ne, np.uint8)
        cells = np.empty((nv, 2), np.int32)
        for j in range(ne):
            e = self.edge_at(j)
            w, b = self.endpoints(e)
            ends[j, 0] = self.vertex_index(w)
            ends[j, 1] = self.vertex_index(b)
            kinds[j] = e.kind
        for i in range(nv):
            v = self.vertex_at(i)
            cells[i, 0] = v.x
            cells[i, 1] = v.y
        self._arrays = (inc, nbr, base, ends, kinds, cells)

    def _get(self, slot):
        if self._arrays is None:
            self._build_arrays()
        return self._arrays[slot]

    @property
    def incident_edges(self):
        """(V, 3) edge index per vertex and kind; -1 for exterior edges."""
        return self._get(0)

    @property
    def neighbor_indices(self):
        """(V, 3) neighbor vertex index per kind; -1 where exterior."""
        return self._get(1)

    @property
    def ext_code_base(self):
        """(V,) code contribution of fixed exterior edges (0 on tori)."""
        return self._get(2)

    @property
    def edge_endpoint_indices(self):
        """(E, 2) vertex indices (white, black) per edge."""
        return self._get(3)

    @property
    def edge_kinds(self):
        return self._get(4)

    @property
    def vertex_cells(self):
        return self._get(5)


class Torus(Geometry):
    """L x L torus; coordinates reduced mod L.  Requires L >= 2."""

    mode = "torus"

    def __init__(self, L):
        if L < 2:
            raise GeometryError(f"torus requires L >= 2, got L={L} (L=1 creates multi-edges)")
        super().__init__()
        self.L = int(L)
        self.n_vertices = 2 * self.L * self.L
        self.n_edges = 3 * self.L * self.L

    def __repr__(self):
        return f"Torus(L={self.L})"

    def __eq__(self, other):
        return isinstance(other, Torus) and other.L == self.L

    def __hash__(self):
        return hash(("torus", self.L))

    def spec_string(self):
        return f"torus L={self.L}"

    def canon_vertex(self, v):
        return VertexId(v.sub, v.x % self.L, v.y % self.L)

    def canon_edge(self, e):
        return EdgeId(e.x % self.L, e.y % self.L, e.kind)

    def contains_vertex(self, v):
        return True

    def vertex_index(self, v):
        v = self.canon_vertex(v)
        return 2 * (v.y * self.L + v.x) + v.sub

    def vertex_at(self, i):
        sub = i & 1
        cell = i >> 1
        return VertexId(sub, cell % self.L, cell // self.L)

    def edge_index(self, e):
        e = self.canon_edge(e)
        return 3 * (e.y * self.L + e.x) + e.kind

    def edge_at(self, i):
        kind = i % 3
        cell = i // 3
        return EdgeId(cell % self.L, cell // self.L, kind)

    def neighbors(self, v):
        if not (0 <= v.sub <= 1):
            raise GeometryError(f"bad sublattice {v.sub}")
        v = self.canon_vertex(v)
        return [
            Neighbor(self.canon_vertex(u), self.canon_edge(e), e.kind, False)
            for u, e in _raw_neighbors(v)
        ]

    def endpoints(self, e):
        w, b = _raw_endpoints(e)
        return self.canon_vertex(w), self.canon_vertex(b)

    def exterior_presence(self, e):
        raise GeometryError("torus has no exterior edges")

    def translate_edge(self, e, dx, dy):
        return self.canon_edge(EdgeId(e.x + dx, e.y + dy, e.kind))


class Window(Geometry):
    """w x h planar window of cells [0,w) x [0,h).

    The configuration lives on interior edges (both endpoints inside).
    Exterior edges (one endpoint inside) take values from the boundary
    condition: free means absent, or an explicit fixed assignment mapping
    exterior EdgeIds to booleans.
    """

    mode = "window"

    def __init__(self, w, h, fixed=None):
        if w < 1 or h < 1:
            raise GeometryError(f"window requires w,h >= 1, got {w}x{h}")
        super().__init__()
        self.w = int(w)
        self.h = int(h)
        self.n_vertices = 2 * self.w * self.h
        self._edge_list = []
        self._edge_idx = {}
        for y in range(self.h):
            for x in range(self.w):
                for kind in (KIND_A, KIND_B, KIND_C):
                    if kind == KIND_B and y == 0:
                        continue
                    if kind == KIND_C and x == 0:
                        continue
                    e = EdgeId(x, y, kind)
                    self._edge_idx[e] = len(self._edge_list)
                    self._edge_list.append(e)
        self.n_edges = len(self._edge_list)
        self._exterior = self._exterior_edges()
        if fixed:
            bad = [e for e in fixed if e not in set(self._exterior)]
            if bad:
                raise GeometryError(f"fixed assignment on non-exterior edge {bad[0]}")
            self.fixed = {EdgeId(*e): bool(val) for e, val in fixed.items()}
        else:
            self.fixed = {}

    def _exterior_edges(self):
        out = []
        for y in range(self.h + 1):
            for x in range(self.w + 1):
                for kind in (KIND_B, KIND_C):
                    e = EdgeId(x, y, kind)
                    if e in self._edge_idx:
                        continue
                    a, b = _raw_endpoints(e)
                    if self.contains_vertex(a) != self.contains_vertex(b):
                        out.append(e)
        return tuple(out)

    def __repr__(self):
        bc = "fixed" if self.fixed else "free"
        return f"Window({self.w}x{self.h}, {bc})"

    def __eq__(self, other):
        return (
            isinstance(other, Window)
            and other.w == self.w
            and other.h == self.h
            and other.fixed == self.fixed
        )

    def __hash__(self):
        return hash(("window", self.w, self.h, tuple(sorted(self.fixed.items()))))

    def spec_string(self):
        return f"window w={self.w} h={self.h}"

    def canon_vertex(self, v):
        return VertexId(*v)

    def canon_edge(self, e):
        return EdgeId(*e)

    def contains_vertex(self, v):
        return 0 <= v.x < self.w and 0 <= v.y < self.h

    def vertex_index(self, v):
        if not self.contains_vertex(v):
            raise GeometryError(f"vertex {v} outside {self!r}")
        return 2 * (v.y * self.w + v.x) + v.sub

    def vertex_at(self, i):
        sub = i & 1
        cell = i >> 1
        return VertexId(sub, cell % self.w, cell // self.w)

    def is_interior_edge(self, e):
        return EdgeId(*e) in self._edge_idx

    def exterior_edges(self):
        """All exterior edges in canonical (row-major owner cell) order."""
        return self._exterior

    def edge_index(self, e):
        try:
            return self._edge_idx[EdgeId(*e)]
        except KeyError:
            raise GeometryError(f"edge {e} is not an interior edge of {self!r}") from None

    def edge_at(self, i):
        return self._edge_list[i]

    def neighbors(self, v):
        if not (0 <= v.sub <= 1):
            raise GeometryError(f"bad sublattice {v.sub}")
        if not self.contains_vertex(v):
            raise GeometryError(f"vertex {v} outside {self!r}")
        return [
            Neighbor(u, e, e.kind, not self.contains_vertex(u))
            for u, e in _raw_neighbors(v)
        ]

    def exterior_presence(self, e):
        return self.fixed.get(EdgeId(*e), False)


class CellRect(NamedTuple):
    """Rectangle of unit cells, used as an observation window."""

    x0: int
    y0: int
    w: int
    h: int

    def contains_cell(self, g, x, y):
        if g.mode == "torus":
            return (x - self.x0) % g.L < self.w and (y - self.y0) % g.L < self.h
        return 0 <= x - self.x0 < self.w and 0 <= y - self.y0 < self.h


def whole_rect(g):
    if g.mode == "torus":
        return CellRect(0, 0, g.L, g.L)
    return CellRect(0, 0, g.w, g.h)


class BoxSpec(NamedTuple):
    """n x n rhombus of unit cells with a declared center cell.

    The box holds 2n^2 vertices.  Enlarging by one ring keeps the center:
    BoxSpec(n + 2, center) adds exactly one cell on every side.
    """

    n: int
    center: tuple

    @property
    def origin(self):
        cx, cy = self.center
        return (cx - self.n // 2, cy - self.n // 2)

    def enlarged(self, rings=1):
        return BoxSpec(self.n + 2 * rings, self.center)

    def cells(self):
        ox, oy = self.origin
        for dy in range(self.n):
            for dx in range(self.n):
                yield (ox + dx, oy + dy)


def box_contains_cell(box, g, x, y):
    ox, oy = box.origin
    if g.mode == "torus":
        return (x - ox) % g.L < box.n and (y - oy) % g.L < box.n
    return 0 <= x - ox < box.n and 0 <= y - oy < box.n


def box_contains_vertex(box, g, v):
    return box_contains_cell(box, g, v.x, v.y)


def box_vertices(box, g):
    """All 2n^2 vertices of the box, canonical, in cell-major order."""
    out = []
    for x, y in box.cells():
        out.append(g.canon_vertex(VertexId(WHITE, x, y)))
        out.append(g.canon_vertex(VertexId(BLACK, x, y)))
    return out


def box_fits(box, g, margin=2):
    if box.n < 1:
        return False
    if g.mode == "torus":
        return box.n + 2 * margin <= g.L
    ox, oy = box.origin
    return (
        ox >= margin
        and oy >= margin
        and ox + box.n + margin <= g.w
        and oy + box.n + margin <= g.h
    )


def require_box_fits(box, g, margin=2):
    if not box_fits(box, g, margin):
        raise MarginError(f"box {box} does not fit in {g!r} with margin {margin}")


def classify_box_vertices(box, g, margin=2):
    """Map each box vertex to TYPE_I/II/III by in-box neighbor count."""
    require_box_fits(box, g, margin)
    kinds = {}
    for v in box_vertices(box, g):
        inside = 0
        for nb in g.neighbors(v):
            if not nb.exterior and box_contains_vertex(box, g, nb.vertex):
                inside += 1
        if inside == 3:
            kinds[v] = TYPE_I
        elif inside == 2:
            kinds[v] = TYPE_II
        elif inside == 1:
            kinds[v] = TYPE_III
        else:
            raise GeometryError(f"box vertex {v} has no in-box neighbor")
    return kinds


def corner_vertices(box, g):
    """The two type III corners: the White at the origin cell and the
    Black at the opposite corner cell."""
    ox, oy = box.origin
    v1 = g.canon_vertex(VertexId(WHITE, ox, oy))
    w1 = g.canon_vertex(VertexId(BLACK, ox + box.n - 1, oy + box.n - 1))
    return v1, w1


def box_edges(box, g):
    """(interior, boundary) edges of the box, each sorted by edge index.

    Interior edges have both endpoints in the box; boundary edges exactly
    one.  Requires margin >= 1 so no box edge leaves the geometry.
    """
    require_box_fits(box, g, 1)
    interior, boundary = [], []
    seen = set()
    for v in box_vertices(box, g):
        for nb in g.neighbors(v):
            if nb.exterior:
                raise MarginError(f"box {box} touches the geometry boundary at {v}")
            if nb.edge in seen:
                continue
            seen.add(nb.edge)
            if box_contains_vertex(box, g, nb.vertex):
                interior.append(nb.edge)
            else:
                boundary.append(nb.edge)
    interior.sort(key=g.edge_index)
    boundary.sort(key=g.edge_index)
    return interior, boundary


def outer_contour(box, g, margin=2):
    """Interior box edges sharing a vertex with some boundary edge."""
    require_box_fits(box, g, margin)
    interior, boundary = box_edges(box, g)
    boundary_endpoints = set()
    for e in boundary:
        for u in g.endpoints(e):
            if box_contains_vertex(box, g, u):
                boundary_endpoints.add(u)
    return [e for e in interior if any(u in boundary_endpoints for u in g.endpoints(e))]


def outer_boundary_vertices(box, g):
    """Vertices outside the box incident to box vertices, sorted by index."""
    _, boundary = box_edges(box, g)
    out = set()
    for e in boundary:
        for u in g.endpoints(e):
            if not box_contains_vertex(box, g, u):
                out.add(u)
    return sorted(out, key=g.vertex_index)


def hexagon_from_corner(g, corner):
    """The 6-cycle of the face that meets the box only at `corner`.

    Starts at the corner and proceeds through its b-neighbor; the edge kinds
    along the cycle are then b, a, c, b, a, c, which places the horizontal
    sides at positions 2-3 and 5-6 as the cascade in the surgery expects.
    """
    cycle = [g.canon_vertex(corner)]
    cur = cycle[0]
    for kind in (KIND_B, KIND_A, KIND_C, KIND_B, KIND_A):
        nxt = None
        for nb in g.neighbors(cur):
            if nb.kind == kind:
                if nb.exterior:
                    raise MarginError(f"hexagon at {corner} leaves the geometry")
                nxt = nb.vertex
        cycle.append(nxt)
        cur = nxt
    closing = g.find_edge(cur, cycle[0])
    if closing is None:
        raise GeometryError(f"hexagon walk from {corner} failed to close")
    return tuple(cycle)


def hexagon_sides(g, cycle):
    """Edges along a 6-cycle, side i joining cycle[i] and cycle[i+1]."""
    sides = []
    for i in range(6):
        e = g.find_edge(cycle[i], cycle[(i + 1) % 6])
        if e is None:
            raise GeometryError("vertices are not a lattice cycle")
        sides.append(e)
    return tuple(sides)


class CornerHexagons(NamedTuple):
    h1: tuple  # 6 vertices, cyclic from the White corner v1
    h2: tuple  # 6 vertices, cyclic from the Black corner w1
    h1_sides: tuple
    h2_sides: tuple
    exclusion: frozenset  # closed hexagon hulls plus 4 auxiliary vertices
    aux: tuple


def _hex_hull(g, cycle):
    hull = set(cycle)
    for v in cycle:
        for nb in g.neighbors(v):
            if nb.exterior:
                raise MarginError("hexagon hull leaves the geometry")
            hull.add(nb.vertex)
    return hull


def _hex_aux(g, cycle):
    # Two far neighbors of the stub vertex hanging off the side opposite
    # the corner; they pad the exclusion zone along the outward diagonal.
    anti = cycle[3]
    members = set(cycle)
    stub = None
    for nb in g.neighbors(anti):
        if nb.vertex not in members:
            stub = nb.vertex
    return tuple(nb.vertex for nb in g.neighbors(stub) if nb.vertex != anti)


def corner_hexagons(box, g, margin=2):
    """Corner hexagons h1, h2 and the vertex exclusion set around them.

    The exclusion set is the union of both closed hexagon hulls (hexagon
    vertices plus their neighbors) and four auxiliary outward vertices; its
    size is 28 whenever n >= 3 and the margin holds.
    """
    require_box_fits(box, g, margin)
    v1, w1 = corner_vertices(box, g)
    h1 = hexagon_from_corner(g, v1)
    h2 = hexagon_from_corner(g, w1)
    aux = _hex_aux(g, h1) + _hex_aux(g, h2)
    exclusion = frozenset(_hex_hull(g, h1) | _hex_hull(g, h2) | set(aux))
    return CornerHexagons(h1, h2, hexagon_sides(g, h1), hexagon_sides(g, h2), exclusion, aux)


def neighbors(v, g):
    """Neighbors of `v` in (a, b, c) edge order; exterior ones flagged."""
    return g.neighbors(v)
