from collections import Counter

import pytest

from ot12.errors import GeometryError, MarginError
from ot12.lattice import (
    BLACK,
    KIND_A,
    KIND_B,
    KIND_C,
    TYPE_I,
    TYPE_II,
    TYPE_III,
    WHITE,
    BoxSpec,
    Torus,
    VertexId,
    Window,
    box_contains_vertex,
    box_edges,
    box_vertices,
    classify_box_vertices,
    corner_hexagons,
    corner_vertices,
    outer_boundary_vertices,
    outer_contour,
)


def test_torus_neighbor_order_white():
    g = Torus(4)
    nbs = g.neighbors(VertexId(WHITE, 0, 0))
    assert [(nb.vertex, nb.kind) for nb in nbs] == [
        (VertexId(BLACK, 0, 0), KIND_A),
        (VertexId(BLACK, 0, 3), KIND_B),
        (VertexId(BLACK, 3, 0), KIND_C),
    ]


def test_torus_neighbor_order_black():
    g = Torus(4)
    nbs = g.neighbors(VertexId(BLACK, 0, 0))
    assert [(nb.vertex, nb.kind) for nb in nbs] == [
        (VertexId(WHITE, 0, 0), KIND_A),
        (VertexId(WHITE, 0, 1), KIND_B),
        (VertexId(WHITE, 1, 0), KIND_C),
    ]


def test_window_corner_exterior_flags():
    g = Window(4, 4)
    nbs = g.neighbors(VertexId(WHITE, 0, 0))
    assert [nb.exterior for nb in nbs] == [False, True, True]


def test_bad_inputs_rejected():
    with pytest.raises(GeometryError):
        Torus(1)
    with pytest.raises(GeometryError):
        Window(0, 3)
    g = Torus(3)
    with pytest.raises(GeometryError):
        g.neighbors(VertexId(2, 0, 0))
    gw = Window(3, 3)
    with pytest.raises(GeometryError):
        gw.neighbors(VertexId(WHITE, 5, 0))


@pytest.mark.parametrize("L", range(2, 9))
def test_degree_regularity_and_involution(L):
    g = Torus(L)
    assert g.n_vertices == 2 * L * L
    assert g.n_edges == 3 * L * L
    for v in g.vertices():
        nbs = g.neighbors(v)
        # exactly one edge of each kind, in (a, b, c) order
        assert [nb.kind for nb in nbs] == [KIND_A, KIND_B, KIND_C]
        assert len({nb.edge for nb in nbs}) == 3
        for nb in nbs:
            back = [m for m in g.neighbors(nb.vertex) if m.edge == nb.edge]
            assert len(back) == 1
            assert back[0].vertex == v
            assert back[0].kind == nb.kind  # kind agrees from both endpoints


@pytest.mark.parametrize("L", [2, 3, 5])
def test_face_closure(L):
    g = Torus(L)
    for v in g.vertices():
        cur = v
        for kind in (KIND_A, KIND_C, KIND_B, KIND_A, KIND_C, KIND_B):
            cur = [nb.vertex for nb in g.neighbors(cur) if nb.kind == kind][0]
        assert cur == v


def test_index_maps_are_bijections():
    for g in (Torus(4), Window(3, 5)):
        seen_v = {g.vertex_index(v) for v in g.vertices()}
        assert seen_v == set(range(g.n_vertices))
        seen_e = {g.edge_index(e) for e in g.edges()}
        assert seen_e == set(range(g.n_edges))
        for i in range(g.n_vertices):
            assert g.vertex_index(g.vertex_at(i)) == i
        for i in range(g.n_edges):
            assert g.edge_index(g.edge_at(i)) == i


def test_window_edge_count():
    g = Window(4, 4)
    assert g.n_edges == 3 * 16 - 4 - 4
    assert len(g.exterior_edges()) == 16


@pytest.mark.parametrize("n", range(1, 11))
def test_box_counts(n):
    g = Torus(16)
    box = BoxSpec(n, (8, 8))
    kinds = classify_box_vertices(box, g)
    assert len(kinds) == 2 * n * n
    assert sum(1 for t in kinds.values() if t == TYPE_III) == 2


def test_box_n3_paper_counts():
    g = Torus(16)
    kinds = classify_box_vertices(BoxSpec(3, (8, 8)), g)
    assert len(kinds) == 18
    assert Counter(kinds.values())[TYPE_III] == 2


def test_box_n1_both_boundary():
    g = Torus(16)
    kinds = classify_box_vertices(BoxSpec(1, (8, 8)), g)
    assert len(kinds) == 2
    assert all(t == TYPE_III for t in kinds.values())


def test_box_n5_counts_by_brute_force():
    g = Torus(16)
    box = BoxSpec(5, (8, 8))
    kinds = classify_box_vertices(box, g)
    # independent count: tally in-box neighbors for each vertex directly
    brute = Counter()
    for v in box_vertices(box, g):
        inside = sum(
            1 for nb in g.neighbors(v) if box_contains_vertex(box, g, nb.vertex)
        )
        brute[{3: TYPE_I, 2: TYPE_II, 1: TYPE_III}[inside]] += 1
    assert Counter(kinds.values()) == brute
    boundary = brute[TYPE_II] + brute[TYPE_III]
    assert brute[TYPE_I] == 2 * 25 - boundary
    assert brute[TYPE_II] == boundary - 2
    assert brute[TYPE_III] == 2


def test_box_corners_are_type3_at_opposite_cells():
    g = Torus(16)
    box = BoxSpec(4, (8, 8))
    v1, w1 = corner_vertices(box, g)
    kinds = classify_box_vertices(box, g)
    assert kinds[v1] == TYPE_III and kinds[w1] == TYPE_III
    ox, oy = box.origin
    assert (v1.x, v1.y) == (ox, oy) and v1.sub == WHITE
    assert (w1.x, w1.y) == (ox + 3, oy + 3) and w1.sub == BLACK


def test_margin_violations_raise():
    g = Torus(6)
    with pytest.raises(MarginError):
        classify_box_vertices(BoxSpec(3, (3, 3)), g)  # 3 + 4 > 6
    gw = Window(8, 8)
    with pytest.raises(MarginError):
        classify_box_vertices(BoxSpec(3, (1, 4)), gw)  # touches the left edge


def test_outer_contour_small_box_degenerate():
    g = Torus(12)
    box = BoxSpec(2, (6, 6))
    interior, _ = box_edges(box, g)
    assert sorted(outer_contour(box, g)) == sorted(interior)


def test_outer_contour_matches_brute_force():
    g = Torus(12)
    box = BoxSpec(4, (6, 6))
    interior, boundary = box_edges(box, g)
    boundary_touch = set()
    for e in boundary:
        boundary_touch.update(g.endpoints(e))
    brute = [
        e
        for e in interior
        if any(u in boundary_touch for u in g.endpoints(e))
    ]
    contour = outer_contour(box, g)
    assert sorted(contour) == sorted(brute)
    # contour is interior and disjoint from boundary edges
    assert set(contour) <= set(interior)
    assert not set(contour) & set(boundary)


def test_box_edge_partition():
    g = Torus(12)
    box = BoxSpec(3, (6, 6))
    interior, boundary = box_edges(box, g)
    assert len(set(interior) & set(boundary)) == 0
    for e in interior:
        assert all(box_contains_vertex(box, g, u) for u in g.endpoints(e))
    for e in boundary:
        inside = [u for u in g.endpoints(e) if box_contains_vertex(box, g, u)]
        assert len(inside) == 1
    # n boundary contacts per side: 4n boundary edges in total
    assert len(boundary) == 4 * box.n


def test_corner_hexagons_structure():
    g = Torus(16)
    for n in (3, 4, 5):
        box = BoxSpec(n, (8, 8))
        hexes = corner_hexagons(box, g)
        v1, w1 = corner_vertices(box, g)
        box_set = set(box_vertices(box, g))
        assert set(hexes.h1) & box_set == {v1}
        assert set(hexes.h2) & box_set == {w1}
        assert len(hexes.exclusion) == 28
        for cycle, sides in ((hexes.h1, hexes.h1_sides), (hexes.h2, hexes.h2_sides)):
            assert len(set(cycle)) == 6
            # closed 6-cycle under the adjacency relation
            for i in range(6):
                e = g.find_edge(cycle[i], cycle[(i + 1) % 6])
                assert e == sides[i]
            # horizontal sides sit at positions 2-3 and 5-6
            assert sides[1].kind == KIND_A and sides[4].kind == KIND_A


def test_corner_hexagon_on_window_needs_margin():
    g = Window(10, 10)
    hexes = corner_hexagons(BoxSpec(3, (5, 5)), g)
    assert len(hexes.exclusion) == 28
    with pytest.raises(MarginError):
        corner_hexagons(BoxSpec(3, (2, 2)), g)


def test_outer_boundary_vertices():
    g = Torus(12)
    box = BoxSpec(3, (6, 6))
    outer = outer_boundary_vertices(box, g)
    assert len(outer) == 4 * box.n
    box_set = set(box_vertices(box, g))
    for v in outer:
        assert v not in box_set
        assert any(box_contains_vertex(box, g, nb.vertex) for nb in g.neighbors(v))


def test_box_wraps_on_torus():
    g = Torus(8)
    box = BoxSpec(3, (0, 0))  # origin at (-1, -1), wraps the seam
    kinds = classify_box_vertices(box, g)
    assert len(kinds) == 18
    assert sum(1 for t in kinds.values() if t == TYPE_III) == 2
