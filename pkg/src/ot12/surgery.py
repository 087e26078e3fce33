"""Configuration surgeries with certified postconditions.

Two constructions are implemented on a box B = B_{N+2} around a center:

* `rewire_box_interior` keeps every boundary edge of B, makes each interior
  edge present iff horizontal, then repairs the two type III corners by a
  bounded cascade around their corner hexagons.  The output is valid, the
  inner box B_N is uniformly code 1, and at most 2(N+2)^2 + 10 vertices
  change code.

* `build_encounter_box` re-routes code-1 connectivity so that the only ways
  from outside B into the rewired core are three chosen boundary vertices
  (the trident).  Steps: contour horizontals on, the e_i/e_b alternation at
  boundary vertices, corner-partner re-arming, alternating corner hexagons,
  and an all-horizontal inner box with its boundary edges removed.

Both return a SurgeryReport carrying the modified-vertex set and the
probability factor (c'/6a')^(2(N+2)^2+10)/2 computed from sorted weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .census import census
from .configuration import CODE_DEGREE, Configuration, local_code
from .errors import InsufficientClustersError, InvalidConfigurationError, SurgeryFailure
from .lattice import (
    BLACK,
    KIND_A,
    TYPE_I,
    TYPE_II,
    WHITE,
    BoxSpec,
    VertexId,
    box_contains_vertex,
    box_edges,
    box_vertices,
    classify_box_vertices,
    corner_hexagons,
    corner_vertices,
    hexagon_sides,
    outer_contour,
    require_box_fits,
)

CODE_HORIZONTAL = 1  # only the a-edge present


def modification_bound(N):
    """Cap on the number of vertices a box surgery may change."""
    return 2 * (N + 2) ** 2 + 10


def probability_factor(N, w):
    """(1/2) * (c'/(6 a'))^(2(N+2)^2+10) with c' = min, a' = max weight.

    Sorting makes the factor invariant under permuting (a, b, c).
    """
    lo, _, hi = sorted((w.a, w.b, w.c))
    return 0.5 * (lo / (6.0 * hi)) ** modification_bound(N)


@dataclass(frozen=True)
class SurgeryReport:
    """Before/after configurations plus bookkeeping for one surgery."""

    op: str
    input_config: Configuration
    output_config: Configuration
    modified_vertices: tuple
    bound: int
    factor: float = None
    trident: tuple = None

    @property
    def n_modified(self):
        return len(self.modified_vertices)

    def as_dict(self):
        return {
            "op": self.op,
            "n_modified": self.n_modified,
            "bound": self.bound,
            "factor": self.factor,
            "trident": [repr(v) for v in self.trident] if self.trident else None,
            "modified_vertices": [repr(v) for v in self.modified_vertices],
        }


def _degree(cfg, v):
    return int(CODE_DEGREE[local_code(cfg, v)])


def _require_valid_input(cfg, op):
    codes = cfg.codes()
    if np.any((codes == 0) | (codes == 7)):
        raise InvalidConfigurationError(f"{op} requires a valid input configuration")


def _modified(g, before, after):
    diff = np.nonzero(before.codes() != after.codes())[0]
    return tuple(g.vertex_at(int(i)) for i in diff)


def corner_repair(cfg, hexagon, corner=None):
    """Repair a degree-3 corner by the cascade around its hexagon.

    `hexagon` lists v1..v6 cyclically from the corner, with the sides
    v2-v3 and v5-v6 horizontal.  If the corner already has degree 1 or 2
    nothing changes.  Otherwise: if v3 is code 1, drop v1-v2; else if v5 is
    code 1, drop v1-v6; else walk v1-v2, v2-v3, ..., v5-v6, alternating
    remove/add and stopping at the first vertex whose degree lands in
    {1, 2}.  Every hexagon vertex ends with degree 1 or 2.
    """
    g = cfg.geometry
    v1, v2, v3, v4, v5, v6 = hexagon
    if corner is not None and g.canon_vertex(corner) != v1:
        raise ValueError("hexagon must be listed cyclically from the corner")
    if _degree(cfg, v1) == 0:
        raise ValueError(f"corner {v1} has degree 0; caller must set its horizontal edge")
    work = cfg.copy()
    if _degree(work, v1) in (1, 2):
        return work
    sides = hexagon_sides(g, hexagon)
    e12, e23, e34, e45, e56, e61 = sides
    if local_code(work, v3) == CODE_HORIZONTAL:
        work.set(e12, False)
        return work
    if local_code(work, v5) == CODE_HORIZONTAL:
        work.set(e61, False)
        return work
    work.set(e12, False)
    if _degree(work, v2) in (1, 2):
        return work
    work.set(e23, True)
    if _degree(work, v3) in (1, 2):
        return work
    work.set(e34, False)
    if _degree(work, v4) in (1, 2):
        return work
    work.set(e45, True)
    if _degree(work, v5) in (1, 2):
        return work
    work.set(e56, False)
    # v6 keeps the present v1-v6 and just lost v5-v6: degree 1 or 2.
    return work


def rewire_box_interior(cfg, N, center, weights=None):
    """Make the box interior all-horizontal and repair both corners.

    Boundary edges of B_{N+2} keep their input state (the corner cascades
    may later adjust the two hexagon sides at each corner).  Output is
    valid, every B_N vertex has code 1, and nothing outside the box and the
    two corner hexagons changes.
    """
    g = cfg.geometry
    _require_valid_input(cfg, "rewire_box_interior")
    box = BoxSpec(N + 2, center)
    require_box_fits(box, g, 2)
    hexes = corner_hexagons(box, g)
    work = cfg.copy()
    interior, _ = box_edges(box, g)
    for e in interior:
        work.set(e, e.kind == KIND_A)
    work = corner_repair(work, hexes.h1)
    work = corner_repair(work, hexes.h2)
    bad = _first_violation(work)
    if bad is not None:
        raise SurgeryFailure("rewire left an invalid vertex", bad)
    inner = BoxSpec(N, center)
    codes = work.codes()
    for v in box_vertices(inner, g):
        if codes[g.vertex_index(v)] != CODE_HORIZONTAL:
            raise SurgeryFailure(f"inner box vertex {v} is not code 1 after rewiring", v)
    modified = _modified(g, cfg, work)
    bound = modification_bound(N)
    if len(modified) > bound:
        raise SurgeryFailure(f"modified {len(modified)} vertices, bound {bound}")
    factor = probability_factor(N, weights) if weights is not None else None
    return SurgeryReport("rewire", cfg, work, modified, bound, factor)


def _first_violation(cfg):
    codes = cfg.codes()
    bad = np.nonzero((codes == 0) | (codes == 7))[0]
    return cfg.geometry.vertex_at(int(bad[0])) if len(bad) else None


def _gate_positions(box, g):
    """Type II boundary vertices with a guaranteed code-1 route inward.

    The construction forces a ring vertex next to each boundary vertex u
    into code 1 using u's own exempted e_i, except at the four positions
    adjacent to the corners, where the inward connector depends on
    uncontrolled boundary edges.  Those four are excluded here.
    """
    ox, oy = box.origin
    n = box.n
    bad = {
        g.canon_vertex(VertexId(WHITE, ox + 1, oy)),
        g.canon_vertex(VertexId(WHITE, ox, oy + 1)),
        g.canon_vertex(VertexId(BLACK, ox + n - 2, oy + n - 1)),
        g.canon_vertex(VertexId(BLACK, ox + n - 1, oy + n - 2)),
    }
    kinds = classify_box_vertices(box, g)
    return [v for v, t in kinds.items() if t == TYPE_II and v not in bad]


def select_trident(cfg, N, center, code=CODE_HORIZONTAL, threshold=31, window=None,
                   adjacency="lattice"):
    """Pick boundary vertices u1, u2, u3 of B_{N+2} in three distinct
    boundary-touching code-clusters that all avoid the corner exclusion set.

    Candidates are restricted to boundary positions whose inward connection
    survives the encounter construction (all type II positions except the
    four next to the corners).  Returns the lexicographically smallest
    admissible triple (vertex-index order).  Raises
    InsufficientClustersError when fewer than three admissible clusters
    exist; `threshold` clusters meeting the box is the count that
    guarantees success and is reported for context.
    """
    g = cfg.geometry
    box = BoxSpec(N + 2, center)
    require_box_fits(box, g, 2)
    hexes = corner_hexagons(box, g)
    clusters = census(cfg, code, window, adjacency)
    box_set = set(box_vertices(box, g))
    meeting = [c for c in clusters if any(v in box_set for v in c.members)]
    admissible = [
        c
        for c in meeting
        if c.touches_boundary and not any(v in hexes.exclusion for v in c.members)
    ]
    if len(admissible) < 3:
        raise InsufficientClustersError(
            f"{len(admissible)} admissible clusters (of {len(meeting)} meeting the box, "
            f"threshold {threshold})",
            len(admissible),
            len(meeting),
        )
    boundary_vs = sorted(_gate_positions(box, g), key=g.vertex_index)
    membership = {}
    for ci, cl in enumerate(admissible):
        for v in cl.members:
            membership[v] = ci
    picked = []
    used = set()
    for v in boundary_vs:
        ci = membership.get(v)
        if ci is None or ci in used:
            continue
        picked.append(v)
        used.add(ci)
        if len(picked) == 3:
            break
    if len(picked) < 3:
        raise InsufficientClustersError(
            "admissible clusters do not reach three distinct boundary vertices",
            len(picked),
            len(meeting),
        )
    return tuple(picked)


def _boundary_roles(g, box, kinds, v):
    """(e_h, e_b, e_i) for a type II boundary vertex of the box."""
    e_h = e_b = e_i = None
    for nb in g.neighbors(v):
        if not box_contains_vertex(box, g, nb.vertex):
            e_b = nb.edge
        elif nb.kind == KIND_A:
            e_h = nb.edge
        else:
            e_i = nb.edge
    return e_h, e_b, e_i


def build_encounter_box(cfg, N, center, trident, weights=None, window=None):
    """Re-route code-1 connectivity so B_N becomes an encounter-box core.

    After the surgery the configuration is valid, every B_N vertex has
    code 1, and every boundary vertex of B_{N+2} except the trident has a
    code other than 1, so code-1 paths from outside reach B_N only through
    u1, u2, u3.  Raises SurgeryFailure with the violating vertex if the
    deterministic steps plus the bounded local repair cannot restore the
    1-2 law (not expected to trigger; it is a guard, not a code path).
    """
    g = cfg.geometry
    _require_valid_input(cfg, "build_encounter_box")
    box = BoxSpec(N + 2, center)
    require_box_fits(box, g, 2)
    u1, u2, u3 = (g.canon_vertex(u) for u in trident)
    exempt = {u1, u2, u3}
    for u in exempt:
        if local_code(cfg, u) != CODE_HORIZONTAL:
            raise ValueError(f"trident vertex {u} does not carry code 1 in the input")
    kinds = classify_box_vertices(box, g)
    for u in exempt:
        if kinds.get(u) != TYPE_II:  # corners cannot be trident vertices
            raise ValueError(f"trident vertex {u} is not a type II boundary vertex")
    hexes = corner_hexagons(box, g)
    v1, w1 = corner_vertices(box, g)
    work = cfg.copy()

    # (i) horizontal edges of the outer contour become present
    for e in outer_contour(box, g):
        if e.kind == KIND_A:
            work.set(e, True)

    # (ii) e_i := not e_b at every boundary vertex except trident and corners
    for v, t in kinds.items():
        if t == TYPE_I or v in exempt or v in (v1, w1):
            continue
        _, e_b, e_i = _boundary_roles(g, box, kinds, v)
        work.set(e_i, not work.presence(e_b))

    # (iii) re-arm the corner partners p, q through their horizontal edges
    for corner in (v1, w1):
        partner_edge = None
        partner = None
        for nb in g.neighbors(corner):
            if nb.kind == KIND_A:
                partner_edge, partner = nb.edge, nb.vertex
        others = sum(
            1
            for nb in g.neighbors(partner)
            if nb.edge != partner_edge and work.presence(nb.edge)
        )
        work.set(partner_edge, others == 0)  # prefer absent on ties

    # (iv) alternating hexagons: sides 1-2, 3-4, 5-6 present, others absent
    for sides in (hexes.h1_sides, hexes.h2_sides):
        for i, e in enumerate(sides):
            work.set(e, i % 2 == 0)

    # (v) inner box: boundary edges removed, interior all-horizontal
    inner = BoxSpec(N, center)
    inner_interior, inner_boundary = box_edges(inner, g)
    for e in inner_boundary:
        work.set(e, False)
    for e in inner_interior:
        work.set(e, e.kind == KIND_A)

    work = _local_repair(work, box, hexes)
    bad = _first_violation(work)
    if bad is not None:
        raise SurgeryFailure("encounter construction left an invalid vertex", bad)

    codes = work.codes()
    for v in box_vertices(inner, g):
        if codes[g.vertex_index(v)] != CODE_HORIZONTAL:
            raise SurgeryFailure(f"inner box vertex {v} is not code 1", v)
    for v, t in kinds.items():
        if t != TYPE_I and v not in exempt:
            if codes[g.vertex_index(v)] == CODE_HORIZONTAL:
                raise SurgeryFailure(f"boundary vertex {v} kept code 1 outside the trident", v)
    modified = _modified(g, cfg, work)
    bound = modification_bound(N)
    if len(modified) > bound:
        raise SurgeryFailure(f"modified {len(modified)} vertices, bound {bound}")
    factor = probability_factor(N, weights) if weights is not None else None
    return SurgeryReport("encounter", cfg, work, modified, bound, factor, (u1, u2, u3))


def _local_repair(cfg, box, hexes):
    """Bounded guard pass: fix residual violations near the box boundary.

    The deterministic construction should leave none; any violation found
    here is repaired only by degree-reducing/raising moves local to the
    offending vertex, and anything unfixable is surfaced by the caller's
    final validity check.
    """
    g = cfg.geometry
    codes = cfg.codes()
    bad = np.nonzero((codes == 0) | (codes == 7))[0]
    if not len(bad):
        return cfg
    near = set(box_vertices(box.enlarged(), g)) | set(hexes.exclusion)
    work = cfg.copy()
    for i in bad:
        v = g.vertex_at(int(i))
        if v not in near:
            continue
        code = local_code(work, v)
        nbs = work.geometry.neighbors(v)
        if code == 7:
            # shed one non-horizontal edge whose far endpoint stays legal
            for nb in nbs:
                if nb.kind == KIND_A or nb.exterior:
                    continue
                if _degree(work, nb.vertex) >= 2:
                    work.set(nb.edge, False)
                    break
        elif code == 0:
            for nb in nbs:
                if nb.exterior:
                    continue
                if _degree(work, nb.vertex) <= 1:
                    work.set(nb.edge, True)
                    break
    return work
