"""Homogeneous-cluster census: union-find labeling, box counts, encounter boxes.

A homogeneous cluster is a maximal connected set of vertices sharing one
local code.  Connectivity defaults to plain lattice adjacency between
same-code vertices; pass adjacency="present" to require the joining edge to
be present (the two readings differ, so both are available and the lattice
reading is the default).

"Infinite" is proxied by contact with the observation-window boundary: a
cluster counts as unbounded iff it touches the window's edge.  Window
geometries default to their own boundary; torus runs must designate a
sub-window (a torus has no boundary of its own).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, InvalidConfigurationError, MarginError
from .lattice import BoxSpec, CellRect, box_fits, box_vertices, whole_rect


def _window_masks(g, rect):
    """(inside, boundary) boolean masks over vertex indices for a rect."""
    nv = g.n_vertices
    inc = g.incident_edges
    nbr = g.neighbor_indices
    if rect is None:
        inside = np.ones(nv, dtype=bool)
        if g.mode == "window":
            boundary = (inc < 0).any(axis=1)
        else:
            boundary = np.zeros(nv, dtype=bool)
        return inside, boundary
    cells = g.vertex_cells
    if g.mode == "torus":
        rel_x = (cells[:, 0] - rect.x0) % g.L
        rel_y = (cells[:, 1] - rect.y0) % g.L
    else:
        rel_x = cells[:, 0] - rect.x0
        rel_y = cells[:, 1] - rect.y0
    inside = (rel_x >= 0) & (rel_x < rect.w) & (rel_y >= 0) & (rel_y < rect.h)
    out_nbr = inc < 0  # geometry exterior counts as outside the rect
    padded = np.concatenate([inside, [False]])
    for s in range(3):
        out_nbr[:, s] |= ~padded[nbr[:, s]]
    boundary = inside & out_nbr.any(axis=1)
    return inside, boundary


def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


def _components(g, mask, bits, adjacency):
    """Union-find roots over masked vertices; returns root per vertex (-1 off-mask)."""
    ends = g.edge_endpoint_indices
    sel = mask[ends[:, 0]] & mask[ends[:, 1]]
    if adjacency == "present":
        sel &= bits.astype(bool)
    elif adjacency != "lattice":
        raise ValueError(f"unknown adjacency mode {adjacency!r}")
    parent = list(range(g.n_vertices))
    for e in np.nonzero(sel)[0]:
        a = _find(parent, int(ends[e, 0]))
        b = _find(parent, int(ends[e, 1]))
        if a != b:
            parent[b] = a
    roots = np.full(g.n_vertices, -1, dtype=np.int64)
    for v in np.nonzero(mask)[0]:
        roots[v] = _find(parent, int(v))
    return roots


@dataclass(frozen=True)
class Cluster:
    """Maximal same-code connected vertex set with a boundary-contact flag."""

    code: int
    members: tuple  # VertexIds sorted by vertex index
    touches_boundary: bool

    @property
    def size(self):
        return len(self.members)


def _require_valid(cfg):
    codes = cfg.codes()
    if np.any((codes == 0) | (codes == 7)):
        bad = np.nonzero((codes == 0) | (codes == 7))[0][:5]
        raise InvalidConfigurationError(
            "configuration violates the 1-2 law",
            [cfg.geometry.vertex_at(int(i)) for i in bad],
        )
    return codes


def census(cfg, code, window=None, adjacency="lattice"):
    """All clusters of the given code, largest first.

    Ties are broken by the smallest member index, so output order is
    deterministic.
    """
    g = cfg.geometry
    codes = _require_valid(cfg)
    inside, boundary = _window_masks(g, window)
    mask = inside & (codes == code)
    roots = _components(g, mask, cfg.bits, adjacency)
    groups = {}
    for v in np.nonzero(mask)[0]:
        groups.setdefault(int(roots[v]), []).append(int(v))
    clusters = []
    for members in groups.values():
        members.sort()
        clusters.append(
            Cluster(
                code,
                tuple(g.vertex_at(v) for v in members),
                bool(boundary[members].any()),
            )
        )
    clusters.sort(key=lambda c: (-c.size, g.vertex_index(c.members[0])))
    return clusters


def clusters_meeting(cfg, code, region, window=None, boundary_only=False, adjacency="lattice"):
    """(count, clusters) of code-clusters with a member in `region`.

    With boundary_only=True only boundary-touching clusters count (the
    finite proxy for unbounded ones).
    """
    g = cfg.geometry
    region_set = {g.canon_vertex(v) for v in region}
    hits = []
    for cl in census(cfg, code, window, adjacency):
        if boundary_only and not cl.touches_boundary:
            continue
        if any(v in region_set for v in cl.members):
            hits.append(cl)
    return len(hits), hits


@dataclass(frozen=True)
class EncounterCheck:
    """Outcome of the encounter-box test, with the three-arm witness."""

    is_encounter: bool
    components: tuple  # witness: component vertex tuples (empty if not)
    reason: str


def _component_split(g, member_indices, adjacency, bits):
    """Connected components within an index set, under the census adjacency."""
    ends = g.edge_endpoint_indices
    member_set = set(member_indices)
    parent = {v: v for v in member_indices}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    inc = g.incident_edges
    for v in member_indices:
        for s in range(3):
            e = int(inc[v, s])
            if e < 0:
                continue
            if adjacency == "present" and not bits[e]:
                continue
            o = int(ends[e, 0]) if int(ends[e, 1]) == v else int(ends[e, 1])
            if o in member_set:
                a, b = find(v), find(o)
                if a != b:
                    parent[b] = a
    groups = {}
    for v in member_indices:
        groups.setdefault(find(v), []).append(v)
    return [sorted(grp) for grp in groups.values()]


def is_encounter_box(cfg, box, code, window=None, adjacency="lattice"):
    """Test whether `box` is an encounter box for some code-cluster.

    True iff a single cluster contains every box vertex and removing the
    two-ring enlargement leaves no component missing the window boundary
    and exactly three components reaching it.
    """
    g = cfg.geometry
    if g.mode == "torus" and window is None:
        raise GeometryError("torus runs need an observation window for the boundary proxy")
    rect = window if window is not None else whole_rect(g)
    big = box.enlarged()
    if not box_fits(big, g, 1):
        raise MarginError(f"enlarged box {big} does not fit with margin 1")
    ox, oy = big.origin
    corners_in = all(
        rect.contains_cell(g, x, y)
        for x in (ox - 1, ox + big.n)
        for y in (oy - 1, oy + big.n)
    )
    if not corners_in or big.n + 2 > min(rect.w, rect.h):
        raise MarginError(f"enlarged box {big} does not sit inside the window {rect}")
    codes = _require_valid(cfg)
    inside, boundary = _window_masks(g, window)
    box_idx = [g.vertex_index(v) for v in box_vertices(box, g)]
    if not all(codes[v] == code and inside[v] for v in box_idx):
        return EncounterCheck(False, (), "box not filled by the code")
    mask = inside & (codes == code)
    roots = _components(g, mask, cfg.bits, adjacency)
    root = roots[box_idx[0]]
    if any(roots[v] != root for v in box_idx):
        return EncounterCheck(False, (), "box spans several clusters")
    members = [int(v) for v in np.nonzero(roots == root)[0]]
    big_idx = {g.vertex_index(v) for v in box_vertices(big, g)}
    outside = [v for v in members if v not in big_idx]
    if not outside:
        return EncounterCheck(False, (), "cluster confined to the enlarged box")
    comps = _component_split(g, outside, adjacency, cfg.bits)
    reaching = [c for c in comps if boundary[c].any()]
    if len(reaching) != len(comps):
        return EncounterCheck(False, (), f"{len(comps) - len(reaching)} bounded component(s)")
    if len(comps) != 3:
        return EncounterCheck(False, (), f"{len(comps)} unbounded components, need 3")
    witness = tuple(tuple(g.vertex_at(v) for v in c) for c in comps)
    return EncounterCheck(True, witness, "encounter box")


@dataclass
class CensusReport:
    """Per-sample census over all six valid codes."""

    clusters: dict  # code -> list[Cluster]
    box_counts: dict = field(default_factory=dict)  # (code, box) -> boundary clusters

    def largest(self, code, rank=0):
        sizes = sorted((c.size for c in self.clusters.get(code, [])), reverse=True)
        return sizes[rank] if rank < len(sizes) else 0

    def boundary_count(self, code):
        return sum(1 for c in self.clusters.get(code, []) if c.touches_boundary)


def full_census(cfg, window=None, adjacency="lattice", boxes=()):
    report = CensusReport({code: census(cfg, code, window, adjacency) for code in range(1, 7)})
    for code in range(1, 7):
        for box in boxes:
            region = box_vertices(box, cfg.geometry)
            n, _ = clusters_meeting(cfg, code, region, window, boundary_only=True, adjacency=adjacency)
            report.box_counts[(code, box)] = n
    return report


@dataclass
class SizeStats:
    """Mergeable aggregate of largest/second-largest cluster sizes per code.

    "Coexisting large clusters" means largest and second-largest both at
    least `large_fraction` of the vertex count.
    """

    n_vertices: int
    large_fraction: float = 0.05
    n_samples: int = 0
    sum_largest: dict = field(default_factory=dict)
    sum_second: dict = field(default_factory=dict)
    coexist: dict = field(default_factory=dict)

    def add(self, report):
        self.n_samples += 1
        thresh = self.large_fraction * self.n_vertices
        for code in range(1, 7):
            first = report.largest(code, 0)
            second = report.largest(code, 1)
            self.sum_largest[code] = self.sum_largest.get(code, 0) + first
            self.sum_second[code] = self.sum_second.get(code, 0) + second
            if first >= thresh and second >= thresh and second > 0:
                self.coexist[code] = self.coexist.get(code, 0) + 1

    def merge(self, other):
        if other.n_vertices != self.n_vertices or other.large_fraction != self.large_fraction:
            raise ValueError("incompatible size statistics")
        self.n_samples += other.n_samples
        for code in range(1, 7):
            self.sum_largest[code] = self.sum_largest.get(code, 0) + other.sum_largest.get(code, 0)
            self.sum_second[code] = self.sum_second.get(code, 0) + other.sum_second.get(code, 0)
            self.coexist[code] = self.coexist.get(code, 0) + other.coexist.get(code, 0)
        return self

    def summary(self):
        out = {}
        for code in range(1, 7):
            n = max(self.n_samples, 1)
            out[code] = {
                "mean_largest_frac": self.sum_largest.get(code, 0) / (n * self.n_vertices),
                "mean_second_frac": self.sum_second.get(code, 0) / (n * self.n_vertices),
                "coexist_freq": self.coexist.get(code, 0) / n,
            }
        return out


def size_statistics(reports, n_vertices, large_fraction=0.05):
    """Aggregate census reports from a sample stream."""
    stats = SizeStats(n_vertices, large_fraction)
    for rep in reports:
        stats.add(rep)
    return stats
