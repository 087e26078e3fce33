"""Three-block partition combinatorics and the encounter-box census.

Two 3-partitions of the same ground set are compatible when two blocks of
one fit inside a single block of the other (checked in both directions, so
"pairwise compatible" is order-free).  Any pairwise-compatible family over
a ground set Y has at most |Y| - 2 members; `max_compatible_family`
verifies this exhaustively for small ground sets via a branch-and-bound
max-clique search on the compatibility graph, and a nested family shows the
bound is attained.

`keane_census` runs the counting experiment: tile a large box into s^2
sub-boxes, detect encounter boxes per sample, convert them to partitions of
the cluster's trace on the outer boundary, and verify the compatibility and
cardinality caps hold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .census import is_encounter_box
from .errors import MarginError
from .lattice import BoxSpec, box_fits, outer_boundary_vertices
from .surgery import probability_factor


class Partition3:
    """Unordered partition of a finite ground set into three nonempty blocks."""

    __slots__ = ("blocks",)

    def __init__(self, *blocks):
        if len(blocks) != 3:
            raise ValueError(f"need exactly 3 blocks, got {len(blocks)}")
        fs = [frozenset(b) for b in blocks]
        if any(not b for b in fs):
            raise ValueError("blocks must be nonempty")
        total = len(fs[0]) + len(fs[1]) + len(fs[2])
        union = fs[0] | fs[1] | fs[2]
        if total != len(union):
            raise ValueError("blocks must be pairwise disjoint")
        self.blocks = tuple(sorted(fs, key=lambda b: sorted(b)))

    @property
    def ground_set(self):
        return self.blocks[0] | self.blocks[1] | self.blocks[2]

    def __eq__(self, other):
        return isinstance(other, Partition3) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        return "P3(" + " | ".join("{" + ",".join(map(str, sorted(b))) + "}" for b in self.blocks) + ")"


def _two_in_one(P, Q):
    """Some block of P contains the union of two blocks of Q."""
    for p in P.blocks:
        for i in range(3):
            for j in range(i + 1, 3):
                if Q.blocks[i] <= p and Q.blocks[j] <= p:
                    return True
    return False


def is_compatible(P, Q):
    """Compatibility in either direction; requires equal ground sets."""
    if P.ground_set != Q.ground_set:
        raise ValueError("partitions have different ground sets")
    return _two_in_one(P, Q) or _two_in_one(Q, P)


def all_partitions3(items):
    """Every partition of `items` into exactly three nonempty blocks."""
    items = list(items)
    if len(items) < 3:
        return []
    out = []

    def rec(i, blocks):
        if i == len(items):
            if len(blocks) == 3:
                out.append(Partition3(*blocks))
            return
        slots_left = len(items) - i
        for b in blocks:
            b.add(items[i])
            rec(i + 1, blocks)
            b.remove(items[i])
        if len(blocks) < 3 and slots_left >= 3 - len(blocks):
            blocks.append({items[i]})
            rec(i + 1, blocks)
            blocks.pop()

    rec(0, [])
    return out


def nested_family(k):
    """A pairwise-compatible family of size k - 2 over {0, ..., k-1}."""
    return [
        Partition3(set(range(i)), {i}, set(range(i + 1, k)))
        for i in range(1, k - 1)
    ]


def _max_clique(adjacency):
    """Branch-and-bound maximum clique over bitmask adjacency lists."""
    n = len(adjacency)
    order = sorted(range(n), key=lambda v: -bin(adjacency[v]).count("1"))
    best = []

    def greedy_color_bound(cand_list):
        # number of greedy color classes bounds the clique size in cand_list
        colors = []
        for v in cand_list:
            for cls in colors:
                if not (adjacency[v] & cls["mask"]):
                    cls["mask"] |= 1 << v
                    cls["members"].append(v)
                    break
            else:
                colors.append({"mask": 1 << v, "members": [v]})
        return colors

    def expand(cand_mask, clique):
        nonlocal best
        cand_list = [v for v in order if (cand_mask >> v) & 1]
        colors = greedy_color_bound(cand_list)
        if len(clique) + len(colors) <= len(best):
            return
        # branch on vertices from the last color classes first
        for cls in reversed(colors):
            for v in cls["members"]:
                if len(clique) + len(colors) <= len(best):
                    return
                clique.append(v)
                nxt = cand_mask & adjacency[v]
                if nxt:
                    expand(nxt, clique)
                elif len(clique) > len(best):
                    best = clique.copy()
                clique.pop()
                cand_mask &= ~(1 << v)
            colors.pop()

    if n:
        expand((1 << n) - 1, [])
    return best


def max_compatible_family(y_size):
    """(size, family): the largest pairwise-compatible family of
    3-partitions of a ground set of `y_size` elements, with a witness.

    Exhaustive over all partitions; limited to 3 <= y_size <= 7 where the
    clique search stays comfortable.
    """
    if not 3 <= y_size <= 7:
        raise ValueError(f"y_size must be in 3..7, got {y_size}")
    parts = all_partitions3(range(y_size))
    n = len(parts)
    adjacency = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if is_compatible(parts[i], parts[j]):
                adjacency[i] |= 1 << j
                adjacency[j] |= 1 << i
    clique = _max_clique(adjacency)
    return len(clique), [parts[i] for i in clique]


@dataclass(frozen=True)
class TilingSpec:
    """s^2 disjoint (N+2)-boxes tiling B_{s(N+2)}, each with a centered N-box."""

    s: int
    N: int
    center: tuple

    @property
    def big_box(self):
        return BoxSpec(self.s * (self.N + 2), self.center)

    def sub_center(self, i, j):
        side = self.N + 2
        ox, oy = self.big_box.origin
        return (ox + i * side + side // 2, oy + j * side + side // 2)

    def sub_box(self, i, j):
        return BoxSpec(self.N + 2, self.sub_center(i, j))

    def inner_box(self, i, j):
        return BoxSpec(self.N, self.sub_center(i, j))

    def inner_boxes(self):
        return [self.inner_box(i, j) for j in range(self.s) for i in range(self.s)]


@dataclass
class PartitionHarvest:
    """Partitions produced from encounter boxes of one cluster."""

    ground_set: tuple
    partitions: list
    boxes: list
    rejected: list  # (box, reason)


def partitions_from_encounter_boxes(cfg, cluster, boxes, big_box, window=None,
                                    adjacency="lattice"):
    """Partition of Y = cluster ∩ outer boundary of `big_box` per encounter box.

    Each box splits the cluster minus the box's enlargement into three
    boundary-reaching components D1, D2, D3; the partition blocks are
    D_i ∩ Y.  Boxes failing the encounter test, or yielding an empty block,
    are rejected with a reason.
    """
    g = cfg.geometry
    y = [v for v in outer_boundary_vertices(big_box, g) if v in set(cluster.members)]
    y_set = set(y)
    harvest = PartitionHarvest(tuple(y), [], [], [])
    member_set = set(cluster.members)
    for box in boxes:
        chk = is_encounter_box(cfg, box, cluster.code, window, adjacency)
        if not chk.is_encounter:
            harvest.rejected.append((box, chk.reason))
            continue
        if not set(chk.components[0]) <= member_set:
            harvest.rejected.append((box, "witness belongs to a different cluster"))
            continue
        blocks = [y_set & set(comp) for comp in chk.components]
        if any(not b for b in blocks):
            harvest.rejected.append((box, "a component misses the outer boundary trace"))
            continue
        harvest.partitions.append(Partition3(*blocks))
        harvest.boxes.append(box)
    return harvest


@dataclass
class KeaneReport:
    """Aggregated encounter-box counting experiment."""

    s: int
    N: int
    code: int
    n_samples: int = 0
    counts: list = field(default_factory=list)
    y_sizes: list = field(default_factory=list)
    total_boxes: int = 0
    violations: list = field(default_factory=list)
    lower_bound_expr: float = 0.0
    perimeter_cap: int = 0
    outer_boundary_size: int = 0

    @property
    def mean_count(self):
        return self.total_boxes / self.n_samples if self.n_samples else 0.0

    def as_dict(self):
        return {
            "s": self.s,
            "N": self.N,
            "code": self.code,
            "n_samples": self.n_samples,
            "total_encounter_boxes": self.total_boxes,
            "mean_encounter_boxes": self.mean_count,
            "per_sample_counts": self.counts,
            "per_cluster_y_sizes": self.y_sizes,
            "expected_count_lower_bound_expr": self.lower_bound_expr,
            "perimeter_cap_4s_Np4": self.perimeter_cap,
            "outer_boundary_size": self.outer_boundary_size,
            "violations": self.violations,
        }


def keane_census(samples, tiling, code, weights, window=None, adjacency="lattice"):
    """Count encounter boxes over a sample stream and verify the caps.

    Per sample and per cluster: the partition family from that cluster's
    encounter boxes must be pairwise compatible and no larger than |Y| - 2;
    the total count must not exceed the sum of those caps.  Violations are
    collected (they would falsify the implementation), and the report also
    carries the theoretical expected-count expression and the 4s(N+4)
    perimeter figure for comparison.
    """
    report = KeaneReport(
        tiling.s,
        tiling.N,
        code,
        lower_bound_expr=probability_factor(tiling.N, weights) * tiling.s ** 2,
        perimeter_cap=4 * tiling.s * (tiling.N + 4),
    )
    big = tiling.big_box
    inner = tiling.inner_boxes()
    for cfg in samples:
        g = cfg.geometry
        if not box_fits(big, g, 1):
            raise MarginError(f"tiling box {big} does not fit in {g!r} with margin 1")
        if window is not None:
            ox, oy = big.origin
            ring_ok = all(
                window.contains_cell(g, x, y)
                for x in (ox - 1, ox + big.n)
                for y in (oy - 1, oy + big.n)
            )
            if not ring_ok:
                raise MarginError(
                    f"window {window} must contain {big} and its outer boundary"
                )
        report.outer_boundary_size = len(outer_boundary_vertices(big, g))
        per_cluster = {}
        n_boxes = 0
        for box in inner:
            chk = is_encounter_box(cfg, box, code, window, adjacency)
            if not chk.is_encounter:
                continue
            n_boxes += 1
            anchor = min(set(chk.components[0]))  # identify the cluster by a witness vertex
            per_cluster.setdefault(anchor, []).append(box)
        cap_sum = 0
        if per_cluster:
            from .census import census as _census

            clusters = _census(cfg, code, window, adjacency)
            locator = {}
            for cl in clusters:
                for v in cl.members:
                    locator[v] = cl
            for anchor, boxes in per_cluster.items():
                cl = locator[anchor]
                harvest = partitions_from_encounter_boxes(cfg, cl, boxes, big, window, adjacency)
                fam = harvest.partitions
                y_size = len(harvest.ground_set)
                report.y_sizes.append(y_size)
                if harvest.rejected:
                    report.violations.append(
                        f"sample {report.n_samples}: rejected boxes {harvest.rejected}"
                    )
                for i in range(len(fam)):
                    for j in range(i + 1, len(fam)):
                        if not is_compatible(fam[i], fam[j]):
                            report.violations.append(
                                f"sample {report.n_samples}: incompatible pair {fam[i]} {fam[j]}"
                            )
                if len(fam) > max(y_size - 2, 0):
                    report.violations.append(
                        f"sample {report.n_samples}: family size {len(fam)} exceeds |Y|-2 = {y_size - 2}"
                    )
                cap_sum += max(y_size - 2, 0)
            if n_boxes > cap_sum:
                report.violations.append(
                    f"sample {report.n_samples}: {n_boxes} encounter boxes exceed the |Y| cap {cap_sum}"
                )
        report.counts.append(n_boxes)
        report.total_boxes += n_boxes
        report.n_samples += 1
    return report
