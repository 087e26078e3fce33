"""Exact enumeration, partition functions, and conditional distributions.

The pruned depth-first search assigns edges in canonical order and
backtracks as soon as any fully decided vertex breaks the 1-2 law; since the
degree reaches 3 only at code 7 and 0 only at code 0, the prune reduces to
two code checks.  This engine is the correctness oracle for the sampler and
is meant for desk-scale geometries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .configuration import Configuration
from .errors import EnumerationCapError, FrozenBoundaryError

ENUM_CAP = 40


@dataclass
class Distribution:
    """Finite distribution over assignments of a fixed edge list.

    `support` holds bit tuples aligned with `edges`; probabilities are
    normalized and sum to one within 1e-12.
    """

    edges: tuple
    support: list
    probs: np.ndarray
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if len(self.support) != len(self.probs):
            raise ValueError("support/probs length mismatch")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support entries must be distinct")
        total = float(self.probs.sum())
        if not math.isclose(total, 1.0, abs_tol=1e-12):
            raise ValueError(f"probabilities sum to {total}, not 1")

    def __len__(self):
        return len(self.support)

    def prob_of(self, patch):
        if self._index is None:
            self._index = {s: i for i, s in enumerate(self.support)}
        i = self._index.get(tuple(patch))
        return 0.0 if i is None else float(self.probs[i])

    def sample_u(self, u):
        """Pick the first entry whose cumulative probability exceeds u."""
        cum = np.cumsum(self.probs)
        i = int(np.searchsorted(cum, u, side="right"))
        return self.support[min(i, len(self.support) - 1)]

    def sample(self, rng):
        return self.sample_u(rng.random())

    def tv(self, other):
        """Total-variation distance against a Distribution or patch->prob map."""
        if isinstance(other, Distribution):
            other = dict(zip(other.support, other.probs))
        keys = set(other) | set(self.support)
        if self._index is None:
            self._index = {s: i for i, s in enumerate(self.support)}
        acc = 0.0
        for k in keys:
            p = self.prob_of(k)
            acc += abs(p - float(other.get(k, 0.0)))
        return 0.5 * acc


class _Dfs:
    """Pruned DFS over a free-edge subset with everything else fixed."""

    def __init__(self, g, free_idx, base_bits):
        ends = g.edge_endpoint_indices
        kinds = g.edge_kinds
        self.free_idx = list(free_idx)
        free_set = set(self.free_idx)
        affected = sorted({int(v) for e in self.free_idx for v in ends[e]})
        local = {v: i for i, v in enumerate(affected)}
        self.affected = affected
        n = len(affected)
        codes = [0] * n
        remaining = [0] * n
        inc = g.incident_edges
        base = g.ext_code_base
        for i, v in enumerate(affected):
            c = int(base[v])
            for k in range(3):
                e = int(inc[v, k])
                if e < 0:
                    continue
                if e in free_set:
                    remaining[i] += 1
                elif base_bits[e]:
                    c |= 1 << k
            codes[i] = c
        self.codes = codes
        self.remaining = remaining
        self.einfo = [
            (local[int(ends[e, 0])], local[int(ends[e, 1])], 1 << int(kinds[e]))
            for e in self.free_idx
        ]
        self.assign = [0] * len(self.free_idx)

    def walk(self):
        """Yield every assignment tuple passing the 1-2 law at decided vertices."""
        codes, remaining, einfo, assign = self.codes, self.remaining, self.einfo, self.assign
        nf = len(einfo)

        def rec(j):
            if j == nf:
                yield tuple(assign)
                return
            u, v, bit = einfo[j]
            for val in (0, 1):
                cu0, cv0 = codes[u], codes[v]
                if val:
                    codes[u] = cu0 | bit
                    codes[v] = cv0 | bit
                remaining[u] -= 1
                remaining[v] -= 1
                ok = True
                for t in (u, v):
                    c = codes[t]
                    if c == 7 or (remaining[t] == 0 and c == 0):
                        ok = False
                        break
                if ok:
                    assign[j] = val
                    yield from rec(j + 1)
                remaining[u] += 1
                remaining[v] += 1
                codes[u] = cu0
                codes[v] = cv0

        yield from rec(0)


def enumerate_valid(g, cap=ENUM_CAP):
    """Stream every valid configuration of `g`, in lexicographic bit order.

    Windows apply their boundary condition; the cap guards against
    accidentally enumerating large geometries.
    """
    if g.n_edges > cap:
        raise EnumerationCapError(
            f"{g.n_edges} edges exceeds the cap {cap}; raise the cap or use the sampler"
        )
    dfs = _Dfs(g, range(g.n_edges), np.zeros(g.n_edges, np.uint8))
    for assign in dfs.walk():
        yield Configuration(g, np.array(assign, dtype=np.uint8))


def count_valid(g, cap=ENUM_CAP):
    if g.n_edges > cap:
        raise EnumerationCapError(f"{g.n_edges} edges exceeds the cap {cap}")
    dfs = _Dfs(g, range(g.n_edges), np.zeros(g.n_edges, np.uint8))
    return sum(1 for _ in dfs.walk())


def partition_function(g, w, cap=ENUM_CAP):
    """(count, Z): number of valid configurations and their weighted sum.

    Z sums the product of vertex weights over valid configurations; with
    a = b = c = 1 it equals the count exactly.
    """
    if g.n_edges > cap:
        raise EnumerationCapError(f"{g.n_edges} edges exceeds the cap {cap}")
    table = w.table()
    dfs = _Dfs(g, range(g.n_edges), np.zeros(g.n_edges, np.uint8))
    codes = dfs.codes
    count = 0
    z = 0.0
    for _ in dfs.walk():
        count += 1
        prod = 1.0
        for c in codes:
            prod *= table[c]
        z += prod
    return count, z


def gibbs_conditional(base, free_edges, w):
    """Conditional distribution of `free_edges` given the rest of `base`.

    The probability of an assignment is proportional to the product of
    vertex weights over every vertex whose code depends on a free edge;
    assignments creating code 0 or 7 there get probability zero.  Raises
    FrozenBoundaryError when no valid completion exists.
    """
    g = base.geometry
    free = sorted(g.edge_index(e) for e in free_edges)
    if len(set(free)) != len(free):
        raise ValueError("free edge list contains duplicates")
    table = w.table()
    dfs = _Dfs(g, free, base.bits)
    codes = dfs.codes
    support = []
    weights = []
    for assign in dfs.walk():
        prod = 1.0
        for c in codes:
            prod *= table[c]
        support.append(assign)
        weights.append(prod)
    total = float(sum(weights))
    if not support or total <= 0.0:
        raise FrozenBoundaryError(
            f"exterior condition admits no valid completion of {len(free)} free edges"
        )
    probs = np.array(weights) / total
    edges = tuple(g.edge_at(i) for i in free)
    return Distribution(edges, support, probs)


def stream_weighted(g, w, cap=ENUM_CAP):
    """Yield (assignment tuple, weight product) over valid configurations.

    Streaming form of the full distribution for geometries too large to
    materialize; weights are unnormalized.
    """
    if g.n_edges > cap:
        raise EnumerationCapError(f"{g.n_edges} edges exceeds the cap {cap}")
    table = w.table()
    dfs = _Dfs(g, range(g.n_edges), np.zeros(g.n_edges, np.uint8))
    codes = dfs.codes
    for assign in dfs.walk():
        prod = 1.0
        for c in codes:
            prod *= table[c]
        yield assign, prod


def edge_marginals(g, w, cap=ENUM_CAP):
    """Exact P(edge present) per edge, by one streaming enumeration pass."""
    sums = np.zeros(g.n_edges)
    z = 0.0
    for assign, wt in stream_weighted(g, w, cap):
        z += wt
        if wt:
            sums += wt * np.asarray(assign)
    if z <= 0:
        raise FrozenBoundaryError("no valid configuration")
    return sums / z


def apply_patch(cfg, dist_edges, patch):
    """Copy of `cfg` with the given assignment written to `dist_edges`."""
    out = cfg.copy()
    for e, bit in zip(dist_edges, patch):
        out.set(e, bool(bit))
    return out


def full_distribution(g, w, cap=ENUM_CAP):
    """Exact Gibbs distribution over all valid configurations of `g`."""
    if g.n_edges > cap:
        raise EnumerationCapError(f"{g.n_edges} edges exceeds the cap {cap}")
    table = w.table()
    dfs = _Dfs(g, range(g.n_edges), np.zeros(g.n_edges, np.uint8))
    codes = dfs.codes
    support = []
    weights = []
    for assign in dfs.walk():
        prod = 1.0
        for c in codes:
            prod *= table[c]
        support.append(assign)
        weights.append(prod)
    if not support:
        raise FrozenBoundaryError("geometry admits no valid configuration")
    probs = np.array(weights) / float(sum(weights))
    edges = tuple(g.edge_at(i) for i in range(g.n_edges))
    return Distribution(edges, support, probs)
