"""Operational self-checks behind the `verify` subcommand.

A curated subset of the oracle and property suite, runnable from an
installed package without the test tree.  Quick mode keeps runtimes in
seconds; full mode enlarges the randomized checks.
"""

from __future__ import annotations

import itertools

import numpy as np

from .census import census, whole_rect
from .configuration import Configuration, Weights, from_text, to_text, violations
from .exact import full_distribution, gibbs_conditional, partition_function
from .lattice import (
    KIND_A,
    KIND_B,
    KIND_C,
    TYPE_III,
    BoxSpec,
    Torus,
    VertexId,
    Window,
    box_vertices,
    classify_box_vertices,
    corner_hexagons,
    corner_vertices,
    hexagon_sides,
)
from .partitions import is_compatible, max_compatible_family, nested_family
from .sampler import heat_bath_sweep, init_chain, run
from .surgery import corner_repair, modification_bound, rewire_box_interior


class CheckFailure(AssertionError):
    pass


def _ensure(cond, msg):
    if not cond:
        raise CheckFailure(msg)


def check_lattice_structure(quick):
    sizes = (2, 3, 4) if quick else (2, 3, 4, 5, 6, 7, 8)
    for L in sizes:
        g = Torus(L)
        for v in g.vertices():
            nbs = g.neighbors(v)
            _ensure([nb.kind for nb in nbs] == [KIND_A, KIND_B, KIND_C], "edge kind order")
            for nb in nbs:
                back = [m for m in g.neighbors(nb.vertex) if m.edge == nb.edge]
                _ensure(len(back) == 1 and back[0].vertex == v, "involution")
        # face closure: walk a, c, b, a, c, b returns home in 6 steps
        v = VertexId(0, 0, 0)
        cur = v
        for kind in (KIND_A, KIND_C, KIND_B, KIND_A, KIND_C, KIND_B):
            cur = [nb.vertex for nb in g.neighbors(cur) if nb.kind == kind][0]
        _ensure(cur == v, "face closure")


def check_box_structure(quick):
    g = Torus(16)
    top = 6 if quick else 10
    for n in range(1, top + 1):
        box = BoxSpec(n, (8, 8))
        if n + 4 > g.L:
            continue
        kinds = classify_box_vertices(box, g)
        _ensure(len(kinds) == 2 * n * n, "box vertex count")
        t3 = [v for v, t in kinds.items() if t == TYPE_III]
        _ensure(sorted(t3, key=g.vertex_index) == sorted(corner_vertices(box, g), key=g.vertex_index), "two corner type III vertices")
        if n >= 3:
            hexes = corner_hexagons(box, g)
            _ensure(len(hexes.exclusion) == 28, "exclusion set size 28")


def check_weight_table():
    w = Weights(2.0, 1.0, 0.5)
    table = w.table()
    _ensure(list(table) == [0.0, 2.0, 1.0, 0.5, 0.5, 1.0, 2.0, 0.0], "weight table")
    for k in range(8):
        _ensure(table[k] == table[7 - k], "weight symmetry")


def check_enumeration_oracle(quick):
    g = Torus(2)
    count, z = partition_function(g, Weights(1, 1, 1))
    brute = 0
    for bits in itertools.product((0, 1), repeat=g.n_edges):
        cfg = Configuration(g, np.array(bits, np.uint8))
        if not violations(cfg):
            brute += 1
    _ensure(count == brute and z == float(brute), f"L=2 count {count} vs brute {brute}")
    gw = Window(2, 2)
    count_w, _ = partition_function(gw, Weights(1, 1, 1))
    brute_w = 0
    for bits in itertools.product((0, 1), repeat=gw.n_edges):
        cfg = Configuration(gw, np.array(bits, np.uint8))
        if not violations(cfg):
            brute_w += 1
    _ensure(count_w == brute_w, "2x2 window count")


def check_corner_repair_exhaustive():
    g = Torus(12)
    box = BoxSpec(3, (6, 6))
    hexes = corner_hexagons(box, g)
    cycle = hexes.h1
    sides = hexes.h1_sides
    stubs = []
    cyc = set(cycle)
    for v in cycle[1:]:
        stubs.extend(nb.edge for nb in g.neighbors(v) if nb.vertex not in cyc)
    corner_a = [nb.edge for nb in g.neighbors(cycle[0]) if nb.kind == KIND_A][0]
    checked = 0
    for side_bits in itertools.product((0, 1), repeat=4):
        for stub_bits in itertools.product((0, 1), repeat=len(stubs)):
            cfg = Configuration(g)
            cfg.set(corner_a, True)
            cfg.set(sides[0], True)  # v1-v2
            cfg.set(sides[5], True)  # v6-v1
            for e, b in zip(sides[1:5], side_bits):
                cfg.set(e, b)
            for e, b in zip(stubs, stub_bits):
                cfg.set(e, b)
            from .configuration import CODE_DEGREE, local_code

            if any(CODE_DEGREE[local_code(cfg, v)] not in (1, 2) for v in cycle[1:]):
                continue  # unreachable from a valid configuration
            out = corner_repair(cfg, cycle)
            for v in cycle:
                deg = CODE_DEGREE[local_code(out, v)]
                _ensure(deg in (1, 2), f"cascade left degree {deg} at {v}")
            checked += 1
    _ensure(checked > 0, "no cases checked")


def check_lemma2(quick):
    top = 5 if quick else 7
    for k in range(3, top + 1):
        size, fam = max_compatible_family(k)
        _ensure(size <= k - 2, f"family size {size} exceeds {k - 2}")
        wit = nested_family(k)
        _ensure(len(wit) == k - 2, "nested witness size")
        for i in range(len(wit)):
            for j in range(i + 1, len(wit)):
                _ensure(is_compatible(wit[i], wit[j]), "nested witness compatibility")


def check_sampler(quick):
    g = Torus(3)
    w = Weights(2, 1, 0.5)
    st1 = init_chain(g, w, 99)
    st2 = init_chain(g, w, 99)
    for _ in range(50):
        heat_bath_sweep(st1)
        heat_bath_sweep(st2)
        _ensure(not violations(st1.config), "sweep broke validity")
    _ensure(st1.config == st2.config, "same seed, different chains")
    # kernel conditional matches the exact one for a few vertex blocks
    from .sampler import block_edges

    for vi in (0, 5, 11):
        edges = block_edges(g, vi, 1)
        dist = gibbs_conditional(st1.config, edges, w)
        _ensure(abs(float(dist.probs.sum()) - 1.0) < 1e-12, "conditional normalization")
    n = 20000 if quick else 200000
    res = run(g, w, 3, burn_in=200, n_samples=n, thinning=1)
    _ensure(res.diagnostics["block_change_rate"] > 0.1, "chain not moving")


def check_census(quick):
    g = Torus(4)
    w = Weights(1, 1, 1)
    res = run(g, w, 23, burn_in=100, n_samples=20 if quick else 100, thinning=2)
    from collections import deque

    for cfg in res.configurations():
        codes = cfg.codes()
        for code in (1, 4):
            got = census(cfg, code)
            seen = set()
            comps = []
            for i in range(g.n_vertices):
                if codes[i] != code or i in seen:
                    continue
                grp = []
                dq = deque([i])
                seen.add(i)
                while dq:
                    v = dq.popleft()
                    grp.append(v)
                    for nb in g.neighbors(g.vertex_at(v)):
                        j = g.vertex_index(nb.vertex)
                        if codes[j] == code and j not in seen:
                            seen.add(j)
                            dq.append(j)
                comps.append(tuple(sorted(grp)))
            mine = sorted(tuple(sorted(g.vertex_index(v) for v in c.members)) for c in got)
            _ensure(mine == sorted(comps), "census != BFS oracle")


def check_rewire(quick):
    g = Torus(16)
    w = Weights(1, 1, 1)
    res = run(g, w, 7, burn_in=200, n_samples=20 if quick else 200, thinning=2)
    N = 2
    for cfg in res.configurations():
        rep = rewire_box_interior(cfg, N, (8, 8), w)
        _ensure(not violations(rep.output_config), "rewire output invalid")
        _ensure(rep.n_modified <= modification_bound(N), "modification bound")
        codes = rep.output_config.codes()
        for v in box_vertices(BoxSpec(N, (8, 8)), g):
            _ensure(codes[g.vertex_index(v)] == 1, "inner box not code 1")


def check_serialization():
    rng = np.random.default_rng(5)
    for g in (Torus(3), Window(3, 4)):
        for _ in range(50):
            cfg = Configuration(g, rng.integers(0, 2, g.n_edges).astype(np.uint8))
            _ensure(from_text(to_text(cfg)) == cfg, "round trip failed")


CHECKS = [
    ("lattice-structure", check_lattice_structure, True),
    ("box-structure", check_box_structure, True),
    ("weight-table", lambda quick: check_weight_table(), True),
    ("enumeration-oracle", check_enumeration_oracle, True),
    ("corner-repair-exhaustive", lambda quick: check_corner_repair_exhaustive(), True),
    ("lemma2-bound", check_lemma2, True),
    ("sampler", check_sampler, True),
    ("census-vs-bfs", check_census, True),
    ("rewire-surgery", check_rewire, True),
    ("serialization", lambda quick: check_serialization(), True),
]


def run_verification(quick=True, log=print):
    """Run all checks; returns the number of failures."""
    failures = 0
    for name, fn, _ in CHECKS:
        try:
            fn(quick)
        except CheckFailure as exc:
            failures += 1
            log(f"FAIL {name}: {exc}")
        except Exception as exc:  # surfaced, not hidden
            failures += 1
            log(f"ERROR {name}: {exc!r}")
        else:
            log(f"ok   {name}")
    return failures
