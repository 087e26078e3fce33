"""1-2 model state: edge presence bits, local codes, weights, serialization.

A configuration stores one presence bit per interior edge of its geometry.
The local code of a vertex packs its three edges into bits (a=1, b=2, c=4);
codes 0 and 7 violate the 1-2 law.  Intermediate invalid states are
representable on purpose: the surgeries pass through them, so validity is a
checked predicate, not a type constraint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, ParseError
from .lattice import Torus, Window

# Weight per local code 0..7; symmetric under code -> 7 - code.
CODE_DEGREE = np.array([0, 1, 1, 2, 1, 2, 2, 3], dtype=np.uint8)
VALID_CODES = (1, 2, 3, 4, 5, 6)


@dataclass(frozen=True)
class Weights:
    """Strictly positive edge-type weights (a, b, c)."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            val = getattr(self, name)
            if not (val > 0):
                raise ValueError(f"weight {name} must be > 0, got {val!r}")

    def table(self):
        """Vertex weight per local code: (0, a, b, c, c, b, a, 0)."""
        a, b, c = self.a, self.b, self.c
        return np.array([0.0, a, b, c, c, b, a, 0.0])


def weight_of(code, w):
    """Weight of a local code under `w` (0 for the two invalid codes)."""
    return float(w.table()[code])


class Configuration:
    """Edge-presence bitset over a geometry.

    Value-like: clone before mutating a shared instance.  `bits` is a
    uint8 array indexed by canonical edge order (cell row-major, kinds
    a, b, c).
    """

    __slots__ = ("geometry", "bits")

    def __init__(self, geometry, bits=None):
        self.geometry = geometry
        if bits is None:
            self.bits = np.zeros(geometry.n_edges, dtype=np.uint8)
        else:
            arr = np.asarray(bits, dtype=np.uint8)
            if arr.shape != (geometry.n_edges,):
                raise ValueError(f"expected {geometry.n_edges} edge bits, got {arr.shape}")
            self.bits = arr.copy()
            self.bits[self.bits > 1] = 1

    @classmethod
    def empty(cls, geometry):
        return cls(geometry)

    @classmethod
    def all_horizontal(cls, geometry):
        """Every a-edge present, all others absent; every vertex code 1."""
        cfg = cls(geometry)
        cfg.bits[geometry.edge_kinds == 0] = 1
        return cfg

    def copy(self):
        return Configuration(self.geometry, self.bits)

    def __eq__(self, other):
        return (
            isinstance(other, Configuration)
            and self.geometry == other.geometry
            and np.array_equal(self.bits, other.bits)
        )

    def key(self):
        """Hashable canonical key for the edge bitset."""
        return self.bits.tobytes()

    def get(self, e):
        return bool(self.bits[self.geometry.edge_index(e)])

    def set(self, e, present):
        self.bits[self.geometry.edge_index(e)] = 1 if present else 0

    def presence(self, e):
        """Presence of any edge id, exterior ones per the boundary condition."""
        g = self.geometry
        if g.mode == "window" and not g.is_interior_edge(e):
            return g.exterior_presence(e)
        return self.get(e)

    def codes(self):
        """(V,) local code per vertex, vectorized."""
        g = self.geometry
        inc = g.incident_edges
        padded = np.concatenate([self.bits, np.zeros(1, np.uint8)])  # index -1 -> 0
        c = g.ext_code_base.copy()
        for k in range(3):
            c |= (padded[inc[:, k]] << k).astype(np.uint8)
        return c

    def degrees(self):
        return CODE_DEGREE[self.codes()]


def local_code(cfg, v):
    """3-bit code of `v`: bit0 a-edge, bit1 b-edge, bit2 c-edge."""
    code = 0
    for nb in cfg.geometry.neighbors(v):
        if cfg.presence(nb.edge):
            code |= 1 << nb.kind
    return code


def violations(cfg):
    """Vertices breaking the 1-2 law (degree 0 or 3), sorted by index."""
    g = cfg.geometry
    codes = cfg.codes()
    bad = np.nonzero((codes == 0) | (codes == 7))[0]
    return [g.vertex_at(int(i)) for i in bad]


def is_valid(cfg):
    codes = cfg.codes()
    return not np.any((codes == 0) | (codes == 7))


def log_weight(cfg, w):
    """Sum of log vertex weights; -inf iff any vertex has code 0 or 7."""
    table = w.table()
    vals = table[cfg.codes()]
    if np.any(vals == 0.0):
        return float("-inf")
    return float(np.log(vals).sum())


def flip_edge(cfg, e):
    """New configuration with one presence bit toggled."""
    out = cfg.copy()
    i = cfg.geometry.edge_index(e)
    out.bits[i] ^= 1
    return out


def translate(cfg, dx, dy):
    """Torus translation by (dx, dy) cells."""
    g = cfg.geometry
    if g.mode != "torus":
        raise GeometryError("translate is defined on tori only")
    out = Configuration(g)
    for i in range(g.n_edges):
        e = g.edge_at(i)
        out.bits[g.edge_index(g.translate_edge(e, dx, dy))] = cfg.bits[i]
    return out


# -- serialization (format "ot12 v1") ---------------------------------------
#
# Line 1: "ot12 v1 torus L=<n>" or "ot12 v1 window w=<w> h=<h> boundary=free"
#         (or boundary=fixed:<hex over exterior edges in canonical order>).
# Line 2: hex of the edge bitset, bit i of byte i//8 at position i%8.


def _pack_hex(bits):
    return np.packbits(bits, bitorder="little").tobytes().hex()


def _unpack_hex(text, n, offset):
    for i, ch in enumerate(text):
        if ch not in "0123456789abcdefABCDEF":
            raise ParseError(f"non-hex character {ch!r} in bitset", offset + i)
    expected = 2 * ((n + 7) // 8)
    if len(text) != expected:
        raise ParseError(f"bitset length {len(text)}, expected {expected} hex digits", offset)
    raw = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little")[:n]
    return bits


def to_text(cfg):
    g = cfg.geometry
    if g.mode == "torus":
        header = f"ot12 v1 torus L={g.L}"
    else:
        if g.fixed:
            ext = g.exterior_edges()
            fbits = np.array([1 if g.fixed.get(e, False) else 0 for e in ext], dtype=np.uint8)
            header = f"ot12 v1 window w={g.w} h={g.h} boundary=fixed:{_pack_hex(fbits)}"
        else:
            header = f"ot12 v1 window w={g.w} h={g.h} boundary=free"
    return header + "\n" + _pack_hex(cfg.bits) + "\n"


def _parse_kv(tok, key, offset):
    if not tok.startswith(key + "="):
        raise ParseError(f"expected {key}=..., got {tok!r}", offset)
    try:
        return int(tok[len(key) + 1 :])
    except ValueError:
        raise ParseError(f"bad integer in {tok!r}", offset + len(key) + 1) from None


def from_text(text):
    """Parse the v1 format; raises ParseError with a byte offset on damage."""
    lines = text.split("\n")
    header = lines[0]
    toks = header.split(" ")
    if len(toks) < 3 or toks[0] != "ot12":
        raise ParseError("missing 'ot12' magic", 0)
    if toks[1] != "v1":
        raise ParseError(f"unsupported version {toks[1]!r}", len(toks[0]) + 1)
    off = len(toks[0]) + len(toks[1]) + 2
    if toks[2] == "torus":
        if len(toks) != 4:
            raise ParseError("torus header needs exactly 'L=<n>'", off)
        L = _parse_kv(toks[3], "L", off + 6)
        g = Torus(L)
    elif toks[2] == "window":
        if len(toks) != 6:
            raise ParseError("window header needs 'w=<w> h=<h> boundary=...'", off)
        woff = off + 7
        w = _parse_kv(toks[3], "w", woff)
        hoff = woff + len(toks[3]) + 1
        h = _parse_kv(toks[4], "h", hoff)
        boff = hoff + len(toks[4]) + 1
        btok = toks[5]
        if btok == "boundary=free":
            g = Window(w, h)
        elif btok.startswith("boundary=fixed:"):
            hexpart = btok[len("boundary=fixed:") :]
            probe = Window(w, h)
            ext = probe.exterior_edges()
            fbits = _unpack_hex(hexpart, len(ext), boff + len("boundary=fixed:"))
            fixed = {e: True for e, b in zip(ext, fbits) if b}
            g = Window(w, h, fixed=fixed)
        else:
            raise ParseError(f"bad boundary spec {btok!r}", boff)
    else:
        raise ParseError(f"unknown geometry {toks[2]!r}", off)
    if len(lines) < 2:
        raise ParseError("missing bitset line", len(header))
    body_off = len(header) + 1
    bits = _unpack_hex(lines[1].strip(), g.n_edges, body_off)
    return Configuration(g, bits)
