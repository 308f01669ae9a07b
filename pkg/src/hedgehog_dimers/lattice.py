"""Rotated checkerboard lattice, square/vertex types and hedgehog domains.

A square (n, m) with n + m even has its center at (delta*n/sqrt2, delta*m/sqrt2)
and corners (n+-1, m), (n, m+-1). Edge neighbours sit at (n+-1, m+-1):
u + delta*lam is (n+1, m+1) and u + delta*lam_bar is (n+1, m-1).
Black squares have n, m even, white squares n, m odd.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

LAM = np.exp(1j * np.pi / 4)
LAM_BAR = np.conj(LAM)
SQRT2 = np.sqrt(2.0)

# offsets in (n, m) units
D_LAM = (1, 1)
D_LAM_BAR = (1, -1)
DIAG = ((1, 1), (-1, -1), (-1, 1), (1, -1))
CORNERS = ((1, 0), (-1, 0), (0, 1), (0, -1))

# block sides: name -> (offset of neighbouring block, outward normal)
SIDES = {
    "NE": ((2, 2), np.exp(1j * np.pi / 4)),
    "NW": ((-2, 2), np.exp(3j * np.pi / 4)),
    "SW": ((-2, -2), np.exp(-3j * np.pi / 4)),
    "SE": ((2, -2), np.exp(-1j * np.pi / 4)),
}
# boundary class from the pair of exposed sides
CLASS_OF_SIDES = {
    frozenset({"NE", "SE"}): "+",
    frozenset({"NW", "SW"}): "-",
    frozenset({"NW", "NE"}): "#",
    frozenset({"SW", "SE"}): "b",
}
CLASS_NAMES = {"+": "right", "-": "left", "#": "upper", "b": "lower"}


class LatticeError(ValueError):
    pass


class TopologyError(LatticeError):
    pass


class ClassificationError(LatticeError):
    pass


class ResolutionError(LatticeError):
    pass


def classify_square(n: int, m: int) -> str:
    if n % 2 != m % 2:
        raise LatticeError(f"({n},{m}) is not a square center")
    if n % 2 == 0:
        return "B0" if (n + m) % 4 == 0 else "B1"
    return "W0" if (n + m) % 4 == 2 else "W1"


def is_black(c) -> bool:
    return c[0] % 2 == 0


def vertex_class(p: int, q: int) -> str:
    """'circ' (V_o), 'bullet' (V_*) or 'diamond' (V_<>)."""
    if (p + q) % 2 == 0:
        raise LatticeError(f"({p},{q}) is not a vertex")
    if p % 2 == 0:
        return "diamond"
    return "circ" if (p + q) % 4 == 1 else "bullet"


def square_corners(c):
    n, m = c
    return [(n + a, m + b) for a, b in CORNERS]


def neighbours(c):
    n, m = c
    return [(n + a, m + b) for a, b in DIAG]


def block_of(c):
    """V_* center of the unique 2delta-block containing square c."""
    n, m = c
    if n % 2 == 0:
        b = (n + 1, m)
        return b if (b[0] + b[1]) % 4 == 3 else (n - 1, m)
    b = (n, m + 1)
    return b if (b[0] + b[1]) % 4 == 3 else (n, m - 1)


def block_squares(b):
    p, q = b
    return [(p + 1, q), (p - 1, q), (p, q + 1), (p, q - 1)]


def side_squares(b, side):
    p, q = b
    (dx, dy), _ = SIDES[side]
    return [(p + dx // 2, q), (p, q + dy // 2)]


def side_midpoint(b, side):
    (dx, dy), _ = SIDES[side]
    return (b[0] + dx // 2, b[1] + dy // 2)


def cell_center(i: int, j: int):
    return (4 * i + 1, 4 * j)


def cell_blocks(i: int, j: int):
    p, q = cell_center(i, j)
    return [(p + 2, q), (p - 2, q), (p, q + 2), (p, q - 2)]


def to_complex(c, delta: float) -> complex:
    return complex(c[0], c[1]) * delta / SQRT2


@dataclass(eq=False)
class Domain:
    delta: float
    squares: frozenset
    cells: frozenset | None = None
    classes: dict = field(default_factory=dict)
    normals: dict = field(default_factory=dict)
    is_even: bool = False
    is_hedgehog: bool = False
    irregular_blocks: tuple = ()
    spikes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.blacks = sorted(c for c in self.squares if c[0] % 2 == 0)
        self.whites = sorted(c for c in self.squares if c[0] % 2 == 1)
        verts = set()
        for c in self.squares:
            verts.update(square_corners(c))
        self.vertices = frozenset(verts)

    def __len__(self):
        return len(self.squares)

    def __contains__(self, c):
        return c in self.squares

    def z(self, c) -> complex:
        return to_complex(c, self.delta)

    def blocks(self):
        return sorted({block_of(c) for c in self.squares})

    def is_interior_square(self, c) -> bool:
        return all(u in self.squares for u in neighbours(c))

    def interior_vertex(self, v) -> bool:
        """All squares around v (two black, two white) belong to the domain."""
        p, q = v
        return all(a in self.squares for a in ((p + 1, q), (p - 1, q), (p, q + 1), (p, q - 1)))

    def boundary_vertices(self, kind: str):
        return sorted(v for v in self.vertices
                      if vertex_class(*v) == kind and not self.interior_vertex(v))

    def boundary_edge_squares(self):
        """Squares with at least one edge on the boundary."""
        return sorted(c for c in self.squares if not self.is_interior_square(c))

    def to_json(self) -> str:
        if self.cells is not None:
            d = {"delta": self.delta, "kind": "cells",
                 "cells": [list(c) for c in sorted(self.cells)]}
        else:
            d = {"delta": self.delta, "kind": "even",
                 "squares": [list(c) for c in sorted(self.squares)]}
        return json.dumps(d, sort_keys=True)


def _edge_connected(items, adj) -> bool:
    items = set(items)
    if not items:
        return False
    start = min(items)
    seen = {start}
    q = deque([start])
    while q:
        a = q.popleft()
        for b in adj(a):
            if b in items and b not in seen:
                seen.add(b)
                q.append(b)
    return len(seen) == len(items)


def _has_holes(items, adj, pad_box) -> bool:
    """True if the complement of items has a bounded component."""
    items = set(items)
    (x0, x1), (y0, y1) = pad_box
    free = {(x, y) for x in range(x0, x1 + 1) for y in range(y0, y1 + 1)
            if (x, y) not in items}
    seen = set()
    border = [c for c in free if c[0] in (x0, x1) or c[1] in (y0, y1)]
    q = deque(border)
    seen.update(border)
    while q:
        a = q.popleft()
        for b in adj(a):
            if b in free and b not in seen:
                seen.add(b)
                q.append(b)
    return len(seen) != len(free)


def _cell_adj(c):
    i, j = c
    return [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)]


def _classify(squares, delta, strict):
    sq = set(squares)
    classes, normals, spikes = {}, {}, {}
    irregular = []
    even = True
    for b in sorted({block_of(c) for c in sq}):
        if not all(s in sq for s in block_squares(b)):
            even = False
            continue
        exposed = [s for s, (off, _) in SIDES.items()
                   if not all(c in sq for c in block_squares((b[0] + off[0], b[1] + off[1])))]
        for s in exposed:
            normals[side_midpoint(b, s)] = SIDES[s][1]
        if not exposed:
            continue
        cls = CLASS_OF_SIDES.get(frozenset(exposed)) if len(exposed) == 2 else None
        if cls is None:
            irregular.append((b, tuple(sorted(exposed))))
            if strict:
                raise ClassificationError(
                    f"block at {b} has exposed sides {sorted(exposed)}")
            continue
        spikes[b] = cls
        for s in exposed:
            for c in side_squares(b, s):
                classes[c] = cls
    return classes, normals, spikes, tuple(irregular), even


def boundary_classify(d: Domain, strict: bool = True) -> Domain:
    classes, normals, spikes, irregular, even = _classify(d.squares, d.delta, strict)
    d.classes, d.normals, d.spikes = classes, normals, spikes
    d.irregular_blocks = irregular
    d.is_even = even
    d.is_hedgehog = even and not irregular
    return d


def squares_from_cells(cells: Iterable) -> frozenset:
    sq = set()
    for i, j in cells:
        for b in cell_blocks(i, j):
            sq.update(block_squares(b))
    return frozenset(sq)


def _check_cells(cells):
    if not cells:
        raise TopologyError("empty cell set")
    if not _edge_connected(cells, _cell_adj):
        raise TopologyError("cells are not edge-connected")
    xs = [c[0] for c in cells]
    ys = [c[1] for c in cells]
    box = ((min(xs) - 1, max(xs) + 1), (min(ys) - 1, max(ys) + 1))
    if _has_holes(cells, _cell_adj, box):
        raise TopologyError("cells are not simply connected")


def build_domain(delta: float, cells=None, squares=None) -> Domain:
    """Domain from dashed cells or from a raw square set; never raises on shape."""
    if cells is not None:
        cells = frozenset(tuple(c) for c in cells)
        _check_cells(cells)
        sq = squares_from_cells(cells)
    else:
        sq = frozenset(tuple(c) for c in squares)
        for c in sq:
            classify_square(*c)
    d = Domain(delta=float(delta), squares=sq, cells=cells)
    return boundary_classify(d, strict=False)


def build_hedgehog(delta: float, cells) -> Domain:
    """Union of the 2delta-blocks centered at the edge midpoints of each cell.

    Cell (i, j) is centered at (4i+1, 4j). The hedgehog flag is computed from
    the block definition (zero or two consecutive exposed sides); polyominoes
    with concave corners produce single-side blocks and are flagged.
    """
    return build_domain(delta, cells=cells)


def cells_in_disk(delta: float, radius: float, center: complex = 0j):
    s = delta / SQRT2
    k = int(radius / (4 * s)) + 2
    out = []
    for i in range(-k, k + 1):
        for j in range(-k, k + 1):
            cx, cy = (4 * i + 1) * s, 4 * j * s
            corners = [complex(cx + a, cy + b) for a in (-2 * s, 2 * s) for b in (-2 * s, 2 * s)]
            if all(abs(c - center) <= radius for c in corners):
                out.append((i, j))
    return out


def approximate_disk(delta: float, radius: float) -> Domain:
    """Domain from all dashed cells whose closed cell lies inside the disk."""
    if radius < 8 * delta:
        raise ResolutionError(f"radius {radius} below 8*delta")
    cells = cells_in_disk(delta, radius)
    if not cells:
        raise ResolutionError("no cell fits inside the disk")
    try:
        return build_domain(delta, cells=cells)
    except TopologyError as e:
        raise ResolutionError(str(e)) from e


def rectangle_cells(w: int, h: int, i0: int = 0, j0: int = 0):
    return [(i0 + i, j0 + j) for i in range(w) for j in range(h)]


def inscribed_rectangle(delta: float, radius: float) -> Domain:
    """Largest centered square block of cells inside the disk (a true hedgehog)."""
    s = delta / SQRT2
    best = None
    for k in range(1, int(radius / (4 * s)) + 3):
        i0 = -(k // 2)
        cells = rectangle_cells(k, k, i0, i0)
        if all(c in set(cells_in_disk(delta, radius)) for c in cells):
            best = cells
    if best is None:
        raise ResolutionError("no cell fits inside the disk")
    return build_domain(delta, cells=best)


def domain_from_json(text: str) -> Domain:
    d = json.loads(text)
    if not isinstance(d, dict) or "delta" not in d:
        raise LatticeError("domain json needs a delta field")
    kind = d.get("kind", "cells")
    if kind in ("cells", "hedgehog"):
        return build_domain(d["delta"], cells=[tuple(c) for c in d["cells"]])
    if kind == "even":
        return build_domain(d["delta"], squares=[tuple(c) for c in d["squares"]])
    raise LatticeError(f"unknown domain kind {kind!r}")


def strip_squares(length: int):
    """2 x length strip of unrotated dominoes' squares, laid along the lambda axis."""
    sq = []
    for k in range(length):
        sq.append((k, k))
        sq.append((k - 1, k + 1))
    return frozenset(sq)
