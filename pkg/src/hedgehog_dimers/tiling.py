"""Domino tilings: enumeration, exact sampling, Glauber moves and Thurston heights."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from .kasteleyn import WEIGHTS, KasteleynSystem, kasteleyn_matrix
from .lattice import Domain, build_domain, is_black, neighbours

MAX_ENUM = 28
PIVOT_TOL = 1e-12


class GuardError(ValueError):
    pass


class DegeneracyError(RuntimeError):
    pass


class IntegrityError(ValueError):
    pass


@dataclass(eq=False)
class Tiling:
    domain: Domain
    matching: dict  # black -> white

    def __post_init__(self):
        if len(self.matching) != len(self.domain.blacks):
            raise IntegrityError("matching does not cover every black square")
        if set(self.matching.values()) != set(self.domain.whites):
            raise IntegrityError("matching is not a bijection onto the white squares")
        for u, v in self.matching.items():
            if v not in neighbours(u):
                raise IntegrityError(f"{u} and {v} are not adjacent")

    def key(self) -> tuple:
        return tuple(sorted(self.matching.items()))

    def dominoes(self):
        return sorted(self.matching.items())

    def contains(self, u, v) -> bool:
        return self.matching.get(u) == v

    def to_list(self):
        return [[u[0], u[1], v[0], v[1]] for u, v in self.dominoes()]

    def to_json(self) -> str:
        return json.dumps(self.to_list())


def tiling_from_list(d: Domain, rows) -> Tiling:
    return Tiling(d, {(a, b): (c, e) for a, b, c, e in rows})


def enumerate_tilings(d: Domain, limit: int = MAX_ENUM):
    """All perfect matchings by branching on the smallest uncovered square."""
    if len(d.squares) > limit:
        raise GuardError(f"{len(d.squares)} squares exceeds the enumeration guard {limit}")
    out = []

    def rec(free, acc):
        if not free:
            out.append(dict(acc))
            return
        s = min(free)
        for t in neighbours(s):
            if t in free:
                u, v = (s, t) if is_black(s) else (t, s)
                acc[u] = v
                rec(free - {s, t}, acc)
                del acc[u]

    rec(frozenset(d.squares), {})
    return [Tiling(d, m) for m in out]


def _dense_coupling(blacks, whites):
    K, bi, wi = kasteleyn_matrix(blacks, whites)
    return np.linalg.inv(K).T, bi, wi


def sample_exact(s: KasteleynSystem, seed=None, rng=None, check_tol: float = 1e-8) -> Tiling:
    """Sequential determinantal sampling with rank-1 conditioning updates."""
    if s.log_partition_function() == -np.inf:
        raise ValueError("domain has no tilings")
    rng = rng if rng is not None else np.random.default_rng(seed)
    blacks, whites = list(s.blacks), list(s.whites)
    C = np.array(s.coupling_matrix())
    bi = dict(s.black_index)
    wi = dict(s.white_index)
    alive = np.ones(len(blacks), dtype=bool)
    matching = {}
    for v in whites:
        j = wi[v]
        cand, prob = [], []
        for (dn, dm), w in WEIGHTS.items():
            u = (v[0] + dn, v[1] + dm)
            i = bi.get(u)
            if i is not None and alive[i]:
                cand.append(u)
                prob.append(abs(w * C[i, j]))
        prob = np.asarray(prob)
        tot = prob.sum()
        if abs(tot - 1.0) > check_tol:
            raise DegeneracyError(f"conditional probabilities at {v} sum to {tot}")
        k = int(np.searchsorted(np.cumsum(prob), rng.random() * tot, side="right"))
        u = cand[min(k, len(cand) - 1)]
        i = bi[u]
        matching[u] = v
        alive[i] = False
        piv = C[i, j]
        if abs(piv) < PIVOT_TOL:
            # refactor the remaining domain from scratch
            rb = [b for b in blacks if alive[bi[b]]]
            rw = [w for w in whites if w not in matching.values()]
            Cr, rbi, rwi = _dense_coupling(rb, rw)
            C = np.zeros_like(C)
            for b, a in rbi.items():
                for w_, c in rwi.items():
                    C[bi[b], wi[w_]] = Cr[a, c]
            continue
        C = C - np.outer(C[:, j], C[i, :]) / piv
    return Tiling(s.domain, matching)


def flippable_faces(d: Domain):
    """Vertices whose four surrounding squares all lie in the domain."""
    return [v for v in sorted(d.vertices) if d.interior_vertex(v)]


def glauber_step(t: Tiling, rng, faces=None) -> Tiling:
    faces = faces if faces is not None else flippable_faces(t.domain)
    p, q = faces[rng.integers(len(faces))]
    flip = rng.random() < 0.5
    e, w, n, s_ = (p + 1, q), (p - 1, q), (p, q + 1), (p, q - 1)
    m = t.matching
    pairs_a = [(e, n), (w, s_)]
    pairs_b = [(e, s_), (w, n)]

    def has(pairs):
        return all((m.get(a) == b) if is_black(a) else (m.get(b) == a) for a, b in pairs)

    if not flip:
        return t
    for cur, new in ((pairs_a, pairs_b), (pairs_b, pairs_a)):
        if has(cur):
            m2 = dict(m)
            for a, b in cur:
                m2.pop(a if is_black(a) else b)
            for a, b in new:
                if is_black(a):
                    m2[a] = b
                else:
                    m2[b] = a
            return Tiling(t.domain, m2)
    return t


# Thurston height function

def edge_squares(a, b):
    """The two squares on either side of the lattice edge a -> b and the left one."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    s1, s2 = (a[0] + dx, a[1]), (a[0], a[1] + dy)
    left = s2 if dx * dy > 0 else s1
    right = s1 if left == s2 else s2
    return left, right


def edge_sign(a, b, squares) -> int:
    """+1 if the square on the left of a -> b is black, -1 if white."""
    left, right = edge_squares(a, b)
    if left in squares:
        return 1 if is_black(left) else -1
    return -1 if is_black(right) else 1


def edge_domino(a, b):
    left, right = edge_squares(a, b)
    return (left, right) if is_black(left) else (right, left)


def vertex_edges(a, vertices, squares):
    for dx in (1, -1):
        for dy in (1, -1):
            b = (a[0] + dx, a[1] + dy)
            if b not in vertices:
                continue
            left, right = edge_squares(a, b)
            if left in squares or right in squares:
                yield b


@dataclass(eq=False)
class HeightField:
    values: dict
    base: tuple

    def __getitem__(self, z):
        return self.values[z]


def height_increment(a, b, squares, crossed: bool) -> int:
    s = edge_sign(a, b, squares)
    return -3 * s if crossed else s


def height_from_tiling(t: Tiling, base=None) -> HeightField:
    d = t.domain
    base = base if base is not None else min(d.vertices)
    if base not in d.vertices:
        raise ValueError(f"base {base} is not a vertex of the domain")
    sq = d.squares
    H = {base: 0}
    q = deque([base])
    while q:
        a = q.popleft()
        for b in vertex_edges(a, d.vertices, sq):
            if b in H:
                continue
            u, v = edge_domino(a, b)
            H[b] = H[a] + height_increment(a, b, sq, t.matching.get(u) == v)
            q.append(b)
    for a in H:
        for b in vertex_edges(a, d.vertices, sq):
            u, v = edge_domino(a, b)
            if H[b] - H[a] != height_increment(a, b, sq, t.matching.get(u) == v):
                raise IntegrityError(f"height loop fails across {a} -> {b}")
    return HeightField(H, base)


def tiling_from_height(d: Domain, h: HeightField) -> Tiling:
    m = {}
    for a in h.values:
        for b in vertex_edges(a, d.vertices, d.squares):
            if abs(h[b] - h[a]) == 3:
                u, v = edge_domino(a, b)
                m[u] = v
    return Tiling(d, m)


def boundary_heights(d: Domain, h: HeightField) -> dict:
    return {z: h[z] for z in sorted(h.values) if not d.interior_vertex(z)}


def fig1_domain() -> Domain:
    """Eight-square example tiled by four dominoes, in rotated coordinates."""
    ll = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (0, 2), (1, 2), (2, 2)]
    return build_domain(1.0, squares=[(x - y, x + y) for x, y in ll])


def fig1_tiling() -> Tiling:
    d = fig1_domain()
    pairs = [((0, 0), (1, 0)), ((1, 1), (2, 1)), ((1, 2), (2, 2)), ((0, 1), (0, 2))]
    m = {}
    for (x1, y1), (x2, y2) in pairs:
        a, b = (x1 - y1, x1 + y1), (x2 - y2, x2 + y2)
        u, v = (a, b) if is_black(a) else (b, a)
        m[u] = v
    return Tiling(d, m)


def fig1_vertex(X: int, Y: int):
    return (X - Y, X + Y - 1)
