"""Height expectations and covariances from the coupling function; convergence experiments."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import continuum
from .dca import diamond_vertices, plane_kernel
from .kasteleyn import KasteleynSystem, assemble
from .lattice import (LAM, SQRT2, Domain, ResolutionError, approximate_disk, classify_square,
                      to_complex)
from .tiling import edge_domino, edge_sign, edge_squares, vertex_edges


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class PathSpec:
    vertices: tuple
    edges: tuple  # (sign, black, white, crossable)

    def __len__(self):
        return len(self.edges)


def make_path(d: Domain, vertices) -> PathSpec:
    vs = [tuple(v) for v in vertices]
    edges = []
    for a, b in zip(vs[:-1], vs[1:]):
        if abs(a[0] - b[0]) != 1 or abs(a[1] - b[1]) != 1:
            raise PathError(f"{a} and {b} are not adjacent vertices")
        left, right = edge_squares(a, b)
        if left not in d.squares and right not in d.squares:
            raise PathError(f"edge {a} -> {b} leaves the domain")
        u, v = edge_domino(a, b)
        edges.append((edge_sign(a, b, d.squares), u, v, u in d.squares and v in d.squares))
    for v in vs:
        if v not in d.vertices:
            raise PathError(f"{v} is not a vertex of the domain")
    return PathSpec(tuple(vs), tuple(edges))


def zigzag_path(d: Domain, start, direction: int) -> PathSpec:
    """Horizontal zigzag from start in direction +-1, stopping before the boundary."""
    p, q = start
    vs = [(p, q)]
    k = 0
    while True:
        dy = 1 if k % 2 == 0 else -1
        a, b = (p + direction, q), (p, q + dy)
        if a not in d.squares or b not in d.squares:
            break
        p, q = p + direction, q + dy
        vs.append((p, q))
        k += 1
    return make_path(d, vs)


def snap_vertex(z: complex, delta: float):
    """Round to the lattice, then move to a V_diamond vertex (p even, q odd) by +1 steps."""
    s = delta / SQRT2
    p, q = int(round(z.real / s)), int(round(z.imag / s))
    if p % 2:
        p += 1
    if q % 2 == 0:
        q += 1
    return (p, q)


def expected_height(s: KasteleynSystem, path: PathSpec) -> float:
    """E[h(end)] - h(start) = sum of sign * (1 - 4 p_e)."""
    tot = 0.0
    for sign, u, v, ok in path.edges:
        p = s.edge_probability(u, v) if ok else 0.0
        tot += sign * (1 - 4 * p)
    return tot


def expected_height_field(s: KasteleynSystem, base=None) -> dict:
    d = s.domain
    P = s.edge_probabilities()
    base = base if base is not None else min(d.vertices)
    H = {base: 0.0}
    q = deque([base])
    while q:
        a = q.popleft()
        for b in vertex_edges(a, d.vertices, d.squares):
            if b in H:
                continue
            u, v = edge_domino(a, b)
            H[b] = H[a] + edge_sign(a, b, d.squares) * (1 - 4 * P.get((u, v), 0.0))
            q.append(b)
    return H


def height_covariance_exact(s: KasteleynSystem, p1: PathSpec, p2: PathSpec) -> float:
    if not p1.edges or not p2.edges:
        return 0.0
    C = s.coupling_matrix()
    bi, wi = s.black_index, s.white_index

    def c(u, v):
        return C[bi[u], wi[v]]

    tot = 0.0
    for s1, u1, v1, ok1 in p1.edges:
        if not ok1:
            continue
        pa = abs(s.k(u1, v1) * c(u1, v1))
        for s2, u2, v2, ok2 in p2.edges:
            if not ok2:
                continue
            pb = abs(s.k(u2, v2) * c(u2, v2))
            if (u1, v1) == (u2, v2):
                cv = pa * (1 - pa)
            elif u1 == u2 or v1 == v2:
                cv = -pa * pb
            else:
                det = c(u1, v1) * c(u2, v2) - c(u1, v2) * c(u2, v1)
                cv = abs(s.k(u1, v1) * s.k(u2, v2) * det) - pa * pb
            tot += 16 * s1 * s2 * cv
    return float(tot)


def height_samples(tilings, path: PathSpec) -> np.ndarray:
    """Height increments along a path for a list of tilings."""
    out = []
    for t in tilings:
        h = 0
        for sign, u, v, ok in path.edges:
            h += -3 * sign if (ok and t.matching.get(u) == v) else sign
        out.append(h)
    return np.array(out, dtype=float)


# convergence experiments

def shol_diamond_values(s: KasteleynSystem, v0, scale: complex = 1.0) -> dict:
    """V_diamond values F(uR) + F(uI) of F = scale * C(., v0) / delta."""
    d = s.domain
    col = s.coupling_column(v0)
    F = {u: scale * col[i] / d.delta for i, u in enumerate(s.blacks)}
    out = {}
    for p, q in diamond_vertices(d):
        a, b = (p, q + 1), (p, q - 1)
        if a in F and b in F:
            out[(p, q)] = F[a] + F[b]
    return out


def _check_schedule(deltas, radius):
    deltas = [float(x) for x in deltas]
    if len(deltas) < 2 or any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("mesh schedule must be strictly decreasing with at least 2 entries")
    if deltas[0] > radius / 8:
        raise ResolutionError("coarsest mesh must satisfy delta <= radius / 8")
    return deltas


def rbvp_row(delta: float, radius: float = 1.0, v0=(1, 1), inner: float = 0.25,
             outer: float = 0.5) -> dict:
    """sup over the annulus of |F_delta - 2 f_disk^v| at V_diamond vertices."""
    d = approximate_disk(delta, radius)
    s = assemble(d)
    zv = to_complex(v0, delta)
    f = continuum.f_disk_at(zv, radius, LAM)
    vals = shol_diamond_values(s, v0)
    err, npts = 0.0, 0
    for z, x in vals.items():
        w = to_complex(z, delta)
        if inner * radius <= abs(w) <= outer * radius:
            err = max(err, float(abs(x - 2 * f(w))))
            npts += 1
    return {"delta": delta, "squares": len(d), "points": npts, "error": err}


def rbvp_convergence(deltas, radius: float = 1.0, **kw) -> list:
    return [rbvp_row(x, radius, **kw) for x in _check_schedule(deltas, radius)]


def coupling_asymptotics_row(delta: float, radius: float = 1.0, v0=(1, 1), inner: float = 0.25,
                             outer: float = 0.5, window: float = 2.0) -> dict:
    """sup |F_check - F_plane - 2 (f_disk^v - lam / (2 pi (z - v)))| over the annulus.

    v0 in W0 uses C / delta; v0 in W1 uses i C / delta with residue phase i lam.
    """
    typ = classify_square(*v0)
    if typ not in ("W0", "W1"):
        raise TypeError("v0 must be white")
    scale = 1.0 if typ == "W0" else 1j
    phase = LAM * scale
    d = approximate_disk(delta, radius)
    s = assemble(d)
    zv = to_complex(v0, delta)
    vals = shol_diamond_values(s, v0, scale)
    kern = plane_kernel(v0, window * radius, delta, center=0j).values
    f = continuum.f_disk_at(zv, radius, phase)
    err, npts = 0.0, 0
    for (p, q), x in vals.items():
        w = to_complex((p, q), delta)
        if not inner * radius <= abs(w) <= outer * radius:
            continue
        fc = scale * (kern[(p, q + 1)] + kern[(p, q - 1)])
        reg = 2 * (f(w) - phase / (2 * np.pi * (w - zv)))
        err = max(err, float(abs(x - fc - reg)))
        npts += 1
    return {"delta": delta, "squares": len(d), "points": npts, "error": err}


def coupling_asymptotics_check(deltas, radius: float = 1.0, **kw) -> list:
    return [coupling_asymptotics_row(x, radius, **kw) for x in _check_schedule(deltas, radius)]


def gff_row(delta: float, z1: complex = 0.25, z2: complex = -0.25, radius: float = 1.0) -> dict:
    """Exact Cov(h(z1), h(z2)) from zigzag paths to the boundary, against the GFF prediction."""
    d = approximate_disk(delta, radius)
    s = assemble(d)
    a = snap_vertex(z1, delta)
    b = snap_vertex(z2, delta)
    p1 = zigzag_path(d, a, 1 if z1.real >= 0 else -1)
    p2 = zigzag_path(d, b, 1 if z2.real >= 0 else -1)
    cov = height_covariance_exact(s, p1, p2)
    za, zb = to_complex(a, delta) / radius, to_complex(b, delta) / radius
    tgt = continuum.gff_two_point(za, zb)
    return {"delta": delta, "squares": len(d), "cov": cov, "target": tgt,
            "error": abs(cov - tgt) / abs(tgt)}


def gff_covariance(deltas, z1: complex = 0.25, z2: complex = -0.25, radius: float = 1.0) -> list:
    return [gff_row(x, z1, z2, radius) for x in _check_schedule(deltas, radius)]


def decreasing(rows, key="error") -> bool:
    e = [r[key] for r in rows]
    return all(b < a for a, b in zip(e, e[1:]))
