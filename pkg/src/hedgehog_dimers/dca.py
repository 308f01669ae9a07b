"""Discrete complex analysis on the rotated lattice.

Black fields are dicts {square: complex}. The identity
    sum_u K(u, v) F(u) = 4 delta conj(lam) dbar F(v)
ties dbar to the Kasteleyn matrix.
"""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from .kasteleyn import WEIGHTS
from .lattice import (LAM, LAM_BAR, SQRT2, Domain, ResolutionError, build_domain,
                      classify_square, is_black, neighbours, rectangle_cells,
                      square_corners, to_complex, vertex_class)

TAU = {"B0": 1.0 + 0j, "B1": 1j, "W0": LAM, "W1": LAM_BAR}
BOUNDARY_WEIGHT = 2 * (SQRT2 - 1)


class BoundaryAccessError(KeyError):
    pass


class ConsistencyError(ValueError):
    pass


class MonodromyError(ValueError):
    def __init__(self, msg, worst=None, residual=None):
        super().__init__(msg)
        self.worst = worst
        self.residual = residual


def tau(c) -> complex:
    return TAU[classify_square(*c)]


def proj(x: complex, t: complex) -> complex:
    """Orthogonal projection of x onto the line t*R (|t| = 1)."""
    return t * (np.conj(t) * x).real


def _get(F, c):
    try:
        return F[c]
    except KeyError:
        raise BoundaryAccessError(f"no value at {c}") from None


def _diffs(F, c):
    n, m = c
    a = _get(F, (n + 1, m + 1)) - _get(F, (n - 1, m - 1))
    b = _get(F, (n + 1, m - 1)) - _get(F, (n - 1, m + 1))
    return a, b


def dbar(F, v, delta: float) -> complex:
    a, b = _diffs(F, v)
    return 0.5 * (a / (2 * delta * LAM_BAR) + b / (2 * delta * LAM))


def d(F, v, delta: float) -> complex:
    a, b = _diffs(F, v)
    return 0.5 * (a / (2 * delta * LAM) + b / (2 * delta * LAM_BAR))


def laplacian(F, u, delta: float) -> complex:
    n, m = u
    s = sum(_get(F, (n + a, m + b)) for a, b in ((2, 2), (-2, -2), (2, -2), (-2, 2)))
    return (s - 4 * _get(F, u)) / (4 * delta ** 2)


def kast_sum(F, v) -> complex:
    """sum_u K(u, v) F(u), with F extended by 0."""
    return sum(w * F.get((v[0] + a, v[1] + b), 0.0) for (a, b), w in WEIGHTS.items())


def is_admissible(F, tol: float = 1e-10) -> bool:
    scale = max([abs(x) for x in F.values()] + [1.0])
    for u, x in F.items():
        y = x if classify_square(*u) == "B0" else x * -1j
        if abs(y.imag) > tol * scale:
            return False
    return True


@dataclass(eq=False)
class SHoloField:
    delta: float
    diamond: dict           # V_diamond vertex -> complex
    squares: dict           # square -> complex
    v0: tuple | None = None
    # outside values attached to one boundary vertex: {(square, vertex): complex}
    outer: dict = field(default_factory=dict)

    def copy(self):
        return SHoloField(self.delta, dict(self.diamond), dict(self.squares), self.v0,
                          dict(self.outer))

    def value(self, a, z):
        """Value of square a as seen from its corner z."""
        return self.outer.get((a, z), self.squares[a])

    def black_part(self) -> dict:
        return {c: x for c, x in self.squares.items() if is_black(c)}

    def projection_residual(self):
        """max |Proj_tau(a) F(z) - F(a)| over squares a != v0 and their V_diamond corners."""
        worst, loc = 0.0, None
        for a, x in self.squares.items():
            if a == self.v0:
                continue
            t = tau(a)
            for z in square_corners(a):
                y = self.diamond.get(z)
                if y is None:
                    continue
                r = abs(proj(y, t) - self.outer.get((a, z), x))
                if r > worst:
                    worst, loc = r, (a, z)
        return worst, loc

    def modulus_identity_residual(self):
        """|F(z)|^2 = F(uR)^2 - F(uI)^2 = i(F(v_lam_bar)^2 - F(v_lam)^2) at interior vertices."""
        worst = 0.0
        for (p, q), y in self.diamond.items():
            around = [(p, q + 1), (p, q - 1), (p + 1, q), (p - 1, q)]
            if not all(c in self.squares for c in around) or self.v0 in around:
                continue
            b1, b2, w1, w2 = around
            uR, uI = (b1, b2) if classify_square(*b1) == "B0" else (b2, b1)
            vl, vlb = (w1, w2) if classify_square(*w1) == "W0" else (w2, w1)
            m = abs(y) ** 2
            r1 = self.squares[uR] ** 2 - self.squares[uI] ** 2
            r2 = 1j * (self.squares[vlb] ** 2 - self.squares[vl] ** 2)
            worst = max(worst, abs(m - r1), abs(m - r2))
        return worst

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "m", "Re", "Im"])
            for c in sorted(self.squares):
                x = self.squares[c]
                w.writerow([c[0], c[1], repr(float(x.real)), repr(float(x.imag))])


def diamond_vertices(d: Domain):
    return sorted(v for v in d.vertices if vertex_class(*v) == "diamond")


def outer_blacks(d: Domain):
    """Black squares outside the domain adjacent to a domain white square."""
    out = set()
    for v in d.whites:
        for u in neighbours(v):
            if u not in d.squares:
                out.add(u)
    return sorted(out)


def to_shol(F: dict, d: Domain, v0=None, check: bool = True, tol: float = 1e-8) -> SHoloField:
    """s-holomorphic extension of a discrete holomorphic black field (0 off its support)."""
    delta = d.delta
    if check:
        scale = max([abs(x) for x in F.values()] + [1e-300])
        for v in d.whites:
            if v == v0:
                continue
            r = abs(kast_sum(F, v))
            if r > tol * scale:
                raise ConsistencyError(f"dbar residual {r:.3g} at {v}")
    diamond = {}
    for p, q in diamond_vertices(d):
        diamond[(p, q)] = F.get((p, q + 1), 0.0) + F.get((p, q - 1), 0.0)
    squares = {}
    for u in d.blacks:
        squares[u] = complex(F.get(u, 0.0))
    for u in outer_blacks(d):
        squares[u] = complex(F.get(u, 0.0))
    for v in d.whites:
        squares[v] = proj(diamond[(v[0] - 1, v[1])], tau(v))
    return SHoloField(delta, diamond, squares, v0)


def shol_from_coupling(system, v0) -> SHoloField:
    """F-check = C(., v0) / delta as an s-holomorphic field."""
    delta = system.domain.delta
    F = {u: c / delta for u, c in system.coupling_function(v0).items()}
    return to_shol(F, system.domain, v0=v0)


# primitive of Re(F^2 dz)

@dataclass(eq=False)
class PrimitiveH:
    values: dict
    base: tuple
    delta: float
    edges: list = field(default_factory=list)  # (z_circ, z_bullet, increment, square)
    residual: float = 0.0
    imag_residual: float = 0.0

    def __getitem__(self, z):
        return self.values[z]

    def circ(self):
        return {z: h for z, h in self.values.items() if vertex_class(*z) == "circ"}

    def bullet(self):
        return {z: h for z, h in self.values.items() if vertex_class(*z) == "bullet"}

    def to_csv(self, path) -> None:
        s = self.delta / SQRT2
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y", "H"])
            for z in sorted(self.values):
                w.writerow([repr(z[0] * s), repr(z[1] * s), repr(float(self.values[z]))])


def square_diagonal(a):
    """(V_circ corner, V_bullet corner) of square a."""
    n, m = a
    c = [(n + 1, m), (n - 1, m)] if is_black(a) else [(n, m + 1), (n, m - 1)]
    return (c[0], c[1]) if vertex_class(*c[0]) == "circ" else (c[1], c[0])


def h_edges(F: SHoloField, squares):
    out = []
    for a in sorted(squares):
        if a == F.v0 or a not in F.squares:
            continue
        zo, zb = square_diagonal(a)
        inc = F.squares[a] ** 2 * (to_complex(zb, F.delta) - to_complex(zo, F.delta))
        out.append((zo, zb, inc, a))
    return out


def primitive_H(F: SHoloField, squares, base=None, tol: float = 1e-9) -> PrimitiveH:
    """Breadth-first integration of H_bullet(zb) - H_circ(zo) = F(a)^2 (zb - zo)."""
    edges = h_edges(F, squares)
    adj = {}
    for zo, zb, inc, a in edges:
        adj.setdefault(zo, []).append((zb, inc.real))
        adj.setdefault(zb, []).append((zo, -inc.real))
    for k in adj:
        adj[k].sort()
    if base is None:
        base = min(z for z in adj if vertex_class(*z) == "circ")
    H = {base: 0.0}
    q = deque([base])
    while q:
        a = q.popleft()
        for b, inc in adj.get(a, ()):
            if b not in H:
                H[b] = H[a] + inc
                q.append(b)
    scale = max([abs(e[2]) for e in edges] + [1e-300])
    worst, loc, im = 0.0, None, 0.0
    for zo, zb, inc, a in edges:
        im = max(im, abs(inc.imag))
        r = abs(H[zb] - H[zo] - inc.real)
        if r > worst:
            worst, loc = r, zb
    if worst > tol * scale:
        raise MonodromyError(f"loop closure fails near {loc}: residual {worst:.3g}",
                             worst=loc, residual=worst)
    return PrimitiveH(H, base, F.delta, edges, worst / scale, im / scale)


LEAP = ((2, 2), (-2, -2), (2, -2), (-2, 2))


def leapfrog(H: PrimitiveH, z, outside: set | None = None) -> float:
    """Leap-frog Laplacian; on V_bullet, missing neighbours in `outside` carry H = 0 and
    weight 2(sqrt2 - 1)."""
    delta = H.delta
    cls = vertex_class(*z)
    if z not in H.values:
        raise KeyError(f"{z} has no H value")
    nbrs = [(z[0] + a, z[1] + b) for a, b in LEAP]
    if cls == "circ":
        if not all(w in H.values for w in nbrs):
            raise BoundaryAccessError(f"{z} is not an interior white vertex")
        return sum(H[w] - H[z] for w in nbrs) / (4 * delta ** 2)
    if cls != "bullet":
        raise ValueError(f"{z} is not a V_circ or V_bullet vertex")
    outside = outside or set()
    num, cz = 0.0, 0.0
    for w in nbrs:
        if w in H.values:
            c, hw = 1.0, H[w]
        elif w in outside:
            c, hw = BOUNDARY_WEIGHT, 0.0
        else:
            raise BoundaryAccessError(f"{z} is not an interior black vertex")
        num += c * (hw - H[z])
        cz += c
    return num / (cz * delta ** 2)


def bullet_weight_sum(n_boundary: int) -> float:
    return (4 - n_boundary) + n_boundary * BOUNDARY_WEIGHT


# Schwarz reflection and kernels

def schwarz_reflect(F: dict, tol: float = 1e-10) -> dict:
    """Extend a field on m >= 0 with real axis values by F(conj u) = conj F(u)."""
    scale = max([abs(x) for x in F.values()] + [1.0])
    for u, x in F.items():
        if u[1] < 0:
            raise ValueError(f"{u} lies below the axis")
        if u[1] == 0 and abs(complex(x).imag) > tol * scale:
            raise ValueError(f"non-real axis value at {u}")
    out = dict(F)
    for (n, m), x in F.items():
        if m > 0:
            out[(n, -m)] = np.conj(x)
    return out


def window_domain(center: complex, radius: float, delta: float) -> Domain:
    """Rectangular hedgehog of cells covering the disk of the given radius."""
    s = delta / SQRT2
    i0 = int(np.floor((center.real / s - 1) / 4))
    j0 = int(np.round(center.imag / s / 4))
    k = int(np.ceil(radius / (4 * s))) + 1
    return build_domain(delta, cells=rectangle_cells(2 * k + 1, 2 * k + 1, i0 - k, j0 - k))


def plane_pole(z, v, delta: float) -> complex:
    """Continuum full-plane kernel lam / (pi (z - v)) seen by the discrete normalization."""
    return LAM / (np.pi * (z - v))


@dataclass(eq=False)
class KernelField:
    values: dict
    domain: Domain
    rim: list
    v0: tuple
    radius: float


def plane_kernel(v0, radius: float, delta: float, center: complex | None = None) -> KernelField:
    """Solve sum_u K(u, v) F(u) = [v = v0] / delta on a window with asymptotic rim values."""
    if is_black(v0):
        raise TypeError("v0 must be a white square")
    if radius < 16 * delta:
        raise ResolutionError(f"window radius {radius} below 16*delta")
    zv = to_complex(v0, delta)
    center = zv if center is None else center
    dom = window_domain(center, radius, delta)
    if v0 not in dom.squares:
        raise ResolutionError("v0 outside the window")
    rim = outer_blacks(dom)
    # C(., v0) is admissible for W0 and i C(., v0) for W1; project the rim data to match
    g = 1.0 if classify_square(*v0) == "W0" else 1j
    rimval = {u: proj(g * plane_pole(to_complex(u, delta), zv, delta), tau(u)) / g for u in rim}
    bi = {b: k for k, b in enumerate(dom.blacks)}
    wi = {w: k for k, w in enumerate(dom.whites)}
    rows, cols, vals_ = [], [], []
    rhs = np.zeros(len(dom.whites), dtype=complex)
    rhs[wi[v0]] = 1.0 / delta
    for v, j in wi.items():
        for (a, b), w in WEIGHTS.items():
            u = (v[0] + a, v[1] + b)
            if u in bi:
                rows.append(j)
                cols.append(bi[u])
                vals_.append(w)
            elif u in rimval:
                rhs[j] -= w * rimval[u]
    KT = sparse.csc_matrix((vals_, (rows, cols)), shape=(len(wi), len(bi)), dtype=complex)
    x = spla.spsolve(KT, rhs)
    vals = {u: x[i] for u, i in bi.items()}
    vals.update(rimval)
    return KernelField(vals, dom, rim, v0, radius)


def halfplane_kernel(v0, radius: float, delta: float) -> KernelField:
    """F_H(u) = F_C(u) + conj F_C(conj u) on the upper half window."""
    if v0[1] <= 0:
        raise ValueError("v0 must lie above the axis")
    zv = to_complex(v0, delta)
    kc = plane_kernel(v0, radius, delta, center=complex(zv.real, 0.0))
    F = kc.values
    vals = {}
    for (n, m), x in F.items():
        if m >= 0 and (n, -m) in F:
            vals[(n, m)] = x + np.conj(F[(n, -m)])
    return KernelField(vals, kc.domain, kc.rim, v0, radius)
