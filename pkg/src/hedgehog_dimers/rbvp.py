"""Boundary-modified coupling function solving the discrete Riemann boundary value problem."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dca import (LEAP, MonodromyError, PrimitiveH, SHoloField, kast_sum, leapfrog,
                  primitive_H, shol_from_coupling, square_diagonal, tau)
from .kasteleyn import KasteleynSystem, assemble
from .lattice import (LAM, LAM_BAR, SQRT2, ClassificationError, Domain, block_squares,
                      cell_center, classify_square)

R2 = SQRT2 - 1
TOL = 1e-10


class InputError(ValueError):
    pass


class ConstructionError(RuntimeError):
    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


def sqrt_normal(n: complex) -> complex:
    """Principal square root with arg in (-pi/2, pi/2]."""
    r = np.sqrt(complex(n))
    if abs(r.real) < 1e-15 and r.imag < 0:
        r = -r
    return r


def _add(b, off):
    return (b[0] + off[0], b[1] + off[1])


def spike_table(b, cls, Fc: SHoloField):
    """New values for the spike block centered at b: ({apex or vertex: value},
    {(outside square, boundary vertex): value})."""
    S = Fc.squares
    if cls in "#b":
        sy = 1 if cls == "#" else -1
        uR, uI = _add(b, (1, 0)), _add(b, (-1, 0))
        apex = _add(b, (0, sy))
        tI, tR = _add(b, (1, 2 * sy)), _add(b, (-1, 2 * sy))
        z1, z2 = _add(b, (1, sy)), _add(b, (-1, sy))
        r = S[uR]
        if cls == "#":
            vI, vR, va = 1j * (1 - SQRT2) * r, R2 * r, LAM_BAR * r
        else:
            vI, vR, va = 1j * R2 * r, R2 * r, LAM * r
        return {apex: va, z1: r + vI, z2: vR + S[uI]}, {(tI, z1): vI, (tR, z2): vR}
    if cls in "+-":
        sx = 1 if cls == "+" else -1
        apex = _add(b, (sx, 0))
        t = S[_add(b, (0, 1))]
        t1, t2 = _add(b, (sx, 2)), _add(b, (sx, -2))
        z1, z2 = _add(b, (sx, 1)), _add(b, (sx, -1))
        if cls == "+":
            va = LAM * t
            v1, v2 = 1j * (1 - SQRT2) * LAM * t, 1j * R2 * LAM * t
        else:
            va = -1j * LAM * t
            v1, v2 = R2 * LAM * t, (1 - SQRT2) * LAM * t
        return {apex: va, z1: v1 + va, z2: v2 + va}, {(t1, z1): v1, (t2, z2): v2}
    raise ClassificationError(f"unknown boundary class {cls!r}")


def boundary_modify(Fc: SHoloField, d: Domain) -> SHoloField:
    """Replace boundary values of F-check according to the four side tables.

    An outside square in the notch between two stacked side spikes gets one value per
    spike; each is attached to the boundary vertex of its own spike.
    """
    if not d.is_hedgehog:
        raise ClassificationError(
            f"domain is not a hedgehog: irregular blocks {list(d.irregular_blocks)[:3]}")
    F = Fc.copy()
    for b, cls in sorted(d.spikes.items()):
        inner, outer = spike_table(b, cls, Fc)
        for key, val in inner.items():
            if key in Fc.diamond:
                F.diamond[key] = val
            else:
                F.squares[key] = val
        for (a, z), val in outer.items():
            F.outer[(a, z)] = val
            F.squares[a] = val
    return F


@dataclass(eq=False)
class RBVPSolution:
    domain: Domain
    v0: tuple
    field: SHoloField
    H: PrimitiveH
    check: SHoloField
    residuals: dict = field(default_factory=dict)


def dashed_boundary_vertices(d: Domain) -> set:
    """Boundary V_circ vertices that are corners of the dashed cells."""
    out = set()
    for i, j in d.cells or ():
        p, q = cell_center(i, j)
        for a, b in ((2, 2), (2, -2), (-2, 2), (-2, -2)):
            z = (p + a, q + b)
            if not d.interior_vertex(z):
                out.add(z)
    return out


def outside_block_centers(d: Domain) -> set:
    out = set()
    for b in d.blocks():
        for a, c in LEAP:
            w = (b[0] + a, b[1] + c)
            if not all(s in d.squares for s in block_squares(w)):
                out.add(w)
    return out


def _h_base(d: Domain):
    dashed = sorted(dashed_boundary_vertices(d))
    if dashed:
        return dashed[0]
    return min(z for z in d.boundary_vertices("circ"))


def _check_v0(d: Domain, v0):
    if v0 not in d.squares or classify_square(*v0) != "W0":
        raise InputError(f"v0 = {v0} must be a W0 square of the domain")
    if not d.is_interior_square(v0):
        raise InputError(f"v0 = {v0} lies on the boundary")


def build_check(s: KasteleynSystem, v0) -> SHoloField:
    return shol_from_coupling(s, v0)


def solve_rbvp(d: Domain, v0, system: KasteleynSystem | None = None,
               strict: bool = True, tol: float = TOL) -> RBVPSolution:
    if not d.is_hedgehog:
        raise InputError("RBVP needs a hedgehog domain")
    _check_v0(d, v0)
    s = system if system is not None else assemble(d)
    Fc = build_check(s, v0)
    F = boundary_modify(Fc, d)
    H = primitive_H(F, d.squares, base=_h_base(d))
    sol = RBVPSolution(d, v0, F, H, Fc)
    rep = verify_rbvp(sol, tol=tol)
    sol.residuals = {k: v["residual"] for k, v in rep.items()}
    if strict:
        bad = [k for k in ("shol", "dbar_v0", "riemann_bc", "h_dirichlet") if not rep[k]["pass"]]
        if bad:
            raise ConstructionError(f"RBVP construction failed: {bad}", report=rep)
    return sol


def _entry(res, loc, ok):
    return {"pass": bool(ok), "residual": float(res), "location": None if loc is None else list(loc)}


def field_checks(F: SHoloField, d: Domain, tol: float = TOL) -> dict:
    """Residuals that depend only on the field (not on H)."""
    delta = d.delta
    scale = max(abs(x) for x in F.squares.values())
    out = {}
    r, loc = F.projection_residual()
    out["shol"] = _entry(r / scale, loc[0] if loc else None, r <= tol * scale)
    blacks = F.black_part()
    got = LAM * kast_sum(blacks, F.v0) / (4 * delta)
    want = LAM / (4 * delta ** 2)
    r = abs(got - want) / abs(want)
    out["dbar_v0"] = _entry(r, F.v0, r <= tol)
    worst, wloc = 0.0, None
    for z, n in d.normals.items():
        x = F.diamond.get(z)
        if x is None:
            continue
        rr = abs((x * sqrt_normal(n)).imag)
        if rr > worst:
            worst, wloc = rr, z
    out["riemann_bc"] = _entry(worst / scale, wloc, worst <= tol * scale)
    return out


def h_checks(H: PrimitiveH, d: Domain, v0, tol: float = TOL) -> dict:
    hs = max([abs(h) for h in H.values.values()] + [1e-300])
    out = {}
    out["monodromy"] = _entry(H.residual, None, H.residual <= tol)
    bnd = [z for z in d.boundary_vertices("circ") if z in H.values]
    dashed = dashed_boundary_vertices(d)

    def worst_abs(zs):
        w, loc = 0.0, None
        for z in zs:
            if abs(H[z]) > w:
                w, loc = abs(H[z]), z
        return w, loc

    w, loc = worst_abs(bnd)
    out["h_dirichlet"] = _entry(w / hs, loc, w <= tol * hs)
    w, loc = worst_abs([z for z in bnd if z in dashed])
    out["h_dirichlet_dashed"] = _entry(w / hs, loc, w <= tol * hs)
    # H_circ >= H_bullet on every square
    w, loc = 0.0, None
    for a in d.squares:
        zo, zb = square_diagonal(a)
        if zo in H.values and zb in H.values:
            gap = H[zb] - H[zo]
            if gap > w:
                w, loc = gap, a
    out["h_order"] = _entry(w / hs, loc, w <= tol * hs)
    zo0, zb0 = square_diagonal(v0)
    outside = outside_block_centers(d)
    w, loc = 0.0, None
    lscale = hs / d.delta ** 2
    for z in H.circ():
        if z == zo0 or not d.interior_vertex(z):
            continue
        try:
            val = leapfrog(H, z)
        except KeyError:
            continue
        if -val > w:
            w, loc = -val, z
    out["leapfrog_circ"] = _entry(w / lscale, loc, w <= tol * lscale)
    w, loc = 0.0, None
    near = []
    for z in H.bullet():
        nb = [(z[0] + a, z[1] + b) for a, b in LEAP]
        if any(x in outside for x in nb):
            near.append(z)
        if z == zb0:
            continue
        val = leapfrog(H, z, outside)
        if val > w:
            w, loc = val, z
    out["leapfrog_bullet"] = _entry(w / lscale, loc, w <= tol * lscale)
    w, loc = 0.0, None
    for z in near:
        if H[z] > w:
            w, loc = H[z], z
    out["h_bullet_boundary"] = _entry(w / hs, loc, w <= tol * hs)
    return out


def verify_rbvp(sol: RBVPSolution, tol: float = TOL) -> dict:
    rep = field_checks(sol.field, sol.domain, tol)
    rep.update(h_checks(sol.H, sol.domain, sol.v0, tol))
    return rep


def verify_field(F: SHoloField, d: Domain, tol: float = TOL) -> dict:
    """Report for an arbitrary field; H-based checks are marked failed if H is not defined."""
    rep = field_checks(F, d, tol)
    try:
        H = primitive_H(F, d.squares, base=_h_base(d), tol=1e-9)
    except MonodromyError as e:
        rep["monodromy"] = _entry(e.residual, e.worst, False)
        return rep
    rep.update(h_checks(H, d, F.v0, tol))
    return rep


def report_json(rep: dict) -> str:
    return json.dumps(rep, sort_keys=True, indent=1)


def uniqueness_sigma(d: Domain) -> float:
    """Smallest singular value of the real constraint operator
    x -> (Re, Im) sum_u K(u, v) tau(u) x_u over admissible black fields."""
    from .kasteleyn import kasteleyn_matrix
    K, bi, wi = kasteleyn_matrix(d.blacks, d.whites)
    T = np.array([tau(u) for u in d.blacks])
    A = K.T * T[None, :]
    M = np.vstack([A.real, A.imag])
    return float(np.linalg.svd(M, compute_uv=False).min())


def central_w0(d: Domain):
    """Interior W0 square closest to the centroid of the domain."""
    zs = np.array([complex(*c) for c in d.squares])
    c0 = zs.mean()
    cands = [v for v in d.whites if classify_square(*v) == "W0" and d.is_interior_square(v)]
    return min(cands, key=lambda v: (abs(complex(*v) - c0), v))
