"""Double-dimer coupling function, its rank-1 factorization and the harmonic-measure limit."""
from __future__ import annotations

import numpy as np

from . import continuum
from .kasteleyn import assemble
from .lattice import LAM, Domain, approximate_disk, build_domain, to_complex
from .observables import _check_schedule, expected_height_field

RANK_TOL = 1e-8


class FactorizationError(ValueError):
    pass


def default_punctures(d: Domain):
    """u0: lowest black square near x = 0; v0: rightmost white square near y = 0."""
    u0 = min(d.blacks, key=lambda u: (u[1], abs(u[0]), u[0]))
    v0 = max(d.whites, key=lambda v: (v[0], -abs(v[1]), -v[1]))
    return u0, v0


class DoubleDimerSystem:
    def __init__(self, d: Domain, u0=None, v0=None):
        du, dv = default_punctures(d)
        self.u0 = tuple(u0) if u0 is not None else du
        self.v0 = tuple(v0) if v0 is not None else dv
        for c in (self.u0, self.v0):
            if c not in d.squares or d.is_interior_square(c):
                raise ValueError(f"{c} must be a domain square adjacent to the boundary")
        self.domain = d
        self.hat = build_domain(d.delta, squares=set(d.squares) - {self.u0, self.v0})
        self.base = assemble(d)
        self.punct = assemble(self.hat)
        self._factor = None

    def dbl_coupling(self, u, v) -> complex:
        if u == self.u0 or v == self.v0:
            raise KeyError("removed square")
        return self.base.coupling(u, v) - self.punct.coupling(u, v)

    def dbl_matrix(self) -> np.ndarray:
        """C_dbl over (black, white) squares of the punctured domain."""
        C = self.base.coupling_matrix()
        Ch = self.punct.coupling_matrix()
        bi, wi = self.base.black_index, self.base.white_index
        rows = [bi[u] for u in self.punct.blacks]
        cols = [wi[v] for v in self.punct.whites]
        return C[np.ix_(rows, cols)] - Ch

    def factorization(self):
        """F(u) = 4 delta C(u, v0), G(v) = -4 delta lam C(u0, v), const = 1 / (4 delta G(v0))."""
        if self._factor is None:
            delta = self.domain.delta
            F = {u: 4 * delta * self.base.coupling(u, self.v0) for u in self.base.blacks}
            G = {v: -4 * delta * LAM * self.base.coupling(self.u0, v) for v in self.base.whites}
            const = 1 / (4 * delta * G[self.v0])
            self._factor = (F, G, const)
        return self._factor

    def factorization_residual(self) -> float:
        F, G, const = self.factorization()
        D = self.dbl_matrix()
        Fv = np.array([F[u] for u in self.punct.blacks])
        Gv = np.array([G[v] for v in self.punct.whites])
        return float(np.abs(D - const * np.outer(Fv, Gv)).max() / max(np.abs(D).max(), 1e-300))

    def rank1_ratio(self) -> float:
        sv = np.linalg.svd(self.dbl_matrix(), compute_uv=False)
        return float(sv[1] / sv[0]) if len(sv) > 1 else 0.0

    def check(self, tol: float = RANK_TOL):
        r = self.factorization_residual()
        if r > tol:
            raise FactorizationError(f"rank-1 factorization residual {r:.3g}")
        return r

    def dbar_normalizations(self):
        """([dbar F](v0), [dbar G](u0)) via the Kasteleyn identities."""
        from .dca import kast_sum
        from .kasteleyn import WEIGHTS
        F, G, _ = self.factorization()
        delta = self.domain.delta
        dF = LAM * kast_sum(F, self.v0) / (4 * delta)
        u = self.u0
        sg = sum(w * G.get((u[0] - a, u[1] - b), 0.0) for (a, b), w in WEIGHTS.items())
        dG = -LAM * sg / (4 * delta)
        return dF, dG

    def height_difference(self) -> dict:
        verts = sorted(set(self.domain.vertices) & set(self.hat.vertices))
        base = verts[0]
        h1 = expected_height_field(self.base, base)
        h2 = expected_height_field(self.punct, base)
        return {z: h1[z] - h2[z] for z in verts if z in h1 and z in h2}

    def arc_angles(self):
        a = np.angle(to_complex(self.u0, self.domain.delta))
        b = np.angle(to_complex(self.v0, self.domain.delta))
        while b <= a:
            b += 2 * np.pi
        return a, b

    def normalized_height(self):
        """Affine map of E[h_dbl] fitted to boundary plateaus 0 (off the arc) and 1 (on it)."""
        hd = self.height_difference()
        a, b = self.arc_angles()
        X, Y = [], []
        for z, h in hd.items():
            if self.domain.interior_vertex(z):
                continue
            th = np.angle(complex(*z))
            while th < a:
                th += 2 * np.pi
            X.append(h)
            Y.append(1.0 if th < b else 0.0)
        A = np.vstack([X, np.ones(len(X))]).T
        coef = np.linalg.lstsq(A, np.array(Y), rcond=None)[0]
        return {z: coef[0] * h + coef[1] for z, h in hd.items()}, (float(coef[0]), float(coef[1]))


def dbl_expected_height(sys: DoubleDimerSystem, z) -> float:
    vals, _ = sys.normalized_height()
    return float(vals[tuple(z)])


def dbl_row(delta: float, radius: float = 1.0, compact: float = 0.5) -> dict:
    d = approximate_disk(delta, radius)
    sys = DoubleDimerSystem(d)
    res = sys.factorization_residual()
    vals, coef = sys.normalized_height()
    a, b = sys.arc_angles()
    err = 0.0
    for z, h in vals.items():
        w = to_complex(z, delta) / radius
        if abs(w) < compact:
            err = max(err, abs(h - continuum.hm_disk(w, a, b)))
    return {"delta": delta, "squares": len(d), "rank1_residual": res,
            "slope": coef[0], "offset": coef[1], "error": float(err)}


def dbl_harmonic(deltas, radius: float = 1.0, compact: float = 0.5) -> list:
    return [dbl_row(x, radius, compact) for x in _check_schedule(deltas, radius)]
