"""Exact discrete identity suite shared by the CLI and the acceptance tests."""
from __future__ import annotations

import numpy as np

from .kasteleyn import KasteleynSystem, assemble
from .lattice import Domain
from .rbvp import InputError, central_w0, solve_rbvp, uniqueness_sigma, verify_rbvp

TOL = 1e-10
SIGMA_MAX_SQUARES = 2000


def _entry(res, loc=None, ok=True, applicable=True):
    return {"pass": bool(ok), "residual": float(res),
            "location": None if loc is None else list(loc), "applicable": bool(applicable)}


def square_sums(s: KasteleynSystem, P=None):
    """max |sum of probabilities of the dominoes covering a square - 1|."""
    P = P if P is not None else s.edge_probabilities()
    tot = {}
    for (u, v), p in P.items():
        tot[u] = tot.get(u, 0.0) + p
        tot[v] = tot.get(v, 0.0) + p
    worst, loc = 0.0, None
    for c in s.domain.squares:
        r = abs(tot.get(c, 0.0) - 1.0)
        if r > worst:
            worst, loc = r, c
    return worst, loc


def half_sums(s: KasteleynSystem, P=None):
    """max deviation from 1/2 of the paired probabilities at interior squares: left and right
    pairs (a -+ dl, a -+ dlb) at white a, upper and lower pairs at black a."""
    P = P if P is not None else s.edge_probabilities()
    d = s.domain
    worst, loc = 0.0, None
    for a in d.squares:
        if not d.is_interior_square(a):
            continue
        n, m = a
        if a in s.white_index:
            pairs = ([(n - 1, m - 1), (n - 1, m + 1)], [(n + 1, m + 1), (n + 1, m - 1)])
            sums = [sum(P[(u, a)] for u in side) for side in pairs]
        else:
            pairs = ([(n + 1, m + 1), (n - 1, m + 1)], [(n - 1, m - 1), (n + 1, m - 1)])
            sums = [sum(P[(a, v)] for v in side) for side in pairs]
        for t in sums:
            r = abs(t - 0.5)
            if r > worst:
                worst, loc = r, a
    return worst, loc


def identity_suite(d: Domain, v0=None, tol: float = TOL, system: KasteleynSystem | None = None):
    """Report {check: {pass, residual, location, applicable}}; hedgehog-only checks are
    computed when possible and marked not applicable on other domains."""
    s = system if system is not None else assemble(d)
    rep = {}
    r = s.residual()
    rep["kc_identity"] = _entry(r, None, r <= tol)
    P = s.edge_probabilities()
    r, loc = square_sums(s, P)
    rep["square_sums"] = _entry(r, loc, r <= tol)
    r, loc = half_sums(s, P)
    rep["half_sums"] = _entry(r, loc, r <= tol, applicable=d.is_hedgehog)
    rbvp_keys = ("shol", "dbar_v0", "riemann_bc", "monodromy", "h_dirichlet", "h_order",
                 "leapfrog_circ", "leapfrog_bullet", "h_bullet_boundary")
    if d.is_hedgehog:
        v0 = v0 if v0 is not None else central_w0(d)
        try:
            sol = solve_rbvp(d, v0, system=s, strict=False, tol=tol)
            for k, e in verify_rbvp(sol, tol).items():
                e = dict(e)
                e["applicable"] = True
                rep["rbvp_" + k] = e
        except InputError as e:
            for k in rbvp_keys:
                rep["rbvp_" + k] = {"pass": False, "residual": float("nan"), "location": None,
                                    "applicable": True, "error": str(e)}
    else:
        why = f"not a hedgehog: {len(d.irregular_blocks)} blocks with a single exposed side"
        for k in rbvp_keys:
            rep["rbvp_" + k] = {"pass": False, "residual": float("nan"), "location": None,
                                "applicable": False, "error": why}
    if len(d) <= SIGMA_MAX_SQUARES:
        sig = uniqueness_sigma(d)
        rep["uniqueness_sigma"] = _entry(sig, None, sig > 1e-8)
    return rep


def suite_passed(rep: dict, require_all: bool = False) -> bool:
    return all(e["pass"] for e in rep.values() if require_all or e.get("applicable", True))


def probability_range(s: KasteleynSystem):
    P = np.array(list(s.edge_probabilities().values()))
    return float(P.min()), float(P.max())
