"""Closed-form continuum references in the disk and the upper half-plane."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .lattice import LAM

KINDS = ("f_disk_interior", "f_disk_boundary", "f0_halfplane", "f1_halfplane",
         "f_plus", "f_minus", "hm_disk", "green_disk")
POLE_TOL = 1e-14


class PoleError(ValueError):
    pass


class ParityError(ValueError):
    pass


class BranchError(ValueError):
    pass


@dataclass(frozen=True)
class ReferenceFunction:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS and not callable(self.params.get("fn")):
            raise ValueError(f"unknown reference kind {self.kind!r}")

    def __call__(self, z):
        return evaluate(self, z)


def _pole(z, w):
    if np.any(np.abs(z - w) < POLE_TOL):
        raise PoleError(f"evaluation at the singularity {w}")


def f_disk_interior(z, lam=LAM):
    """(1/2pi)(lam/z + conj(lam)); singularity at 0."""
    _pole(z, 0)
    return (lam / z + np.conj(lam)) / (2 * np.pi)


def f_disk_boundary(z, w):
    """i sqrt(w) / (2pi (z - w)) for |w| = 1."""
    _pole(z, w)
    return 1j * np.sqrt(complex(w)) / (2 * np.pi * (z - w))


def f0(z, w):
    _pole(z, w)
    return (1 / (z - w) + 1j / (z - np.conj(w))) / (2 * np.pi)


def f1(z, w):
    _pole(z, w)
    return (1 / (z - w) - 1j / (z - np.conj(w))) / (2 * np.pi)


def f_plus(z, w):
    _pole(z, w)
    return 1 / (np.pi * (z - w))


def f_minus(z, w):
    _pole(z, np.conj(w))
    return 1j / (np.pi * (z - np.conj(w)))


def hm_disk(z, a: float, b: float) -> float:
    """Harmonic measure at z of the arc from angle a counterclockwise to b."""
    if abs(z) >= 1:
        raise ValueError("z must lie inside the unit disk")
    while b <= a:
        b += 2 * np.pi
    # angle subtended by the arc, taken in [0, 2pi)
    th = np.angle((np.exp(1j * b) - z) / (np.exp(1j * a) - z)) % (2 * np.pi)
    return float(th / np.pi - (b - a) / (2 * np.pi))


def green_disk(z, w) -> float:
    _pole(z, w)
    return float(np.log(abs((z - w) / (1 - z * np.conj(w)))) / (2 * np.pi))


def evaluate(ref: ReferenceFunction, z):
    p = ref.params
    k = ref.kind
    if "fn" in p:
        return p["fn"](z)
    if k == "f_disk_interior":
        return f_disk_interior(z, p.get("lam", LAM))
    if k == "f_disk_boundary":
        return f_disk_boundary(z, p["w"])
    if k == "f0_halfplane":
        return f0(z, p["w"])
    if k == "f1_halfplane":
        return f1(z, p["w"])
    if k == "f_plus":
        return f_plus(z, p["w"])
    if k == "f_minus":
        return f_minus(z, p["w"])
    if k == "hm_disk":
        return hm_disk(z, p["a"], p["b"])
    if k == "green_disk":
        return green_disk(z, p["w"])
    raise ValueError(k)


# conformal maps

@dataclass(frozen=True)
class Mobius:
    """phi(z) = (a z + b) / (c z + d) with the single-valued root sqrt(phi') = r / (c z + d)."""
    a: complex
    b: complex
    c: complex
    d: complex

    def __call__(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def deriv(self, z):
        return (self.a * self.d - self.b * self.c) / (self.c * z + self.d) ** 2

    def sqrt_deriv(self, z):
        return np.sqrt(complex(self.a * self.d - self.b * self.c)) / (self.c * z + self.d)

    def inverse(self):
        return Mobius(self.d, -self.b, -self.c, self.a)


def identity_map():
    return Mobius(1, 0, 0, 1)


def disk_automorphism(z0: complex, radius: float = 1.0):
    """Disk of given radius onto the unit disk, z0 -> 0, positive derivative at z0."""
    z0 = complex(z0)
    return Mobius(1.0, -z0, -np.conj(z0) / radius, radius)


def disk_to_halfplane():
    """Unit disk onto the upper half-plane, z -> i (1 + z) / (1 - z)."""
    return Mobius(1j, 1j, -1, 1)


def rotation(theta: float):
    return Mobius(np.exp(1j * theta), 0, 0, 1)


def _root(phi, z):
    if hasattr(phi, "sqrt_deriv"):
        return phi.sqrt_deriv(z)
    raise BranchError("map has no single-valued square root of its derivative")


def track_roots(values, start: complex):
    """Continuous choice of square roots along a sequence, starting near `start`."""
    out, prev = [], start
    for x in values:
        r = np.sqrt(complex(x))
        if abs(r - prev) > abs(-r - prev):
            r = -r
        if abs(r - prev) > abs(prev) * 1.5 and out:
            raise BranchError("square root jumps between consecutive evaluation points")
        out.append(r)
        prev = r
    return out


def transplant(ref: ReferenceFunction, phi, kind: str = "f", v=None) -> ReferenceFunction:
    """Covariant transplant of a reference function from phi(Omega) back to Omega.

    kind 'f': g(z) = f(phi(z)) sqrt(phi'(z)) sqrt(phi'(v)) for one-point f (v normalizes);
    kind 'pair': g(z, w) = f(phi z, phi w) sqrt phi'(z) sqrt phi'(w);
    kind 'pair_conj': as 'pair' with the conjugate weight in w.
    """
    if kind == "f":
        rv = 1.0 if v is None else _root(phi, v)
        return ReferenceFunction(ref.kind, {"fn": lambda z: evaluate(ref, phi(z)) * _root(phi, z) * rv})
    w = ref.params["w"]
    if kind not in ("pair", "pair_conj"):
        raise ValueError(kind)
    base = {"f_plus": f_plus, "f_minus": f_minus, "f0_halfplane": f0, "f1_halfplane": f1,
            "f_disk_boundary": f_disk_boundary}[ref.kind]
    w_src = ref.params.get("w_src")
    if w_src is None:
        raise ValueError("pair transplant needs params['w_src'] with phi(w_src) = w")
    rw = _root(phi, w_src)
    rw = np.conj(rw) if kind == "pair_conj" else rw
    return ReferenceFunction(ref.kind, {"fn": lambda z: base(phi(z), w) * _root(phi, z) * rw})


def f_disk_at(v: complex, radius: float = 1.0, lam=LAM):
    """f for the disk of given radius with interior singularity at v."""
    phi = disk_automorphism(v, radius)
    return transplant(ReferenceFunction("f_disk_interior", {"lam": lam}), phi, "f", v=v)


# GFF moments

def pairings(items):
    items = list(items)
    if not items:
        yield []
        return
    a = items[0]
    for k in range(1, len(items)):
        rest = items[1:k] + items[k + 1:]
        for p in pairings(rest):
            yield [(a, items[k])] + p


def gff_moment(points, green=green_disk) -> float:
    pts = list(points)
    m = len(pts)
    if m % 2:
        raise ParityError("moment formula needs an even number of points")
    for i in range(m):
        for j in range(i + 1, m):
            if abs(pts[i] - pts[j]) < POLE_TOL:
                raise PoleError("coincident points")
    tot = 0.0
    for p in pairings(range(m)):
        tot += np.prod([green(pts[i], pts[j]) for i, j in p])
    return float((-16 / np.pi) ** (m // 2) * tot)


def gff_two_point(z1, z2) -> float:
    """(8/pi^2) log|(1 - z1 conj z2) / (z1 - z2)|."""
    return float(8 / np.pi ** 2 * np.log(abs((1 - z1 * np.conj(z2)) / (z1 - z2))))


# boundary checks

def bc_residual_interior(n_points: int = 360, lam=LAM) -> float:
    th = 2 * np.pi * np.arange(n_points) / n_points
    z = np.exp(1j * th)
    return float(np.abs((f_disk_interior(z, lam) * np.sqrt(z)).imag).max())


def bc_residual_boundary(w: complex, n_points: int = 360) -> float:
    """Riemann condition for f with boundary singularity at w, at n_points - 1 boundary points
    off w (w itself is one of the n_points equally spaced angles)."""
    a = np.angle(w)
    th = a + 2 * np.pi * np.arange(1, n_points) / n_points
    z = np.exp(1j * th)
    return float(np.abs((f_disk_boundary(z, w) * np.sqrt(z)).imag).max())


def product_hm_check(u0=-1j, v0=1.0 + 0j, points=None) -> dict:
    """Integrate Re[f_u0 f_v0 dz] along radii and compare with the arc harmonic measure."""
    if points is None:
        points = [0.3 + 0.1j, -0.5 + 0.2j, 0.1 - 0.7j, 0.6j, -0.2 - 0.2j, 0.75, -0.4 - 0.6j]
    a, b = np.angle(u0), np.angle(v0)
    ratios = []
    for w in points:
        def integrand(t):
            z = t * w
            return (f_disk_boundary(z, u0) * f_disk_boundary(z, v0) * w).real
        val = quad(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        ratios.append(val / (hm_disk(w, a, b) - hm_disk(0, a, b)))
    r = np.array(ratios)
    return {"ratios": r.tolist(), "constant": float(r.mean()),
            "rel_dev": float(np.abs(r / r.mean() - 1).max())}
