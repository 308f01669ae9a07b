import numpy as np
import pytest

from hedgehog_dimers.dca import (BoundaryAccessError, MonodromyError, d, dbar, halfplane_kernel,
                                 is_admissible, kast_sum, laplacian, plane_kernel, plane_pole,
                                 primitive_H, proj, schwarz_reflect, shol_from_coupling,
                                 square_diagonal, tau)
from hedgehog_dimers.kasteleyn import assemble
from hedgehog_dimers.lattice import (LAM, LAM_BAR, ResolutionError, build_domain,
                                     classify_square, rectangle_cells, to_complex)

DELTA = 0.3
BLACKS = [(n, m) for n in range(-10, 11, 2) for m in range(-10, 11, 2)]
WHITES = [(n, m) for n in range(-7, 8, 2) for m in range(-7, 8, 2)]


def field(f):
    return {u: f(to_complex(u, DELTA)) for u in BLACKS}


def test_tau_and_projection():
    assert tau((0, 0)) == 1 and tau((2, 0)) == 1j
    assert tau((1, 1)) == LAM and tau((1, -1)) == LAM_BAR
    x = 0.3 - 1.7j
    for t in (1, 1j, LAM, LAM_BAR):
        p = proj(x, t)
        assert abs(proj(p, t) - p) < 1e-15
        assert abs((p * np.conj(t)).imag) < 1e-15


@pytest.mark.parametrize("name,f,want_dbar,want_d", [
    ("z", lambda z: z, 0, 1),
    ("conj", np.conj, 1, 0),
    ("z2", lambda z: z * z, 0, None),
    # cubic with the lattice correction is exactly discrete holomorphic
    ("z3", lambda z: z ** 3 + DELTA ** 2 * np.conj(z), 0, None),
])
def test_derivatives_of_polynomials(name, f, want_dbar, want_d):
    F = field(f)
    for v in WHITES:
        assert abs(dbar(F, v, DELTA) - want_dbar) < 1e-12
        if want_d is not None:
            assert abs(d(F, v, DELTA) - want_d) < 1e-12
    if name == "z2":
        for v in WHITES:
            assert abs(d(F, v, DELTA) - 2 * to_complex(v, DELTA)) < 1e-12


def test_laplacian_of_modulus_squared():
    # Delta = 4 d dbar, so |z|^2 has Laplacian 4
    F = field(lambda z: abs(z) ** 2)
    assert laplacian(F, (0, 0), DELTA) == pytest.approx(4.0)


def test_missing_values_raise():
    with pytest.raises(BoundaryAccessError):
        dbar({}, (1, 1), DELTA)


def test_kasteleyn_sum_is_dbar():
    rng = np.random.default_rng(0)
    F = {u: complex(*rng.normal(size=2)) for u in BLACKS}
    for v in WHITES:
        assert abs(LAM * kast_sum(F, v) / (4 * DELTA) - dbar(F, v, DELTA)) < 1e-12


@pytest.fixture(scope="module")
def rect():
    dm = build_domain(0.1, cells=rectangle_cells(3, 3))
    return dm, assemble(dm)


def test_coupling_is_discrete_holomorphic(rect):
    dm, s = rect
    v0 = (9, 9)
    assert classify_square(*v0) == "W0" and dm.is_interior_square(v0)
    F = {u: x / dm.delta for u, x in s.coupling_function(v0).items()}
    assert is_admissible(F)
    for v in dm.whites:
        got = LAM * kast_sum(F, v) / (4 * dm.delta)
        want = LAM / (4 * dm.delta ** 2) if v == v0 else 0
        assert abs(got - want) < 1e-9 * abs(LAM / (4 * dm.delta ** 2))


def test_w1_column_times_i_is_admissible(rect):
    dm, s = rect
    v = (7, 9)
    assert classify_square(*v) == "W1"
    F = s.coupling_function(v)
    assert not is_admissible(F)
    assert is_admissible({u: 1j * x for u, x in F.items()})


def test_shol_extension_and_primitive(rect):
    dm, s = rect
    F = shol_from_coupling(s, (9, 9))
    r, _ = F.projection_residual()
    assert r < 1e-10 * max(abs(x) for x in F.squares.values())
    assert F.modulus_identity_residual() < 1e-9 * max(abs(x) ** 2 for x in F.squares.values())
    H = primitive_H(F, dm.squares)
    assert H.residual < 1e-10
    # H_circ >= H_bullet across every square
    for a in dm.squares:
        zo, zb = square_diagonal(a)
        if zo in H.values and zb in H.values:
            assert H[zo] - H[zb] >= -1e-10


def test_primitive_detects_non_holomorphic_field(rect):
    dm, s = rect
    F = shol_from_coupling(s, (9, 9))
    bad = F.copy()
    # H integrates the square values, so perturb one interior square
    a = (4, 4)
    assert dm.is_interior_square(a)
    bad.squares[a] += 0.7 * abs(bad.squares[a]) + 0.7
    with pytest.raises(MonodromyError):
        primitive_H(bad, dm.squares)


def test_schwarz_reflection():
    rng = np.random.default_rng(1)
    c = rng.normal(size=3)

    def f(z):
        return c[0] * z + c[1] * z * z + c[2] * (z ** 3 + DELTA ** 2 * np.conj(z))
    upper = {u: f(to_complex(u, DELTA)) for u in BLACKS if u[1] >= 0}
    full = schwarz_reflect(upper)
    for v in WHITES:
        assert abs(dbar(full, v, DELTA)) < 1e-10
    with pytest.raises(ValueError):
        schwarz_reflect({(0, 0): 1j})


def test_schwarz_reflection_antisymmetry():
    upper = {u: complex(u[0], u[1] ** 2) if u[1] else float(u[0]) for u in BLACKS if u[1] >= 0}
    full = schwarz_reflect(upper)
    for (n, m), x in full.items():
        assert full[(n, -m)] == np.conj(x)


@pytest.mark.parametrize("v0", [(1, 1), (1, -1)])
def test_plane_kernel_approaches_projected_pole(v0):
    g = 1 if classify_square(*v0) == "W0" else 1j
    errs = []
    for R in (32, 64):
        k = plane_kernel(v0, R, 1.0)
        zv = to_complex(v0, 1.0)
        e = 0.0
        for u, x in k.values.items():
            r = abs(to_complex(u, 1.0) - zv)
            if R / 8 <= r <= R / 4:
                want = proj(g * plane_pole(to_complex(u, 1.0), zv, 1.0), tau(u)) / g
                e = max(e, abs(x - want) * r)
        errs.append(e)
    assert errs[1] < errs[0] / 2
    assert errs[1] < 0.01


def test_plane_kernel_dbar_and_guard():
    k = plane_kernel((1, 1), 24, 1.0)
    for v in [(1, 1), (3, 1), (5, 5), (-3, 1)]:
        want = LAM / 4 if v == (1, 1) else 0
        assert abs(dbar(k.values, v, 1.0) - want) < 1e-12
    with pytest.raises(ResolutionError):
        plane_kernel((1, 1), 8, 1.0)
    with pytest.raises(TypeError):
        plane_kernel((0, 0), 24, 1.0)


def test_halfplane_kernel():
    k = halfplane_kernel((1, 5), 24, 1.0)
    V = k.values
    for (n, m), x in V.items():
        if m == 0:
            assert abs(x.imag) < 1e-14
    for v in [(n, m) for n in range(-9, 12, 2) for m in range(1, 14, 2)]:
        want = LAM / 4 if v == (1, 5) else 0
        assert abs(dbar(V, v, 1.0) - want) < 1e-12
