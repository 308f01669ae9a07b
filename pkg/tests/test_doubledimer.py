import numpy as np
import pytest

from hedgehog_dimers.continuum import hm_disk
from hedgehog_dimers.doubledimer import (DoubleDimerSystem, FactorizationError, dbl_expected_height,
                                         dbl_row)
from hedgehog_dimers.lattice import LAM, approximate_disk, build_domain, rectangle_cells


@pytest.fixture(scope="module", params=["disk", "rect"])
def system(request):
    if request.param == "disk":
        d = approximate_disk(1 / 8, 1.0)
    else:
        d = build_domain(0.1, cells=rectangle_cells(3, 2))
    return DoubleDimerSystem(d)


def test_rank_one_factorization(system):
    assert system.factorization_residual() < 1e-9
    assert system.rank1_ratio() < 1e-9
    assert system.check() < 1e-9


def test_dbar_normalizations(system):
    # F = 4 delta C(., v0) and G = -4 delta lam C(u0, .)
    dF, dG = system.dbar_normalizations()
    assert abs(dF - LAM) < 1e-10
    assert abs(dG - 1j) < 1e-10


def test_boundary_plateaus(system):
    vals, (slope, offset) = system.normalized_height()
    a, b = system.arc_angles()
    assert slope == pytest.approx(0.25)
    assert offset == pytest.approx(0, abs=1e-10)
    d = system.domain
    for z, h in vals.items():
        if not d.interior_vertex(z):
            assert min(abs(h), abs(h - 1)) < 1e-9


def test_punctures_must_touch_boundary():
    d = build_domain(0.1, cells=rectangle_cells(3, 3))
    inner = next(v for v in d.whites if d.is_interior_square(v))
    with pytest.raises(ValueError):
        DoubleDimerSystem(d, v0=inner)


def test_factorization_error_is_raised():
    d = build_domain(0.1, cells=rectangle_cells(2, 2))
    s = DoubleDimerSystem(d)
    F, G, const = s.factorization()
    s._factor = (F, G, 2 * const)
    with pytest.raises(FactorizationError):
        s.check()


def test_centre_value_near_harmonic_measure():
    d = approximate_disk(1 / 16, 1.0)
    s = DoubleDimerSystem(d)
    a, b = s.arc_angles()
    z0 = min((z for z in d.vertices if d.interior_vertex(z)), key=lambda z: abs(complex(*z)))
    got = dbl_expected_height(s, z0)
    assert got == pytest.approx(hm_disk(complex(*z0) * d.delta / np.sqrt(2), a, b), abs=0.1)


def test_dbl_row():
    r = dbl_row(1 / 8)
    assert r["rank1_residual"] < 1e-9
    assert r["error"] < 0.15
