import json

import numpy as np
import pytest

from hedgehog_dimers.lattice import (CLASS_NAMES, LatticeError, TopologyError,
                                     approximate_disk, block_squares, build_domain,
                                     build_hedgehog, cell_blocks, cell_center, classify_square,
                                     domain_from_json, inscribed_rectangle, rectangle_cells,
                                     square_corners, to_complex, vertex_class)


def test_square_types():
    assert classify_square(0, 0) == "B0"
    assert classify_square(2, 0) == "B1"
    assert classify_square(1, 1) == "W0"
    assert classify_square(1, -1) == "W1"
    assert classify_square(3, 1) == "W1"
    with pytest.raises(LatticeError):
        classify_square(1, 0)


def test_each_square_has_one_circ_and_one_bullet_corner():
    for n in range(-4, 5):
        for m in range(-4, 5):
            if (n + m) % 2:
                continue
            kinds = sorted(vertex_class(*z) for z in square_corners((n, m)))
            assert kinds.count("circ") == 1 and kinds.count("bullet") == 1
            assert kinds.count("diamond") == 2


def test_single_cell():
    d = build_hedgehog(0.1, [(0, 0)])
    assert len(d) == 16
    assert d.is_hedgehog
    assert len(d.classes) == 12
    assert set(d.classes.values()) <= set(CLASS_NAMES)
    assert len(d.blacks) == len(d.whites) == 8
    # four spikes around the centre cell
    assert len(d.spikes) == 4


def test_two_cells():
    d = build_hedgehog(0.1, [(0, 0), (1, 0)])
    assert len(d) == 28


def test_cell_blocks_around_center():
    p, q = cell_center(0, 0)
    bs = cell_blocks(0, 0)
    assert sorted((b[0] - p, b[1] - q) for b in bs) == [(-2, 0), (0, -2), (0, 2), (2, 0)]
    for b in bs:
        assert len(block_squares(b)) == 4


def test_l_tromino_is_not_a_hedgehog():
    d = build_domain(0.1, cells=[(0, 0), (1, 0), (0, 1)])
    assert d.is_even and not d.is_hedgehog
    assert d.irregular_blocks
    assert build_hedgehog(0.1, [(0, 0), (1, 0), (0, 1)]).is_hedgehog is False


def test_rectangles_are_hedgehogs():
    for w, h in [(1, 1), (2, 1), (3, 2), (4, 4)]:
        d = build_domain(0.1, cells=rectangle_cells(w, h))
        assert d.is_hedgehog
        # one 2delta-block per cell edge
        assert len(d) == 4 * (2 * w * h + w + h)


def test_disconnected_cells_rejected():
    with pytest.raises(TopologyError):
        build_domain(0.1, cells=[(0, 0), (3, 3)])


def test_disk_approximation():
    d = approximate_disk(1 / 16, 1.0)
    assert 500 <= len(d) <= 2000
    # spikes protrude at most one square beyond the inscribed cells
    assert max(abs(d.z(c)) for c in d.squares) <= 1.0 + d.delta
    assert d.is_even
    # the inscribed cell set has single-exposed-side blocks on its staircase boundary
    assert not d.is_hedgehog
    r = inscribed_rectangle(1 / 16, 1.0)
    assert r.is_hedgehog and r.squares <= d.squares


def test_coordinates():
    assert to_complex((1, 1), np.sqrt(2)) == pytest.approx(1 + 1j)
    d = build_hedgehog(0.5, [(0, 0)])
    assert d.z((2, 0)) == pytest.approx(2 * 0.5 / np.sqrt(2))


def test_normals_are_unit_in_eight_directions():
    d = build_domain(0.1, cells=rectangle_cells(2, 2))
    allowed = [np.exp(1j * np.pi * k / 4) for k in range(8)]
    for n in d.normals.values():
        assert min(abs(n - a) for a in allowed) < 1e-12


def test_json_round_trip():
    d = build_domain(0.1, cells=rectangle_cells(2, 3))
    e = domain_from_json(d.to_json())
    assert e.squares == d.squares and e.delta == d.delta
    raw = build_domain(0.1, squares=d.squares)
    assert domain_from_json(raw.to_json()).squares == d.squares
    with pytest.raises(LatticeError):
        domain_from_json(json.dumps({"cells": []}))
