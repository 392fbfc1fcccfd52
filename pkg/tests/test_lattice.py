import itertools

import numpy as np
import pytest

from andersonlab.errors import ConfigError
from andersonlab.lattice import (
    Box,
    CubeSequenceParams,
    Region,
    box_distance,
    boundary_ratio,
    interior,
    make_cube_sequence,
    region_distance,
)


def test_box_basics():
    b = Box((1, -2), (3, 4))
    assert b.dimension == 2 and b.size == 12
    assert b.sites.shape == (12, 2)
    assert tuple(b.sites[0]) == (1, -2) and tuple(b.sites[-1]) == (3, 1)
    assert b.contains((2, 0)) and not b.contains((4, 0))


def test_box_rejects_empty_sides():
    with pytest.raises(ConfigError):
        Box((0,), (0,))


def test_centered_box_has_even_side_plus_one_sites():
    b = Box.centered(2, 6)
    assert b.sides == (7, 7)
    assert tuple(b.lower) == (-3, -3) and tuple(b.upper) == (3, 3)


def test_box_json_roundtrip():
    b = Box((0, 5), (2, 3))
    assert Box.from_json(b.to_json()) == b


@pytest.mark.parametrize(
    "a, b, expected",
    [
        (Box((0,), (4,)), Box((8,), (4,)), 5.0),
        (Box((0,), (4,)), Box((0,), (4,)), 0.0),
        (Box((0, 0), (1, 1)), Box((3, 4), (1, 1)), 5.0),
    ],
)
def test_box_distance_examples(a, b, expected):
    assert box_distance(a, b) == expected


def test_box_distance_matches_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = Box(tuple(rng.integers(-5, 5, 2)), tuple(rng.integers(1, 4, 2)))
        b = Box(tuple(rng.integers(-5, 5, 2)), tuple(rng.integers(1, 4, 2)))
        diff = a.sites[:, None, :] - b.sites[None, :, :]
        brute = np.sqrt((diff**2).sum(-1)).min()
        assert box_distance(a, b) == pytest.approx(brute, abs=1e-12)
        overlap = bool(set(map(tuple, a.sites.tolist())) & set(map(tuple, b.sites.tolist())))
        assert (box_distance(a, b) == 0) == overlap == a.intersects(b)


def test_box_distance_dimension_mismatch():
    with pytest.raises(ConfigError):
        box_distance(Box((0,), (2,)), Box((0, 0), (2, 2)))


def test_boundary_ratio_examples():
    assert boundary_ratio(Box.cube(1, 10), 0) == pytest.approx(2 / 10)
    assert boundary_ratio(Box.cube(2, 10), 1) == pytest.approx(0.36)
    b = Box.cube(2, 7)
    assert boundary_ratio(b, b.diameter) == 1.0


def test_boundary_ratio_vanishes_along_cube_sequence():
    fam = make_cube_sequence(CubeSequenceParams(2, 1.5, 16, 1, 4), 3)
    for h in (1, 2, 3):
        ratios = [boundary_ratio(lv.box, h) for lv in fam.levels]
        assert all(x > y for x, y in zip(ratios, ratios[1:]))


def test_boundary_ratio_with_diameter_scaled_width_stays_bounded():
    # at h = α·diam the ratio tends to a shape constant, not to zero
    fam = make_cube_sequence(CubeSequenceParams(1, 1.5, 40, 1, 2), 3)
    alpha = 0.1
    ratios = [boundary_ratio(lv.box, alpha * lv.box.diameter) for lv in fam.levels]
    assert max(ratios) <= 2 * alpha + 2 / min(lv.box.size for lv in fam.levels)


def test_cube_sequence_example():
    fam = make_cube_sequence(CubeSequenceParams(1, 1.5, 16, 1, 2), 1)
    assert fam.params.R == 10
    assert [lv.L for lv in fam.levels] == [6, 16]
    assert fam[0].gap == 4


def test_cube_sequence_invariants():
    params = CubeSequenceParams(2, 1.5, 40, 1, 4)
    fam = make_cube_sequence(params, 3)
    for N, lv in enumerate(fam.levels):
        assert lv.L % 2 == 0
        assert abs(lv.L - (2**N * params.L_tilde - params.theta**N * params.R)) <= 2
    for lv, nxt in zip(fam.levels, fam.levels[1:]):
        assert nxt.L - 2 * lv.L >= params.R0
        subs = lv.translates
        assert len(subs) == 4
        for g in lv.gammas:
            assert all(abs(c) == (nxt.L - lv.L) // 2 for c in g)
        for a, b in itertools.combinations(subs, 2):
            assert box_distance(a, b) >= params.R0
        assert all(nxt.box.contains_box(s) for s in subs)


def test_cube_sequence_single_level():
    fam = make_cube_sequence(CubeSequenceParams(1, 1.5, 16, 1, 2), 0)
    assert len(fam) == 1 and fam[0].gammas == ()


@pytest.mark.parametrize(
    "kwargs, msg",
    [
        (dict(theta=2.0), "θ < 2"),
        (dict(theta=1.2), r"θ > 2\^"),
        (dict(L_tilde=5), "L̃ > R"),
        (dict(lam=1.0), "λ > d"),
    ],
)
def test_cube_sequence_parameter_errors(kwargs, msg):
    base = dict(d=1, theta=1.5, L_tilde=16, R0=1, lam=2)
    base.update(kwargs)
    with pytest.raises(ConfigError, match=msg):
        CubeSequenceParams(**base)


def test_interior_of_box_and_union():
    a, b = Box.cube(1, 6), Box.cube(1, 6, [9])
    ia = interior(a, 1.0)
    assert sorted(ia.sites[:, 0].tolist()) == [1, 2, 3, 4]
    iu = interior(Region.from_boxes(a, b), 1.0)
    assert sorted(iu.sites[:, 0].tolist()) == [1, 2, 3, 4, 10, 11, 12, 13]
    assert interior(Box.cube(1, 2), 1.0) is None


def test_interiors_of_disjoint_domains_are_separated():
    a, b = Box.cube(1, 5), Box.cube(1, 5, [5])
    for margin in (0.5, 1.0, 1.5):
        ia, ib = interior(a, margin), interior(b, margin)
        assert region_distance(ia, ib) > 2 * margin
