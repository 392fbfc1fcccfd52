import numpy as np
import pytest

from andersonlab.disorder import DisorderSpec, sample_potential, translate_realization
from andersonlab.errors import ConfigError
from andersonlab.lattice import Box
from andersonlab.oneparticle import (
    SpectrumResult,
    assemble_one_body,
    counting_function,
    diagonalize,
    empirical_ids,
    ground_level_trend,
    one_body_spectrum,
)

from conftest import path_eigs


def test_single_site_matrix(free):
    box = Box.cube(1, 1)
    assert assemble_one_body(box, sample_potential(free, box, 0, 0)).matrix.tolist() == [[2.0]]


def test_three_site_path_spectrum(free):
    ev = one_body_spectrum(free, Box.cube(1, 3), 0, 0).eigenvalues
    assert np.allclose(ev, [2 - np.sqrt(2), 2, 2 + np.sqrt(2)], atol=1e-12)


def test_matrix_structure(uniform):
    box = Box.cube(2, 3)
    f = sample_potential(uniform, box, 1, 0)
    H = assemble_one_body(box, f).matrix
    assert np.array_equal(H, H.T)
    assert np.allclose(np.diag(H), 4 + f.values)
    sites = box.sites
    for i in range(box.size):
        for j in range(box.size):
            if i != j:
                adjacent = np.abs(sites[i] - sites[j]).sum() == 1
                assert H[i, j] == (-1.0 if adjacent else 0.0)


def test_constant_shift(free):
    box = Box.cube(2, 4)
    base = one_body_spectrum(free, box, 0, 0).eigenvalues
    shifted = one_body_spectrum(DisorderSpec.constant(0.7), box, 0, 0).eigenvalues
    assert np.allclose(shifted, base + 0.7, atol=1e-12)


def test_domain_mismatch(uniform):
    f = sample_potential(uniform, Box.cube(1, 4), 0, 0)
    with pytest.raises(ConfigError):
        assemble_one_body(Box.cube(1, 5), f)


def test_diagonalize_examples():
    assert diagonalize(np.diag([1.0, 5.0, 3.0])).eigenvalues.tolist() == [1, 3, 5]
    assert np.allclose(diagonalize(np.array([[2.0, -1.0], [-1.0, 2.0]])).eigenvalues, [1, 3])


def test_residual_is_reported(uniform):
    res = one_body_spectrum(uniform, Box.cube(2, 6), 0, 0)
    assert res.residual <= 1e-9 and len(res) == 36


def test_counting_function_examples():
    spec = SpectrumResult(np.array([1.0, 2.0, 2.0, 5.0]))
    assert counting_function(spec, 2.0) == 3
    assert counting_function(spec, 0.5) == 0
    assert counting_function(spec, 5.0) == 4
    assert counting_function(spec, 1e6) == 4


def test_counting_is_monotone_step(uniform):
    spec = one_body_spectrum(uniform, Box.cube(1, 30), 0, 0)
    grid = np.linspace(-1, 6, 300)
    counts = [counting_function(spec, E) for E in grid]
    assert all(a <= b for a, b in zip(counts, counts[1:]))
    for k, E in enumerate(spec.eigenvalues, start=1):
        assert counting_function(spec, E) >= k


def test_spectrum_bounds(uniform):
    for d in (1, 2):
        ev = one_body_spectrum(uniform, Box.cube(d, 5), 3, 0).eigenvalues
        assert ev.min() >= 0 - 1e-12 and ev.max() <= 4 * d + 1 + 1e-12


def test_covariance_identity(uniform):
    box = Box.cube(2, 4)
    gamma = (3, -5)
    f = sample_potential(uniform, box, 8, 1)
    lhs = assemble_one_body(box, translate_realization(f, gamma)).matrix
    moved = box.translate(gamma)
    rhs = assemble_one_body(moved, sample_potential(uniform, moved, 8, 1)).matrix
    assert np.array_equal(lhs, rhs)


def test_dirichlet_monotonicity(uniform):
    small, large = Box.cube(2, 3, [1, 1]), Box.cube(2, 6)
    big = sample_potential(uniform, large, 4, 0)
    e_large = diagonalize(assemble_one_body(large, big)).eigenvalues
    small_field = sample_potential(uniform, small, 4, 0)
    e_small = diagonalize(assemble_one_body(small, small_field)).eigenvalues
    assert np.all(e_large[: small.size] <= e_small + 1e-9)


def test_free_ids_approaches_closed_form(free):
    grid = np.linspace(0.05, 3.95, 40)
    ids = empirical_ids(free, Box.cube(1, 2000), grid)
    exact = np.arccos(1 - grid / 2) / np.pi
    assert np.max(np.abs(ids.values - exact)) < 1e-3
    # independent oracle: counting the closed-form path spectrum
    oracle = np.searchsorted(path_eigs(2000), grid, side="right") / 2000
    assert np.allclose(ids.values, oracle)


def test_ids_properties(uniform):
    ids = empirical_ids(uniform, Box.cube(1, 50), M=5, seed=1)
    assert np.all(np.diff(ids.values) >= 0)
    assert ids.values.min() >= 0 and ids.values[-1] == 1.0
    rows = list(ids.rows())
    assert rows[0][2:] == (5, 50, 1)


def test_ids_constant_potential_is_exact_step():
    ids = empirical_ids(DisorderSpec.constant(0.5), Box.cube(1, 7), np.linspace(0, 5, 101), M=3)
    oracle = np.searchsorted(path_eigs(7) + 0.5, ids.grid + 1e-9, side="right") / 7
    assert np.array_equal(ids.values, oracle)


def test_ids_rejects_bad_grid(free):
    with pytest.raises(ConfigError):
        empirical_ids(free, Box.cube(1, 5), [1.0, 0.5])


def test_free_ground_level_closed_form(free):
    boxes = [Box.cube(1, s) for s in (10, 20, 40)]
    trend = ground_level_trend(free, boxes, M=1)
    exact = [2 - 2 * np.cos(np.pi / (s + 1)) for s in (10, 20, 40)]
    assert np.allclose(trend.means, exact, atol=1e-12)


def test_ground_level_trend_monotone(uniform):
    boxes = [Box.cube(1, s) for s in (20, 40, 80)]
    trend = ground_level_trend(uniform, boxes, k=2, M=20, seed=3)
    assert trend.monotone_violations == 0
    assert np.all(np.diff(trend.means) < 0)


def test_ground_level_trend_errors(free):
    with pytest.raises(ConfigError):
        ground_level_trend(free, [Box.cube(1, 3)], k=4)
    with pytest.raises(ConfigError):
        ground_level_trend(free, [Box.cube(1, 5), Box.cube(1, 3)])


def test_ids_strictly_increasing_above_spectral_bottom(uniform):
    grid = np.linspace(0.0, 1.0, 21)
    ids = empirical_ids(uniform, Box.cube(1, 200), grid, M=50, seed=0)
    positive = ids.values[ids.values > 0]
    assert positive.size >= 10
    assert np.all(np.diff(positive) > 0)
