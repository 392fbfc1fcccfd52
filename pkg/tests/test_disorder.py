import numpy as np
import pytest

from andersonlab.disorder import DisorderSpec, restrict, sample_potential, translate_realization
from andersonlab.errors import ConfigError
from andersonlab.lattice import Box


def test_constant_and_point_mass_fields():
    box = Box.cube(2, 4)
    assert np.all(sample_potential(DisorderSpec.constant(0.0), box, 1, 0).values == 0)
    assert np.all(sample_potential(DisorderSpec.bernoulli(1.0, 0.0, 3.0), box, 1, 0).values == 3)


def test_sampling_is_deterministic_and_keyed(uniform):
    box = Box.cube(2, 5)
    a = sample_potential(uniform, box, 42, 3)
    b = sample_potential(uniform, box, 42, 3)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, sample_potential(uniform, box, 42, 4).values)
    assert not np.array_equal(a.values, sample_potential(uniform, box, 43, 3).values)


def test_values_do_not_depend_on_enumeration_or_box(uniform):
    big = sample_potential(uniform, Box.cube(2, 6), 9, 1).as_dict()
    small = sample_potential(uniform, Box((2, 1), (3, 2)), 9, 1).as_dict()
    assert all(big[x] == v for x, v in small.items())


def test_values_lie_in_support(uniform):
    vals = sample_potential(uniform, Box.cube(1, 500), 0, 0).values
    assert vals.min() >= 0 and vals.max() < 1
    bern = sample_potential(DisorderSpec.bernoulli(0.3, -1, 2), Box.cube(1, 500), 0, 0).values
    assert set(np.unique(bern)) <= {-1.0, 2.0}


def test_translation_identity_and_group_law(uniform):
    box = Box.cube(2, 4)
    f = sample_potential(uniform, box, 5, 0)
    assert np.array_equal(translate_realization(f, (0, 0)).values, f.values)
    back = translate_realization(translate_realization(f, (3, -2)), (-3, 2))
    assert np.array_equal(back.values, f.values)


def test_translation_is_exact_relabeling(uniform):
    box = Box.cube(2, 4)
    gamma = (7, -3)
    moved = translate_realization(sample_potential(uniform, box, 5, 2), gamma)
    shifted = sample_potential(uniform, box.translate(gamma), 5, 2)
    assert np.array_equal(moved.values, shifted.values)


def test_restrict_reuses_realization(uniform):
    big = sample_potential(uniform, Box.cube(1, 20), 3, 0)
    sub = restrict(big, Box.cube(1, 5, [4]))
    assert np.array_equal(sub.values, big.values[4:9])


@pytest.mark.parametrize(
    "spec",
    [DisorderSpec.uniform(-1.0, 2.0), DisorderSpec.bernoulli(0.25, 0.0, 4.0)],
)
def test_moments_within_five_standard_errors(spec):
    n = 100_000
    vals = sample_potential(spec, Box.cube(1, n), 2024, 0).values
    se_mean = np.sqrt(spec.variance / n)
    assert abs(vals.mean() - spec.mean) < 5 * se_mean
    centered = vals - spec.mean
    m4 = np.mean(centered**4)
    se_var = np.sqrt((m4 - spec.variance**2) / n)
    assert abs(vals.var() - spec.variance) < 5 * se_var


@pytest.mark.parametrize(
    "kwargs",
    [dict(kind="uniform", low=1.0, high=1.0), dict(kind="bernoulli", p=1.5), dict(kind="gauss")],
)
def test_invalid_specs(kwargs):
    with pytest.raises(ConfigError):
        DisorderSpec(**kwargs)


def test_spec_json_roundtrip_and_unknown_keys():
    spec = DisorderSpec.bernoulli(0.2, 1.0, 3.0)
    assert DisorderSpec.from_json(spec.to_json()) == spec
    with pytest.raises(ConfigError):
        DisorderSpec.from_json({"kind": "uniform", "low": 0, "hgh": 1})


def test_lower_bound_constant():
    assert DisorderSpec.uniform(-2, 1).lb_constant == 2
    assert DisorderSpec.uniform(0, 1).lb_constant == 0
