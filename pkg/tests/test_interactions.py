import math

import numpy as np
import pytest

from andersonlab.errors import ConfigError
from andersonlab.interactions import InteractionSpec


def test_free_interaction_is_zero_with_all_flags():
    w = InteractionSpec.none()
    assert np.all(w.pair([0.0, 1.0, 5.0]) == 0)
    assert w.flags == {"PI", "PTI", "Rep", "SI", "Comp"}
    assert w.bound_constant == 0


def test_tempered_cap_and_tail():
    w = InteractionSpec.tempered(A=2.0, lam=3.0, R0=2.0)
    assert w.pair(0.0) == pytest.approx(2.0 * 2.0**-3)
    assert w.pair(1.0) == pytest.approx(2.0 * 2.0**-3)
    assert w.pair(4.0) == pytest.approx(2.0 * 4.0**-3)
    assert "Comp" not in w.flags and "Rep" in w.flags


def test_tempered_near_field_override():
    w = InteractionSpec.tempered(A=1.0, lam=2.0, R0=2.0, near_field=5.0)
    assert w.pair(0.0) == 5.0 and w.pair(1.0) == 5.0 and w.pair(2.0) == 0.25


def test_yukawa_bound_constant_dominates_on_lattice():
    w = InteractionSpec.yukawa(Q=1.5, screening=2.0, lam=3.0)
    r = np.linspace(1, 60, 5000)
    assert np.all(np.abs(w.pair(r)) <= w.bound_constant * r ** -3.0 * (1 + 1e-12))
    # the supremum is attained at r = (λ-1)·ℓ = 4
    assert w.bound_constant == pytest.approx(1.5 * 4.0**2 * math.exp(-2.0))


def test_compact_table():
    w = InteractionSpec.compact([(2.0, 0.5), (1.0, 3.0)])
    assert w.range == 2.0
    assert w.pair([0.0, 1.0, 1.5, 2.0, 9.0]).tolist() == [3.0, 0.5, 0.5, 0.0, 0.0]
    assert w.bound_constant == 0


def test_hardcore_core_is_infinite():
    w = InteractionSpec.hardcore(2.0, [(3.0, 0.25)])
    assert np.isinf(w.pair(1.0)) and w.pair(2.0) == 0.25 and w.pair(3.0) == 0.0
    assert w.exclusion_radius == 2.0 and w.range == 3.0


def test_pair_energy():
    w = InteractionSpec.compact([(1.5, 1.0)])
    assert w.energy(np.array([[0], [1], [3]])) == 1.0
    assert w.energy(np.array([[0]])) == 0.0


@pytest.mark.parametrize(
    "w",
    [
        InteractionSpec.none(),
        InteractionSpec.tempered(1.0, 2.0),
        InteractionSpec.yukawa(1.0, 1.0),
        InteractionSpec.compact([(2.0, 0.5)]),
        InteractionSpec.hardcore(2.0, [(3.0, 0.25)]),
    ],
)
def test_validate_accepts_catalog(w):
    w.validate(1)
    if w.bound_constant == 0:
        w.validate(2, samples=200)


def test_incompatible_flags_rejected():
    with pytest.raises(ConfigError, match="incompatible"):
        InteractionSpec("tempered", A=1.0, flags=frozenset({"Comp"}))


def test_declared_repulsion_checked():
    w = InteractionSpec("compact", table=((2.0, -1.0),), flags=frozenset({"PI", "Rep"}))
    with pytest.raises(ConfigError, match="Rep"):
        w.validate(1)


def test_attractive_interaction_needs_stability_constant():
    w = InteractionSpec.compact([(1.5, -1.0)])
    assert "Rep" not in w.flags
    with pytest.raises(ConfigError, match="SI"):
        w.validate(1)
    InteractionSpec.compact([(1.5, -1.0)], B=2.5).validate(1)


def test_pti_requires_decay_faster_than_dimension():
    with pytest.raises(ConfigError, match="λ > d"):
        InteractionSpec.tempered(1.0, 1.5).validate(2)


def test_json_roundtrip():
    for w in (InteractionSpec.tempered(1.0, 2.0, near_field=0.3), InteractionSpec.hardcore(2.0, [(3.0, 0.1)])):
        assert InteractionSpec.from_json(w.to_json()) == w
    with pytest.raises(ConfigError):
        InteractionSpec.from_json({"kind": "tempered", "A": 1, "range": 3})
