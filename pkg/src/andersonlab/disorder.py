"""Reproducible i.i.d. site potentials for the Anderson model.

Values are produced by a counter-based generator: the Philox key is derived
from ``(master_seed, index)`` and the counter from the site coordinate, so
``V_ω(x)`` is a pure function of ``(seed, index, x)``.  Restricting a
realization to a sub-box, enumerating sites in another order or sampling in
parallel all give bit-identical values, and translating the realization is an
exact relabeling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .lattice import Domain, same_sites

__all__ = [
    "DisorderSpec",
    "PotentialField",
    "keyed_uniforms",
    "sample_potential",
    "translate_realization",
    "restrict",
]

_KINDS = ("uniform", "bernoulli", "constant")
_TWO53 = 2.0**-53


@dataclass(frozen=True)
class DisorderSpec:
    """Law of the site potential.

    kind : one of ``uniform`` (on ``[low, high]``), ``bernoulli`` (``v1``
        with probability ``p``, else ``v0``) or ``constant`` (``c``).
    """

    kind: str
    low: float = 0.0
    high: float = 1.0
    p: float = 0.5
    v0: float = 0.0
    v1: float = 1.0
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"disorder kind must be one of {_KINDS}, got {self.kind!r}")
        vals = (self.low, self.high, self.v0, self.v1, self.c)
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError("disorder support bounds must be finite")
        if self.kind == "uniform" and not self.low < self.high:
            raise ConfigError("uniform disorder requires low < high")
        if self.kind == "bernoulli" and not 0.0 <= self.p <= 1.0:
            raise ConfigError("bernoulli disorder requires 0 <= p <= 1")

    @classmethod
    def uniform(cls, low: float = 0.0, high: float = 1.0) -> "DisorderSpec":
        return cls("uniform", low=low, high=high)

    @classmethod
    def bernoulli(cls, p: float, v0: float = 0.0, v1: float = 1.0) -> "DisorderSpec":
        return cls("bernoulli", p=p, v0=v0, v1=v1)

    @classmethod
    def constant(cls, c: float = 0.0) -> "DisorderSpec":
        return cls("constant", c=c)

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "uniform":
            return (self.low, self.high)
        if self.kind == "bernoulli":
            atoms = [v for v, w in ((self.v0, 1 - self.p), (self.v1, self.p)) if w > 0]
            return (min(atoms), max(atoms))
        return (self.c, self.c)

    @property
    def lower_bound(self) -> float:
        return self.support[0]

    @property
    def lb_constant(self) -> float:
        """Smallest ``C >= 0`` with ``-Δ + V >= -C`` (since ``-Δ >= 0``)."""
        return max(0.0, -self.lower_bound)

    @property
    def is_random(self) -> bool:
        return self.support[0] != self.support[1]

    @property
    def mean(self) -> float:
        if self.kind == "uniform":
            return 0.5 * (self.low + self.high)
        if self.kind == "bernoulli":
            return (1 - self.p) * self.v0 + self.p * self.v1
        return self.c

    @property
    def variance(self) -> float:
        if self.kind == "uniform":
            return (self.high - self.low) ** 2 / 12.0
        if self.kind == "bernoulli":
            return self.p * (1 - self.p) * (self.v1 - self.v0) ** 2
        return 0.0

    def from_uniform(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms on ``[0, 1)`` to samples of this law."""
        if self.kind == "uniform":
            return self.low + (self.high - self.low) * u
        if self.kind == "bernoulli":
            return np.where(u < self.p, self.v1, self.v0).astype(float)
        return np.full(np.shape(u), float(self.c))

    def to_json(self) -> dict:
        if self.kind == "uniform":
            return {"kind": "uniform", "low": self.low, "high": self.high}
        if self.kind == "bernoulli":
            return {"kind": "bernoulli", "p": self.p, "v0": self.v0, "v1": self.v1}
        return {"kind": "constant", "c": self.c}

    @classmethod
    def from_json(cls, data: dict) -> "DisorderSpec":
        data = dict(data)
        kind = data.pop("kind", None)
        allowed = {"uniform": {"low", "high"}, "bernoulli": {"p", "v0", "v1"}, "constant": {"c"}}
        if kind not in allowed:
            raise ConfigError(f"disorder.kind must be one of {_KINDS}, got {kind!r}")
        extra = set(data) - allowed[kind]
        if extra:
            raise ConfigError(f"unknown disorder keys for kind {kind!r}: {sorted(extra)}")
        return cls(kind, **{k: float(v) for k, v in data.items()})


@lru_cache(maxsize=4096)
def _philox_key(master_seed: int, index: int) -> tuple[int, int]:
    words = np.random.SeedSequence([master_seed & (2**64 - 1), index & (2**64 - 1)])
    k0, k1 = words.generate_state(2, np.uint64)
    return int(k0), int(k1)


def keyed_uniforms(master_seed: int, index: int, sites: np.ndarray) -> np.ndarray:
    """Uniforms on ``[0, 1)``, one per site, keyed on ``(seed, index, site)``."""
    sites = np.asarray(sites, dtype=np.int64)
    if sites.ndim != 2 or sites.shape[1] > 4:
        raise ConfigError("keyed sampling supports dimensions 1..4")
    key = np.array(_philox_key(int(master_seed), int(index)), dtype=np.uint64)
    counters = np.zeros((sites.shape[0], 4), dtype=np.uint64)
    counters[:, : sites.shape[1]] = np.ascontiguousarray(sites).view(np.uint64)
    out = np.empty(sites.shape[0])
    for i, ctr in enumerate(counters):
        raw = np.random.Philox(counter=ctr, key=key).random_raw()
        out[i] = (int(raw) >> 11) * _TWO53
    return out


@dataclass(frozen=True, eq=False)
class PotentialField:
    """One realization ``V_ω`` restricted to a domain.

    ``value(x) = V(x + shift)`` where ``V`` is the keyed realization
    ``(master_seed, index)``; a nonzero ``shift`` encodes ``τ_shift ω``.
    """

    domain: Domain
    values: np.ndarray = field(repr=False)
    spec: DisorderSpec
    master_seed: int
    index: int
    shift: tuple[int, ...]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def box(self) -> Domain:
        return self.domain

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {tuple(s): float(v) for s, v in zip(self.domain.sites.tolist(), self.values)}

    def metadata(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "master_seed": self.master_seed,
            "index": self.index,
            "shift": list(self.shift),
        }


def sample_potential(
    spec: DisorderSpec,
    domain: Domain,
    master_seed: int,
    index: int,
    shift: Sequence[int] | None = None,
) -> PotentialField:
    d = domain.dimension
    shift = tuple(int(s) for s in shift) if shift is not None else (0,) * d
    if len(shift) != d:
        raise ConfigError("shift has wrong dimension")
    if spec.is_random:
        u = keyed_uniforms(master_seed, index, domain.sites + np.array(shift, dtype=np.int64))
        values = spec.from_uniform(u)
    else:
        values = np.full(domain.size, spec.support[0])
    return PotentialField(domain, values, spec, int(master_seed), int(index), shift)


def translate_realization(field_: PotentialField, gamma: Sequence[int]) -> PotentialField:
    """Field of ``τ_γ ω`` on the same domain: ``new(x) = old-realization(x + γ)``."""
    gamma = tuple(int(g) for g in gamma)
    shift = tuple(s + g for s, g in zip(field_.shift, gamma))
    return sample_potential(field_.spec, field_.domain, field_.master_seed, field_.index, shift)


def restrict(field_: PotentialField, domain: Domain) -> PotentialField:
    """Same realization evaluated on another domain."""
    if same_sites(domain, field_.domain):
        return field_
    return sample_potential(field_.spec, domain, field_.master_seed, field_.index, field_.shift)
