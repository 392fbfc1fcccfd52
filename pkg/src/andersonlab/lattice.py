"""Finite lattice domains in Z^d and the dyadic cube sequence.

Boxes count their sides in *sites*: a box with corner ``c`` and sides ``s``
holds the integer points ``c_i <= x_i <= c_i + s_i - 1``.  A continuum cube
``[-L/2, L/2]^d`` with integer vertices therefore becomes a box of ``L + 1``
sites per side.

Site arrays are always returned in lexicographic order (first coordinate
slowest), which fixes the one-body basis ordering everywhere else.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import ConfigError

__all__ = [
    "Box",
    "Region",
    "Domain",
    "CubeSequenceParams",
    "CubeLevel",
    "CubeFamily",
    "as_region",
    "box_distance",
    "region_distance",
    "boundary_ratio",
    "interior",
    "make_cube_sequence",
]


@dataclass(frozen=True)
class Box:
    """Axis-aligned lattice box with Dirichlet semantics."""

    corner: tuple[int, ...]
    sides: tuple[int, ...]

    def __post_init__(self):
        corner = tuple(int(c) for c in self.corner)
        sides = tuple(int(s) for s in self.sides)
        if len(corner) != len(sides) or not corner:
            raise ConfigError("box corner and sides must have the same positive length")
        if any(s < 1 for s in sides):
            raise ConfigError(f"box sides must be >= 1 site, got {sides}")
        object.__setattr__(self, "corner", corner)
        object.__setattr__(self, "sides", sides)

    @classmethod
    def cube(cls, d: int, side: int, corner: Sequence[int] | None = None) -> "Box":
        if corner is None:
            corner = (0,) * d
        return cls(tuple(corner), (side,) * d)

    @classmethod
    def centered(cls, d: int, L: int) -> "Box":
        """Lattice points of the continuum cube ``[-L/2, L/2]^d`` (``L`` even)."""
        if L % 2:
            raise ConfigError(f"centered cube needs an even side, got L={L}")
        return cls((-L // 2,) * d, (L + 1,) * d)

    @property
    def dimension(self) -> int:
        return len(self.sides)

    @property
    def size(self) -> int:
        return math.prod(self.sides)

    @property
    def lower(self) -> np.ndarray:
        return np.array(self.corner, dtype=np.int64)

    @property
    def upper(self) -> np.ndarray:
        return np.array(self.corner, dtype=np.int64) + np.array(self.sides, dtype=np.int64) - 1

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(np.array(self.sides, dtype=float) - 1.0))

    @cached_property
    def sites(self) -> np.ndarray:
        axes = [np.arange(c, c + s, dtype=np.int64) for c, s in zip(self.corner, self.sides)]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack(grid, axis=-1).reshape(-1, self.dimension)

    def contains(self, point: Sequence[int]) -> bool:
        p = np.asarray(point)
        return bool(np.all(p >= self.lower) and np.all(p <= self.upper))

    def contains_box(self, other: "Box") -> bool:
        return bool(np.all(other.lower >= self.lower) and np.all(other.upper <= self.upper))

    def intersects(self, other: "Box") -> bool:
        _check_dims(self, other)
        return bool(np.all(self.lower <= other.upper) and np.all(other.lower <= self.upper))

    def translate(self, gamma: Sequence[int]) -> "Box":
        gamma = tuple(int(g) for g in gamma)
        if len(gamma) != self.dimension:
            raise ConfigError("translation vector has wrong dimension")
        return Box(tuple(c + g for c, g in zip(self.corner, gamma)), self.sides)

    def to_json(self) -> dict:
        return {"dimension": self.dimension, "corner": list(self.corner), "sides": list(self.sides)}

    @classmethod
    def from_json(cls, data: dict) -> "Box":
        box = cls(tuple(data["corner"]), tuple(data["sides"]))
        if "dimension" in data and int(data["dimension"]) != box.dimension:
            raise ConfigError("box 'dimension' disagrees with corner/sides length")
        return box


@dataclass(frozen=True, eq=False)
class Region:
    """Arbitrary finite set of lattice sites, e.g. a union of disjoint boxes."""

    site_array: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.site_array, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise ConfigError("a region needs a non-empty (k, d) site array")
        arr = np.unique(arr, axis=0)  # lexicographic, duplicates removed
        arr.setflags(write=False)
        object.__setattr__(self, "site_array", arr)

    @classmethod
    def from_boxes(cls, *boxes: Box) -> "Region":
        return cls(np.concatenate([b.sites for b in boxes], axis=0))

    @property
    def sites(self) -> np.ndarray:
        return self.site_array

    @property
    def dimension(self) -> int:
        return self.site_array.shape[1]

    @property
    def size(self) -> int:
        return self.site_array.shape[0]

    @property
    def diameter(self) -> float:
        span = self.site_array.max(axis=0) - self.site_array.min(axis=0)
        return float(np.linalg.norm(span))

    def translate(self, gamma: Sequence[int]) -> "Region":
        return Region(self.site_array + np.asarray(gamma, dtype=np.int64))

    def __eq__(self, other):
        if not isinstance(other, (Region, Box)):
            return NotImplemented
        return np.array_equal(self.sites, other.sites)

    def __hash__(self):
        return hash(self.site_array.tobytes())


Domain = Union[Box, Region]


def as_region(domain: Domain) -> Region:
    if isinstance(domain, Region):
        return domain
    return Region(domain.sites)


def same_sites(a: Domain, b: Domain) -> bool:
    return a.dimension == b.dimension and np.array_equal(a.sites, b.sites)


def _check_dims(a, b):
    if a.dimension != b.dimension:
        raise ConfigError(f"dimension mismatch: {a.dimension} vs {b.dimension}")


def box_distance(a: Box, b: Box) -> float:
    """Euclidean distance between the closest pair of sites of two boxes."""
    _check_dims(a, b)
    gap = np.maximum(0, np.maximum(b.lower - a.upper, a.lower - b.upper))
    return float(np.linalg.norm(gap))


def region_distance(a: Domain, b: Domain) -> float:
    """Closest-pair distance for arbitrary domains (brute force)."""
    _check_dims(a, b)
    if isinstance(a, Box) and isinstance(b, Box):
        return box_distance(a, b)
    diff = a.sites[:, None, :] - b.sites[None, :, :]
    return float(np.sqrt((diff.astype(float) ** 2).sum(-1).min()))


def _depth(box: Box) -> np.ndarray:
    sites = box.sites
    return np.minimum(sites - box.lower, box.upper - sites).min(axis=1)


def boundary_ratio(box: Box, h: float) -> float:
    """Fraction ``|∂_h Λ| / |Λ|`` of sites lying within ``h`` of the box surface.

    The surface is the outermost shell of sites (depth 0); ``∂_h`` adds every
    site whose depth is strictly below ``h``.  Hence ``h = 0`` and ``h = 1``
    both select just the outer shell.
    """
    depth = _depth(box)
    inside = (depth == 0) | (depth < h)
    return float(inside.sum() / box.size)


def interior(domain: Domain, margin: float) -> Region | None:
    """Sites whose distance to the boundary of the domain exceeds ``margin``.

    Each site is treated as the unit cell centred on it, so the boundary runs
    half-way between a site of the domain and a site of its complement.  Two
    disjoint domains then have interiors at mutual distance > ``2 * margin``.
    Returns ``None`` when nothing survives.
    """
    if isinstance(domain, Box):
        keep = _depth(domain) + 0.5 > margin
        kept = domain.sites[keep]
    else:
        members = {tuple(s) for s in domain.sites.tolist()}
        w = int(math.ceil(margin + 1.0))
        offsets = np.array(list(itertools.product(range(-w, w + 1), repeat=domain.dimension)))
        cell_dist = np.linalg.norm(np.maximum(np.abs(offsets) - 0.5, 0.0), axis=1)
        close = offsets[cell_dist <= margin]
        kept = [s for s in domain.sites if all(tuple(s + o) in members for o in close)]
        kept = np.array(kept, dtype=np.int64).reshape(-1, domain.dimension)
    if len(kept) == 0:
        return None
    return Region(kept)


@dataclass(frozen=True)
class CubeSequenceParams:
    """Parameters of the dyadic cube sequence.

    ``delta`` is the slack that absorbs the rounding of ``L_N`` so that the
    gaps between sub-cubes never fall below ``R0``.
    """

    d: int
    theta: float
    L_tilde: int
    R0: float
    lam: float
    delta: float = 4.0

    def __post_init__(self):
        if self.d < 1:
            raise ConfigError("d >= 1 violated")
        if self.R0 <= 0:
            raise ConfigError("R0 > 0 violated")
        if self.delta <= 0:
            raise ConfigError("δ > 0 violated")
        if self.lam <= self.d:
            raise ConfigError(f"λ > d violated (λ={self.lam}, d={self.d})")
        lower = 2.0 ** (self.d / self.lam)
        if not self.theta > lower:
            raise ConfigError(f"θ > 2^(d/λ) = {lower:.6g} violated (θ={self.theta})")
        if not self.theta < 2:
            raise ConfigError(f"θ < 2 violated (θ={self.theta})")
        if not self.L_tilde > self.R:
            raise ConfigError(f"L̃ > R = {self.R:.6g} violated (L̃={self.L_tilde})")

    @property
    def R(self) -> float:
        return (self.R0 + self.delta) / (2.0 - self.theta)

    def side(self, N: int) -> int:
        """``L_N = 2 [ (2^N L̃ - θ^N R) / 2 ]``, always even."""
        return 2 * math.floor(0.5 * (2**N * self.L_tilde - self.theta**N * self.R))

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "theta": self.theta,
            "L_tilde": self.L_tilde,
            "R0": self.R0,
            "lam": self.lam,
            "delta": self.delta,
        }


@dataclass(frozen=True)
class CubeLevel:
    N: int
    L: int
    box: Box
    # placements of the 2^d sub-cubes of this level inside the next one;
    # empty on the last generated level
    gammas: tuple[tuple[int, ...], ...] = ()
    gap: int | None = None

    @property
    def translates(self) -> list[Box]:
        return [self.box.translate(g) for g in self.gammas]


@dataclass(frozen=True)
class CubeFamily:
    params: CubeSequenceParams
    levels: tuple[CubeLevel, ...]

    def __getitem__(self, N: int) -> CubeLevel:
        return self.levels[N]

    def __len__(self) -> int:
        return len(self.levels)


def _sign_vectors(d: int) -> Iterable[tuple[int, ...]]:
    return itertools.product((-1, 1), repeat=d)


def make_cube_sequence(params: CubeSequenceParams, N_max: int) -> CubeFamily:
    """Build cubes ``Λ_0 .. Λ_{N_max}`` and the sub-cube placements between them.

    Every placement is re-verified: the ``2^d`` translates of ``Λ_N`` are
    pairwise disjoint, lie inside ``Λ_{N+1}`` and are at least ``R0`` apart.
    """
    if N_max < 0:
        raise ConfigError("N_max >= 0 violated")
    d = params.d
    sides = [params.side(N) for N in range(N_max + 1)]
    if sides[0] < 0:
        raise ConfigError(f"L_0 = {sides[0]} is negative; increase L̃")
    levels = []
    for N, L in enumerate(sides):
        box = Box.centered(d, L)
        if N == N_max:
            levels.append(CubeLevel(N, L, box))
            continue
        L_next = sides[N + 1]
        gap = L_next - 2 * L
        if gap < params.R0:
            raise ConfigError(f"R_N >= R0 violated at level {N}: R_N={gap}, R0={params.R0}")
        half = (L_next - L) // 2
        gammas = tuple(tuple(half * e for e in signs) for signs in _sign_vectors(d))
        parent = Box.centered(d, L_next)
        translates = [box.translate(g) for g in gammas]
        for i, a in enumerate(translates):
            if not parent.contains_box(a):
                raise ConfigError(f"sub-cube {i} at level {N} leaves Λ_{N + 1}")
            for b in translates[i + 1:]:
                if box_distance(a, b) < params.R0:
                    raise ConfigError(f"sub-cubes at level {N} closer than R0")
        levels.append(CubeLevel(N, L, box, gammas, gap))
    return CubeFamily(params, tuple(levels))
