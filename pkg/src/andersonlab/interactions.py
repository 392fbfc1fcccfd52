"""Catalog of radial pair interactions ``U(|x|)`` and their class flags.

Flags follow the usual hierarchy: PI (pair, translation invariant), PTI
(tempered beyond ``R0``), Rep (``U >= 0``), SI (``W_n >= -n B``) and Comp
(``U = 0`` beyond ``R0``).  Distances are Euclidean.

On the lattice the only distance below 1 is 0 (two bosons or two
distinguishable particles on one site).  Tempered and Yukawa kinds evaluate
``U`` at ``max(|x|, R0)`` there unless a ``near_field`` value is supplied.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = ["FLAGS", "KINDS", "InteractionSpec"]

FLAGS = ("PI", "PTI", "Rep", "SI", "Comp")
KINDS = ("none", "tempered", "yukawa", "compact", "hardcore")

# flags a kind can possibly carry
_ATTAINABLE = {
    "none": set(FLAGS),
    "tempered": {"PI", "PTI", "Rep", "SI"},
    "yukawa": {"PI", "PTI", "Rep", "SI"},
    "compact": set(FLAGS),
    "hardcore": set(FLAGS),
}


def _steps(table, r):
    """Piecewise-constant ``U``: ``table[k] = (r_max, value)`` applies for ``r < r_max``."""
    out = np.zeros_like(r, dtype=float)
    done = np.zeros_like(r, dtype=bool)
    for r_max, value in table:
        hit = (~done) & (r < r_max)
        out[hit] = value
        done |= hit
    return out


@dataclass(frozen=True)
class InteractionSpec:
    """A pair interaction ``W_n = Σ_{i<j} U(|x_i - x_j|)``.

    Parameters
    ----------
    kind : one of ``none``, ``tempered``, ``yukawa``, ``compact``, ``hardcore``.
    A, lam, R0 : tempered power law ``U(r) = A r^-lam`` for ``r >= R0``.
    near_field : value used for ``r < R0`` (tempered/yukawa); default is the
        capped value ``U(R0)``.
    Q, screening : Yukawa ``U(r) = Q exp(-r / screening) / r``.
    table : ``((r_max, value), ...)`` steps for ``compact``, or the finite
        tail beyond the core for ``hardcore``.
    r0 : hard-core radius; configurations with a pair closer than ``r0`` are
        excluded from the Hilbert space.
    B : declared stability constant.
    flags : declared class flags; inferred from the kind when omitted.
    """

    kind: str = "none"
    A: float = 0.0
    lam: float = 2.0
    R0: float = 1.0
    near_field: float | None = None
    Q: float = 0.0
    screening: float = 1.0
    table: tuple[tuple[float, float], ...] = ()
    r0: float = 0.0
    B: float = 0.0
    flags: frozenset = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"interaction kind must be one of {KINDS}, got {self.kind!r}")
        table = tuple(sorted((float(r), float(v)) for r, v in self.table))
        object.__setattr__(self, "table", table)
        if self.R0 <= 0:
            raise ConfigError("R0 > 0 violated")
        if self.B < 0:
            raise ConfigError("stability constant B must be >= 0")
        if self.kind == "yukawa" and self.screening <= 0:
            raise ConfigError("yukawa screening length must be > 0")
        if self.kind == "compact" and not table:
            raise ConfigError("compact interaction needs a non-empty table")
        if self.kind == "hardcore":
            if self.r0 <= 0:
                raise ConfigError("hard-core radius r0 > 0 violated")
            if table and table[0][0] <= self.r0:
                raise ConfigError("hard-core tail steps must extend beyond r0")
        inferred = self._inferred_flags()
        flags = inferred if self.flags is None else frozenset(self.flags)
        unknown = flags - set(FLAGS)
        if unknown:
            raise ConfigError(f"unknown interaction flags {sorted(unknown)}")
        bad = flags - _ATTAINABLE[self.kind]
        if bad:
            raise ConfigError(f"interaction kind {self.kind!r} incompatible with flags {sorted(bad)}")
        object.__setattr__(self, "flags", frozenset(flags))

    # constructors -----------------------------------------------------
    @classmethod
    def none(cls) -> "InteractionSpec":
        return cls("none")

    @classmethod
    def tempered(cls, A: float, lam: float, R0: float = 1.0, near_field: float | None = None, B: float = 0.0):
        return cls("tempered", A=A, lam=lam, R0=R0, near_field=near_field, B=B)

    @classmethod
    def yukawa(cls, Q: float, screening: float, lam: float = 2.0, R0: float = 1.0, B: float = 0.0):
        return cls("yukawa", Q=Q, screening=screening, lam=lam, R0=R0, B=B)

    @classmethod
    def compact(cls, table, B: float = 0.0):
        return cls("compact", table=tuple(table), B=B)

    @classmethod
    def hardcore(cls, r0: float, tail=(), B: float = 0.0):
        return cls("hardcore", r0=r0, table=tuple(tail), B=B)

    # derived quantities ---------------------------------------------
    def _inferred_flags(self) -> frozenset:
        if self.kind == "none":
            return frozenset(FLAGS)
        base = {"PI", "PTI", "SI"}
        if self.kind in ("compact", "hardcore"):
            base.add("Comp")
        nonneg = {
            "tempered": self.A >= 0 and (self.near_field is None or self.near_field >= 0),
            "yukawa": self.Q >= 0,
            "compact": all(v >= 0 for _, v in self.table),
            "hardcore": all(v >= 0 for _, v in self.table),
        }[self.kind]
        if nonneg:
            base.add("Rep")
        return frozenset(base)

    @property
    def range(self) -> float:
        """``R0``: beyond it the tempered bound (or zero, for Comp) applies."""
        if self.kind == "compact":
            return self.table[-1][0]
        if self.kind == "hardcore":
            return max(self.r0, self.table[-1][0]) if self.table else self.r0
        return self.R0

    @property
    def bound_constant(self) -> float:
        """Smallest ``A`` with ``|U(r)| <= A r^-λ`` for ``r >= range`` (0 for compact kinds)."""
        if self.kind == "tempered":
            return abs(self.A)
        if self.kind == "yukawa":
            ell, lam, R0 = self.screening, self.decay, self.R0
            r_star = max(R0, (lam - 1.0) * ell)
            return abs(self.Q) * r_star ** (lam - 1.0) * math.exp(-r_star / ell)
        return 0.0

    @property
    def decay(self) -> float:
        return self.lam

    @property
    def exclusion_radius(self) -> float | None:
        return self.r0 if self.kind == "hardcore" else None

    @property
    def is_free(self) -> bool:
        return self.kind == "none"

    def pair(self, r) -> np.ndarray:
        """``U`` at Euclidean distance(s) ``r``; ``inf`` inside a hard core."""
        r = np.asarray(r, dtype=float)
        if self.kind == "none":
            return np.zeros_like(r)
        if self.kind in ("tempered", "yukawa"):
            far = self._far(np.maximum(r, self.R0))
            if self.near_field is not None:
                return np.where(r < self.R0, self.near_field, far)
            return far
        if self.kind == "compact":
            return _steps(self.table, r)
        out = _steps(self.table, r)
        return np.where(r < self.r0, np.inf, out)

    def _far(self, r):
        if self.kind == "tempered":
            return self.A * r ** (-self.lam)
        return self.Q * np.exp(-r / self.screening) / r

    def energy(self, coords: np.ndarray) -> float:
        """``W_n`` of one configuration given as an ``(n, d)`` coordinate array."""
        coords = np.asarray(coords, dtype=float)
        if len(coords) < 2:
            return 0.0
        i, j = np.triu_indices(len(coords), k=1)
        r = np.linalg.norm(coords[i] - coords[j], axis=1)
        return float(self.pair(r).sum())

    # validation -----------------------------------------------------
    def validate(self, d: int, samples: int = 2000, seed: int = 0, n_max: int = 6) -> None:
        """Spot-check the declared flags on lattice vectors and random configurations.

        PTI, Rep and Comp are checked on every lattice vector within a window;
        SI is a universal statement, so only a necessary sampled check is done.
        """
        w = int(math.ceil(self.range)) + 6
        vecs = np.array(list(itertools.product(range(-w, w + 1), repeat=d)), dtype=float)
        r = np.linalg.norm(vecs, axis=1)
        U = self.pair(r)
        neg = self.pair(np.linalg.norm(-vecs, axis=1))
        if not np.array_equal(U, neg):
            raise ConfigError("U(x) = U(-x) violated")
        beyond = r >= self.range
        if "PTI" in self.flags:
            if self.bound_constant > 0 and not self.lam > d:
                raise ConfigError(f"PTI requires λ > d (λ={self.lam}, d={d})")
            A = self.bound_constant
            lim = A * r[beyond] ** (-self.lam)
            if np.any(np.abs(U[beyond]) > lim * (1 + 1e-12) + 1e-300):
                raise ConfigError("PTI bound |U(x)| <= A|x|^-λ violated beyond R0")
        if "Comp" in self.flags and np.any(U[beyond] != 0):
            raise ConfigError("Comp violated: U nonzero beyond R0")
        if "Rep" in self.flags and np.any(U < 0):
            raise ConfigError("Rep violated: U takes negative values")
        if "SI" in self.flags:
            rng = np.random.default_rng(seed)
            for _ in range(samples):
                n = int(rng.integers(2, n_max + 1))
                coords = rng.integers(-w // 2, w // 2 + 1, size=(n, d))
                W = self.energy(coords)
                if W < -n * self.B - 1e-12:
                    raise ConfigError(f"SI violated: W_n = {W:.6g} < -nB = {-n * self.B:.6g}")

    def to_json(self) -> dict:
        out = {"kind": self.kind, "B": self.B, "flags": sorted(self.flags)}
        if self.kind == "tempered":
            out.update(A=self.A, lam=self.lam, R0=self.R0, near_field=self.near_field)
        elif self.kind == "yukawa":
            out.update(Q=self.Q, screening=self.screening, lam=self.lam, R0=self.R0)
        elif self.kind == "compact":
            out.update(table=[list(t) for t in self.table])
        elif self.kind == "hardcore":
            out.update(r0=self.r0, tail=[list(t) for t in self.table])
        return out

    @classmethod
    def from_json(cls, data: dict) -> "InteractionSpec":
        data = dict(data)
        kind = data.pop("kind", "none")
        allowed = {
            "none": set(),
            "tempered": {"A", "lam", "R0", "near_field"},
            "yukawa": {"Q", "screening", "lam", "R0"},
            "compact": {"table"},
            "hardcore": {"r0", "tail"},
        }
        if kind not in allowed:
            raise ConfigError(f"interaction.kind must be one of {KINDS}, got {kind!r}")
        extra = set(data) - allowed[kind] - {"B", "flags"}
        if extra:
            raise ConfigError(f"unknown interaction keys for kind {kind!r}: {sorted(extra)}")
        if "tail" in data:
            data["table"] = tuple(tuple(t) for t in data.pop("tail"))
        elif "table" in data:
            data["table"] = tuple(tuple(t) for t in data["table"])
        if "flags" in data and data["flags"] is not None:
            data["flags"] = frozenset(data["flags"])
        return cls(kind, **data)
