"""One-particle Anderson Hamiltonian ``-Δ + V_ω`` with Dirichlet restriction.

Convention: ``-Δ = 2d·I - A`` where ``A`` is the nearest-neighbour adjacency
of the domain, so ``-Δ >= 0`` and the free spectrum sits in ``[0, 4d]``.
Dirichlet restriction drops couplings to exterior sites and keeps the full
diagonal ``2d``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np
import scipy.linalg

from ._pool import ordered_map
from .disorder import DisorderSpec, PotentialField, sample_potential
from .errors import ConfigError, SolverError
from .lattice import Box, Domain, same_sites

__all__ = [
    "TOL",
    "OneBodyOperator",
    "SpectrumResult",
    "EmpiricalIDS",
    "TrendResult",
    "neighbor_pairs",
    "assemble_one_body",
    "diagonalize",
    "counting_function",
    "one_body_spectrum",
    "default_grid",
    "empirical_ids",
    "ground_level_trend",
]

# absolute + relative tolerance for eigenvalue comparisons and counting
TOL = 1e-9
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class OneBodyOperator:
    domain: Domain
    matrix: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Sorted eigenvalues (with multiplicity) of a symmetric operator.

    ``residual`` is ``max_k ||H v_k - E_k v_k|| / (1 + |E_k|)`` for unit
    eigenvectors, or ``0.0`` when the levels were obtained in closed form.
    """

    eigenvalues: np.ndarray
    residual: float = 0.0
    vectors: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if ev.ndim != 1:
            raise ValueError("eigenvalues must be one-dimensional")
        if np.any(np.diff(ev) < 0):
            raise ValueError("eigenvalues must be sorted")
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def dimension(self) -> int:
        return len(self.eigenvalues)

    def __len__(self) -> int:
        return len(self.eigenvalues)


def neighbor_pairs(sites: np.ndarray) -> np.ndarray:
    """Index pairs ``(i, j)``, ``i < j``, of sites at unit distance."""
    index = {tuple(s): i for i, s in enumerate(sites.tolist())}
    d = sites.shape[1]
    pairs = []
    for i, s in enumerate(sites.tolist()):
        for axis in range(d):
            t = list(s)
            t[axis] += 1
            j = index.get(tuple(t))
            if j is not None:
                pairs.append((min(i, j), max(i, j)))
    return np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)


def assemble_one_body(domain: Domain, field_: PotentialField) -> OneBodyOperator:
    if not same_sites(domain, field_.domain):
        raise ConfigError("potential field is defined on a different domain")
    d = domain.dimension
    H = np.diag(2.0 * d + field_.values)
    pairs = neighbor_pairs(domain.sites)
    if len(pairs):
        H[pairs[:, 0], pairs[:, 1]] = -1.0
        H[pairs[:, 1], pairs[:, 0]] = -1.0
    return OneBodyOperator(domain, H)


def diagonalize(op, vectors: bool = False) -> SpectrumResult:
    """Full spectrum of a symmetric operator (or bare matrix) by dense ``eigh``.

    Raises :class:`SolverError` when some eigenpair misses the residual bound.
    """
    H = op.matrix if hasattr(op, "matrix") else np.asarray(op)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ConfigError("operator matrix must be square")
    if H.shape[0] == 0:
        raise ConfigError("cannot diagonalize an empty operator")
    if not np.allclose(H, H.T, atol=0.0, rtol=0.0):
        raise ConfigError("operator matrix is not symmetric")
    try:
        E, V = scipy.linalg.eigh(H, driver="evd")
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise SolverError(f"eigensolver failed: {exc}") from exc
    res = np.linalg.norm(H @ V - V * E, axis=0) / (1.0 + np.abs(E))
    worst = float(res.max())
    if worst > RESIDUAL_TOL:
        raise SolverError(f"residual {worst:.3e} exceeds {RESIDUAL_TOL:.0e}")
    return SpectrumResult(E, worst, V if vectors else None)


def counting_function(spectrum: SpectrumResult, E: float) -> int:
    """``card{k : E_k <= E}``; the tolerance absorbs solver residuals."""
    return int(np.searchsorted(spectrum.eigenvalues, E + TOL, side="right"))


def one_body_spectrum(
    spec: DisorderSpec, domain: Domain, master_seed: int, index: int, vectors: bool = False
) -> SpectrumResult:
    field_ = sample_potential(spec, domain, master_seed, index)
    return diagonalize(assemble_one_body(domain, field_), vectors=vectors)


def default_grid(spec: DisorderSpec, d: int, points: int = 400) -> np.ndarray:
    """Uniform grid over the deterministic spectral range ``[inf V, 4d + sup V]``."""
    lo, hi = spec.support
    return np.linspace(lo, 4.0 * d + hi, points)


@dataclass(frozen=True, eq=False)
class EmpiricalIDS:
    """Disorder-averaged ``N_ω^Λ(E) = 𝒩(E) / |Λ|`` on an energy grid."""

    grid: np.ndarray
    values: np.ndarray
    M: int
    domain: Domain
    seed: int
    spec: DisorderSpec
    stderr: np.ndarray | None = field(default=None, repr=False)

    @property
    def box_side(self) -> int:
        if isinstance(self.domain, Box):
            return max(self.domain.sides)
        return self.domain.size

    def rows(self):
        for E, N in zip(self.grid, self.values):
            yield (float(E), float(N), self.M, self.box_side, self.seed)


def _ids_counts(args, spec, domain, grid):
    seed, index = args
    ev = one_body_spectrum(spec, domain, seed, index).eigenvalues
    return np.searchsorted(ev, grid + TOL, side="right") / domain.size


def empirical_ids(
    spec: DisorderSpec,
    domain: Domain,
    grid: Sequence[float] | None = None,
    M: int = 1,
    seed: int = 0,
    workers: int = 1,
) -> EmpiricalIDS:
    if M < 1:
        raise ConfigError("M >= 1 violated")
    grid = default_grid(spec, domain.dimension) if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise ConfigError("energy grid must be strictly increasing")
    if spec.is_random:
        task = partial(_ids_counts, spec=spec, domain=domain, grid=grid)
        counts = np.array(ordered_map(task, [(seed, m) for m in range(M)], workers))
    else:
        # deterministic potential: every realization is the same operator
        counts = np.tile(_ids_counts((seed, 0), spec, domain, grid), (M, 1))
    stderr = counts.std(axis=0, ddof=1) / np.sqrt(M) if M > 1 else np.zeros(len(grid))
    return EmpiricalIDS(grid, counts.mean(axis=0), M, domain, seed, spec, stderr)


@dataclass(frozen=True, eq=False)
class TrendResult:
    sides: tuple[int, ...]
    means: np.ndarray
    stderrs: np.ndarray
    samples: np.ndarray = field(repr=False)
    monotone_violations: int = 0


def _kth_levels(args, spec, boxes, k):
    seed, index = args
    out = []
    for box in boxes:
        # keyed sampling: the restriction to a sub-box is the same realization
        field_ = sample_potential(spec, box, seed, index)
        H = assemble_one_body(box, field_).matrix
        out.append(scipy.linalg.eigh(H, eigvals_only=True, subset_by_index=[k - 1, k - 1])[0])
    return out


def ground_level_trend(
    spec: DisorderSpec,
    boxes: Sequence[Box],
    k: int = 1,
    M: int = 100,
    seed: int = 0,
    workers: int = 1,
) -> TrendResult:
    """Disorder mean of ``E_k(Λ, 1)`` along a nested increasing family of boxes.

    Dirichlet monotonicity ``E_k(Λ') <= E_k(Λ)`` for ``Λ ⊂ Λ'`` is checked per
    realization; violations are counted, not raised.
    """
    boxes = list(boxes)
    if not boxes:
        raise ConfigError("need at least one box")
    for small, large in zip(boxes, boxes[1:]):
        if not large.contains_box(small):
            raise ConfigError("boxes must be nested and increasing")
    if k < 1 or k > boxes[0].size:
        raise ConfigError(f"k={k} exceeds the smallest box dimension {boxes[0].size}")
    task = partial(_kth_levels, spec=spec, boxes=tuple(boxes), k=k)
    samples = np.array(ordered_map(task, [(seed, m) for m in range(M)], workers))
    violations = int(np.sum(np.diff(samples, axis=1) > TOL * (1 + np.abs(samples[:, :-1]))))
    stderr = samples.std(axis=0, ddof=1) / np.sqrt(M) if M > 1 else np.zeros(len(boxes))
    sides = tuple(max(b.sides) for b in boxes)
    return TrendResult(sides, samples.mean(axis=0), stderr, samples, violations)
