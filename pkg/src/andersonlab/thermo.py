"""Thermodynamic-limit experiments.

* the ``X_N`` sequence along the dyadic cube family and its almost-decreasing
  mean and shrinking variance;
* free-particle limits: Maxwell-Boltzmann energies per particle, the Fermi
  energy and the ground-state energy density of free fermions;
* Weyl-type lower bound and Wegner-type scaling of the eigenvalue count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np
import scipy.linalg

from ._pool import ordered_map
from .disorder import DisorderSpec, PotentialField, restrict, sample_potential, translate_realization
from .errors import ConfigError, InfeasibleError
from .interactions import InteractionSpec
from .lattice import Box, CubeSequenceParams, Domain, make_cube_sequence
from .manybody import (
    DEFAULT_MAX_DIM,
    Statistics,
    basis_dimension,
    energy_at_entropy,
    free_levels,
    s_star,
    sector_spectrum,
)
from .oneparticle import TOL, EmpiricalIDS, assemble_one_body, empirical_ids

__all__ = [
    "ThermoParams",
    "LevelStats",
    "SequenceDiagnostics",
    "FermiEnergy",
    "FermionDensityReport",
    "level_energy",
    "run_cube_sequence",
    "boltzmann_limit_check",
    "fermi_energy",
    "fermion_energy_density",
    "direct_fermion_density",
    "fermion_density_report",
    "weyl_bound_check",
    "weyl_table",
    "wegner_scaling_check",
    "hardcore_packing",
    "entropy_energy_table",
    "invert_entropy_density",
]


def _one_body_eigs(field_: PotentialField) -> np.ndarray:
    return scipy.linalg.eigvalsh(assemble_one_body(field_.domain, field_).matrix)


def level_energy(
    domain: Domain,
    field_: PotentialField,
    n: int,
    S: float,
    statistics,
    inter: InteractionSpec,
    max_dim: int | None = DEFAULT_MAX_DIM,
) -> float:
    """``E(Λ, n, S)`` by exact diagonalization, or by one-body arithmetic at ``W = 0``.

    The sector is diagonalized when its dimension fits ``max_dim``; larger
    sectors are only reachable without interaction.
    """
    st = Statistics.parse(statistics)
    if st is Statistics.FERMI and n > domain.size:
        raise InfeasibleError(f"no antisymmetric states: n={n} exceeds |Λ|={domain.size}")
    dim = basis_dimension(domain.size, n, st)
    if inter.exclusion_radius is not None or max_dim is None or dim <= max_dim:
        return energy_at_entropy(sector_spectrum(domain, field_, n, st, inter, max_dim), S)
    if not inter.is_free:
        raise InfeasibleError(f"sector dimension {dim} exceeds cap {max_dim} with interaction {inter.kind!r}")
    _, k = s_star(S)
    if k > max_dim:
        raise InfeasibleError(f"entropy demand e^S* = {k} exceeds cap {max_dim}")
    return float(free_levels(_one_body_eigs(field_), n, k, st)[k - 1])


# cube sequence ---------------------------------------------------------


@dataclass(frozen=True)
class ThermoParams:
    """Inputs of the cube-sequence experiment.

    ``rho`` is snapped to the nearest admissible density
    ``m / (2^{N0 d} L̃^d)``; the requested value is kept in ``rho_requested``.
    ``B`` and ``C`` default to the interaction's declared constant and to
    ``max(0, -inf supp V)``.
    """

    rho: float
    cube: CubeSequenceParams
    N_max: int = 2
    sigma: float = 0.0
    N0: int = 0
    M: int = 100
    seed: int = 0
    B: float | None = None
    C: float | None = None
    max_dim: int = DEFAULT_MAX_DIM
    rho_requested: float | None = None

    def __post_init__(self):
        if not self.rho > 0:
            raise ConfigError("ρ > 0 violated")
        if self.sigma < 0:
            raise ConfigError("σ >= 0 violated")
        if self.N_max < self.N0 or self.N0 < 0:
            raise ConfigError("0 <= N0 <= N_max violated")
        if self.M < 1:
            raise ConfigError("M >= 1 violated")
        unit = 2 ** (self.N0 * self.cube.d) * self.cube.L_tilde**self.cube.d
        m = max(1, round(self.rho * unit))
        if self.rho_requested is None:
            object.__setattr__(self, "rho_requested", self.rho)
        object.__setattr__(self, "rho", m / unit)

    @property
    def snapped(self) -> bool:
        return not math.isclose(self.rho, self.rho_requested, rel_tol=0, abs_tol=1e-15)

    def n(self, N: int) -> int:
        return round(2 ** (N * self.cube.d) * self.rho * self.cube.L_tilde**self.cube.d)

    def S(self, N: int) -> float:
        return self.sigma * self.n(N)


@dataclass(frozen=True)
class LevelStats:
    N: int
    L: int
    n: int
    S: float
    mean: float
    var: float
    se_mean: float
    se_var: float
    G: float | None
    min_X: float


@dataclass
class SequenceDiagnostics:
    params: ThermoParams
    statistics: Statistics
    levels: list[LevelStats]
    samples: np.ndarray = field(repr=False)
    nonnegative: bool = True
    recursion_ok: list[bool] = field(default_factory=list)
    variance_ok: list[bool] = field(default_factory=list)
    pathwise_ok: bool | None = None
    notices: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        ok = self.nonnegative and all(self.recursion_ok) and all(self.variance_ok)
        return ok and self.pathwise_ok is not False

    def per_particle(self) -> list[float]:
        """``mean X_N / (ρ L̃^d)``: the disorder-mean energy per particle (minus the B+C shift)."""
        p = self.params
        shift = (p.B or 0.0) + (p.C or 0.0)
        return [lv.mean / (p.rho * p.cube.L_tilde**p.cube.d) - shift for lv in self.levels]


def _variance_se(x: np.ndarray) -> float:
    M = len(x)
    if M < 4:
        return math.inf
    s2 = x.var(ddof=1)
    m4 = np.mean((x - x.mean()) ** 4)
    return math.sqrt(max(0.0, (m4 - (M - 3) / (M - 1) * s2**2) / M))


def _cube_realization(index, params, spec, inter, st, levels, shift_const, pathwise):
    d = params.cube.d
    # sample once on the largest cube; every smaller cube is a restriction
    field_top = sample_potential(spec, levels[-1].box, params.seed, index)
    X, path = [], []
    for lv in levels:
        n, S = params.n(lv.N), params.S(lv.N)
        E = level_energy(lv.box, restrict(field_top, lv.box), n, S, st, inter, params.max_dim)
        X.append(2.0 ** (-lv.N * d) * (E + shift_const * n))
    if pathwise:
        for lv in levels[:-1]:
            n, S = params.n(lv.N), params.S(lv.N)
            base = restrict(field_top, lv.box)
            total = 0.0
            for g in lv.gammas:
                moved = translate_realization(base, g)
                E = level_energy(lv.box, moved, n, S, st, inter, params.max_dim)
                total += 2.0 ** (-lv.N * d) * (E + shift_const * n)
            path.append(total / 2**d)
    return X, path


def run_cube_sequence(
    params: ThermoParams,
    spec: DisorderSpec,
    inter: InteractionSpec,
    statistics="fermi",
    workers: int = 1,
    pathwise: bool = True,
) -> SequenceDiagnostics:
    """Monte Carlo statistics of ``X_N = 2^{-Nd}(E(Λ_N, n_N, S_N) + (B+C) n_N)``.

    Checks, over levels ``N0..N_max``: ``X_N >= 0`` per realization, the mean
    recursion ``E X_{N+1} <= E X_N + G_N`` and a nonincreasing variance, both
    within three combined standard errors.  With ``pathwise`` the realization
    level inequality ``X_{N+1}(ω) <= 2^{-d} Σ_i X_N(τ_{γ_i} ω) + G_N`` is
    checked as well.  Levels whose sector exceeds the dimension cap are
    dropped with a notice.
    """
    st = Statistics.parse(statistics)
    B = inter.B if params.B is None else params.B
    C = spec.lb_constant if params.C is None else params.C
    if B < 0 or C < 0:
        raise ConfigError("B >= 0 and C >= 0 violated")
    if C < spec.lb_constant:
        raise ConfigError(f"C = {C} below the one-body lower bound {spec.lb_constant}")
    params = ThermoParams(**{**params.__dict__, "B": B, "C": C})
    family = make_cube_sequence(params.cube, params.N_max)
    d = params.cube.d
    notices = []
    if params.snapped:
        notices.append(f"ρ snapped from {params.rho_requested} to admissible {params.rho}")

    levels = []
    for lv in family.levels[params.N0 :]:
        n = params.n(lv.N)
        try:
            if st is Statistics.FERMI and n > lv.box.size:
                raise InfeasibleError(f"no antisymmetric states: n={n} exceeds |Λ|={lv.box.size}")
            if basis_dimension(lv.box.size, n, st) > params.max_dim and not inter.is_free:
                raise InfeasibleError(f"sector dimension exceeds cap {params.max_dim}")
        except InfeasibleError as exc:
            if not levels:
                raise
            notices.append(f"level {lv.N} truncated: {exc}")
            break
        levels.append(lv)
    if pathwise and len(levels) > 1 and not all(lv.gammas for lv in levels[:-1]):
        pathwise = False

    shift_const = B + C
    task = partial(
        _cube_realization, params=params, spec=spec, inter=inter, st=st,
        levels=tuple(levels), shift_const=shift_const, pathwise=pathwise and len(levels) > 1,
    )
    results = ordered_map(task, range(params.M), workers)
    X = np.array([r[0] for r in results])
    A, lam = inter.bound_constant, inter.decay
    L_t = params.cube.L_tilde

    stats = []
    for j, lv in enumerate(levels):
        x = X[:, j]
        G = None
        if lv.gap is not None and j + 1 < len(levels):
            G = A * params.rho**2 * L_t ** (2 * d) * 2.0 ** ((lv.N + 2) * d - 1) * lv.gap ** (-lam)
        M = len(x)
        var = float(x.var(ddof=1)) if M > 1 else 0.0
        stats.append(
            LevelStats(
                lv.N, lv.L, params.n(lv.N), params.S(lv.N), float(x.mean()), var,
                math.sqrt(var / M) if M > 1 else 0.0,
                _variance_se(x) if M > 1 else 0.0,
                G, float(x.min()),
            )
        )
    recursion, variance = [], []
    for a, b in zip(stats, stats[1:]):
        recursion.append(b.mean <= a.mean + a.G + 3 * math.hypot(a.se_mean, b.se_mean) + TOL)
        variance.append(b.var <= a.var + 3 * math.hypot(a.se_var, b.se_var) + TOL)
    path_ok = None
    if pathwise and len(levels) > 1:
        path_ok = True
        for r in results:
            for j, avg in enumerate(r[1]):
                if r[0][j + 1] > avg + stats[j].G + 1e-8:
                    path_ok = False
    return SequenceDiagnostics(
        params, st, stats, X, bool(np.all(X >= -1e-12)), recursion, variance, path_ok, notices
    )


# Maxwell-Boltzmann ------------------------------------------------------


@dataclass
class BoltzmannTrend:
    sides: tuple[int, ...]
    means: np.ndarray
    stderrs: np.ndarray
    subadd_pass_rate: float
    samples: np.ndarray = field(repr=False)
    subadd_margins: np.ndarray = field(repr=False)

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.means) < 0))


def _boltzmann_realization(index, spec, boxes, n, S, split, seed):
    (n1, S1), (n2, S2) = split
    top = sample_potential(spec, boxes[-1], seed, index)
    per, margins = [], []
    for box in boxes:
        eps = _one_body_eigs(restrict(top, box))

        def E(m, s):
            k = s_star(s)[1]
            return float(free_levels(eps, m, k, Statistics.BOLTZMANN)[k - 1])

        per.append(E(n, S) / n)
        margins.append(E(n1, S1) + E(n2, S2) - E(n1 + n2, S1 + S2))
    return per, margins


def boltzmann_limit_check(
    spec: DisorderSpec,
    boxes: Sequence[Box],
    n: int = 2,
    S: float = 0.0,
    M: int = 200,
    seed: int = 0,
    split: tuple[tuple[int, float], tuple[int, float]] | None = None,
    inter: InteractionSpec | None = None,
    workers: int = 1,
) -> BoltzmannTrend:
    """``E(Λ, n, S)/n`` for distinguishable free particles along growing boxes.

    Also checks ``E(Λ, n1+n2, S1+S2) <= E(Λ, n1, S1) + E(Λ, n2, S2)`` on each
    box and realization, with ``split = ((n1, S1), (n2, S2))`` defaulting to
    ``((n - n//2, S), (n//2, 0))``.
    """
    if inter is not None and not inter.is_free:
        raise ConfigError("the Maxwell-Boltzmann limit requires W = 0")
    if n < 2:
        raise ConfigError("n >= 2 violated (the split needs two groups)")
    boxes = list(boxes)
    for a, b in zip(boxes, boxes[1:]):
        if not b.contains_box(a):
            raise ConfigError("boxes must be nested and increasing")
    split = split or ((n - n // 2, S), (n // 2, 0.0))
    if split[0][0] + split[1][0] != n:
        raise ConfigError("split particle numbers must add up to n")
    task = partial(_boltzmann_realization, spec=spec, boxes=tuple(boxes), n=n, S=S, split=split, seed=seed)
    res = ordered_map(task, range(M), workers)
    per = np.array([r[0] for r in res])
    margins = np.array([r[1] for r in res])
    se = per.std(axis=0, ddof=1) / math.sqrt(M) if M > 1 else np.zeros(len(boxes))
    rate = float(np.mean(margins >= -1e-8))
    return BoltzmannTrend(tuple(max(b.sides) for b in boxes), per.mean(axis=0), se, rate, per, margins)


# free fermions ----------------------------------------------------------


@dataclass(frozen=True)
class FermiEnergy:
    value: float
    low: float
    high: float

    @property
    def is_interval(self) -> bool:
        return self.high > self.low


def fermi_energy(ids: EmpiricalIDS, rho: float) -> FermiEnergy:
    """Generalized inverse ``inf{E on grid : N(E) >= ρ}`` plus the flat-level interval."""
    if not rho > 0:
        raise ConfigError("ρ > 0 violated")
    N = ids.values
    hit = np.flatnonzero(N >= rho - 1e-12)
    if len(hit) == 0:
        raise InfeasibleError(f"no solution: ρ={rho} exceeds sup N = {N.max():.6g}")
    j = hit[0]
    low = float(ids.grid[j])
    flat = np.flatnonzero(np.abs(N - rho) <= 1e-12)
    high = float(ids.grid[flat[-1]]) if len(flat) and flat[-1] >= j else low
    return FermiEnergy(low, low, high)


def fermion_energy_density(ids: EmpiricalIDS, rho: float) -> float:
    """``(1/ρ) ∫ E dN`` over the lowest ``ρ`` of spectral mass.

    The mass already present at the first grid point sits there; every later
    cell carries its increment at the cell midpoint, and the cell reaching
    ``ρ`` contributes only the part needed to complete mass ``ρ``.
    """
    fermi_energy(ids, rho)
    E, N = ids.grid, ids.values
    total = 0.0
    mass = min(N[0], rho)
    total += mass * E[0]
    for j in range(1, len(E)):
        if mass >= rho:
            break
        dN = min(N[j] - N[j - 1], rho - mass)
        if dN > 0:
            total += dN * 0.5 * (E[j] + E[j - 1])
            mass += dN
    return total / rho


@dataclass(frozen=True)
class DirectDensity:
    mean: float
    stderr: float
    values: np.ndarray = field(repr=False)


def _direct_one(index, spec, box, n, seed):
    eps = _one_body_eigs(sample_potential(spec, box, seed, index))
    return float(eps[:n].sum() / n)


def direct_fermion_density(
    spec: DisorderSpec, box: Domain, n: int, M: int = 1, seed: int = 0, workers: int = 1
) -> DirectDensity:
    """Disorder mean of ``(1/n) Σ_{k<=n} E_k(Λ, 1)``, the free-fermion ground energy per particle."""
    if n < 1 or n > box.size:
        raise InfeasibleError(f"no antisymmetric states: n={n} outside 1..|Λ|={box.size}")
    if spec.is_random:
        vals = np.array(ordered_map(partial(_direct_one, spec=spec, box=box, n=n, seed=seed), range(M), workers))
    else:
        vals = np.full(M, _direct_one(0, spec, box, n, seed))
    se = float(vals.std(ddof=1) / math.sqrt(M)) if M > 1 else 0.0
    return DirectDensity(float(vals.mean()), se, vals)


@dataclass(frozen=True)
class FermionDensityReport:
    rho: float
    fermi: FermiEnergy
    formula: float
    direct: float
    direct_se: float
    box: Domain
    n: int
    M: int

    @property
    def relative_gap(self) -> float:
        return abs(self.formula - self.direct) / abs(self.direct)

    @property
    def fermi_energy(self) -> float:
        return self.fermi.value


def fermion_density_report(
    spec: DisorderSpec,
    box: Domain,
    rho: float,
    M: int = 1,
    seed: int = 0,
    grid: Sequence[float] | None = None,
    workers: int = 1,
) -> FermionDensityReport:
    """Formula (via the empirical IDS) and direct values of the energy density at ``ρ``."""
    n = round(rho * box.size)
    if n < 1:
        raise InfeasibleError(f"ρ·|Λ| = {rho * box.size:.3g} rounds to zero particles")
    ids = empirical_ids(spec, box, grid, M, seed, workers)
    fe = fermi_energy(ids, rho)
    formula = fermion_energy_density(ids, rho)
    direct = direct_fermion_density(spec, box, n, M, seed, workers)
    return FermionDensityReport(rho, fe, formula, direct.mean, direct.stderr, box, n, M)


def _free_direct(box: Domain, n: int) -> float:
    return direct_fermion_density(DisorderSpec.constant(0.0), box, n).mean


def weyl_bound_check(report: FermionDensityReport, d: int, beta: float | None = None) -> bool:
    """``direct >= β ρ^{2/d}``; by default ``β`` is the free-model value on the same box."""
    if beta is None:
        beta = _free_direct(report.box, report.n) / report.rho ** (2.0 / d)
    return report.direct >= beta * report.rho ** (2.0 / d) - 1e-12


def weyl_table(
    spec: DisorderSpec, box: Box, rhos: Sequence[float], M: int = 50, seed: int = 0, workers: int = 1
) -> list[dict]:
    """Per-realization comparison of the direct density with the free witness ``β ρ^{2/d}``."""
    if spec.lower_bound < 0:
        raise ConfigError("the Weyl comparison needs nonnegative disorder (inf supp V >= 0)")
    d = box.dimension
    rows = []
    for rho in rhos:
        n = round(rho * box.size)
        free = _free_direct(box, n)
        beta = free / rho ** (2.0 / d)
        direct = direct_fermion_density(spec, box, n, M, seed, workers)
        for m, v in enumerate(direct.values):
            rows.append({"rho": rho, "seed_index": m, "direct": float(v), "beta": beta,
                         "bound": free, "pass": bool(v >= free - 1e-12)})
    return rows


def _interval_counts(index, spec, boxes, intervals, seed):
    top = sample_potential(spec, boxes[-1], seed, index)
    out = []
    for box in boxes:
        eps = _one_body_eigs(restrict(top, box))
        out.append([int(np.searchsorted(eps, b, "right") - np.searchsorted(eps, a, "left")) for a, b in intervals])
    return out


def wegner_scaling_check(
    spec: DisorderSpec,
    boxes: Sequence[Box],
    intervals: Sequence[tuple[float, float]],
    M: int = 200,
    seed: int = 0,
    workers: int = 1,
    max_spread: float = 0.25,
) -> tuple[list[dict], bool]:
    """Mean eigenvalue count in ``I`` divided by ``|Λ|·|I|``, across boxes and intervals.

    Passes when, for every interval of positive length, the ratio varies by
    less than ``max_spread`` (relative to its minimum) across the boxes.
    """
    if spec.kind != "uniform":
        raise ConfigError("the Wegner scaling check needs a regular (uniform) site distribution")
    boxes = list(boxes)
    for a, b in zip(boxes, boxes[1:]):
        if not b.contains_box(a):
            raise ConfigError("boxes must be nested and increasing")
    task = partial(_interval_counts, spec=spec, boxes=tuple(boxes), intervals=tuple(map(tuple, intervals)), seed=seed)
    counts = np.array(ordered_map(task, range(M), workers), dtype=float)  # (M, boxes, intervals)
    mean = counts.mean(axis=0)
    se = counts.std(axis=0, ddof=1) / math.sqrt(M) if M > 1 else np.zeros_like(mean)
    rows, ok = [], True
    for k, (a, b) in enumerate(intervals):
        width = b - a
        ratios = []
        for j, box in enumerate(boxes):
            ratio = mean[j, k] / (box.size * width) if width > 0 else math.nan
            ratios.append(ratio)
            rows.append({"box_side": max(box.sides), "a": a, "b": b, "mean_count": float(mean[j, k]),
                         "stderr": float(se[j, k]), "ratio": ratio})
        if width > 0:
            lo, hi = min(ratios), max(ratios)
            spread = (hi - lo) / lo if lo > 0 else math.inf
            for row in rows[-len(boxes):]:
                row["spread"] = spread
            ok &= spread < max_spread
    return rows, bool(ok)


# hard cores -------------------------------------------------------------


def hardcore_packing(sides: Sequence[int], r0: float, d: int = 1) -> list[dict]:
    """Closed packing by exhaustive search on cubes of the given sides (in sites)."""
    from .manybody import closed_packing, enumerate_basis

    rows = []
    for L in sides:
        box = Box.cube(d, L)
        n_max, _ = closed_packing(box, r0)
        try:
            enumerate_basis(box, n_max + 1, "fermi", r0, max_dim=None)
            empty = False
        except InfeasibleError:
            empty = True
        rho = n_max / box.size
        target = 1.0 / r0 ** d if d == 1 else math.nan
        rows.append({"side": L, "n_max": n_max, "rho_max": rho, "target": target,
                     "deviation": abs(rho - target), "next_empty": empty,
                     "pass": bool(empty and abs(rho - target) <= 1.0 / L + 1e-15)})
    return rows


# entropy-energy tables at W = 0 ----------------------------------------


def _entropy_row(index, spec, box, n, st, sigmas, seed, max_dim):
    eps = _one_body_eigs(sample_potential(spec, box, seed, index))
    ks = [s_star(s * n)[1] for s in sigmas]
    kmax = max(ks)
    if kmax > max_dim:
        raise InfeasibleError(f"entropy demand e^S* = {kmax} exceeds cap {max_dim}")
    levels = free_levels(eps, n, kmax, st)
    return [float(levels[k - 1]) / n for k in ks]


def entropy_energy_table(
    spec: DisorderSpec,
    box: Box,
    n: int,
    sigmas: Sequence[float],
    statistics="fermi",
    M: int = 10,
    seed: int = 0,
    max_dim: int = DEFAULT_MAX_DIM,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Disorder mean of ``E(Λ, n, σ n)/n`` over an increasing ``σ`` list (free particles)."""
    st = Statistics.parse(statistics)
    sig = np.asarray(sigmas, dtype=float)
    if np.any(np.diff(sig) < 0) or np.any(sig < 0):
        raise ConfigError("σ values must be nonnegative and nondecreasing")
    task = partial(_entropy_row, spec=spec, box=box, n=n, st=st, sigmas=tuple(sig), seed=seed, max_dim=max_dim)
    vals = np.array(ordered_map(task, range(M), workers))
    return sig, vals.mean(axis=0)


def invert_entropy_density(sigmas: np.ndarray, energies: np.ndarray, energy: float) -> float:
    """Largest tabulated-and-interpolated ``σ`` whose energy density does not exceed ``energy``."""
    sigmas, energies = np.asarray(sigmas), np.asarray(energies)
    if energy < energies[0]:
        raise InfeasibleError("energy below the ground-state density: no admissible σ")
    if energy >= energies[-1]:
        return float(sigmas[-1])
    j = int(np.searchsorted(energies, energy, side="right"))
    e0, e1 = energies[j - 1], energies[j]
    if e1 == e0:
        return float(sigmas[j - 1])
    return float(sigmas[j - 1] + (sigmas[j] - sigmas[j - 1]) * (energy - e0) / (e1 - e0))
