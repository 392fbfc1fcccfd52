"""Test functions on disjoint unions and the subadditive inequalities they imply.

Given sector vectors ``φ1`` on ``Λ1`` and ``φ2`` on ``Λ2`` (disjoint), the
glued vector on ``Λ1 ∪ Λ2`` is, in tuple form,

* boltzmann: ``ζ = φ1 ⊗ φ2``;
* bose: ``ζ(x) = Σ_I φ1(x^I) φ2(x^{I^c})``;
* fermi: ``ζ(x) = Σ_I (-1)^{Σ_{i∈I} i} φ1(x^I) φ2(x^{I^c})``,

where ``I`` runs over the ``n1``-subsets of ``{1, ..., n1+n2}`` (1-based) in
lexicographic order.  Summands have disjoint supports, so in the tuple norm
``‖ζ‖² = C(n1+n2, n1)·‖φ1‖²·‖φ2‖²`` for bose/fermi and ``‖φ1‖²·‖φ2‖²`` for
boltzmann.  Sector coefficients are obtained with
:func:`~andersonlab.manybody.from_tuple_function`, which is an isometry, so
the same identity holds for the coefficient vector.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np

from ._pool import ordered_map
from .disorder import DisorderSpec, PotentialField, restrict, sample_potential
from .errors import ConfigError, InfeasibleError
from .interactions import InteractionSpec
from .lattice import Box, Domain, Region, as_region, interior, region_distance
from .manybody import (
    BasisSet,
    ManyBodyOperator,
    Statistics,
    assemble_many_body,
    energy_at_entropy,
    enumerate_basis,
    from_tuple_function,
    s_star,
    sector_spectrum,
    to_tuple_function,
)
from .oneparticle import SpectrumResult, counting_function, diagonalize

__all__ = [
    "INEQ_TOL",
    "TestFunction",
    "BoundReport",
    "InequalityRow",
    "SubadditivityTable",
    "union_domain",
    "build_test_function",
    "verify_energy_bound",
    "test_function_trial",
    "test_function_check",
    "check_subadditivity",
    "check_subadditivity_multi",
]

INEQ_TOL = 1e-8


def union_domain(*domains: Domain) -> Region:
    parts = [as_region(d).sites for d in domains]
    for a, b in itertools.combinations(range(len(parts)), 2):
        if set(map(tuple, parts[a].tolist())) & set(map(tuple, parts[b].tolist())):
            raise ConfigError("domains overlap; disjoint supports are required")
    return Region(np.concatenate(parts))


@dataclass(frozen=True, eq=False)
class TestFunction:
    __test__ = False  # keep pytest from collecting this class

    basis: BasisSet
    coefficients: np.ndarray = field(repr=False)
    tuple_values: np.ndarray = field(repr=False)
    domains: tuple[Domain, Domain]
    ns: tuple[int, int]
    phi_norms2: tuple[float, float]

    @property
    def statistics(self) -> Statistics:
        return self.basis.statistics

    @property
    def norm2(self) -> float:
        return float(self.coefficients @ self.coefficients)

    @property
    def tuple_norm2(self) -> float:
        return float((self.tuple_values**2).sum())

    @property
    def expected_norm2(self) -> float:
        p = self.phi_norms2[0] * self.phi_norms2[1]
        if self.statistics is Statistics.BOLTZMANN:
            return p
        return math.comb(sum(self.ns), self.ns[0]) * p

    @property
    def norm_identity_error(self) -> float:
        return abs(self.tuple_norm2 - self.expected_norm2)


def build_test_function(basis1: BasisSet, phi1, basis2: BasisSet, phi2) -> TestFunction:
    if basis1.statistics is not basis2.statistics:
        raise ConfigError("test-function inputs must share the statistics")
    if basis1.hardcore_r0 != basis2.hardcore_r0:
        raise ConfigError("test-function inputs must share the hard-core radius")
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    if not phi1.any() or not phi2.any():
        raise ConfigError("test-function inputs must be nonzero")
    union = union_domain(basis1.domain, basis2.domain)
    st = basis1.statistics
    n1, n2 = basis1.n, basis2.n
    n = n1 + n2
    F1 = to_tuple_function(basis1, phi1, union)
    F2 = to_tuple_function(basis2, phi2, union)
    G = np.multiply.outer(F1, F2)
    if st is Statistics.BOLTZMANN:
        Z = G
    else:
        Z = np.zeros_like(G)
        for I in itertools.combinations(range(n), n1):
            rest = [i for i in range(n) if i not in I]
            axes = np.argsort(list(I) + rest)
            sign = (-1) ** sum(i + 1 for i in I) if st is Statistics.FERMI else 1
            Z += sign * G.transpose(axes)
    joint = enumerate_basis(union, n, st, basis1.hardcore_r0, max_dim=None)
    coeffs = from_tuple_function(Z, joint)
    if not math.isclose(coeffs @ coeffs, (Z**2).sum(), rel_tol=1e-10, abs_tol=1e-12):
        raise ConfigError("glued vector leaves the admissible configuration space")
    return TestFunction(
        joint,
        coeffs,
        Z,
        (basis1.domain, basis2.domain),
        (n1, n2),
        (float(phi1 @ phi1), float(phi2 @ phi2)),
    )


@dataclass(frozen=True)
class BoundReport:
    quotient: float
    bound: float
    margin: float
    passed: bool


def verify_energy_bound(
    zeta: TestFunction,
    H: ManyBodyOperator,
    E1: float,
    E2: float,
    inter: InteractionSpec,
    r: float,
) -> BoundReport:
    """Rayleigh quotient of ``ζ`` against ``E1 + E2 + A n1 n2 r^-λ``."""
    if H.basis.statistics is not zeta.statistics or H.basis.n != zeta.basis.n:
        raise ConfigError("operator sector does not match the test function")
    if H.dimension != zeta.basis.dimension or not np.array_equal(H.basis.configs, zeta.basis.configs):
        raise ConfigError("operator basis does not match the test function basis")
    if r < inter.range:
        raise ConfigError(f"r >= R0 violated (r={r}, R0={inter.range})")
    dist = region_distance(*zeta.domains)
    if r > dist + 1e-12:
        raise ConfigError(f"r <= dist(Λ1, Λ2) violated (r={r}, dist={dist})")
    if inter.kind not in ("none",) and "PTI" not in inter.flags and "Comp" not in inter.flags:
        raise ConfigError("interaction must be tempered or compactly supported")
    c = zeta.coefficients
    q = float(c @ (H.matrix @ c) / (c @ c))
    n1, n2 = zeta.ns
    bound = E1 + E2 + inter.bound_constant * n1 * n2 * r ** (-inter.decay)
    margin = bound - q
    return BoundReport(q, bound, margin, q <= bound + INEQ_TOL)


def test_function_trial(
    spec: DisorderSpec,
    inter: InteractionSpec,
    box1: Box,
    box2: Box,
    n1: int,
    n2: int,
    statistics,
    seed: int,
    index: int,
    r: float | None = None,
) -> tuple[BoundReport, float]:
    """One realization: glue the sub-box ground states and test the bound.

    Returns the report and the norm-identity error.
    """
    st = Statistics.parse(statistics)
    union = union_domain(box1, box2)
    r = region_distance(box1, box2) if r is None else r
    field_ = sample_potential(spec, union, seed, index)
    hc = inter.exclusion_radius
    parts = []
    for box, n in ((box1, n1), (box2, n2)):
        basis = enumerate_basis(box, n, st, hc)
        op = assemble_many_body(basis, restrict(field_, box), inter)
        res = diagonalize(op, vectors=True)
        parts.append((basis, res.vectors[:, 0], float(res.eigenvalues[0])))
    zeta = build_test_function(parts[0][0], parts[0][1], parts[1][0], parts[1][1])
    H = assemble_many_body(zeta.basis, field_, inter)
    return verify_energy_bound(zeta, H, parts[0][2], parts[1][2], inter, r), zeta.norm_identity_error


def _trial_row(index, **kw):
    rep, err = test_function_trial(index=index, **kw)
    return {
        "seed_index": index,
        "quotient": rep.quotient,
        "bound": rep.bound,
        "margin": rep.margin,
        "pass": rep.passed,
        "norm_error": err,
    }


def test_function_check(
    spec: DisorderSpec,
    inter: InteractionSpec,
    box1: Box,
    box2: Box,
    n1: int,
    n2: int,
    statistics,
    M: int,
    seed: int,
    workers: int = 1,
) -> list[dict]:
    task = partial(
        _trial_row, spec=spec, inter=inter, box1=box1, box2=box2, n1=n1, n2=n2, statistics=statistics, seed=seed
    )
    return ordered_map(task, range(M), workers)


test_function_trial.__test__ = False
test_function_check.__test__ = False


@dataclass(frozen=True)
class InequalityRow:
    seed_index: int
    lhs: float
    rhs: float
    margin: float
    passed: bool

    def as_tuple(self):
        return (self.seed_index, self.lhs, self.rhs, self.margin, int(self.passed))


@dataclass
class SubadditivityTable:
    statistics: Statistics
    interaction: str
    rows: dict[str, list[InequalityRow]] = field(default_factory=dict)

    @property
    def names(self) -> list[str]:
        return list(self.rows)

    def pass_rate(self, name: str) -> float:
        rows = self.rows[name]
        return sum(r.passed for r in rows) / len(rows) if rows else 1.0

    @property
    def all_passed(self) -> bool:
        return all(r.passed for rows in self.rows.values() for r in rows)


def _leq(index: int, lhs: float, rhs: float) -> InequalityRow:
    if math.isinf(rhs) and rhs > 0:
        return InequalityRow(index, lhs, rhs, math.inf, True)
    margin = rhs - lhs
    return InequalityRow(index, lhs, rhs, margin, margin >= -INEQ_TOL)


def _geq(index: int, lhs: float, rhs: float) -> InequalityRow:
    if math.isinf(rhs) and rhs < 0:
        return InequalityRow(index, lhs, rhs, math.inf, True)
    margin = lhs - rhs
    return InequalityRow(index, lhs, rhs, margin, margin >= -INEQ_TOL)


def _log_integer(S: float, name: str) -> float:
    S_star, _ = s_star(S)
    if S < 0 or abs(S_star - S) > 1e-9:
        raise ConfigError(f"exp({name}) ∈ ℕ violated ({name}={S})")
    return S_star


def _compact_energy(domain: Domain, field_: PotentialField, n, S, st, inter, max_dim) -> float:
    """``E(Â, n, S*)`` with ``Â`` the ``R0/2``-interior; ``+inf`` when ``Â`` cannot host the sector."""
    inner = interior(domain, inter.range / 2.0)
    if inner is None:
        return math.inf
    try:
        spec = sector_spectrum(inner, restrict(field_, inner), n, st, inter, max_dim)
        return energy_at_entropy(spec, S)
    except InfeasibleError:
        return math.inf


def _subadd_realization(index, spec, inter, box1, box2, n1, n2, S1, S2, st, r, seed, max_dim):
    union = union_domain(box1, box2)
    field_ = sample_potential(spec, union, seed, index)
    specs: list[SpectrumResult] = []
    for dom, n in ((box1, n1), (box2, n2), (union, n1 + n2)):
        specs.append(sector_spectrum(dom, restrict(field_, dom), n, st, inter, max_dim))
    E1 = energy_at_entropy(specs[0], S1)
    E2 = energy_at_entropy(specs[1], S2)
    E_bar = E1 + E2 + inter.bound_constant * n1 * n2 * r ** (-inter.decay)
    N1 = counting_function(specs[0], E1)
    N2 = counting_function(specs[1], E2)
    Nu = counting_function(specs[2], E_bar)
    out = {
        "N_lower": _geq(index, float(Nu), float(N1 * N2)),
        "S_lower": _geq(index, math.log(Nu) if Nu else -math.inf, math.log(N1) + math.log(N2)),
        "E_upper": _leq(index, energy_at_entropy(specs[2], S1 + S2), E_bar),
    }
    if "Comp" in inter.flags:
        f1 = _compact_energy(box1, field_, n1, S1, st, inter, max_dim)
        f2 = _compact_energy(box2, field_, n2, S2, st, inter, max_dim)
        fu = _compact_energy(union, field_, n1 + n2, S1 + S2, st, inter, max_dim)
        out["E_compact"] = _leq(index, fu, f1 + f2)
    return out


def check_subadditivity(
    spec: DisorderSpec,
    inter: InteractionSpec,
    box1: Box,
    box2: Box,
    n1: int,
    n2: int,
    S1: float,
    S2: float,
    seed: int,
    M: int,
    statistics="fermi",
    r: float | None = None,
    workers: int = 1,
    max_dim: int | None = 5000,
) -> SubadditivityTable:
    """Per-realization check of the counting, entropy and energy inequalities.

    With ``Ē = E1 + E2 + A n1 n2 r^-λ`` and ``E_j = E(Λ_j, n_j, S_j)``:

    * ``N_lower``: ``𝒩(Ē; Λ1∪Λ2) >= 𝒩(E1; Λ1)·𝒩(E2; Λ2)``;
    * ``S_lower``: the same in logarithms;
    * ``E_upper``: ``E(Λ1∪Λ2, n1+n2, S1+S2) <= Ē``;
    * ``E_compact`` (Comp interactions only): ``f(Λ1∪Λ2) <= f(Λ1) + f(Λ2)``
      with ``f(A, n, S) = E(Â, n, S*)`` and no interaction term.
    """
    st = Statistics.parse(statistics)
    S1 = _log_integer(S1, "S1")
    S2 = _log_integer(S2, "S2")
    dist = region_distance(box1, box2)
    r = dist if r is None else float(r)
    if r > dist + 1e-12:
        raise ConfigError(f"dist(Λ1, Λ2) >= r violated (dist={dist}, r={r})")
    if r < inter.range:
        raise ConfigError(f"r >= R0 violated (r={r}, R0={inter.range})")
    if M < 1:
        raise ConfigError("M >= 1 violated")
    task = partial(
        _subadd_realization,
        spec=spec, inter=inter, box1=box1, box2=box2, n1=n1, n2=n2,
        S1=S1, S2=S2, st=st, r=r, seed=seed, max_dim=max_dim,
    )
    table = SubadditivityTable(st, inter.kind)
    for result in ordered_map(task, range(M), workers):
        for name, row in result.items():
            table.rows.setdefault(name, []).append(row)
    return table


def _multi_realization(index, spec, inter, boxes, ns, Ss, st, r, seed, max_dim):
    union = union_domain(*boxes)
    field_ = sample_potential(spec, union, seed, index)
    total = 0.0
    for box, n, S in zip(boxes, ns, Ss):
        total += energy_at_entropy(sector_spectrum(box, restrict(field_, box), n, st, inter, max_dim), S)
    N = sum(ns)
    rhs = total + 0.5 * inter.bound_constant * N**2 * r ** (-inter.decay)
    lhs = energy_at_entropy(sector_spectrum(union, field_, N, st, inter, max_dim), sum(Ss))
    return _leq(index, lhs, rhs)


def check_subadditivity_multi(
    spec: DisorderSpec,
    inter: InteractionSpec,
    boxes: Sequence[Box],
    ns: Sequence[int],
    Ss: Sequence[float],
    seed: int,
    M: int,
    statistics="fermi",
    workers: int = 1,
    max_dim: int | None = 5000,
) -> SubadditivityTable:
    """``E(∪Λ_i, Σn_i, ΣS_i) <= Σ E(Λ_i, n_i, S_i) + (A/2)(Σn_i)² r^-λ`` per realization."""
    st = Statistics.parse(statistics)
    if not (len(boxes) == len(ns) == len(Ss)) or len(boxes) < 2:
        raise ConfigError("need matching boxes, particle numbers and entropies for at least two groups")
    Ss = [_log_integer(S, f"S{i + 1}") for i, S in enumerate(Ss)]
    r = min(region_distance(a, b) for a, b in itertools.combinations(boxes, 2))
    if r < inter.range:
        raise ConfigError(f"r >= R0 violated (r={r}, R0={inter.range})")
    task = partial(
        _multi_realization, spec=spec, inter=inter, boxes=tuple(boxes), ns=tuple(ns),
        Ss=tuple(Ss), st=st, r=r, seed=seed, max_dim=max_dim,
    )
    table = SubadditivityTable(st, inter.kind)
    table.rows["E_upper_multi"] = ordered_map(task, range(M), workers)
    return table
