"""Fixed-``n`` sectors of the many-body Hamiltonian ``Σ_i H^(i) + W_n``.

Bases are lists of configurations given as site indices into ``domain.sites``:

* ``boltzmann``: every ordered ``n``-tuple (tuple basis, orthonormal);
* ``bose``: nondecreasing tuples, read as normalized occupation states;
* ``fermi``: strictly increasing tuples, read as normalized Slater states
  ``c†_{x1} ... c†_{xn} |0>``.

A symmetric (antisymmetric) tuple function ``F`` and its sector coefficient
``c`` are related by ``c = sqrt(n! / Π m_x!) F(x_sorted)`` for bosons and
``c = sqrt(n!) F(x_sorted)`` for fermions, which makes the map an isometry
between the tuple norm and the coefficient norm.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from .disorder import PotentialField
from .errors import ConfigError, InfeasibleError
from .interactions import InteractionSpec
from .lattice import Domain, same_sites
from .oneparticle import TOL, SpectrumResult, counting_function, diagonalize, neighbor_pairs

__all__ = [
    "DEFAULT_MAX_DIM",
    "Statistics",
    "BasisSet",
    "ManyBodyOperator",
    "basis_dimension",
    "enumerate_basis",
    "closed_packing",
    "assemble_many_body",
    "sector_spectrum",
    "entropy",
    "s_star",
    "energy_at_entropy",
    "ground_state_energy",
    "free_levels",
    "to_tuple_function",
    "from_tuple_function",
]

DEFAULT_MAX_DIM = 5000


class Statistics(str, Enum):
    BOLTZMANN = "boltzmann"
    BOSE = "bose"
    FERMI = "fermi"

    @classmethod
    def parse(cls, value) -> "Statistics":
        try:
            return cls(value)
        except ValueError:
            raise ConfigError(f"statistics must be one of {[s.value for s in cls]}, got {value!r}") from None


def basis_dimension(n_sites: int, n: int, statistics) -> int:
    """Sector dimension without hard cores."""
    st = Statistics.parse(statistics)
    if st is Statistics.BOLTZMANN:
        return n_sites**n
    if st is Statistics.BOSE:
        return math.comb(n_sites + n - 1, n)
    return math.comb(n_sites, n)


@dataclass(frozen=True, eq=False)
class BasisSet:
    statistics: Statistics
    domain: Domain
    n: int
    configs: np.ndarray = field(repr=False)
    hardcore_r0: float | None = None

    def __post_init__(self):
        cfg = np.asarray(self.configs, dtype=np.int64).reshape(-1, self.n)
        cfg.setflags(write=False)
        object.__setattr__(self, "configs", cfg)

    @property
    def dimension(self) -> int:
        return len(self.configs)

    def __len__(self) -> int:
        return len(self.configs)

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {c: i for i, c in enumerate(map(tuple, self.configs.tolist()))}

    def coordinates(self, row: int) -> np.ndarray:
        return self.domain.sites[self.configs[row]]


def _conflicts(sites: np.ndarray, r0: float) -> np.ndarray:
    diff = sites[:, None, :] - sites[None, :, :]
    dist = np.sqrt((diff.astype(float) ** 2).sum(-1))
    return dist < r0


def _clique_cells(sites: np.ndarray, r0: float) -> np.ndarray:
    """Cell label per site; any two sites in one cell are closer than ``r0``.

    Cells of ``k`` sites per axis have diameter ``(k-1)·sqrt(d)``, so at most
    one particle fits in each cell and the number of distinct cells among the
    free sites bounds how many more particles can be placed.
    """
    d = sites.shape[1]
    k = max(1, math.ceil(r0 / math.sqrt(d)))
    while k > 1 and (k - 1) * math.sqrt(d) >= r0:
        k -= 1
    cells = (sites - sites.min(axis=0)) // k
    _, labels = np.unique(cells, axis=0, return_inverse=True)
    return labels.ravel()


def _packings(sites: np.ndarray, r0: float, n: int | None, limit: int | None):
    """Increasing index sets with all pairwise distances ``>= r0``.

    With ``n`` given, yields every set of that size (raising once ``limit``
    is exceeded).  With ``n=None``, returns the largest packing found.
    """
    conflict = _conflicts(sites, r0)
    np.fill_diagonal(conflict, True)
    cells = _clique_cells(sites, r0)
    m = len(sites)
    found: list[tuple[int, ...]] = []
    best: list[tuple[int, ...]] = [()]

    def bound(free: np.ndarray) -> int:
        return len(np.unique(cells[free])) if free.any() else 0

    def dfs(chosen: list[int], free: np.ndarray):
        if n is not None and len(chosen) == n:
            found.append(tuple(chosen))
            if limit is not None and len(found) > limit:
                raise InfeasibleError(f"hard-core sector dimension exceeds cap {limit}")
            return
        if n is None and len(chosen) > len(best[0]):
            best[0] = tuple(chosen)
        target = n if n is not None else len(best[0]) + 1
        if len(chosen) + bound(free) < target:
            return
        for i in np.flatnonzero(free):
            nxt = free.copy()
            nxt[: i + 1] = False
            nxt &= ~conflict[i]
            dfs(chosen + [int(i)], nxt)

    dfs([], np.ones(m, dtype=bool))
    return found if n is not None else best[0]


def closed_packing(domain: Domain, r0: float) -> tuple[int, np.ndarray]:
    """Largest hard-core configuration in ``domain``: ``(n_max, witness sites)``."""
    if r0 <= 0:
        raise ConfigError("hard-core radius r0 > 0 violated")
    best = _packings(domain.sites, r0, None, None)
    return len(best), domain.sites[list(best)]


def enumerate_basis(
    domain: Domain,
    n: int,
    statistics,
    hardcore_r0: float | None = None,
    max_dim: int | None = DEFAULT_MAX_DIM,
) -> BasisSet:
    """Lexicographically ordered sector basis; see the module docstring for conventions."""
    st = Statistics.parse(statistics)
    if n < 1:
        raise ConfigError("n >= 1 violated")
    m = domain.size
    if st is Statistics.FERMI and n > m:
        raise InfeasibleError(f"no antisymmetric states: n={n} exceeds |Λ|={m}")
    if hardcore_r0 is None:
        dim = basis_dimension(m, n, st)
        if max_dim is not None and dim > max_dim:
            raise InfeasibleError(f"sector dimension {dim} exceeds cap {max_dim}")
        if st is Statistics.BOLTZMANN:
            it = itertools.product(range(m), repeat=n)
        elif st is Statistics.BOSE:
            it = itertools.combinations_with_replacement(range(m), n)
        else:
            it = itertools.combinations(range(m), n)
        configs = np.fromiter(itertools.chain.from_iterable(it), dtype=np.int64, count=dim * n)
        return BasisSet(st, domain, n, configs.reshape(dim, n))

    if hardcore_r0 <= 0:
        raise ConfigError("hard-core radius r0 > 0 violated")
    # coincident sites are always excluded, so every statistics sees sets
    limit = max_dim
    if st is Statistics.BOLTZMANN and max_dim is not None:
        limit = max_dim // math.factorial(n)
    sets = _packings(domain.sites, hardcore_r0, n, limit)
    if not sets:
        raise InfeasibleError(f"above closed packing: no configuration of n={n} with r0={hardcore_r0}")
    if st is Statistics.BOLTZMANN:
        rows = sorted(p for s in sets for p in itertools.permutations(s))
        if max_dim is not None and len(rows) > max_dim:
            raise InfeasibleError(f"sector dimension {len(rows)} exceeds cap {max_dim}")
    else:
        rows = sorted(sets)
    return BasisSet(st, domain, n, np.array(rows, dtype=np.int64), float(hardcore_r0))


@dataclass(frozen=True, eq=False)
class ManyBodyOperator:
    basis: BasisSet
    matrix: np.ndarray = field(repr=False)
    field: PotentialField = field(repr=False)
    interaction: InteractionSpec

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def _pair_table(domain: Domain, inter: InteractionSpec) -> np.ndarray:
    s = domain.sites.astype(float)
    r = np.sqrt(((s[:, None, :] - s[None, :, :]) ** 2).sum(-1))
    return inter.pair(r)


def assemble_many_body(basis: BasisSet, field_: PotentialField, inter: InteractionSpec) -> ManyBodyOperator:
    if not same_sites(basis.domain, field_.domain):
        raise ConfigError("potential field is defined on a different domain than the basis")
    if (inter.exclusion_radius or None) != basis.hardcore_r0:
        raise ConfigError(
            f"interaction kind {inter.kind!r} incompatible with basis hard-core radius {basis.hardcore_r0}"
        )
    dom = basis.domain
    onsite = 2.0 * dom.dimension + field_.values
    U = _pair_table(dom, inter)
    cfg = basis.configs
    n = basis.n

    diag = onsite[cfg].sum(axis=1)
    if n > 1:
        i, j = np.triu_indices(n, k=1)
        diag = diag + U[cfg[:, i], cfg[:, j]].sum(axis=1)
    if not np.all(np.isfinite(diag)):
        raise ConfigError("basis contains configurations inside the hard core")

    pairs = neighbor_pairs(dom.sites)
    if basis.statistics is Statistics.BOLTZMANN:
        rows, cols, vals = _boltzmann_hops(cfg, pairs, dom.size)
    else:
        rows, cols, vals = _sector_hops(basis, pairs)
    H = np.diag(diag)
    if len(rows):
        np.add.at(H, (np.asarray(rows), np.asarray(cols)), np.asarray(vals, dtype=float))
    return ManyBodyOperator(basis, H, field_, inter)


def _boltzmann_hops(cfg: np.ndarray, pairs: np.ndarray, m: int):
    """Single-slot hops in the tuple basis, vectorized over configurations.

    Tuples are stored in lexicographic order, so their base-``m`` codes are
    sorted and lookups reduce to ``searchsorted``.
    """
    D, n = cfg.shape
    weights = m ** np.arange(n - 1, -1, -1, dtype=np.int64)
    keys = cfg @ weights
    rows, cols = [], []
    both = np.concatenate([pairs, pairs[:, ::-1]]) if len(pairs) else pairs
    for p in range(n):
        slot = cfg[:, p]
        for a, b in both.tolist():
            src = np.flatnonzero(slot == a)
            if not len(src):
                continue
            new = keys[src] + (b - a) * weights[p]
            pos = np.minimum(np.searchsorted(keys, new), D - 1)
            ok = keys[pos] == new
            rows.append(pos[ok])
            cols.append(src[ok])
    if not rows:
        return [], [], []
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    return rows, cols, np.full(len(rows), -1.0)


def _sector_hops(basis: BasisSet, pairs: np.ndarray):
    """Hops between occupation states: ``-sqrt(n_x (n_y + 1))`` for bosons,
    ``-(-1)^{#occupied strictly between x and y}`` for fermions."""
    nbrs: list[list[int]] = [[] for _ in range(basis.domain.size)]
    for a, b in pairs.tolist():
        nbrs[a].append(b)
        nbrs[b].append(a)
    index = basis.index
    fermi = basis.statistics is Statistics.FERMI
    rows, cols, vals = [], [], []
    for r, conf in enumerate(basis.configs.tolist()):
        counts: dict[int, int] = {}
        for x in conf:
            counts[x] = counts.get(x, 0) + 1
        for x, nx in counts.items():
            rest = list(conf)
            rest.remove(x)
            for y in nbrs[x]:
                ny = counts.get(y, 0)
                if fermi and ny:
                    continue
                c = index.get(tuple(sorted(rest + [y])))
                if c is None:
                    continue
                if fermi:
                    lo, hi = min(x, y), max(x, y)
                    between = sum(1 for z in conf if lo < z < hi)
                    amp = -1.0 if between % 2 == 0 else 1.0
                else:
                    amp = -math.sqrt(nx * (ny + 1))
                rows.append(c), cols.append(r), vals.append(amp)
    return rows, cols, vals

def sector_spectrum(
    domain: Domain,
    field_: PotentialField,
    n: int,
    statistics,
    inter: InteractionSpec,
    max_dim: int | None = DEFAULT_MAX_DIM,
    vectors: bool = False,
) -> SpectrumResult:
    """Full spectrum of ``H(domain, n)`` in one statistics sector."""
    basis = enumerate_basis(domain, n, statistics, inter.exclusion_radius, max_dim)
    return diagonalize(assemble_many_body(basis, field_, inter), vectors=vectors)


def entropy(spectrum: SpectrumResult, E: float) -> float:
    """``log 𝒩(E)``; ``-inf`` below the ground state."""
    count = counting_function(spectrum, E)
    return math.log(count) if count else -math.inf


def s_star(S: float) -> tuple[float, int]:
    """``S* = inf{Q >= S : e^Q ∈ ℕ}`` as ``(S*, e^{S*})``.

    Values within relative ``1e-9`` of a log-integer are not rounded up.
    """
    if S <= 0:
        return 0.0, 1
    x = math.exp(S)
    k = round(x)
    if abs(x - k) > TOL * x:
        k = math.ceil(x)
    return math.log(k), int(k)


def energy_at_entropy(spectrum: SpectrumResult, S: float) -> float:
    """The ``e^{S*}``-th eigenvalue (1-based)."""
    _, k = s_star(S)
    if k > spectrum.dimension:
        raise InfeasibleError(f"sector exhausted: entropy demands level {k} of {spectrum.dimension}")
    return float(spectrum.eigenvalues[k - 1])


def ground_state_energy(op) -> float:
    """Lowest eigenvalue of a :class:`ManyBodyOperator` or :class:`SpectrumResult`."""
    spec = op if isinstance(op, SpectrumResult) else diagonalize(op)
    if spec.dimension == 0:
        raise InfeasibleError("empty basis")
    return float(spec.eigenvalues[0])


def free_levels(one_body: np.ndarray, n: int, k: int, statistics) -> np.ndarray:
    """The ``k`` lowest levels (with multiplicity) of ``H(Λ, n)`` at ``W = 0``.

    Levels are sums of one-body eigenvalues over orbital index combinations:
    sets for fermions, multisets for bosons, tuples for distinguishable
    particles (a multiset then stands for ``n!/Π m!`` degenerate tuples).
    Found by best-first search over the monotone successor graph.
    """
    st = Statistics.parse(statistics)
    eps = np.sort(np.asarray(one_body, dtype=float))
    m = len(eps)
    if st is Statistics.FERMI and n > m:
        raise InfeasibleError(f"no antisymmetric states: n={n} exceeds |Λ|={m}")
    strict = st is Statistics.FERMI
    start = tuple(range(n)) if strict else (0,) * n
    heap = [(float(eps[list(start)].sum()), start)]
    seen = {start}
    out: list[float] = []
    while heap and len(out) < k:
        E, idx = heapq.heappop(heap)
        mult = 1
        if st is Statistics.BOLTZMANN:
            mult = math.factorial(n)
            for _, grp in itertools.groupby(idx):
                mult //= math.factorial(len(list(grp)))
        out.extend([E] * min(mult, k - len(out)))
        for p in range(n):
            nxt_val = idx[p] + 1
            if p + 1 == n:
                ok = nxt_val < m
            else:
                ok = nxt_val < idx[p + 1] if strict else nxt_val <= idx[p + 1]
            if not ok:
                continue
            nxt = idx[:p] + (nxt_val,) + idx[p + 1 :]
            if nxt not in seen:
                seen.add(nxt)
                heapq.heappush(heap, (float(eps[list(nxt)].sum()), nxt))
    if len(out) < k:
        raise InfeasibleError(f"sector exhausted: only {len(out)} levels available")
    return np.array(out)


def _site_map(basis: BasisSet, target: Domain) -> np.ndarray:
    where = {s: i for i, s in enumerate(map(tuple, target.sites.tolist()))}
    try:
        return np.array([where[s] for s in map(tuple, basis.domain.sites.tolist())], dtype=np.int64)
    except KeyError:
        raise ConfigError("basis domain is not contained in the target domain") from None


def _occupation_factor(conf: tuple[int, ...]) -> float:
    f = math.factorial(len(conf))
    for _, grp in itertools.groupby(conf):
        f //= math.factorial(len(list(grp)))
    return math.sqrt(f)


def to_tuple_function(basis: BasisSet, coeffs: np.ndarray, target: Domain | None = None) -> np.ndarray:
    """Sector coefficients as a tuple function on ``target^n``, zero-extended.

    The result has shape ``(|target|,) * n`` and the same Euclidean norm as
    ``coeffs``.
    """
    target = basis.domain if target is None else target
    smap = _site_map(basis, target)
    n = basis.n
    F = np.zeros((target.size,) * n)
    coeffs = np.asarray(coeffs, dtype=float)
    st = basis.statistics
    if st is Statistics.BOLTZMANN:
        F[tuple(smap[basis.configs].T)] = coeffs
        return F
    perms = list(itertools.permutations(range(n)))
    signs = [_perm_sign(p) for p in perms]
    for conf, c in zip(basis.configs.tolist(), coeffs):
        if c == 0:
            continue
        mapped = [int(smap[x]) for x in conf]
        if st is Statistics.FERMI:
            val = c / math.sqrt(math.factorial(n))
            for p, sg in zip(perms, signs):
                F[tuple(mapped[i] for i in p)] = sg * val
        else:
            val = c / _occupation_factor(tuple(conf))
            for p in perms:
                F[tuple(mapped[i] for i in p)] = val
    return F


def from_tuple_function(F: np.ndarray, basis: BasisSet, source: Domain | None = None) -> np.ndarray:
    """Inverse of :func:`to_tuple_function` for (anti)symmetric ``F``."""
    source = basis.domain if source is None else source
    smap = _site_map(basis, source)
    vals = F[tuple(smap[basis.configs].T)]
    st = basis.statistics
    if st is Statistics.BOLTZMANN:
        return np.array(vals, dtype=float)
    if st is Statistics.FERMI:
        return vals * math.sqrt(math.factorial(basis.n))
    factors = np.array([_occupation_factor(tuple(c)) for c in basis.configs.tolist()])
    return vals * factors


def _perm_sign(p) -> int:
    sign, seen = 1, set()
    for i in range(len(p)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = p[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign
