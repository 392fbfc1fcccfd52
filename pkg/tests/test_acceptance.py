"""End-to-end acceptance checks at their stated sizes and tolerances.

Each test records one ``PASS``/``FAIL`` line that is printed in the pytest
terminal summary.  Run this file directly to print the lines without pytest.
"""

import math
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_KEY

from andersonlab.constructions import check_subadditivity, test_function_check
from andersonlab.disorder import DisorderSpec, restrict, sample_potential, translate_realization
from andersonlab.errors import InfeasibleError
from andersonlab.interactions import InteractionSpec
from andersonlab.lattice import Box, CubeSequenceParams
from andersonlab.manybody import (
    Statistics,
    basis_dimension,
    energy_at_entropy,
    entropy,
    enumerate_basis,
    sector_spectrum,
)
from andersonlab.oneparticle import assemble_one_body, diagonalize
from andersonlab.thermo import (
    ThermoParams,
    boltzmann_limit_check,
    fermion_density_report,
    hardcore_packing,
    run_cube_sequence,
    wegner_scaling_check,
    weyl_table,
)

pytestmark = pytest.mark.slow

STATS = ("boltzmann", "bose", "fermi")
UNIFORM = DisorderSpec.uniform(0.0, 1.0)
FREE = DisorderSpec.constant(0.0)
PAIR = (Box.cube(1, 6), Box.cube(1, 6, [9]))
KINDS = {
    "none": InteractionSpec.none(),
    "tempered": InteractionSpec.tempered(1.0, 2.0),
    "compact": InteractionSpec.compact([(2.0, 0.5)]),
    "hardcore": InteractionSpec.hardcore(2.0, [(3.0, 0.25)]),
}
FREE_HALF = 2 * (math.pi - 2) / math.pi


@pytest.fixture
def record(request):
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def _record(number: int, passed: bool, detail: str):
        lines.append(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed

    return _record


def criterion_1():
    t0 = time.perf_counter()
    free = fermion_density_report(FREE, Box.cube(1, 2000), 0.5)
    t_free = time.perf_counter() - t0
    ok_free = (
        abs(free.formula - FREE_HALF) / FREE_HALF < 0.01
        and abs(free.direct - FREE_HALF) / FREE_HALF < 0.01
        and t_free < 60
    )
    t0 = time.perf_counter()
    dis = fermion_density_report(UNIFORM, Box.cube(1, 500), 0.5, M=50, seed=0)
    t_dis = time.perf_counter() - t0
    ok_dis = dis.relative_gap < 0.03 and t_dis < 300
    detail = (
        f"free formula={free.formula:.6f} direct={free.direct:.6f} ({t_free:.1f}s); "
        f"uniform gap={dis.relative_gap:.2e} ({t_dis:.1f}s)"
    )
    return ok_free and ok_dis, detail


def criterion_2():
    boxes = [Box.cube(1, s) for s in (20, 40, 80, 160)]
    trend = boltzmann_limit_check(UNIFORM, boxes, n=2, S=0.0, M=200, seed=0, split=((1, 0.0), (1, 0.0)))
    final = float(trend.means[-1])
    ok = trend.strictly_decreasing and final < 0.05 and trend.subadd_pass_rate == 1.0
    means = ", ".join(f"{m:.4f}" for m in trend.means)
    detail = (
        f"means=[{means}] decreasing={trend.strictly_decreasing} final<0.05={final < 0.05} "
        f"subadd rate={trend.subadd_pass_rate:.3f}"
    )
    return ok, detail


def criterion_3():
    ok, worst_margin, worst_norm = True, math.inf, 0.0
    for st in STATS:
        rows = test_function_check(UNIFORM, KINDS["tempered"], *PAIR, 1, 1, st, M=100, seed=0)
        ok &= all(r["pass"] for r in rows)
        worst_margin = min(worst_margin, min(r["margin"] for r in rows))
        worst_norm = max(worst_norm, max(r["norm_error"] for r in rows))
    ok &= worst_norm <= 1e-10
    return ok, f"min margin={worst_margin:.4f} max norm error={worst_norm:.1e}"


def criterion_4():
    rates = {}
    for kind, inter in KINDS.items():
        for st in STATS:
            for S1, S2 in ((0.0, 0.0), (math.log(2), math.log(3))):
                table = check_subadditivity(UNIFORM, inter, *PAIR, 1, 1, S1, S2, seed=0, M=100, statistics=st)
                for name in table.names:
                    key = (kind, name)
                    rates[key] = min(rates.get(key, 1.0), table.pass_rate(name))
    ok = all(r == 1.0 for r in rates.values())
    worst = min(rates.values())
    return ok, f"{len(rates)} (kind, inequality) groups over 3 statistics, worst pass rate={worst:.3f}"


def criterion_5():
    cube = CubeSequenceParams(1, 1.5, 40, 1, 2)
    params = ThermoParams(0.5, cube, N_max=2, M=100, seed=0)
    diag = run_cube_sequence(params, UNIFORM, InteractionSpec.none(), "fermi")
    ok = len(diag.levels) == 3 and diag.nonnegative and diag.recursion_ok and diag.variance_ok
    means = ", ".join(f"{lv.mean:.4f}" for lv in diag.levels)
    return ok, (
        f"levels={len(diag.levels)} means=[{means}] nonneg={diag.nonnegative} "
        f"recursion={diag.recursion_ok} variance={diag.variance_ok}"
    )


def criterion_6():
    failures = []
    # dimension formulas, checked against direct enumeration
    for sites in range(1, 11):
        box = Box.cube(1, sites)
        for n in range(1, 4):
            expected = {
                "boltzmann": sites**n,
                "bose": math.comb(sites + n - 1, n),
                "fermi": math.comb(sites, n),
            }
            for st in STATS:
                try:
                    got = enumerate_basis(box, n, st, max_dim=None).dimension
                except InfeasibleError:
                    got = 0
                if got != expected[st] or basis_dimension(sites, n, st) != expected[st]:
                    failures.append(f"dim {st} |Λ|={sites} n={n}")
    # free fermion ground energy
    for index in range(10):
        box = Box.cube(1, 8)
        f = sample_potential(UNIFORM, box, 3, index)
        eps = diagonalize(assemble_one_body(box, f)).eigenvalues
        for n in (1, 2, 3):
            E0 = sector_spectrum(box, f, n, Statistics.FERMI, KINDS["none"]).eigenvalues[0]
            if abs(E0 - eps[:n].sum()) > 1e-9:
                failures.append(f"fermi ground n={n}")
    # Dirichlet monotonicity in every sector
    small, large = Box.cube(1, 4, [1]), Box.cube(1, 6)
    fl = sample_potential(UNIFORM, large, 7, 0)
    fs = restrict(fl, small)
    for st in STATS:
        el = sector_spectrum(large, fl, 2, st, KINDS["tempered"])
        es = sector_spectrum(small, fs, 2, st, KINDS["tempered"])
        for S in np.log(np.arange(1, es.dimension + 1)):
            if energy_at_entropy(el, S) > energy_at_entropy(es, S) + 1e-9:
                failures.append(f"monotonicity {st}")
                break
    # covariance: translating the disorder equals moving the box
    box, gamma = Box.cube(2, 3), (4, -2)
    f = sample_potential(UNIFORM, box, 5, 2)
    moved = box.translate(gamma)
    g = sample_potential(UNIFORM, moved, 5, 2)
    if not np.array_equal(assemble_one_body(box, translate_realization(f, gamma)).matrix,
                          assemble_one_body(moved, g).matrix):
        failures.append("one-body covariance")
    for st in STATS:
        a = sector_spectrum(box, translate_realization(f, gamma), 2, st, KINDS["tempered"]).eigenvalues
        b = sector_spectrum(moved, g, 2, st, KINDS["tempered"]).eigenvalues
        if not np.array_equal(a, b):
            failures.append(f"many-body covariance {st}")
    # entropy/energy inversion on a real spectrum
    spec = sector_spectrum(Box.cube(1, 6), sample_potential(UNIFORM, Box.cube(1, 6), 1, 0), 2, "bose",
                           KINDS["tempered"])
    for k in range(1, spec.dimension + 1):
        if entropy(spec, energy_at_entropy(spec, math.log(k))) < math.log(k) - 1e-12:
            failures.append("S(E(log k)) >= log k")
            break
    for E in spec.eigenvalues:
        if abs(energy_at_entropy(spec, entropy(spec, E)) - E) > 1e-9:
            failures.append("E(S(E)) = E")
            break
    return not failures, "all invariants exact" if not failures else "broken: " + "; ".join(failures[:5])


def criterion_7():
    rows = weyl_table(UNIFORM, Box.cube(1, 200), [0.25, 0.5], M=50, seed=0)
    rate = sum(r["pass"] for r in rows) / len(rows)
    return rate == 1.0, f"{len(rows)} comparisons, pass rate={rate:.3f}"


def criterion_8():
    boxes = [Box.cube(1, s) for s in (50, 100, 200)]
    rows, ok = wegner_scaling_check(UNIFORM, boxes, [(1.0, 1.5)], M=200, seed=0)
    ratios = ", ".join(f"{r['ratio']:.4f}" for r in rows)
    return ok, f"ratios=[{ratios}] spread={rows[0]['spread']:.3f} (< 0.25 required)"


def criterion_9():
    rows = hardcore_packing([7, 15, 31, 63], 2.0)
    ok = all(r["pass"] for r in rows)
    dens = ", ".join(f"{r['side']}:{r['rho_max']:.4f}" for r in rows)
    return ok, f"rho_max by side {{{dens}}}, target 1/2 within 1/side"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("number", range(1, 10))
def test_acceptance(number, record):
    t0 = time.perf_counter()
    passed, detail = CRITERIA[number - 1]()
    record(number, passed, f"{detail} [{time.perf_counter() - t0:.1f}s]")
    assert passed, detail


if __name__ == "__main__":
    for i, check in enumerate(CRITERIA, start=1):
        t0 = time.perf_counter()
        passed, detail = check()
        print(f"criterion {i}: {'PASS' if passed else 'FAIL'}  {detail} [{time.perf_counter() - t0:.1f}s]")
