"""Command-line front end: ``andersonlab run config.json``.

Each config runs exactly one experiment and writes
``<out>/<experiment>/<label>/{summary.json, *.csv}``.  The default label is a
hash of the validated config, so re-running a config lands in the same
directory and reproduces byte-identical CSV bodies.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .constructions import check_subadditivity, check_subadditivity_multi, test_function_check
from .disorder import DisorderSpec, sample_potential
from .errors import AndersonLabError, ConfigError
from .interactions import InteractionSpec
from .io import config_hash, write_csv, write_json
from .lattice import Box, CubeSequenceParams
from .manybody import Statistics, entropy, sector_spectrum
from .oneparticle import assemble_one_body, diagonalize, empirical_ids
from .thermo import (
    ThermoParams,
    boltzmann_limit_check,
    fermion_density_report,
    hardcore_packing,
    run_cube_sequence,
    wegner_scaling_check,
    weyl_bound_check,
    weyl_table,
)

EXPERIMENTS = (
    "spectrum",
    "ids",
    "boltzmann-limit",
    "fermion-density",
    "weyl-check",
    "wegner-check",
    "subadd-check",
    "testfn-check",
    "cube-seq",
    "hardcore-packing",
)

_int_list = {"type": "array", "items": {"type": "integer"}, "minItems": 1}
_num_list = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_box = {
    "type": "object",
    "additionalProperties": False,
    "required": ["sides"],
    "properties": {
        "dimension": {"type": "integer", "minimum": 1, "maximum": 4},
        "corner": {"type": "array", "items": {"type": "integer"}},
        "sides": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
    },
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment"],
    "properties": {
        "experiment": {"enum": list(EXPERIMENTS)},
        "label": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "seed": {"type": "integer", "minimum": 0},
        "realizations": {"type": "integer", "minimum": 1},
        "dimension": {"type": "integer", "minimum": 1, "maximum": 4},
        "disorder": {"type": "object"},
        "interaction": {"type": "object"},
        "statistics": {"enum": [s.value for s in Statistics]},
        "boxes": {"type": "array", "items": _box, "minItems": 1},
        "sides": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "particles": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "entropies": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "rho": {"type": "number", "exclusiveMinimum": 0},
        "rhos": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "sigma": {"type": "number", "minimum": 0},
        "B": {"type": "number", "minimum": 0},
        "C": {"type": "number", "minimum": 0},
        "r0": {"type": "number", "exclusiveMinimum": 0},
        "max_dim": {"type": "integer", "minimum": 1},
        "intervals": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "points": {"type": "integer", "minimum": 2},
                "min": {"type": "number"},
                "max": {"type": "number"},
            },
        },
        "cube_sequence": {
            "type": "object",
            "additionalProperties": False,
            "required": ["theta", "L_tilde", "lam"],
            "properties": {
                "theta": {"type": "number"},
                "L_tilde": {"type": "integer", "minimum": 1},
                "R0": {"type": "number"},
                "lam": {"type": "number"},
                "delta": {"type": "number"},
                "N_max": {"type": "integer", "minimum": 0},
                "N0": {"type": "integer", "minimum": 0},
            },
        },
    },
}

# keys each experiment needs beyond the shared defaults
REQUIRED = {
    "spectrum": ["boxes"],
    "ids": ["boxes"],
    "boltzmann-limit": ["sides"],
    "fermion-density": ["boxes", "rho"],
    "weyl-check": ["boxes", "rhos"],
    "wegner-check": ["sides", "intervals"],
    "subadd-check": ["boxes", "particles"],
    "testfn-check": ["boxes", "particles"],
    "cube-seq": ["cube_sequence", "rho"],
    "hardcore-packing": ["sides", "r0"],
}


def validate_config(config: dict) -> dict:
    """Schema check plus semantic checks; returns the config with defaults filled in."""
    try:
        jsonschema.validate(config, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config field {where}: {exc.message}") from None
    cfg = copy.deepcopy(config)
    exp = cfg["experiment"]
    missing = [k for k in REQUIRED[exp] if k not in cfg]
    if missing:
        raise ConfigError(f"experiment {exp!r} requires fields {missing}")
    cfg.setdefault("seed", 0)
    cfg.setdefault("realizations", 1)
    cfg.setdefault("statistics", "fermi")
    cfg.setdefault("disorder", {"kind": "constant", "c": 0.0})
    cfg.setdefault("interaction", {"kind": "none"})
    d = cfg.get("dimension")
    for i, b in enumerate(cfg.get("boxes", [])):
        bd = b.get("dimension", len(b["sides"]))
        if len(b["sides"]) != bd or len(b.get("corner", [0] * bd)) != bd:
            raise ConfigError(f"config field boxes.{i}: corner/sides length must equal the dimension")
        b.setdefault("corner", [0] * bd)
        b["dimension"] = bd
        if d is None:
            d = bd
        elif d != bd:
            raise ConfigError(f"config field boxes.{i}: dimension {bd} differs from {d}")
    cfg["dimension"] = d or 1
    # parse eagerly so that every error surfaces before computation
    DisorderSpec.from_json(cfg["disorder"])
    inter = InteractionSpec.from_json(cfg["interaction"])
    inter.validate(cfg["dimension"])
    if "intervals" in cfg:
        for i, (a, b) in enumerate(cfg["intervals"]):
            if b < a:
                raise ConfigError(f"config field intervals.{i}: need a <= b")
    if exp == "cube-seq":
        _cube_params(cfg)
    return cfg


def _cube_params(cfg) -> CubeSequenceParams:
    cs = cfg["cube_sequence"]
    inter = InteractionSpec.from_json(cfg["interaction"])
    return CubeSequenceParams(
        d=cfg["dimension"],
        theta=cs["theta"],
        L_tilde=cs["L_tilde"],
        R0=cs.get("R0", inter.range),
        lam=cs["lam"],
        delta=cs.get("delta", 4.0),
    )


def _boxes(cfg) -> list[Box]:
    return [Box.from_json(b) for b in cfg["boxes"]]


def _ladder(cfg) -> list[Box]:
    return [Box.cube(cfg["dimension"], s) for s in cfg["sides"]]


def _grid(cfg, spec: DisorderSpec, d: int):
    g = cfg.get("grid", {})
    lo, hi = spec.support
    return np.linspace(g.get("min", lo), g.get("max", 4.0 * d + hi), g.get("points", 400))


# experiments: each returns (summary dict, {filename: (header, rows)}) ---


def _exp_spectrum(cfg, spec, inter, st, M, seed, workers):
    box = _boxes(cfg)[0]
    n = cfg.get("particles", [1])[0]
    files, levels = {}, []
    for m in range(M):
        field_ = sample_potential(spec, box, seed, m)
        if n == 1 and inter.is_free:
            res = diagonalize(assemble_one_body(box, field_))
            rows = [(k + 1, E) for k, E in enumerate(res.eigenvalues)]
            header = ["k", "E_k"]
        else:
            res = sector_spectrum(box, field_, n, st, inter, cfg.get("max_dim", 5000))
            rows = [(k + 1, E, entropy(res, E)) for k, E in enumerate(res.eigenvalues)]
            header = ["k", "E_k", "S_k"]
        name = "spectrum.csv" if M == 1 else f"spectrum_{m}.csv"
        files[name] = (header, rows)
        levels.append(float(res.eigenvalues[0]))
    return {"dimension": res.dimension, "ground_energies": levels, "passed": True}, files


def _exp_ids(cfg, spec, inter, st, M, seed, workers):
    box = _boxes(cfg)[0]
    ids = empirical_ids(spec, box, _grid(cfg, spec, box.dimension), M, seed, workers)
    rows = list(ids.rows())
    return {"box_side": ids.box_side, "M": M, "passed": True}, {"ids.csv": (["E", "N_avg", "M", "box_side", "seed"], rows)}


def _exp_boltzmann(cfg, spec, inter, st, M, seed, workers):
    n = cfg.get("particles", [2])[0]
    S = cfg.get("entropies", [0.0])[0]
    trend = boltzmann_limit_check(spec, _ladder(cfg), n, S, M, seed, inter=inter, workers=workers)
    rows = [(s, m, e) for s, m, e in zip(trend.sides, trend.means, trend.stderrs)]
    summary = {
        "sides": trend.sides,
        "mean_energy_per_particle": trend.means,
        "stderr": trend.stderrs,
        "strictly_decreasing": trend.strictly_decreasing,
        "final_value": trend.means[-1],
        "subadditivity_pass_rate": trend.subadd_pass_rate,
        "passed": trend.strictly_decreasing and trend.subadd_pass_rate == 1.0,
    }
    return summary, {"trend.csv": (["box_side", "mean_E_per_n", "stderr"], rows)}


def _exp_fermion_density(cfg, spec, inter, st, M, seed, workers):
    box = _boxes(cfg)[0]
    rep = fermion_density_report(spec, box, cfg["rho"], M, seed, _grid(cfg, spec, box.dimension), workers)
    exact = 2 * (math.pi - 2) / math.pi if (box.dimension == 1 and not spec.is_random and spec.support[0] == 0) else None
    summary = {
        "rho": rep.rho,
        "n": rep.n,
        "fermi_energy": rep.fermi.value,
        "fermi_interval": [rep.fermi.low, rep.fermi.high],
        "formula": rep.formula,
        "direct": rep.direct,
        "direct_stderr": rep.direct_se,
        "relative_gap": rep.relative_gap,
        "free_1d_half_filling_reference": exact if cfg["rho"] == 0.5 else None,
        "passed": rep.formula <= rep.fermi.value + 1e-12,
    }
    header = ["rho", "fermi_energy", "fermi_low", "fermi_high", "formula", "direct", "direct_stderr", "relative_gap"]
    row = (rep.rho, rep.fermi.value, rep.fermi.low, rep.fermi.high, rep.formula, rep.direct, rep.direct_se, rep.relative_gap)
    return summary, {"density.csv": (header, [row])}


def _exp_weyl(cfg, spec, inter, st, M, seed, workers):
    box = _boxes(cfg)[0]
    rows = weyl_table(spec, box, cfg["rhos"], M, seed, workers)
    rate = sum(r["pass"] for r in rows) / len(rows)
    header = ["rho", "seed_index", "direct", "beta", "bound", "pass"]
    return {"pass_rate": rate, "passed": rate == 1.0}, {"weyl.csv": (header, [[r[h] for h in header] for r in rows])}


def _exp_wegner(cfg, spec, inter, st, M, seed, workers):
    rows, ok = wegner_scaling_check(spec, _ladder(cfg), [tuple(i) for i in cfg["intervals"]], M, seed, workers)
    header = ["box_side", "a", "b", "mean_count", "stderr", "ratio", "spread"]
    out = [[r.get(h, math.nan) for h in header] for r in rows]
    return {"passed": ok, "max_ratio": max((r["ratio"] for r in rows if r["ratio"] == r["ratio"]), default=None)}, {
        "wegner.csv": (header, out)
    }


def _exp_subadd(cfg, spec, inter, st, M, seed, workers):
    boxes = _boxes(cfg)
    ns = cfg["particles"]
    Ss = cfg.get("entropies", [0.0] * len(boxes))
    if not (len(ns) == len(Ss) == len(boxes)):
        raise ConfigError("config fields boxes, particles and entropies must have equal lengths")
    max_dim = cfg.get("max_dim", 5000)
    if len(boxes) == 2:
        table = check_subadditivity(spec, inter, boxes[0], boxes[1], ns[0], ns[1], Ss[0], Ss[1], seed, M, st,
                                    workers=workers, max_dim=max_dim)
    else:
        table = check_subadditivity_multi(spec, inter, boxes, ns, Ss, seed, M, st, workers=workers, max_dim=max_dim)
    header = ["seed_index", "lhs", "rhs", "margin", "pass"]
    files = {f"{name}.csv": (header, [r.as_tuple() for r in rows]) for name, rows in table.rows.items()}
    rates = {name: table.pass_rate(name) for name in table.names}
    return {"pass_rates": rates, "passed": table.all_passed}, files


def _exp_testfn(cfg, spec, inter, st, M, seed, workers):
    boxes = _boxes(cfg)
    if len(boxes) != 2 or len(cfg["particles"]) != 2:
        raise ConfigError("config fields boxes and particles must each have two entries")
    rows = test_function_check(spec, inter, boxes[0], boxes[1], *cfg["particles"], st, M, seed, workers)
    header = ["seed_index", "quotient", "bound", "margin", "pass", "norm_error"]
    rate = sum(r["pass"] for r in rows) / len(rows)
    summary = {"pass_rate": rate, "max_norm_error": max(r["norm_error"] for r in rows), "passed": rate == 1.0}
    return summary, {"testfn.csv": (header, [[r[h] for h in header] for r in rows])}


def _exp_cube_seq(cfg, spec, inter, st, M, seed, workers):
    cs = cfg["cube_sequence"]
    params = ThermoParams(
        rho=cfg["rho"],
        cube=_cube_params(cfg),
        N_max=cs.get("N_max", 2),
        sigma=cfg.get("sigma", 0.0),
        N0=cs.get("N0", 0),
        M=M,
        seed=seed,
        B=cfg.get("B"),
        C=cfg.get("C"),
        max_dim=cfg.get("max_dim", 5000),
    )
    diag = run_cube_sequence(params, spec, inter, st, workers)
    header = ["N", "L", "n", "S", "mean", "var", "se_mean", "se_var", "G", "min_X"]
    rows = [[getattr(lv, h) if getattr(lv, h) is not None else math.nan for h in header] for lv in diag.levels]
    samples = [[m, *x] for m, x in enumerate(diag.samples.tolist())]
    summary = {
        "rho": diag.params.rho,
        "rho_requested": diag.params.rho_requested,
        "levels": [lv.__dict__ for lv in diag.levels],
        "energy_per_particle": diag.per_particle(),
        "nonnegative": diag.nonnegative,
        "recursion_ok": diag.recursion_ok,
        "variance_ok": diag.variance_ok,
        "pathwise_ok": diag.pathwise_ok,
        "notices": diag.notices,
        "passed": diag.passed,
    }
    sample_header = ["seed_index"] + [f"X_{lv.N}" for lv in diag.levels]
    return summary, {"levels.csv": (header, rows), "samples.csv": (sample_header, samples)}


def _exp_packing(cfg, spec, inter, st, M, seed, workers):
    rows = hardcore_packing(cfg["sides"], cfg["r0"], cfg["dimension"])
    header = ["side", "n_max", "rho_max", "target", "deviation", "next_empty", "pass"]
    return {"passed": all(r["pass"] for r in rows)}, {"packing.csv": (header, [[r[h] for h in header] for r in rows])}


RUNNERS = {
    "spectrum": _exp_spectrum,
    "ids": _exp_ids,
    "boltzmann-limit": _exp_boltzmann,
    "fermion-density": _exp_fermion_density,
    "weyl-check": _exp_weyl,
    "wegner-check": _exp_wegner,
    "subadd-check": _exp_subadd,
    "testfn-check": _exp_testfn,
    "cube-seq": _exp_cube_seq,
    "hardcore-packing": _exp_packing,
}


def run(config: dict, out: Path, workers: int = 1) -> Path:
    """Validate ``config``, run its experiment and write the artifacts; returns the output directory."""
    cfg = validate_config(config)
    digest = config_hash(cfg)
    label = cfg.get("label", digest[:12])
    spec = DisorderSpec.from_json(cfg["disorder"])
    inter = InteractionSpec.from_json(cfg["interaction"])
    st = Statistics.parse(cfg["statistics"])
    summary, files = RUNNERS[cfg["experiment"]](cfg, spec, inter, st, cfg["realizations"], cfg["seed"], workers)
    target = Path(out) / cfg["experiment"] / label
    target.mkdir(parents=True, exist_ok=True)
    meta = f"config_hash={digest} seed={cfg['seed']} experiment={cfg['experiment']}"
    for name, (header, rows) in files.items():
        write_csv(target / name, header, rows, meta)
    write_json(
        target / "summary.json",
        {
            "experiment": cfg["experiment"],
            "label": label,
            "config": cfg,
            "config_hash": digest,
            "seed": cfg["seed"],
            "version": __version__,
            "near_field_default": inter.kind in ("tempered", "yukawa") and inter.near_field is None,
            "results": summary,
            "passed": bool(summary.get("passed", True)),
            "files": sorted(files),
        },
    )
    return target


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="andersonlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run the experiment described by a JSON config")
    p.add_argument("config", type=Path)
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--out", type=Path, default=Path("results"), help="output root (default: results)")
    p.add_argument("--realizations", type=int, help="override the number of disorder realizations")
    p.add_argument("--workers", type=int, default=1, help="worker processes (output does not depend on it)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            config = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(config, dict):
            raise ConfigError("config must be a JSON object")
        if args.seed is not None:
            config["seed"] = args.seed
        if args.realizations is not None:
            config["realizations"] = args.realizations
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        target = run(config, args.out, args.workers)
    except AndersonLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    print(target)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
