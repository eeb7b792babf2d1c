"""Command line experiment runner.

Usage::

    manifold-frames bounds --config cfg.json --out results/
    manifold-frames partition|frame|besov|reconstruct --config cfg.json

The config is one JSON document; unknown keys are rejected.  Every CSV
starts with a ``# config_sha256=...`` line and every JSON report carries
a ``config_hash`` field.
"""

import argparse
import copy
import csv
import hashlib
import json
import logging
import math
from pathlib import Path
import sys

import numpy as np

from . import besov, filters, frames, partition, spectral
from .errors import AdmissibilityViolation, ConstraintViolation, FrameError, NotConverged

log = logging.getLogger("manifold_frames")

EXIT_OK, EXIT_CONSTRAINT, EXIT_NOT_CONVERGED = 0, 2, 3

DEFAULTS = {
    "backend": {"kind": "sphere", "L_max": 16, "n_theta": 32, "n_phi": 64},
    "filter": {"family": "exp", "l": "auto", "a": 2.0 ** (1.0 / 3.0)},
    "a_list": [2.0, 2.0 ** (1.0 / 3.0), 2.0 ** (1.0 / 8.0)],
    "partition": {
        "b": [0.7, 0.5, 0.35],
        "J_min": None,
        "J_max": None,
        "c0": None,
        "delta0": None,
        "Cfloor": None,
    },
    "besov": [[1, 2, 2], [0.5, 1, 1], [1.5, "inf", "inf"], [2, 0.7, 0.7]],
    "reconstruct": {"tol": 1e-10, "max_iter": 200, "functions": 3},
    "sweep": {"L_min": 4},
    "seed": 0,
    "output": "results",
}

BACKEND_KEYS = {
    "sphere": {"kind", "L_max", "n_theta", "n_phi"},
    "torus": {"kind", "K_max", "n_grid"},
    "mesh": {"kind", "path", "distance_mode"},
}


# measure-floor constants per backend; the 162-node icosphere mesh has
# single-node cells of measure ~0.08 at scales just above delta0
FLOOR_DEFAULTS = {
    "sphere": {"c0": 0.1, "delta0": 1.0, "Cfloor": 0.1},
    "torus": {"c0": 0.1, "delta0": 1.0, "Cfloor": 0.1},
    "mesh": {"c0": 0.1, "delta0": 1.0, "Cfloor": 0.05},
}


class ConfigError(ValueError):
    pass


def _merge(defaults, given, where):
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {where}{key!r}")
        if isinstance(defaults[key], dict) and key != "backend":
            if not isinstance(val, dict):
                raise ConfigError(f"{where}{key!r} must be an object")
            out[key] = _merge(defaults[key], val, f"{where}{key}.")
        else:
            out[key] = val
    return out


def _as_float(x):
    if isinstance(x, str) and x.lower() in ("inf", "infinity"):
        return math.inf
    return float(x)


def resolve_config(raw, base_dir=Path(".")):
    """Merge ``raw`` over :data:`DEFAULTS` and check it."""
    cfg = _merge(DEFAULTS, raw, "")
    backend = cfg["backend"]
    kind = backend.get("kind")
    if kind not in BACKEND_KEYS:
        raise ConfigError(f"backend.kind must be one of {sorted(BACKEND_KEYS)}")
    extra = set(backend) - BACKEND_KEYS[kind]
    if extra:
        raise ConfigError(f"unknown backend keys {sorted(extra)} for {kind}")
    if kind == "mesh":
        path = Path(backend["path"])
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"mesh file {path} does not exist")
        backend["path"] = str(path)
        backend.setdefault("distance_mode", "graph")
    for key, val in FLOOR_DEFAULTS[kind].items():
        if cfg["partition"][key] is None:
            cfg["partition"][key] = val
    bs = cfg["partition"]["b"]
    cfg["partition"]["b"] = [float(b) for b in (bs if isinstance(bs, list) else [bs])]
    cfg["besov"] = [[float(a), _as_float(p), _as_float(q)] for a, p, q in cfg["besov"]]
    l = cfg["filter"]["l"]
    if l != "auto":
        dim = 2 if kind != "mesh" else spectral.read_mesh_file(backend["path"])["dim"]
        for a, p, q in cfg["besov"]:
            besov.check_admissible(besov.BesovParams(a, p, q), dim, int(l))
    return cfg


def config_hash(cfg):
    keyed = {k: v for k, v in cfg.items() if k != "output"}
    text = json.dumps(keyed, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def build_model(cfg):
    b = cfg["backend"]
    if b["kind"] == "sphere":
        return spectral.build_sphere_model(b["L_max"], b.get("n_theta"), b.get("n_phi"))
    if b["kind"] == "torus":
        return spectral.build_torus_model(b["K_max"], b.get("n_grid"))
    return spectral.load_mesh_model(b["path"], b.get("distance_mode", "graph"))


def filter_spec(cfg, l=None, a=None):
    f = cfg["filter"]
    l = l if l is not None else (1 if f["l"] == "auto" else int(f["l"]))
    return filters.FilterSpec(family=f["family"], l=l, a=a if a is not None else f["a"])


def resolved_j_range(model, spec, b, part_cfg):
    """Largest level range with resolved cells and live atoms."""
    lo, hi = frames.atom_j_range(model, spec)
    if part_cfg["J_min"] is None:
        while lo < hi and model.spacing > b * spec.a**lo / 4.0:
            lo += 1
    else:
        lo = int(part_cfg["J_min"])
    if part_cfg["J_max"] is None:
        while hi > lo and b * spec.a ** (hi - 1) >= model.diameter:
            hi -= 1
    else:
        hi = int(part_cfg["J_max"])
    return lo, hi


def frame_j_range(model, spec, part_cfg):
    lo, hi = frames.atom_j_range(model, spec)
    if part_cfg["J_min"] is not None:
        lo = int(part_cfg["J_min"])
    if part_cfg["J_max"] is not None:
        hi = int(part_cfg["J_max"])
    return lo, hi


class Writer:
    def __init__(self, out_dir, digest):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.digest = digest
        self.written = []

    def csv(self, name, header, rows):
        path = self.out / name
        with path.open("w", newline="") as fh:
            fh.write(f"# config_sha256={self.digest}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_cell(v) for v in row])
        self.written.append(path)
        return path

    def json(self, name, payload):
        path = self.out / name
        body = {"config_hash": self.digest, **payload}
        path.write_text(json.dumps(body, indent=2, sort_keys=True, default=_jsonable) + "\n")
        self.written.append(path)
        return path


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"cannot serialise {type(v)}")


def _params_list(cfg):
    return [besov.BesovParams(a, p, q) for a, p, q in cfg["besov"]]


# --- subcommands ------------------------------------------------------------------


def cmd_bounds(cfg, writer):
    spec0 = filter_spec(cfg)
    a_list = list(dict.fromkeys([float(a) for a in cfg["a_list"]] + [spec0.a]))
    rows = []
    for a in a_list:
        spec = filter_spec(cfg, a=a)
        db = filters.daubechies_bounds(spec)
        limit = db.c / (2 * math.log(a))
        rows.append([spec.l, a, db.c, db.A, db.B, db.ratio, db.ratio - 1.0, limit])
    writer.csv("bounds.csv", ["l", "a", "c", "A", "B", "B_over_A", "ratio_minus_1", "c_over_2_ln_a"],
               rows)
    return rows


def cmd_partition(cfg, writer):
    model = build_model(cfg)
    spec = filter_spec(cfg)
    pc = cfg["partition"]
    summary = []
    for b in pc["b"]:
        lo, hi = resolved_j_range(model, spec, b, pc)
        part = partition.build_multiscale(model, b, spec.a, lo, hi, c0=pc["c0"],
                                          delta0=pc["delta0"], Cfloor=pc["Cfloor"])
        report = partition.validate(model, part)
        tag = f"b{b:g}"
        writer.json(f"partition_{tag}.json", part.to_dict())
        writer.json(f"partition_{tag}_report.json", {"digest": part.digest(), **report})
        summary.append({"b": b, "j_range": [lo, hi], "digest": part.digest(),
                        "passed": report["passed"]})
    writer.json("partition_summary.json", {"runs": summary})
    return summary


def cmd_frame(cfg, writer):
    model = build_model(cfg)
    spec = filter_spec(cfg)
    pc = cfg["partition"]
    db = filters.daubechies_bounds(spec)
    j_range = frame_j_range(model, spec, pc)
    rows, reports = [], []
    for b in pc["b"]:
        fr = frames.build_frame(model, spec, b=b, j_range=j_range, c0=pc["c0"],
                                delta0=pc["delta0"], Cfloor=pc["Cfloor"])
        A, B = frames.empirical_frame_bounds(fr)
        qs = frames.q_minus_s_norm(fr)
        const = np.zeros(model.size)
        const[0] = 1.0
        s_const = float(np.linalg.norm(frames.apply_S(fr, const)))
        rows.append([b, spec.a, A, B, B / A, db.A, db.B, qs, qs / db.A, s_const, fr.atom_count])
        reports.append({"A_emp": A, "B_emp": B, "A_daub": db.A, "B_daub": db.B, "b": b,
                        "a": spec.a, "j_range": list(j_range), "Q_minus_S": qs,
                        "S_of_constant": s_const})
    writer.csv("frame_bounds.csv",
               ["b", "a", "A_emp", "B_emp", "B_over_A_emp", "A_daub", "B_daub", "Q_minus_S",
                "Q_minus_S_over_A_daub", "S_of_constant", "atoms"], rows)
    writer.json("frame_bounds.json", {"runs": reports})
    return reports


def _frames_for(cfg, model, params_list):
    pc = cfg["partition"]
    b = pc["b"][-1]
    cache = {}
    for params in params_list:
        l = besov.min_l(params, model.dim) if cfg["filter"]["l"] == "auto" else int(cfg["filter"]["l"])
        if l not in cache:
            spec = filter_spec(cfg, l=l)
            cache[l] = frames.build_frame(model, spec, b=b, j_range=frame_j_range(model, spec, pc),
                                          c0=pc["c0"], delta0=pc["delta0"], Cfloor=pc["Cfloor"])
        yield params, cache[l]


def harmonic_sweep(model, fr, window, params, L_min=4):
    """Single zonal harmonics ``L = L_min .. L_max``: norms and log-log slope."""
    degrees = spectral.sphere_degrees(model.params["L_max"])
    rows = []
    for L in range(L_min, model.params["L_max"] + 1):
        i = int(np.flatnonzero(degrees == L)[L])  # order m = 0
        c = np.zeros(model.size)
        c[i] = 1.0
        lp = besov.lp_norm(model, window, c, params)
        sq = besov.seq_norm(frames.analyze(fr, c), params, fr.spec.a)
        rows.append((L, float(model.eigenvalues[i]), lp, sq, sq / lp))
    lam = np.array([r[1] for r in rows])
    slope = float(np.polyfit(np.log(lam), np.log([r[2] for r in rows]), 1)[0])
    return rows, slope


def cmd_besov(cfg, writer):
    model = build_model(cfg)
    window = filters.build_lp_window(model.lambda_max)
    suite = besov.standard_suite(model, seed=cfg["seed"])
    runs, rows = [], []
    sweep_rows = []
    for params, fr in _frames_for(cfg, model, _params_list(cfg)):
        rep = besov.equivalence_experiment(model, fr, window, params, suite)
        runs.append(rep)
        for r in rep["per_function"]:
            rows.append([params.alpha, params.p, params.q, fr.spec.l, fr.partition.b, r["name"],
                         r["seq_norm"], r["lp_norm"], r["ratio"]])
        if model.name == "sphere" and model.params["L_max"] > cfg["sweep"]["L_min"]:
            srows, slope = harmonic_sweep(model, fr, window, params, cfg["sweep"]["L_min"])
            sweep_rows.append({"params": rep["params"], "slope": slope,
                               "expected_slope": params.alpha / 2.0,
                               "ratio_spread": max(r[4] for r in srows) / min(r[4] for r in srows),
                               "rows": srows})
    writer.json("besov.json", {"suite_version": besov.SUITE_VERSION, "runs": runs})
    writer.csv("besov.csv", ["alpha", "p", "q", "l", "b", "name", "seq_norm", "lp_norm", "ratio"],
               rows)
    if sweep_rows:
        writer.json("harmonic_sweep.json", {"runs": sweep_rows})
    return runs


def cmd_reconstruct(cfg, writer):
    model = build_model(cfg)
    window = filters.build_lp_window(model.lambda_max)
    rc = cfg["reconstruct"]
    rows, runs = [], []
    bounds_cache = {}
    for params, fr in _frames_for(cfg, model, _params_list(cfg)):
        if fr.spec.l not in bounds_cache:
            bounds_cache[fr.spec.l] = frames.empirical_frame_bounds(fr)
        A, B = bounds_cache[fr.spec.l]
        limit = frames.richardson_iteration_bound(A, B, rc["tol"]) + 5
        for k in range(rc["functions"]):
            rng = np.random.default_rng([cfg["seed"], 1000 + k])
            c = spectral.band_limited_random(model, rng)
            res = besov.synthesis_experiment(fr, params, c, tol=rc["tol"], max_iter=rc["max_iter"],
                                             bounds=(A, B), window=window)
            rows.append([params.alpha, params.p, params.q, fr.spec.l, fr.partition.b, k,
                         res["iterations"], limit, res["relative_error"], res["seq_norm"],
                         res["lp_norm"], res["ratio"]])
            runs.append({"params": {"alpha": params.alpha, "p": params.p, "q": params.q},
                         "function": k, "iterations": res["iterations"],
                         "iteration_bound": limit, "relative_error": res["relative_error"],
                         "seq_norm": res["seq_norm"], "lp_norm": res["lp_norm"]})
            if k == 0:
                name = f"coefficients_{params.label()}.csv".replace(",", "_")
                writer.csv(name, ["j", "k", "measure", "r"], res["coefficients"].to_rows())
    writer.csv("reconstruct.csv",
               ["alpha", "p", "q", "l", "b", "function", "iterations", "iteration_bound",
                "relative_error", "seq_norm", "lp_norm", "ratio"], rows)
    writer.json("reconstruct.json", {"runs": runs})
    return runs


COMMANDS = {
    "bounds": cmd_bounds,
    "partition": cmd_partition,
    "frame": cmd_frame,
    "besov": cmd_besov,
    "reconstruct": cmd_reconstruct,
}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="manifold-frames", description=__doc__.split("\n")[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, help="JSON experiment config")
    parser.add_argument("--out", type=Path, help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="seed (overrides config)")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")

    try:
        raw = json.loads(args.config.read_text()) if args.config else {}
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.out is not None:
            raw["output"] = str(args.out)
        base = args.config.parent if args.config else Path(".")
        cfg = resolve_config(raw, base_dir=base)
    except (ConfigError, json.JSONDecodeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except AdmissibilityViolation as exc:
        print(f"admissibility: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT

    writer = Writer(cfg["output"], config_hash(cfg))
    try:
        COMMANDS[args.command](cfg, writer)
    except (ConstraintViolation, AdmissibilityViolation) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except NotConverged as exc:
        print(f"NotConverged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except FrameError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    for path in writer.written:
        log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
