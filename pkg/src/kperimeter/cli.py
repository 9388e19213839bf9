"""Command-line driver.

Exit codes: 0 success, 2 configuration or admissibility error, 3 cell or
flow budget exceeded, 4 failed assertion (gate or self-check).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import numpy as np

from . import functional
from .functional import build_weights, perimeter_K
from .gamma import DEFAULT_EPSILONS, extrapolate, records_to_csv, summary_json, sweep
from .grid import (
    DEFAULT_CELL_BUDGET,
    BudgetExceeded,
    CellSet,
    DomainMask,
    GridError,
    make_domain,
    make_shape,
    shape_from_dict,
)
from .io import read_cellset, read_phasefield, format_cellset, format_phasefield
from .kernel import KernelError, QuadratureInconsistency, check_admissibility, compute_constants, make_kernel, rescale
from .plateau import PlateauProblem, solve_enumerate, solve_exact, solve_relaxed
from .quadrature import QuadratureConfig

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_ASSERT = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


class GateFailure(AssertionError):
    pass


def _dump(rec) -> str:
    return json.dumps(rec, sort_keys=True, indent=2) + "\n"


def _emit(text: str, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def load_config(path, section: str):
    """Parse a TOML config; return (command table, shared top level, sha256 of the file)."""
    raw = Path(path).read_bytes()
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if section not in doc:
        raise ConfigError(f"config has no [{section}] table")
    base = Path(path).resolve().parent
    return doc[section], doc, hashlib.sha256(raw).hexdigest(), base


def _quadrature(doc) -> QuadratureConfig:
    try:
        return QuadratureConfig(**doc.get("quadrature", {}))
    except TypeError as exc:
        raise ConfigError(f"bad [quadrature] table: {exc}") from exc


def _require(cfg, key):
    if key not in cfg:
        raise ConfigError(f"missing required key {key!r}")
    return cfg[key]


def _path(base, p):
    p = Path(p)
    p = p if p.is_absolute() else base / p
    if not p.exists():
        raise ConfigError(f"referenced file {p} does not exist")
    return p


def _out(base, cfg, key, override=None):
    p = override or cfg.get(key)
    if not p:
        return None
    p = Path(p)
    return p if p.is_absolute() else base / p


def _meta(config_hash, seed, kernel, grid=None):
    rec = {"config_hash": config_hash, "seed": seed, "kernel_id": kernel.kernel_id}
    if grid is not None:
        rec["grid"] = grid.as_dict()
    return rec


def _kernel(cfg, q):
    d = int(_require(cfg, "dimension"))
    k = make_kernel(str(_require(cfg, "kernel")), d, q)
    eps = float(cfg.get("epsilon", 1.0))
    return (rescale(k, eps) if eps != 1.0 else k), d


# -- subcommands --------------------------------------------------------------------------

def cmd_constants(args) -> int:
    q = QuadratureConfig()
    k = make_kernel(args.kernel, args.dim, q)
    adm = check_admissibility(k, q)
    if not (adm.C2 and adm.C2_prime):
        print(f"kernel {k.kernel_id} violates C2/C2': {adm}", file=sys.stderr)
        return EXIT_CONFIG
    rec = compute_constants(k, q).as_dict()
    rec.update(kernel_id=k.kernel_id, dimension=args.dim, truncation_radius=k.truncation_radius,
               admissibility={"C2": adm.C2, "C2_prime": adm.C2_prime, "C3": adm.C3, "C4": adm.C4})
    _emit(_dump(rec), args.output)
    return EXIT_OK


def _domain_from_cfg(cfg, base, r_eff, budget):
    if "omega_file" in cfg:
        omega = read_cellset(_path(base, cfg["omega_file"]), budget)
        return DomainMask(omega.grid, omega, r_eff)
    omega_shape = shape_from_dict(_require(cfg, "omega"))
    return make_domain(omega_shape, float(_require(cfg, "h")), r_eff, budget)


def cmd_perimeter(args) -> int:
    cfg, doc, digest, base = load_config(args.config, "perimeter")
    q = _quadrature(doc)
    seed = doc.get("seed", 0)
    k, d = _kernel(cfg, q)
    budget = int(cfg.get("budget", DEFAULT_CELL_BUDGET))
    exterior = bool(cfg.get("exterior", True))
    dom = _domain_from_cfg(cfg, base, k.truncation_radius if exterior else 0.0, budget)
    if "set_file" in cfg:
        E = read_cellset(_path(base, cfg["set_file"]), budget)
        if E.grid != dom.grid:
            raise ConfigError("set bitmap and omega live on different grids")
    else:
        E = make_shape(shape_from_dict(_require(cfg, "set")), dom.grid)
    w = build_weights(k, dom.grid, q)
    eb = perimeter_K(E, dom, w, exterior=exterior)
    rec = eb.to_dict()
    rec.update(_meta(digest, seed, k, dom.grid))
    _emit(_dump(rec), _out(base, cfg, "output_json", args.output))
    csv_path = _out(base, cfg, "output_csv")
    if csv_path:
        keys = ("J1", "J2", "J", "L_in", "L_out1", "L_out2")
        csv_path.write_text(",".join(keys) + "\n" + ",".join(repr(rec[x]) for x in keys) + "\n")
    return EXIT_OK


def cmd_plateau(args) -> int:
    cfg, doc, digest, base = load_config(args.config, "plateau")
    q = _quadrature(doc)
    seed = doc.get("seed", 0)
    k, d = _kernel(cfg, q)
    budget = int(cfg.get("budget", DEFAULT_CELL_BUDGET))
    dom = _domain_from_cfg(cfg, base, k.truncation_radius, budget)
    if "boundary_file" in cfg:
        B = read_cellset(_path(base, cfg["boundary_file"]), budget)
        if B.grid != dom.grid:
            raise ConfigError("boundary bitmap and omega live on different grids")
    else:
        B = make_shape(shape_from_dict(_require(cfg, "boundary")), dom.grid)
    B = B & dom.collar
    p = PlateauProblem(dom, B, build_weights(k, dom.grid, q))
    mode = "relaxed" if args.relaxed else cfg.get("mode", "exact")
    extra = {}
    if mode == "exact":
        sol = solve_exact(p, int(cfg.get("max_nodes", 100_000)))
    elif mode == "enumerate":
        sol = solve_enumerate(p)
    elif mode == "relaxed":
        init = None
        if "init_file" in cfg:
            init = read_phasefield(_path(base, cfg["init_file"]), budget).values
        res = solve_relaxed(p, float(cfg.get("delta", 1e-2)), int(cfg.get("steps", 2000)), init=init)
        sol = res.thresholded
        extra = {"t_star": res.t_star, "J_relaxed": res.energy_u, "converged": res.converged}
        _emit(format_phasefield(res.u), _out(base, cfg, "output_phasefield") or _default_sidecar(args, ".phase.txt"))
    else:
        raise ConfigError(f"unknown plateau mode {mode!r}")
    rec = sol.energy.to_dict()
    rec.update(_meta(digest, seed, k, dom.grid), certificate=sol.certificate.value, mode=mode, **extra)
    _emit(format_cellset(sol.minimizer), _out(base, cfg, "output_bitmap") or _default_sidecar(args, ".min.txt"))
    _emit(_dump(rec), _out(base, cfg, "output_json", args.output))
    return EXIT_OK


def _default_sidecar(args, suffix):
    return Path(args.config).with_suffix(suffix)


def cmd_gamma(args) -> int:
    cfg, doc, digest, base = load_config(args.config, "gamma")
    q = _quadrature(doc)
    seed = doc.get("seed", 0)
    d = int(_require(cfg, "dimension"))
    k = make_kernel(str(_require(cfg, "kernel")), d, q)
    E = shape_from_dict(_require(cfg, "set"))
    omega = shape_from_dict(_require(cfg, "omega"))
    eps = [float(e) for e in cfg.get("epsilons", DEFAULT_EPSILONS)]
    field = cfg.get("field", "ratio_J1")
    if field not in ("ratio_J1", "ratio_J2", "ratio_J"):
        raise ConfigError(f"unknown field {field!r}")
    records = sweep(E, omega, k, eps, int(cfg.get("q", 8)), q, int(cfg.get("budget", DEFAULT_CELL_BUDGET)))
    result = extrapolate(records, field)
    meta = _meta(digest, seed, k)
    meta.update(q=int(cfg.get("q", 8)), field=field,
                grids=[{"epsilon": r.epsilon, "cell_size": r.h} for r in records])
    csv_text = records_to_csv(records)
    csv_path = _out(base, cfg, "output_csv")
    if csv_path:
        csv_path.write_text(csv_text)
    _emit(summary_json(records, {field: result}, **meta) + "\n", _out(base, cfg, "output_json", args.output))
    threshold = cfg.get("assert_rel_error")
    if threshold is not None and not result.relative_error < float(threshold):
        print(f"gate failed: relative error {result.relative_error:.4g} >= {float(threshold):.4g}",
              file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


def cmd_check(args) -> int:
    """Seeded smoke run of the core invariants; prints one line per check."""
    from .selfcheck import run_checks
    ok = run_checks(seed=args.seed, out=sys.stdout)
    return EXIT_OK if ok else EXIT_ASSERT


# -- entry point --------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="kperimeter", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="print c_K, c'_K and alpha_{1,d} as JSON")
    c.add_argument("--kernel", required=True)
    c.add_argument("--dim", type=int, default=2)
    c.add_argument("--output")
    c.set_defaults(func=cmd_constants)

    for name, func, helptext in (("perimeter", cmd_perimeter, "evaluate Per_K of a set"),
                                 ("plateau", cmd_plateau, "solve a Plateau problem"),
                                 ("gamma", cmd_gamma, "run an epsilon sweep and extrapolate")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("config")
        s.add_argument("--output", help="JSON output path (default: stdout or config value)")
        s.set_defaults(func=func)
        if name == "plateau":
            s.add_argument("--relaxed", action="store_true", help="use the convex relaxation")

    ch = sub.add_parser("check", help="run the built-in property checks")
    ch.add_argument("--seed", type=int, default=0)
    ch.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    functional.set_threads(args.threads)
    np.seterr(all="ignore")
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, KernelError, GridError, FileNotFoundError, KeyError, TypeError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureInconsistency, AssertionError) as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT


if __name__ == "__main__":
    sys.exit(main())
