"""Command-line front end: motility-bif <subcommand> [flags]."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

from .errors import DomainError, MotilityError
from .model import DiffusionModel, PhysParams, solve_steady_state

DEFAULT_GRID = 2048
SUBCOMMANDS = ("steady", "k0", "k2", "critical-ea", "sweep", "figures", "selftest")
CONFIG_KEYS = {"p": float, "z": float, "gamma": float, "k": float, "dim": int, "vdw": str, "const_d": float,
               "grid": int, "tol_root": float, "tol_quad": float, "out": str, "json": str, "csv": str, "svg": str,
               "axis": str, "lo": float, "hi": float, "count": int, "workers": int}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    params: PhysParams
    diffusion: DiffusionModel
    dim: int = 2
    grid: int = DEFAULT_GRID
    tol_root: float = 1e-12
    tol_quad: float = 1e-10
    k: float | None = None
    outputs: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)


def read_config_file(path):
    """Flat key=value lines; '#' starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.lower().replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{no}: unknown key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](val)
        except ValueError as exc:
            raise UsageError(f"{path}:{no}: bad value for {key}: {val!r}") from exc
    return out


def _parse_vdw(text):
    parts = [p for p in text.split(",") if p.strip()] if text else []
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise UsageError(f"--vdw expects m_inf,e_A, got {text!r}") from exc
    if len(vals) > 2:
        raise UsageError("--vdw takes at most two values")
    m_inf = vals[0] if vals else 10.0
    e_a = vals[1] if len(vals) > 1 else 0.0
    return m_inf, e_a


def build_parser():
    p = argparse.ArgumentParser(prog="motility-bif", description="Traveling-wave bifurcation of a motile cell model.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--p", type=float, help="contractility P (default 0.1)")
    p.add_argument("--z", type=float, help="viscosity ratio Z (default 1.25)")
    p.add_argument("--gamma", type=float, help="surface tension (default 0)")
    p.add_argument("--k", type=float, help="Peclet number for branch amplitude in k2")
    p.add_argument("--dim", type=int, choices=(1, 2), help="1D interval or 2D disk (default 2)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--vdw", nargs="?", const="", metavar="M_INF,E_A", help="van der Waals diffusion (default 10,0)")
    g.add_argument("--const-d", type=float, metavar="C", help="constant diffusion D = C")
    p.add_argument("--grid", type=int, help=f"radial grid intervals (default {DEFAULT_GRID}, env MOTILITY_BIF_GRID)")
    p.add_argument("--tol-root", type=float)
    p.add_argument("--tol-quad", type=float)
    p.add_argument("--axis", choices=("e_A", "P", "Z", "gamma", "K"), help="sweep axis")
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--count", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output directory for figures")
    p.add_argument("--json", help="write machine-readable result here")
    p.add_argument("--csv", help="write sweep CSV here")
    p.add_argument("--svg", help="write sweep SVG here")
    return p


def resolve(args) -> RunConfig:
    conf = read_config_file(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            conf[key] = v
    if args.vdw is not None:
        conf["vdw"] = args.vdw
        conf.pop("const_d", None)
    elif args.const_d is not None:
        conf.pop("vdw", None)
    if "vdw" in conf and "const_d" in conf:
        raise UsageError("choose one of vdw and const_d")
    grid = conf.get("grid")
    if grid is None:
        env = os.environ.get("MOTILITY_BIF_GRID")
        try:
            grid = int(env) if env else DEFAULT_GRID
        except ValueError as exc:
            raise UsageError(f"MOTILITY_BIF_GRID must be an integer, got {env!r}") from exc
    params = PhysParams(conf.get("p", 0.1), conf.get("z", 1.25), conf.get("gamma", 0.0))
    if "const_d" in conf:
        diff = DiffusionModel.constant(conf["const_d"])
    else:
        diff = DiffusionModel.van_der_waals(*_parse_vdw(conf.get("vdw", "")))
    sweep = {k: conf[k] for k in ("axis", "lo", "hi", "count", "workers") if k in conf}
    outputs = {k: conf[k] for k in ("out", "json", "csv", "svg") if k in conf}
    return RunConfig(args.subcommand, params, diff, dim=conf.get("dim", 1 if args.subcommand in ("figures", "critical-ea") else 2), grid=grid,
                     tol_root=conf.get("tol_root", 1e-12), tol_quad=conf.get("tol_quad", 1e-10), k=conf.get("k"),
                     outputs=outputs, sweep=sweep)


# ------------------------------------------------------------------ commands


def _steady(cfg):
    if cfg.dim == 1:
        from .oned import oned_steady_state

        ss = oned_steady_state(cfg.params)
        return {"half_length": ss.r0, "m0": ss.m0, "sigma0": ss.sigma0}, f"half-length l0 = {ss.r0:.12g}"
    ss = solve_steady_state(cfg.params)
    return {"r0": ss.r0, "m0": ss.m0, "sigma0": ss.sigma0}, f"R0 = {ss.r0:.12g}  m0 = {ss.m0:.12g}"


def _k0(cfg):
    from .model import diffusion_at_steady

    if cfg.dim == 1:
        from .oned import oned_k0, oned_steady_state

        ss = oned_steady_state(cfg.params)
        bp = oned_k0(cfg.params, ss, diffusion_at_steady(cfg.diffusion, ss)[0], tol=cfg.tol_root)
        res = {"k0": bp.k0, "alpha": bp.alpha, "k0_hat": bp.k0_hat, "residual": bp.residual}
    else:
        from .linearization import solve_k0

        ss = solve_steady_state(cfg.params)
        bp = solve_k0(cfg.params, ss, diffusion_at_steady(cfg.diffusion, ss)[0], tol=cfg.tol_root,
                      tol_quad=cfg.tol_quad)
        res = {"k0": bp.k0, "alpha": bp.alpha, "k0_hat": bp.k0_hat, "transversality": bp.transversality,
               "residual": bp.residual}
    return res, f"K0 = {res['k0']:.12g}  alpha = {res['alpha']:.12g}"


def _report(cfg):
    if cfg.dim == 1:
        from .oned import OneDConfig, oned_k2

        return oned_k2(OneDConfig(cfg.params, cfg.diffusion, intervals=max(cfg.grid, 1024), tol_root=cfg.tol_root,
                                  tol_quad=cfg.tol_quad))
    from .expansion import run_pipeline

    return run_pipeline(cfg.params, cfg.diffusion, intervals=cfg.grid, tol_root=cfg.tol_root,
                        tol_quad=cfg.tol_quad).report


def _k2(cfg):
    rep = _report(cfg)
    res = rep.as_dict()
    lines = [f"K0 = {rep.k0:.12g}", f"K2 = {rep.k2:.12g}", f"verdict: {rep.verdict}",
             "A1..A4 = " + ", ".join(f"{a:.10g}" for a in (rep.a1, rep.a2, rep.a3, rep.a4))]
    if cfg.k is not None:
        v2 = (cfg.k - rep.k0) / rep.k2 if rep.k2 != 0 else math.nan
        res["k"] = cfg.k
        res["branch_speed"] = math.sqrt(v2) if v2 >= 0 else None
        lines.append(f"branch speed at K = {cfg.k:g}: " + (f"{math.sqrt(v2):.8g}" if v2 >= 0 else "no branch"))
    return res, "\n".join(lines)


def _critical(cfg):
    from .oned import OneDConfig, critical_ea

    if cfg.diffusion.kind != "van_der_waals":
        raise UsageError("critical-ea needs van der Waals diffusion")
    if cfg.dim != 1:
        raise UsageError("critical-ea is defined for --dim 1")
    e = critical_ea(OneDConfig(cfg.params, cfg.diffusion, intervals=max(cfg.grid, 1024), tol_root=cfg.tol_root,
                               tol_quad=cfg.tol_quad))
    return {"e_a_critical": e, "m_inf": cfg.diffusion.parameters[0]}, f"e_A* = {e:.10g}"


def _sweep(cfg):
    from .sweep_io import SweepSpec, emit_csv, emit_svg, row_text, run_sweep, CSV_FIELDS

    sw = cfg.sweep
    if "axis" not in sw:
        raise UsageError("sweep needs --axis")
    fixed = {"P": cfg.params.P, "Z": cfg.params.Z, "gamma": cfg.params.gamma}
    if cfg.diffusion.kind == "constant":
        fixed["const_d"] = cfg.diffusion.parameters[0]
    else:
        fixed["m_inf"], fixed["e_A"] = cfg.diffusion.parameters
    lo, hi = sw.get("lo", 0.0), sw.get("hi", 1.0)
    spec = SweepSpec(sw["axis"], lo, hi, sw.get("count", 21), fixed=fixed, dimension=cfg.dim, intervals=cfg.grid,
                     tol_root=cfg.tol_root, tol_quad=cfg.tol_quad)
    rows = run_sweep(spec, workers=sw.get("workers", 1))
    if "csv" in cfg.outputs:
        emit_csv(rows, cfg.outputs["csv"])
    if "svg" in cfg.outputs:
        emit_svg(rows, "bifurcation" if spec.axis == "K" else "k2", cfg.outputs["svg"])
    cols = [c for c in CSV_FIELDS if c != "wall_time"]
    text = ",".join(cols) + "\n" + "\n".join(row_text(r) for r in rows)
    return {"rows": [dict(zip(cols, row_text(r).split(","))) for r in rows]}, text


def _figures(cfg):
    from .sweep_io import emit_figures

    out = cfg.outputs.get("out", "figures")
    fixed = {"P": cfg.params.P, "Z": cfg.params.Z, "gamma": cfg.params.gamma}
    if cfg.diffusion.kind == "van_der_waals":
        fixed["m_inf"] = cfg.diffusion.parameters[0]
    paths = emit_figures(out, dimension=cfg.dim, intervals=cfg.grid, fixed=fixed)
    return paths, "\n".join(f"{k}: {v}" for k, v in paths.items())


def _selftest(cfg):
    from .selftest import run_selftest

    results = run_selftest()
    ok = all(r[1] for r in results)
    text = "\n".join(f"{'PASS' if passed else 'FAIL'} {name}: {detail}" for name, passed, detail in results)
    return {"passed": ok, "checks": [{"name": n, "passed": p, "detail": d} for n, p, d in results]}, text


COMMANDS = {"steady": _steady, "k0": _k0, "k2": _k2, "critical-ea": _critical, "sweep": _sweep,
            "figures": _figures, "selftest": _selftest}


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_jsonable(v) for v in obj]
    return obj


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        cfg = resolve(args)
    except (UsageError, DomainError, MotilityError) as exc:
        # invalid config file or parameter-domain violation
        print(f"usage error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    try:
        result, text = COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except MotilityError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"IOError: {exc}", file=sys.stderr)
        return 1
    print(text)
    if "json" in cfg.outputs:
        with open(cfg.outputs["json"], "w") as fh:
            json.dump(_jsonable(result), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if cfg.subcommand == "selftest" and not result["passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
