"""Command-line front end.

Exit codes: 0 converged, 1 usage/config/data error, 2 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import snapshot
from .config import ConfigError, RunConfig, load
from .descent import ConvergenceReport
from .functionals import ErrorFunctional, GpeFunctional, GpeParams, OpticsFunctional, OpticsParams
from .grid import square_grid
from .kernels import BACKEND
from .problems import (CASES, FAMILIES, GPE_METHODS, GpeCase, SeedSpec, angular_momentum_per_particle,
                       make_seed, solve_excited, solve_gpe_ground)
from .refine import RefinePlan, two_grid_solve
from .snapshot import SnapshotError

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2

# presets applied to keys the user did not set explicitly
EXCITED_PRESET = {
    ("grid", "length"): 32.0,
    ("problem", "kind"): "excited",
    ("problem", "seed_norms"): (60.0, 60.0),
    ("problem", "seed_width"): 2.0,
    ("method", "value_tol"): 1e-10,
    ("method", "max_iters"): 20000,
}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ------------------------------------------------------------------ plumbing
def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _num(x) -> str:
    return "nan" if x is None or not math.isfinite(x) else format(float(x), ".17g")


def write_trace(path, report: ConvergenceReport, timing: bool = True) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "energy", "residual", "norm", "mu", "wall_ms"])
        for r in report.trace:
            w.writerow([r.iteration, _num(r.energy), _num(r.residual), _num(sum(r.norms)), _num(r.mu),
                        format(r.wall_ms, ".3f") if timing else "0"])


def write_outputs(out: Path, report: ConvergenceReport, grid, cfg: RunConfig, extra: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_trace(out / "trace.csv", report, cfg["output"]["timing"])
    snapshot.write(out / "final.sgf", grid, report.final_state)
    last = report.trace[-1]
    doc = {
        "converged": report.converged,
        "status": report.status,
        "iterations": report.iterations,
        "energy": last.energy,
        "residual": last.residual,
        "norms": list(last.norms),
        "mu": last.mu,
        "wall_time": report.wall_time if cfg["output"]["timing"] else None,
        "backend": BACKEND,
        "extra": {k: v for k, v in report.extra.items()},
        "config": cfg.to_dict(),
    }
    doc.update(extra)
    (out / "report.json").write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


def _explicit(cfg: RunConfig) -> set:
    return getattr(cfg, "explicit", set())


def _base_config(args) -> RunConfig:
    if getattr(args, "config", None):
        cfg = load(args.config)
        # every key present in the file counts as explicitly chosen
        cfg.explicit = _file_keys(args.config)
    else:
        cfg = RunConfig()
        cfg.explicit = set()
    return cfg


def _file_keys(path) -> set:
    p = Path(path)
    if p.suffix == ".json":
        data = json.loads(p.read_text())
        data = data.get("config", data)
        return {(s, k) for s, keys in data.items() for k in keys}
    import configparser

    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    cp.read_string(p.read_text())
    return {(s, k) for s in cp.sections() for k, _ in cp.items(s)}


def _preset(cfg: RunConfig, preset: dict) -> None:
    for (section, key), value in preset.items():
        if (section, key) not in _explicit(cfg):
            cfg.set(section, key, value)


def _flag(cfg: RunConfig, section: str, key: str, value) -> None:
    if value is not None:
        cfg.set(section, key, value)
        cfg.explicit.add((section, key))


def _jobs(args) -> int:
    if getattr(args, "jobs", None):
        return args.jobs
    env = os.environ.get("SOBOGRAD_JOBS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"SOBOGRAD_JOBS must be an integer, got {env!r}") from None
        if n < 1:
            raise UsageError("SOBOGRAD_JOBS must be at least 1")
        return n
    return 1


# --------------------------------------------------------------------- ground
def _case_preset(name: str) -> dict:
    case = CASES[name.upper()]
    return {
        ("problem", "g"): case.params.g,
        ("problem", "omega"): case.params.omega,
        ("problem", "lambda"): case.params.lam,
        ("problem", "norm"): case.params.N_target,
        ("problem", "seed"): case.seed.kind,
    }


def resolve_ground(args) -> RunConfig:
    cfg = _base_config(args)
    _flag(cfg, "problem", "case", args.case.upper() if args.case else None)
    case = cfg["problem"]["case"]
    if case:
        if case.upper() not in CASES:
            raise UsageError(f"unknown case {case!r}")
        explicit = set(_explicit(cfg))
        if args.case:
            # a case on the command line outranks the file's physical keys
            explicit -= set(_case_preset(case))
            cfg.explicit = explicit
        _preset(cfg, _case_preset(case))
    _flag(cfg, "method", "name", args.method)
    _flag(cfg, "grid", "points", args.grid)
    _flag(cfg, "grid", "length", args.length)
    _flag(cfg, "problem", "g", args.g)
    _flag(cfg, "problem", "omega", args.omega)
    _flag(cfg, "problem", "lambda", args.lam)
    _flag(cfg, "problem", "norm", args.norm)
    _flag(cfg, "problem", "seed_file", args.seed_file)
    _flag(cfg, "method", "residual_tol", args.tol)
    _flag(cfg, "method", "max_iters", args.max_iter)
    _flag(cfg, "output", "dir", args.out)
    if args.no_timing:
        _flag(cfg, "output", "timing", False)
    cfg.set("problem", "kind", "gpe")
    method = cfg["method"]["name"]
    if method not in GPE_METHODS:
        raise UsageError(f"unknown method {method!r}; expected one of {', '.join(GPE_METHODS)}")
    cfg.set("method", "preconditioner", GPE_METHODS[method][1])
    if method in ("fe", "fes") and cfg["problem"]["lambda"] is None:
        raise UsageError("--lambda is required for the free-energy methods (fe, fes) unless --case is given")
    return cfg


def run_ground(cfg: RunConfig) -> tuple:
    p = cfg["problem"]
    grid = square_grid(cfg["grid"]["points"], cfg["grid"]["length"])
    lam = p["lambda"] if p["lambda"] is not None else 1.0 + p["norm"]
    params = GpeParams(g=p["g"], omega=p["omega"], lam=lam, N_target=p["norm"])
    if p["seed_file"]:
        seed = SeedSpec("custom_file", path=p["seed_file"])
    else:
        seed = SeedSpec(p["seed"], width=p["seed_width"])
    case = GpeCase(p["case"] or "custom", params, seed, cfg["grid"]["points"], cfg["grid"]["length"])
    rep = solve_gpe_ground(case, cfg["method"]["name"], cfg.descent(), grid=grid)
    return rep, grid


def cmd_ground(args) -> int:
    cfg = resolve_ground(args)
    rep, grid = run_ground(cfg)
    out = Path(cfg["output"]["dir"])
    write_outputs(out, rep, grid, cfg, {"Lz_per_N": rep.extra["Lz_per_N"], "N": rep.extra["N"]})
    _say(f"{cfg['method']['name']}: {rep.status} after {rep.iterations} iterations, "
         f"E={rep.final_energy:.12g}, mu={rep.extra['mu']:.10g}, <Lz>/N={rep.extra['Lz_per_N']:.6f}")
    return EXIT_OK if rep.converged else EXIT_NONCONVERGED


# -------------------------------------------------------------------- excited
def resolve_excited(args, preset=EXCITED_PRESET) -> RunConfig:
    cfg = _base_config(args)
    _preset(cfg, preset)
    _flag(cfg, "problem", "mu_u", args.mu_u)
    _flag(cfg, "problem", "mu_w", args.mu_w)
    _flag(cfg, "problem", "kappa", args.kappa)
    _flag(cfg, "problem", "family", args.family)
    _flag(cfg, "problem", "seed_file", args.seed_file)
    _flag(cfg, "grid", "points", args.grid)
    _flag(cfg, "grid", "length", args.length)
    _flag(cfg, "method", "value_tol", args.tol)
    _flag(cfg, "method", "max_iters", args.max_iter)
    _flag(cfg, "output", "dir", args.out)
    if args.raw_gradient:
        _flag(cfg, "method", "preconditioner", "identity")
    if args.no_timing:
        _flag(cfg, "output", "timing", False)
    fam = cfg["problem"]["family"]
    if fam not in (*FAMILIES, "custom"):
        raise UsageError(f"unknown family {fam!r}")
    if fam == "custom" and not cfg["problem"]["seed_file"]:
        raise UsageError("--family custom needs --seed-file")
    if cfg["method"]["preconditioner"] not in ("sobolev", "identity"):
        raise UsageError("preconditioner must be sobolev or identity")
    if cfg["problem"]["kappa"] <= 0:
        raise UsageError("--kappa must be positive")
    return cfg


def _excited_seed(cfg: RunConfig) -> SeedSpec:
    p = cfg["problem"]
    norms = tuple(p["seed_norms"]) or None
    if p["family"] == "custom" or p["seed_file"]:
        return SeedSpec("custom_file", path=p["seed_file"], norms=norms)
    base = FAMILIES[p["family"]]
    return SeedSpec(base.kind, width=p["seed_width"], modes=base.modes, norms=norms)


def _optics_params(cfg: RunConfig) -> OpticsParams:
    p = cfg["problem"]
    return OpticsParams(kappa=p["kappa"], mu_u=p["mu_u"], mu_w=p["mu_w"], lambda_u=p["lambda_u"],
                        lambda_w=p["lambda_w"])


def run_excited(cfg: RunConfig, grid=None, seed=None):
    grid = grid or square_grid(cfg["grid"]["points"], cfg["grid"]["length"])
    seed = _excited_seed(cfg) if seed is None else seed
    return solve_excited(_optics_params(cfg), seed, cfg.descent(), grid=grid,
                         preconditioner=cfg["method"]["preconditioner"]), grid


def _excited_summary(rep) -> dict:
    return {"F": rep.extra["F"], "N_u": rep.extra["N_u"], "N_w": rep.extra["N_w"]}


def cmd_excited(args) -> int:
    cfg = resolve_excited(args)
    rep, grid = run_excited(cfg)
    write_outputs(Path(cfg["output"]["dir"]), rep, grid, cfg, _excited_summary(rep))
    if rep.converged:
        _say(f"converged after {rep.iterations} iterations: F={rep.extra['F']:.3e}, "
             f"N_u={rep.extra['N_u']:.6g}, N_w={rep.extra['N_w']:.6g}")
        return EXIT_OK
    _say(f"trapped: F>tol (F={rep.extra['F']:.3e} after {rep.iterations} iterations, status {rep.status})")
    return EXIT_NONCONVERGED


# --------------------------------------------------------------------- refine
def _parse_grids(text: str) -> tuple:
    try:
        sizes = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"--grids expects a comma-separated list of integers, got {text!r}") from None
    return sizes


def refine_plan(cfg: RunConfig) -> RefinePlan:
    sizes = cfg["grid"]["grids"]
    try:
        return RefinePlan.square(sizes, cfg["grid"]["length"])
    except ValueError as exc:
        raise UsageError(f"invalid refinement plan: {exc}") from None


def run_refine(cfg: RunConfig, cold: bool):
    plan = refine_plan(cfg)
    seed = make_seed(_excited_seed(cfg), plan.grid(0))

    def solve(start, stage_cfg, grid):
        return solve_excited(_optics_params(cfg), start, stage_cfg, grid=grid,
                             preconditioner=cfg["method"]["preconditioner"])

    reports = two_grid_solve(solve, seed, plan, cfg.descent())
    cold_rep = None
    if cold and len(reports) == len(plan.grids) and reports[-1].converged:
        cold_rep, _ = run_excited(cfg, grid=plan.grid(len(plan.grids) - 1))
    return plan, reports, cold_rep


def cmd_refine(args) -> int:
    cfg = resolve_excited(args)
    if args.grids is None and not cfg["grid"]["grids"]:
        raise UsageError("--grids is required (e.g. --grids 32,64)")
    if args.grids is not None:
        _flag(cfg, "grid", "grids", _parse_grids(args.grids))
    plan, reports, cold = run_refine(cfg, args.cold)
    out = Path(cfg["output"]["dir"])
    stages = []
    for i, rep in enumerate(reports):
        write_outputs(out / f"stage{i}", rep, plan.grid(i), cfg, _excited_summary(rep))
        stages.append({"dims": list(plan.grids[i]), "iterations": rep.iterations, "converged": rep.converged,
                       "F": rep.extra["F"], "initial_F": rep.trace[0].energy})
    summary = {"stages": stages, "config": cfg.to_dict()}
    if cold is not None:
        write_outputs(out / "cold", cold, plan.grid(len(plan.grids) - 1), cfg, _excited_summary(cold))
        summary["cold"] = {"dims": list(plan.grids[-1]), "iterations": cold.iterations,
                           "converged": cold.converged, "F": cold.extra["F"]}
        summary["fine_stage_reduction"] = cold.iterations / max(1, reports[-1].iterations)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    for s in stages:
        _say(f"stage {s['dims']}: {s['iterations']} iterations, converged={s['converged']}, F={s['F']:.3e}")
    if cold is not None:
        _say(f"cold start {summary['cold']['dims']}: {cold.iterations} iterations")
    ok = len(reports) == len(plan.grids) and all(r.converged for r in reports)
    return EXIT_OK if ok else EXIT_NONCONVERGED


# ------------------------------------------------------------------ benchmark
def _table1_cell(case: str, method: str, n: int, max_iters: int) -> dict:
    from .descent import DescentConfig

    t = time.perf_counter()
    rep = solve_gpe_ground(case, method, DescentConfig(max_iters=max_iters), grid=CASES[case].grid(n))
    return {"case": case, "method": method, "iterations": rep.iterations, "wall_s": time.perf_counter() - t,
            "converged": rep.converged, "status": rep.status, "Lz_per_N": rep.extra["Lz_per_N"]}


def _table2_cell(family: str, start: str, n_coarse: int, n_fine: int, max_iters: int) -> list:
    cfg = RunConfig()
    cfg.explicit = set()
    _preset(cfg, EXCITED_PRESET)
    cfg.set("problem", "family", family)
    cfg.set("method", "max_iters", max_iters)
    rows = []
    t = time.perf_counter()
    if start == "cold":
        rep, _ = run_excited(cfg, grid=square_grid(n_fine, cfg["grid"]["length"]))
        rows.append({"family": family, "start": "hermite", "grid": n_fine, "iterations": rep.iterations,
                     "wall_s": time.perf_counter() - t, "converged": rep.converged})
    else:
        cfg.set("grid", "grids", (n_coarse, n_fine))
        plan, reports, _ = run_refine(cfg, cold=False)
        for i, rep in enumerate(reports):
            rows.append({"family": family, "start": "hermite" if i == 0 else "interpolated",
                         "grid": plan.grids[i][0], "iterations": rep.iterations,
                         "wall_s": rep.wall_time, "converged": rep.converged})
    return rows


def _ratio(a, b):
    return a / b if b else float("inf")


def cmd_benchmark(args) -> int:
    jobs = _jobs(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.suite == "gpe-table1":
        n = args.grid or 128
        cells = [(c, m, n, args.max_iter or 300000) for c in "ABC" for m in GPE_METHODS]
        rows = _map(_table1_cell, cells, jobs)
        _write_rows(out / "table1.csv", rows, ["case", "method", "iterations", "wall_s", "converged", "status",
                                               "Lz_per_N"])
        it = {(r["case"], r["method"]): r["iterations"] for r in rows}
        for c in "ABC":
            _say(f"case {c}: FE/FES = {_ratio(it[c, 'fe'], it[c, 'fes']):.2f}, "
                 f"IT/ITS = {_ratio(it[c, 'it'], it[c, 'its']):.2f}")
    elif args.suite == "optics-table2":
        sizes = _parse_grids(args.grids) if args.grids else (32, 64)
        if len(sizes) != 2:
            raise UsageError("optics-table2 needs exactly two grids")
        cells = [(f, s, sizes[0], sizes[1], args.max_iter or 20000) for f in FAMILIES for s in ("refine", "cold")]
        rows = [r for group in _map(_table2_cell, cells, jobs) for r in group]
        _write_rows(out / "table2.csv", rows, ["family", "start", "grid", "iterations", "wall_s", "converged"])
        for f in FAMILIES:
            interp = [r for r in rows if r["family"] == f and r["start"] == "interpolated"]
            cold = [r for r in rows if r["family"] == f and r["start"] == "hermite" and r["grid"] == sizes[1]]
            if interp and cold:
                _say(f"{f}: cold {cold[0]['iterations']} vs interpolated {interp[0]['iterations']} "
                     f"fine-grid iterations (ratio {_ratio(cold[0]['iterations'], interp[0]['iterations']):.2f})")
    else:
        raise UsageError(f"unknown suite {args.suite!r}")
    return EXIT_OK if all(r["converged"] for r in rows) else EXIT_NONCONVERGED


def _map(fn, cells, jobs):
    if jobs <= 1:
        return [fn(*c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*cells)))


def _write_rows(path, rows, fields):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


# -------------------------------------------------------------------- inspect
def cmd_inspect(args) -> int:
    try:
        grid, field = snapshot.read(args.input)
    except (SnapshotError, OSError) as exc:
        raise DataError(f"cannot read snapshot: {exc}") from None
    comps = field[None] if field.ndim == grid.rank else field
    if args.format == "csv":
        if grid.rank != 2:
            raise UsageError("csv export supports rank-2 snapshots")
        x1, x2 = (a + c for a, c in zip(grid.mesh, (o + L / 2 for o, L in zip(grid.origins, grid.lengths))))
        w = csv.writer(sys.stdout, lineterminator="\n")
        header = ["x", "y"]
        for c in range(len(comps)):
            header += [f"density_{c}", f"phase_{c}"]
        w.writerow(header)
        cols = [x1.ravel(), x2.ravel()]
        for f in comps:
            cols += [(np.abs(f) ** 2).ravel(), np.angle(f).ravel()]
        for row in zip(*cols):
            w.writerow([format(v, ".10g") for v in row])
        return EXIT_OK
    lines = [f"grid {'x'.join(map(str, grid.dims))}, lengths {list(grid.lengths)}, components {len(comps)}"]
    for c, f in enumerate(comps):
        N = grid.norm2(f)
        line = f"component {c}: N = {N:.15g}, max density = {np.max(np.abs(f) ** 2):.10g}"
        if grid.rank == 2 and N > 0:
            line += f", <Lz>/N = {angular_momentum_per_particle(grid, f):.10g}"
        lines.append(line)
    if args.config:
        cfg = load(args.config)
        lines.append(f"energy = {_energy(cfg, grid, field):.15g}")
    print("\n".join(lines))
    return EXIT_OK


def _energy(cfg: RunConfig, grid, field) -> float:
    p = cfg["problem"]
    if p["kind"] == "gpe":
        lam = p["lambda"] if p["lambda"] is not None else 1.0
        return GpeFunctional(grid, GpeParams(g=p["g"], omega=p["omega"], lam=lam)).value(field)
    params = _optics_params(cfg)
    if p["kind"] == "excited":
        return ErrorFunctional(grid, params).value(field)
    return OpticsFunctional(grid, params, free=False).value(field)


# ----------------------------------------------------------------------- main
def _say(msg: str) -> None:
    print(msg)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sobograd", description="Sobolev-preconditioned ground and excited state solver")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("ground", help="trapped condensate ground state")
    g.add_argument("--config")
    g.add_argument("--case", type=str.lower, choices=["a", "b", "c"])
    g.add_argument("--method", choices=list(GPE_METHODS))
    g.add_argument("--grid", type=int)
    g.add_argument("--length", type=float)
    g.add_argument("--g", type=float)
    g.add_argument("--omega", type=float)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--norm", type=float)
    g.add_argument("--tol", type=float)
    g.add_argument("--max-iter", type=int)
    g.add_argument("--seed-file")
    g.add_argument("--out")
    g.add_argument("--no-timing", action="store_true", help="write 0 in the wall_ms column (byte-stable traces)")
    g.set_defaults(func=cmd_ground)

    def excited_flags(p):
        p.add_argument("--config")
        p.add_argument("--mu-u", type=float)
        p.add_argument("--mu-w", type=float)
        p.add_argument("--kappa", type=float)
        p.add_argument("--family", choices=["vortex", "dipole", "custom"])
        p.add_argument("--seed-file")
        p.add_argument("--grid", type=int)
        p.add_argument("--length", type=float)
        p.add_argument("--tol", type=float, help="target value of the residual functional")
        p.add_argument("--max-iter", type=int)
        p.add_argument("--raw-gradient", action="store_true", help="disable Sobolev preconditioning")
        p.add_argument("--out")
        p.add_argument("--no-timing", action="store_true")

    e = sub.add_parser("excited", help="stationary two-beam state with fixed propagation constants")
    excited_flags(e)
    e.set_defaults(func=cmd_excited)

    r = sub.add_parser("refine", help="coarse-to-fine excited-state solve")
    excited_flags(r)
    r.add_argument("--grids")
    r.add_argument("--cold", action="store_true", help="also run a cold start on the finest grid")
    r.set_defaults(func=cmd_refine)

    b = sub.add_parser("benchmark", help="iteration-count tables")
    b.add_argument("--suite", required=True)
    b.add_argument("--grid", type=int)
    b.add_argument("--grids")
    b.add_argument("--max-iter", type=int)
    b.add_argument("--jobs", type=int)
    b.add_argument("--out", default="bench")
    b.set_defaults(func=cmd_benchmark)

    i = sub.add_parser("inspect", help="summarize or export a snapshot")
    i.add_argument("--in", dest="input", required=True)
    i.add_argument("--format", choices=["csv", "ascii-stats"], default="ascii-stats")
    i.add_argument("--config")
    i.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, DataError, SnapshotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
