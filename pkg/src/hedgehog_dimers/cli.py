"""hedgehog-dimers command line: gen, verify, solve, sample, render, experiment."""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import plotting
from .dca import MonodromyError, primitive_H, shol_from_coupling
from .doubledimer import dbl_row
from .kasteleyn import NoMatchingError, assemble
from .lattice import (LatticeError, approximate_disk, build_domain, domain_from_json,
                      inscribed_rectangle, rectangle_cells)
from .observables import _check_schedule, decreasing, gff_row, rbvp_row
from .rbvp import RBVPSolution, central_w0, solve_rbvp, verify_rbvp
from .suite import TOL, identity_suite, suite_passed
from .tiling import sample_exact, tiling_from_list

OUT_ENV = "HEDGEHOG_DIMERS_OUT"
EXPERIMENTS = {
    "rbvp": ("rbvp-convergence", rbvp_row),
    "gff": ("gff-covariance", gff_row),
    "dbl": ("dbl-harmonic", dbl_row),
}
ALIASES = {v[0]: k for k, v in EXPERIMENTS.items()}
# keys that do not change the numerical output
NON_CONFIG = {"out", "threads", "func"}


class ConfigError(ValueError):
    pass


def config_of(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in NON_CONFIG}


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def meta(args) -> dict:
    cfg = config_of(args)
    return {"config": cfg, "config_hash": config_hash(cfg), "seed": cfg.get("seed")}


def write_json(path: Path, obj) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")
    return path


def write_rows(path: Path, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    keys = list(rows[0])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys)
        for r in rows:
            w.writerow([repr(float(r[k])) if isinstance(r[k], float) else r[k] for k in keys])
    return path


def parse_pair(text: str):
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"expected 'n,m', got {text!r}") from None
    return (a, b)


def parse_meshes(text: str):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"malformed mesh list {text!r}") from None


def load_domain(path):
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"domain file {p} not found; run 'gen' first")
    try:
        return domain_from_json(p.read_text())
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise ConfigError(f"malformed domain file {p}: {e}") from None


def _out(args) -> Path:
    return Path(args.out)


def _domain_path(args) -> Path:
    return Path(args.domain) if args.domain else _out(args) / "domain.json"


# subcommands

def cmd_gen(args) -> int:
    if args.delta <= 0:
        raise ConfigError("delta must be positive")
    if args.shape == "disk":
        d = approximate_disk(args.delta, args.radius)
    elif args.shape == "inscribed":
        d = inscribed_rectangle(args.delta, args.radius)
    else:
        if args.width < 1 or args.height < 1:
            raise ConfigError("rectangle needs width, height >= 1")
        d = build_domain(args.delta, cells=rectangle_cells(args.width, args.height))
    out = _out(args)
    obj = json.loads(d.to_json())
    obj["meta"] = meta(args)
    obj["summary"] = {"squares": len(d), "hedgehog": bool(d.is_hedgehog),
                      "irregular_blocks": len(d.irregular_blocks)}
    write_json(out / "domain.json", obj)
    plotting.save(plotting.plot_domain(d), out / "domain")
    print(f"wrote {out / 'domain.json'} ({len(d)} squares, hedgehog={d.is_hedgehog})")
    return 0


def cmd_verify(args) -> int:
    d = load_domain(_domain_path(args))
    v0 = parse_pair(args.v0) if args.v0 else None
    rep = identity_suite(d, v0=v0, tol=args.tol)
    ok = suite_passed(rep, require_all=args.strict)
    path = write_json(_out(args) / "verify_report.json",
                      {"meta": meta(args), "squares": len(d), "hedgehog": bool(d.is_hedgehog),
                       "checks": rep, "pass": ok})
    for k, e in rep.items():
        tag = "PASS" if e["pass"] else ("FAIL" if e.get("applicable", True) else "SKIP")
        print(f"{tag} {k} residual={e['residual']:.3g}")
    print(f"report: {path}")
    return 0 if ok else 1


def cmd_solve(args) -> int:
    d = load_domain(_domain_path(args))
    s = assemble(d)
    out = _out(args)
    v0 = parse_pair(args.v0) if args.v0 else central_w0(d)
    if v0 not in s.white_index:
        raise ConfigError(f"v0 = {v0} is not a white square of the domain")
    s.export_column_csv(v0, out / "coupling.csv")
    info = {"meta": meta(args), "v0": list(v0)}
    ok = True
    if d.is_hedgehog:
        sol: RBVPSolution = solve_rbvp(d, v0, system=s, strict=False, tol=args.tol)
        rep = verify_rbvp(sol, args.tol)
        ok = all(e["pass"] for e in rep.values())
        sol.field.to_csv(out / "field.csv")
        sol.H.to_csv(out / "H.csv")
        H = sol.H
        info["rbvp"] = rep
    else:
        Fc = shol_from_coupling(s, v0)
        Fc.to_csv(out / "field.csv")
        info["rbvp"] = "skipped: domain is not a hedgehog"
        try:
            H = primitive_H(Fc, d.squares, base=min(d.vertices), tol=1e-8)
            H.to_csv(out / "H.csv")
        except MonodromyError as e:
            H = None
            info["H"] = f"not single-valued for the unmodified field: {e}"
    info["pass"] = ok
    path = write_json(out / "solve_report.json", info)
    if H is not None:
        plotting.save(plotting.plot_scalar(H.values, d.delta, "H"), out / "H")
    print(f"report: {path}")
    return 0 if ok else 1


def _one_sample(s, seed_seq):
    return sample_exact(s, rng=np.random.default_rng(seed_seq))


def cmd_sample(args) -> int:
    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    d = load_domain(_domain_path(args))
    s = assemble(d)
    s.coupling_matrix()
    seeds = np.random.SeedSequence(args.seed).spawn(args.n)
    if args.threads > 1:
        with ThreadPoolExecutor(args.threads) as ex:
            tilings = list(ex.map(lambda q: _one_sample(s, q), seeds))
    else:
        tilings = [_one_sample(s, q) for q in seeds]
    out = _out(args)
    path = write_json(out / "samples.json",
                      {"meta": meta(args), "tilings": [t.to_list() for t in tilings]})
    plotting.save(plotting.plot_tiling(tilings[0]), out / "sample")
    print(f"wrote {len(tilings)} tilings to {path}")
    return 0


def cmd_render(args) -> int:
    d = load_domain(_domain_path(args))
    out = _out(args)
    if args.tiling:
        p = Path(args.tiling)
        if not p.exists():
            raise ConfigError(f"tiling file {p} not found")
        obj = json.loads(p.read_text())
        rows = obj["tilings"][args.index] if isinstance(obj, dict) else obj
        fig = plotting.plot_tiling(tiling_from_list(d, rows))
        stem = out / f"tiling_{args.index}"
    else:
        fig = plotting.plot_domain(d)
        stem = out / "domain"
    paths = plotting.save(fig, stem)
    print("wrote " + ", ".join(str(x) for x in paths))
    return 0


def cmd_experiment(args) -> int:
    key = ALIASES.get(args.name, args.name)
    name, fn = EXPERIMENTS[key]
    meshes = _check_schedule(parse_meshes(args.meshes), args.radius)
    if args.threads > 1:
        with ThreadPoolExecutor(args.threads) as ex:
            rows = list(ex.map(lambda x: fn(x, radius=args.radius), meshes))
    else:
        rows = [fn(x, radius=args.radius) for x in meshes]
    checks = {"decreasing": decreasing(rows)}
    if key == "dbl":
        checks["rank1"] = all(r["rank1_residual"] <= 1e-9 for r in rows)
    ok = all(checks.values())
    out = _out(args)
    write_rows(out / f"{name}.csv", rows)
    path = write_json(out / f"{name}.json", {"meta": meta(args), "rows": rows, "checks": checks,
                                              "pass": ok})
    plotting.save(plotting.plot_errors(rows, name), out / name)
    for r in rows:
        print(f"delta={r['delta']:.5g} squares={r['squares']} error={r['error']:.4g}")
    print(("PASS" if ok else "FAIL") + f" {name}; report: {path}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=os.environ.get(OUT_ENV, "hedgehog_out"),
                        help=f"output directory (default ${OUT_ENV} or ./hedgehog_out)")
    common.add_argument("--threads", type=int, default=1, help="worker cap (1 = bit-reproducible)")
    common.add_argument("--tol", type=float, default=TOL, help="identity tolerance")

    p = argparse.ArgumentParser(prog="hedgehog-dimers", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="build a domain")
    g.add_argument("--shape", choices=["disk", "rect", "inscribed"], default="disk")
    g.add_argument("--radius", type=float, default=1.0)
    g.add_argument("--delta", type=float, default=0.05)
    g.add_argument("--width", type=int, default=2, help="cells (rect)")
    g.add_argument("--height", type=int, default=2, help="cells (rect)")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", parents=[common], help="exact-identity suite")
    v.add_argument("--domain")
    v.add_argument("--v0", help="white square 'n,m' for the boundary problem")
    v.add_argument("--strict", action="store_true",
                   help="also fail on checks that do not apply to non-hedgehog domains")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("solve", parents=[common], help="coupling function and H")
    s.add_argument("--domain")
    s.add_argument("--v0")
    s.set_defaults(func=cmd_solve)

    sm = sub.add_parser("sample", parents=[common], help="exact uniform tilings")
    sm.add_argument("--domain")
    sm.add_argument("--n", type=int, default=1)
    sm.add_argument("--seed", type=int, default=0)
    sm.set_defaults(func=cmd_sample)

    r = sub.add_parser("render", parents=[common], help="draw a domain or tiling")
    r.add_argument("--domain")
    r.add_argument("--tiling", help="samples.json or a tiling list")
    r.add_argument("--index", type=int, default=0)
    r.set_defaults(func=cmd_render)

    e = sub.add_parser("experiment", parents=[common], help="mesh-refinement experiments")
    e.add_argument("name", choices=sorted(EXPERIMENTS) + sorted(ALIASES))
    e.add_argument("--meshes", default="0.125,0.0625,0.03125")
    e.add_argument("--radius", type=float, default=1.0)
    e.set_defaults(func=cmd_experiment)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ConfigError, LatticeError, ValueError, NoMatchingError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
