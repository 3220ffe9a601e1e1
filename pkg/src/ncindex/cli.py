"""Command line front end.

Subcommands: classify, invariant, oracle, bulk-edge, residue-check, sweep,
selftest.  Results go to stdout as JSON (or to ``--out``), sweeps and
profiles as CSV.  Exit status is 0 on success, 2 for validation errors
and 3 for analysis errors; error records are JSON lines on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import sys
import tempfile
import warnings
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .boundary import CylinderGeometry, bulk_edge_check
from .calculus import zeta_residue_estimate
from .config import load_config, parse_directions
from .errors import AnalysisError, ConfigError, NCIndexError, ValidationError
from .ktheory import boundary_degree_shift, parse_class, weak_phase_group
from .lattice import TorusGeometry
from .oracles import (
    bloch_family,
    fukui_hatsugai_chern,
    grid_stability,
    occupied_count,
    winding_integral,
)
from .pairings import disorder_averaged_pairing, pairing_for_member

WORKERS_ENV = "NCINDEX_WORKERS"


# output plumbing

def fmt(x) -> str:
    """17 significant digits, round-trip exact for doubles."""
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def atomic_write(path: str, text: str):
    """Write through a temporary file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def manifest(args, cfg=None, geometry=None, seed=None, outputs=()) -> dict:
    return {
        "engine": "ncindex",
        "engine_version": __version__,
        "numpy_version": np.__version__,
        "python": platform.python_version(),
        "command": args.command,
        "argv": list(args.argv),
        "config_sha256": cfg.digest if cfg else None,
        "seed": seed,
        "geometry": list(geometry) if geometry is not None else None,
        "outputs": [os.path.basename(p) for p in outputs if p],
        "timestamp": timestamp(),
    }


def emit(args, record: dict, stdout):
    text = dumps(record)
    if getattr(args, "out", None):
        atomic_write(args.out, text)
    else:
        stdout.write(text)


def csv_text(header, rows, man=None) -> str:
    buf = io.StringIO()
    if man is not None:
        buf.write("# manifest " + json.dumps(_jsonable(man), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def error_record(exc) -> dict:
    rec = {"error": type(exc).__name__, "message": str(exc)}
    for key in ("mu", "nearest", "path"):
        if getattr(exc, key, None) not in (None, ""):
            rec[key] = getattr(exc, key)
    return rec


def workers_from_env(default: int = 1) -> int:
    val = os.environ.get(WORKERS_ENV)
    if not val:
        return default
    try:
        n = int(val)
    except ValueError:
        raise ValidationError(f"{WORKERS_ENV} must be a positive integer, got {val!r}") from None
    if n < 1:
        raise ValidationError(f"{WORKERS_ENV} must be a positive integer, got {val!r}")
    return n


# argument helpers

def _sides(text, d, what="--L"):
    try:
        vals = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"{what} expects comma separated integers, got {text!r}") from None
    if len(vals) == 1:
        vals = vals * d
    if len(vals) != d:
        raise ValidationError(f"{what} needs {d} side lengths, got {len(vals)}")
    return tuple(vals)


def _geometry(args, cfg):
    if getattr(args, "L", None):
        return TorusGeometry(_sides(args.L, cfg.spec.d))
    if cfg.geometry is None:
        raise ConfigError("missing [geometry] section and no --L given", "geometry")
    return cfg.geometry


def _dirs(args, cfg):
    if getattr(args, "dirs", None):
        return parse_directions(args.dirs, cfg.spec.d, "--dirs")
    if "dirs" in cfg.run:
        return cfg.run["dirs"]
    raise ConfigError("no directions given (use --dirs or run.dirs)", "run.dirs")


def _mu(args, cfg):
    if getattr(args, "mu", None) is not None:
        return float(args.mu)
    return float(cfg.run.get("mu", 0.0))


def _seed(args, cfg, needed: bool):
    seed = args.seed if args.seed is not None else cfg.seed
    if needed and seed is None:
        raise ValidationError("ensemble runs need an explicit seed (--seed or disorder.seed)")
    if seed is not None and not 0 <= seed < 2 ** 64:
        raise ValidationError("seed must fit in 64 unsigned bits")
    return seed


# subcommands

def cmd_classify(args, stdout, stderr):
    real = None if args.kind is None else args.kind == "real"
    sc = parse_class(args.cls, real)
    dec = weak_phase_group(sc.n, args.dim, sc.real)
    stderr.write(f"class {sc.label} (n={sc.n}, {'real' if sc.real else 'complex'}), d={args.dim}\n")
    stderr.write(dec.table() + "\n")
    record = {
        "class": {"label": sc.label, "n": sc.n, "real": sc.real, "has_TRS": sc.has_TRS,
                  "has_PHS": sc.has_PHS, "has_chiral": sc.has_chiral, "trs": sc.trs, "phs": sc.phs},
        "decomposition": dec.to_record(),
        "edge_degree": boundary_degree_shift(sc.n, sc.real),
        "manifest": manifest(args, outputs=[args.out]),
    }
    emit(args, record, stdout)
    return 0


def cmd_invariant(args, stdout, stderr):
    cfg = load_config(args.config)
    geom = _geometry(args, cfg)
    J = _dirs(args, cfg)
    mu = _mu(args, cfg)
    ensemble = args.ensemble if args.ensemble is not None else cfg.run.get("ensemble")
    disordered = cfg.spec.disorder.strength > 0
    is_ensemble = ensemble is not None or disordered
    seed = _seed(args, cfg, is_ensemble)
    man = manifest(args, cfg, geom.L, seed, [args.out, args.csv])
    if not is_ensemble:
        res = pairing_for_member(cfg.spec, cfg.twist, geom, J, mu, 0, 0, args.normalization)
        record = {"result": res.to_record(), "directions_1based": [j + 1 for j in J], "mu": mu,
                  "manifest": man}
        rows = [[0, res.raw.real, res.raw.imag, res.rounded, res.int_residual, res.imag_residual,
                 res.diagnostics.get("gap_width", float("nan")), "ok", ""]]
        code = 0
        stderr.write(f"pairing {res.raw.real:.10f} -> {res.rounded} ({res.status})\n")
    else:
        n = int(ensemble or 1)
        stats = disorder_averaged_pairing(cfg.spec, cfg.twist, geom, J, mu, n, seed,
                                          args.normalization, workers_from_env())
        record = {
            "members": [r.to_record() for r in stats.results],
            "errors": stats.errors,
            "mean": stats.mean,
            "max_int_residual": stats.max_int_residual,
            "rounded_values": stats.rounded_values,
            "all_round_to": stats.all_round_to,
            "directions_1based": [j + 1 for j in J],
            "mu": mu,
            "manifest": man,
        }
        by_member = {r.diagnostics["member"]: r for r in stats.results}
        errs = {e["member"]: e for e in stats.errors}
        rows = []
        for m in range(n):
            if m in by_member:
                r = by_member[m]
                rows.append([m, r.raw.real, r.raw.imag, r.rounded, r.int_residual, r.imag_residual,
                             r.diagnostics.get("gap_width", float("nan")), "ok", ""])
            else:
                rows.append([m, "", "", "", "", "", "", "error", errs[m]["error"]])
        for e in stats.errors:
            stderr.write(json.dumps(_jsonable(e), sort_keys=True) + "\n")
        code = 3 if stats.errors else 0
        stderr.write(f"ensemble of {n}: rounded {sorted(set(stats.rounded_values))}, "
                     f"max residual {stats.max_int_residual:.3g}, {len(stats.errors)} errors\n")
    if args.csv:
        header = ["member", "raw_re", "raw_im", "rounded", "int_residual", "imag_residual",
                  "gap_width", "status", "error"]
        atomic_write(args.csv, csv_text(header, rows, man))
    emit(args, record, stdout)
    return code


def cmd_oracle(args, stdout, stderr):
    cfg = load_config(args.config)
    if cfg.spec.disorder.strength:
        raise ValidationError("oracles need a clean model (disorder strength 0)")
    family = bloch_family(cfg.spec, cfg.twist)
    grids = [args.grid, 2 * args.grid]
    if args.which == "chern":
        if args.bands is not None:
            bands = args.bands
        else:
            bands = occupied_count(family, _mu(args, cfg))
        if args.plane:
            plane = parse_directions(args.plane, cfg.spec.d, "--plane")
        else:
            plane = (0, 1)
        if len(plane) != 2:
            raise ValidationError("--plane needs two directions")
        report = grid_stability(lambda g: fukui_hatsugai_chern(family, bands, g, plane), grids)
        extra = {"band_count": bands, "plane_1based": [p + 1 for p in plane]}
    else:
        direction = parse_directions(args.direction, cfg.spec.d, "--direction")[0] if args.direction else 0
        report = grid_stability(lambda g: winding_integral(family, g, direction), grids)
        extra = {"direction_1based": direction + 1}
    value = report["values"][args.grid]
    stderr.write(f"{args.which} = {value} (grids {grids}, stable={report['stable']})\n")
    record = {"oracle": args.which, "value": value, "grid_stability": report, **extra,
              "magnetic_cell": list(family.cell), "manifest": manifest(args, cfg, outputs=[args.out])}
    emit(args, record, stdout)
    return 0 if report["stable"] else 3


def cmd_bulk_edge(args, stdout, stderr):
    cfg = load_config(args.config)
    if cfg.spec.disorder.strength:
        raise ValidationError("bulk-edge runs on the clean model (disorder strength 0)")
    geom = _geometry(args, cfg)
    J = _dirs(args, cfg)
    mu = _mu(args, cfg)
    d = cfg.spec.d
    if args.open_dim is not None:
        od = parse_directions([args.open_dim], d, "--open-dim")[0]
    elif cfg.cylinder is not None:
        od = cfg.cylinder.open_dim
    else:
        od = J[-1]
    J = tuple(j for j in J if j != od) + (od,)
    if args.cylinder_L:
        L = _sides(args.cylinder_L, d, "--cylinder-L")
    elif cfg.cylinder is not None:
        L = cfg.cylinder.L
    else:
        L = geom.L
    L = list(L)
    if args.width is not None:
        L[od] = args.width
    cyl = CylinderGeometry(tuple(L), od)
    margin = args.margin if args.margin is not None else float(cfg.run.get("margin", 0.2))
    rep = bulk_edge_check(cfg.spec, cfg.twist, geom, cyl, mu, J, margin=margin,
                          stability_step=args.stability_step)
    man = manifest(args, cfg, geom.L, None, [args.out, args.profile_csv])
    record = {**rep.to_record(), "directions_1based": [j + 1 for j in J], "open_dim_1based": od + 1,
              "cylinder": list(cyl.L), "mu": mu, "margin": margin, "manifest": man}
    stderr.write(f"bulk {rep.bulk.raw.real:.8f}, edge {rep.edge.raw.real:.8f}: {rep.verdict}; "
                 f"expected sign {rep.expected_sign:+d}\n")
    if args.profile_csv:
        rows = [[w, v] for w, v in enumerate(rep.profile)]
        atomic_write(args.profile_csv, csv_text(["depth", "max_defect"], rows, man))
    emit(args, record, stdout)
    return 0 if rep.verdict.startswith("match") else 3


def cmd_residue(args, stdout, stderr):
    est = zeta_residue_estimate(args.k, M=args.M, tol=args.tol)
    stderr.write(f"k={args.k}: estimate {est.estimate:.6f}, closed form {est.target:.6f}, "
                 f"relative error {est.relative_error:.3%}\n")
    record = {"k": args.k, "estimate": est.estimate, "target": est.target,
              "relative_error": est.relative_error, "grid": est.grid, "values": est.values,
              "fit_residual": est.fit_residual, "M": est.M,
              "manifest": manifest(args, outputs=[args.out])}
    emit(args, record, stdout)
    return 0


def _sweep_point(job):
    spec, twist, geom, J, mu, seed, member, normalization = job
    try:
        return pairing_for_member(spec, twist, geom, J, mu, seed, member, normalization), None
    except NCIndexError as exc:
        return None, exc


def cmd_sweep(args, stdout, stderr):
    from concurrent.futures import ProcessPoolExecutor

    from .lattice import DisorderLaw, ModelSpec

    cfg = load_config(args.config)
    geom = _geometry(args, cfg)
    J = _dirs(args, cfg)
    mu = _mu(args, cfg)
    values = [v.strip() for v in (args.values or "").split(",") if v.strip()]
    seed = _seed(args, cfg, bool(values))
    jobs, keys = [], []
    for v in values:
        spec, g, m = cfg.spec, geom, mu
        try:
            if args.axis == "disorder":
                law = DisorderLaw(float(v), cfg.spec.disorder.channels, cfg.spec.disorder.family)
                spec = ModelSpec(spec.d, spec.q, spec.hoppings, spec.onsite, law, spec.chiral_grading, spec.name)
            elif args.axis == "L":
                g = TorusGeometry(_sides(v.replace(";", ","), spec.d))
            else:
                m = float(v)
        except ValueError:
            raise ValidationError(f"cannot read sweep value {v!r}") from None
        for s in range(args.ensemble):
            jobs.append((spec, cfg.twist, g, J, m, seed, s, args.normalization))
            keys.append((v, s))
    workers = workers_from_env()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            out = list(pool.map(_sweep_point, jobs))
    else:
        out = [_sweep_point(j) for j in jobs]
    rows, failures = [], 0
    for (v, s), (res, exc) in zip(keys, out):
        if res is not None:
            rows.append([args.axis, v, s, seed, "ok", res.raw.real, res.raw.imag, res.rounded,
                         res.int_residual, res.imag_residual, res.diagnostics.get("gap_width", float("nan")), ""])
        else:
            failures += 1
            rows.append([args.axis, v, s, seed, "error", "", "", "", "", "", "", type(exc).__name__])
            stderr.write(json.dumps(_jsonable({"value": v, "sample": s, **error_record(exc)}),
                                    sort_keys=True) + "\n")
    if jobs:
        rows.append([args.axis, "summary", len(jobs), seed, f"{len(jobs) - failures} ok", "", "", "",
                     "", "", "", f"{failures} errors"])
    header = ["axis", "value", "sample", "seed", "status", "raw_re", "raw_im", "rounded",
              "int_residual", "imag_residual", "gap_width", "error"]
    man = manifest(args, cfg, geom.L, seed, [args.out])
    text = csv_text(header, rows, man)
    if args.out:
        atomic_write(args.out, text)
    else:
        stdout.write(text)
    return 0


def cmd_selftest(args, stdout, stderr):
    from .selftest import run_suites

    results = run_suites(args.suite)
    ok = all(r["passed"] for r in results)
    for r in results:
        stderr.write(f"{'PASS' if r['passed'] else 'FAIL'} {r['suite']}: {r['detail']}\n")
    emit(args, {"suites": results, "passed": ok, "manifest": manifest(args, outputs=[args.out])}, stdout)
    return 0 if ok else 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ncindex", description="Index pairings of covariant lattice models.")
    p.add_argument("--version", action="version", version=f"ncindex {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="TOML model file")
        sp.add_argument("--out", help="write the JSON result here instead of stdout")
        return sp

    sp = common(sub.add_parser("classify", help="K-group decomposition for a symmetry class"), False)
    sp.add_argument("--class", dest="cls", required=True, help="class label (AII) or index (4)")
    sp.add_argument("--dim", type=int, required=True)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--real", dest="kind", action="store_const", const="real")
    g.add_argument("--complex", dest="kind", action="store_const", const="complex")
    sp.set_defaults(func=cmd_classify, kind=None)

    sp = common(sub.add_parser("invariant", help="odd or even pairing over a direction set"))
    sp.add_argument("--dirs", help="1-based directions, e.g. 1,2")
    sp.add_argument("--mu", type=float)
    sp.add_argument("--L", help="torus sides, e.g. 24,24 (one value for all)")
    sp.add_argument("--ensemble", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--normalization", choices=("calibrated", "paper"), default="calibrated")
    sp.add_argument("--csv", help="also write one CSV row per member")
    sp.set_defaults(func=cmd_invariant)

    sp = common(sub.add_parser("oracle", help="momentum-space oracles"))
    sp.add_argument("which", choices=("chern", "winding"))
    sp.add_argument("--grid", type=int, default=30)
    sp.add_argument("--bands", type=int, help="occupied band count (default: bands below mu)")
    sp.add_argument("--mu", type=float)
    sp.add_argument("--plane", help="1-based momentum plane for chern, e.g. 1,2")
    sp.add_argument("--direction", help="1-based direction for winding")
    sp.set_defaults(func=cmd_oracle)

    sp = common(sub.add_parser("bulk-edge", help="bulk pairing versus edge pairing"))
    sp.add_argument("--open-dim", type=int, help="1-based open direction (default: last of --dirs)")
    sp.add_argument("--dirs")
    sp.add_argument("--mu", type=float)
    sp.add_argument("--L", help="bulk torus sides")
    sp.add_argument("--cylinder-L", help="cylinder sides (the open entry is the width)")
    sp.add_argument("--width", type=int)
    sp.add_argument("--margin", type=float)
    sp.add_argument("--stability-step", type=int, default=10)
    sp.add_argument("--profile-csv", help="write the boundary decay profile here")
    sp.set_defaults(func=cmd_bulk_edge)

    sp = common(sub.add_parser("residue-check", help="zeta residue against the sphere volume"), False)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--M", type=int, default=200)
    sp.add_argument("--tol", type=float, default=0.02)
    sp.set_defaults(func=cmd_residue)

    sp = common(sub.add_parser("sweep", help="CSV table over a parameter axis"))
    sp.add_argument("--axis", choices=("disorder", "L", "mu"), required=True)
    sp.add_argument("--values", default="", help="comma separated values ('24' or '24;24' style for L)")
    sp.add_argument("--ensemble", type=int, default=1)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--dirs")
    sp.add_argument("--mu", type=float)
    sp.add_argument("--L")
    sp.add_argument("--normalization", choices=("calibrated", "paper"), default="calibrated")
    sp.set_defaults(func=cmd_sweep)

    sp = common(sub.add_parser("selftest", help="built-in identity suites"), False)
    sp.add_argument("suite", nargs="?", default="all", choices=("all", "clifford", "ktheory", "lattice"))
    sp.set_defaults(func=cmd_selftest)
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return args.func(args, stdout, stderr)
    except OSError as exc:
        stderr.write(json.dumps({"error": "ConfigError", "message": str(exc)}) + "\n")
        return 2
    except ValidationError as exc:
        stderr.write(json.dumps(_jsonable(error_record(exc)), sort_keys=True) + "\n")
        return 2
    except AnalysisError as exc:
        stderr.write(json.dumps(_jsonable(error_record(exc)), sort_keys=True) + "\n")
        return 3


def main():
    sys.exit(run())
