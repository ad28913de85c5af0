"""``wpcollapse`` command line.

Exit codes: 0 success, 1 invalid input, 2 numerical failure (and argparse
usage errors, which also exit with 2).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .collapse import DegenerationSpec, collapse_run, geometric_spec
from .errors import NumericalError, ValidationError
from .horo import (
    BasePoint,
    base_distance,
    fiber_coords,
    fiber_diameter_bound,
    fiber_diameter_upper,
    lambda_lower_bound,
    project,
)
from .linalg import lambda_min
from .reduction import DEFAULT_U, in_siegel_set, reduce_spd, siegel_coords, siegel_set_clauses
from .report import dumps, emit_report, write_atomic
from .siegel import point_from_json, point_to_json, siegel_distance
from .suites import run_suites
from .tropical import spd_from_json, spd_to_json, trwp_distance

DEFAULT_SAMPLES = 40
DEFAULT_SEED = 0
DEFAULT_N_MAX = 12
DEFAULT_R = 1.0


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


def _emit(obj, out):
    text = dumps(obj)
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _need(args, name):
    if getattr(args, name) is None:
        raise ValidationError(f"--{name.replace('_', '-')} is required for this command")
    return getattr(args, name)


def cmd_reduce(args):
    tau = point_from_json(_load_json(_need(args, "input")))
    c = siegel_coords(tau)
    red = reduce_spd(tau.Y, max(args.u, 2.0))
    return {
        "coords": {"X": c.X, "L": c.L, "d": c.d},
        "in_siegel_set": in_siegel_set(tau, args.u),
        "clauses": siegel_set_clauses(c.L, c.d, args.u) | {"x_bound": bool(np.all(np.abs(tau.X) < args.u))},
        "reduced_Y": {"Y": red.Y, "U": red.U, "scale_ok": red.scale_ok},
    }


def _base_json(base):
    return {"tauP": None if base.tauP is None else point_to_json(base.tauP), "t": spd_to_json(base.t)}


def cmd_dist(args):
    obj = _load_json(_need(args, "input"))
    a, b = obj["a"], obj["b"]
    if "P" in a:
        return {"tropical": trwp_distance(spd_from_json(a), spd_from_json(b))}
    p, q = point_from_json(a), point_from_json(b)
    out = {"siegel": siegel_distance(p, q), "tropical_Y": trwp_distance(p.Y, q.Y)}
    if args.gprime is not None:
        out["base"] = base_distance(project(p, args.gprime), project(q, args.gprime))
    return out


def cmd_project(args):
    tau = point_from_json(_load_json(_need(args, "input")))
    k = _need(args, "gprime")
    base = project(tau, k)
    return _base_json(base) | {"fiber": fiber_coords(tau, k), "lambda_min_t": lambda_min(base.t)}


def cmd_fiber_diam(args):
    obj = _load_json(_need(args, "input"))
    k = _need(args, "gprime")
    if "t" in obj:
        tauP = None if obj.get("tauP") is None else point_from_json(obj["tauP"])
        base, tau = BasePoint(tauP, spd_from_json(obj["t"])), None
    else:
        tau = point_from_json(obj)
        base = project(tau, k)
    out = {
        "fiber_diam_upper": fiber_diameter_upper(base, k, args.u, args.samples, args.seed),
        "fiber_diam_bound": fiber_diameter_bound(base, k, args.u),
        "lambda_min_t": lambda_min(base.t),
    }
    if tau is not None and in_siegel_set(tau, args.u):
        out["lambda_lower_bound"] = lambda_lower_bound(tau, k, args.u)
    return out


def _run_config(args) -> tuple[DegenerationSpec, dict]:
    cfg = _load_json(args.config) if args.config else {}
    if "spec" in cfg:
        spec = DegenerationSpec.from_json(cfg["spec"])
    else:
        g = args.g if args.g is not None else cfg.get("g")
        k = args.gprime if args.gprime is not None else cfg.get("gprime")
        if g is None or k is None:
            raise ValidationError("collapse-run needs --g and --gprime or a config with a spec")
        seed = args.seed if args.seed is not None else cfg.get("seed", DEFAULT_SEED)
        spec = geometric_spec(int(g), int(k), float(cfg.get("rho", 3.0)), float(cfg.get("c", 20.0)), u=args.u, seed=int(seed))
    if args.seed is not None:
        spec = DegenerationSpec(spec.g, spec.gprime, spec.L_fixed, spec.X_fixed, spec.profiles, spec.u, args.seed)
    run = {
        "R": args.R if args.R is not None else float(cfg.get("R", DEFAULT_R)),
        "m": args.samples if args.samples is not None else int(cfg.get("samples", DEFAULT_SAMPLES)),
        "n_max": args.n_max if args.n_max is not None else int(cfg.get("n_max", DEFAULT_N_MAX)),
        "n_min": int(cfg.get("n_min", 1)),
        "box": cfg.get("box", "lattice"),
    }
    if run["R"] <= 0 or run["m"] < 2 or run["n_max"] < run["n_min"]:
        raise ValidationError("need R > 0, samples >= 2 and n_max >= n_min")
    return spec, run


def cmd_collapse_run(args):
    spec, run = _run_config(args)
    rep = collapse_run(spec, run["R"], range(run["n_min"], run["n_max"] + 1), run["m"], run["box"])
    out = Path(_need(args, "out"))
    written = emit_report(rep, out, args.format)
    return {"written": [str(p) for p in written], "fits": rep.fits}


def cmd_verify(args):
    reports = run_suites(args.suite or ["all"], seed=args.seed if args.seed is not None else DEFAULT_SEED)
    for r in reports:
        for c in r.checks:
            status = "PASS" if c.passed else "FAIL"
            print(f"{status} {r.name}.{c.name} value={c.value:.3e} tol={c.tol:.1e}", file=sys.stderr)
    ok = all(r.passed for r in reports)
    return {"passed": ok, "suites": {r.name: r.passed for r in reports}}, (0 if ok else 1)


COMMANDS = {
    "reduce": cmd_reduce,
    "dist": cmd_dist,
    "project": cmd_project,
    "fiber-diam": cmd_fiber_diam,
    "collapse-run": cmd_collapse_run,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wpcollapse", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "reduce": "Jacobi coordinates, Siegel-set membership and LLL reduction of Y",
        "dist": "Siegel, tropical and base distances between two JSON points",
        "project": "horospherical projection and fibre coordinates",
        "fiber-diam": "measured and certified fibre diameters",
        "collapse-run": "run a degeneration experiment and write the report",
        "verify": "closed-form suites and property sweeps",
    }
    for name, h in helps.items():
        s = sub.add_parser(name, help=h)
        s.add_argument("--in", dest="input", help="input JSON file")
        s.add_argument("--out", help="output file (or directory for collapse-run)")
        s.add_argument("--config", help="experiment config JSON")
        s.add_argument("--g", type=int, help="genus of a geometric degeneration (collapse-run)")
        s.add_argument("--gprime", type=int, help="size g' of the boundary block")
        s.add_argument("--u", type=float, default=DEFAULT_U, help="Siegel-set parameter (default %(default)s)")
        s.add_argument("--R", type=float, help=f"base ball radius (default {DEFAULT_R})")
        s.add_argument("--samples", type=int, default=None if name == "collapse-run" else DEFAULT_SAMPLES,
                       help=f"ball samples or random fibre pairs (default {DEFAULT_SAMPLES})")
        s.add_argument("--seed", type=int, default=None if name in ("collapse-run", "verify") else DEFAULT_SEED,
                       help=f"random seed (default {DEFAULT_SEED})")
        s.add_argument("--n-max", dest="n_max", type=int, help=f"last sequence index (default {DEFAULT_N_MAX})")
        s.add_argument("--format", choices=("json", "csv", "both"), default="both",
                       help="collapse-run report format (default %(default)s)")
        if name == "verify":
            s.add_argument("--suite", action="append", choices=("g1", "g2", "properties", "all"))
    return p


def run_command(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = COMMANDS[args.command](args)
        code = 0
        if isinstance(result, tuple):
            result, code = result
        _emit(result, args.out if args.command != "collapse-run" else None)
        return code
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
