"""Command-line entry point: ``swclt <subcommand> ...``.

Subcommands
-----------
dist           sliced / max-sliced / distributional / amplitude value between two clouds
potential      dump the Kantorovich potential of one slice as knot,target,offset rows
cov            plug-in covariance matrix of the limiting process on a direction grid
clt-sim        replicated CLT simulation from a config file
bootstrap-sim  rescaled bootstrap study from a config file

Point clouds come from CSV files (``--source``/``--target``, one point per row)
or from the ``model_P``/``model_Q`` entries of ``--config``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

import numpy as np

from .config import direction_grid, load_config
from .errors import SwcltError
from .harness import run_bootstrap_sim, run_clt_sim, write_report
from .inference import covariance_matrix, slice_potential
from .measures import EmpiricalMeasure, as_unit_vector
from .samplers import sample
from .seeding import mix64
from .sliced import Functional, MaxSlicedOptions, amplitude_stat, max_sliced, sliced_wasserstein


def _fmt(x) -> str:
    return repr(float(x))


def _emit_rows(columns, rows, fmt: str, out) -> None:
    if fmt == "json":
        json.dump([dict(zip(columns, r)) for r in rows], out, indent=2, sort_keys=True)
        out.write("\n")
        return
    out.write(",".join(columns) + "\n")
    for r in rows:
        out.write(",".join(_fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in r) + "\n")


def _load_pair(args) -> tuple[EmpiricalMeasure, EmpiricalMeasure]:
    if args.source and args.target:
        return EmpiricalMeasure.from_csv(args.source), EmpiricalMeasure.from_csv(args.target)
    if args.config:
        cfg = load_config(args.config)
        seed = cfg.master_seed if args.seed is None else args.seed
        n = args.n or cfg.n_list[0]
        P = sample(cfg.model_P.with_n(n, mix64(seed, 0)))
        Q = sample(cfg.model_Q.with_n(n, mix64(seed, 1)))
        R = max(P.radius_bound, Q.radius_bound)
        return EmpiricalMeasure(P.points, radius_bound=R), EmpiricalMeasure(Q.points, radius_bound=R)
    raise SwcltError("give --source and --target CSV files, or --config with model_P/model_Q")


def _parse_vec(text: str) -> np.ndarray:
    return np.array([float(t) for t in text.split(",")])


def cmd_dist(args) -> int:
    P, Q = _load_pair(args)
    seed = 0 if args.seed is None else args.seed
    out = {"functional": args.functional, "p": args.p, "seed": seed}
    if args.functional == "sliced":
        val, se = sliced_wasserstein(P, Q, args.p, args.n_dirs, args.trim, seed)
        out.update(value=val, mc_stderr=se, n_dirs=args.n_dirs)
    elif args.functional == "max_sliced":
        res = max_sliced(P, Q, args.p, MaxSlicedOptions(restarts=args.restarts), seed)
        out.update(value=res.value, argmax=res.argmax.coords.tolist())
    elif args.functional == "amplitude":
        amp, hi, lo = amplitude_stat(P, Q, args.p, direction_grid(P.dim, args.n_dirs, seed))
        out.update(value=amp, sup_dir=hi.coords.tolist(), inf_dir=lo.coords.tolist())
    else:
        F = Functional("discrete", dirs=direction_grid(P.dim, args.n_dirs, seed))
        out.update(value=F.evaluate(P, Q, args.p, args.trim), n_dirs=args.n_dirs)
    if args.format == "json":
        json.dump(out, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        _emit_rows(["value"], [[out["value"]]], "csv", sys.stdout)
    return 0


def cmd_potential(args) -> int:
    P, Q = _load_pair(args)
    u = as_unit_vector(_parse_vec(args.direction))
    f = slice_potential(P, Q, u, args.p)
    if f.identically_zero:
        rows = [[float(f.knots[0]), 0.0, 0.0]]
    else:
        rows = [[float(k), float(t), float(o)] for k, t, o in zip(f.knots[:-1], f.targets, f.offsets)]
    _emit_rows(["knot", "target", "offset"], rows, args.format, sys.stdout)
    return 0


def cmd_cov(args) -> int:
    P, Q = _load_pair(args)
    seed = 0 if args.seed is None else args.seed
    U = direction_grid(P.dim, args.n_dirs, seed)
    S = covariance_matrix(P, Q, args.p, U)
    rows = [[i, j, float(S[i, j])] for i in range(len(U)) for j in range(len(U))]
    if args.format == "json":
        json.dump({"directions": U.tolist(), "covariance": S.tolist()}, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        _emit_rows(["i", "j", "value"], rows, "csv", sys.stdout)
    return 0


def _sim_config(args):
    cfg = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.out_dir is not None:
        changes["output_dir"] = args.out_dir
    return dataclasses.replace(cfg, **changes) if changes else cfg


def cmd_sim(args) -> int:
    cfg = _sim_config(args)
    runner = run_clt_sim if args.command == "clt-sim" else run_bootstrap_sim
    report = runner(cfg, workers=args.workers)
    files = write_report(report, cfg.output_dir, args.format)
    for path in files:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="swclt", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, pair=True):
        sp.add_argument("--config", help="YAML/JSON experiment config")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        if pair:
            sp.add_argument("--source", help="CSV point cloud for P")
            sp.add_argument("--target", help="CSV point cloud for Q")
            sp.add_argument("--n", type=int, default=None, help="sample size when sampling from --config")
            sp.add_argument("--p", type=float, default=2.0)

    sp = sub.add_parser("dist", help="distance between two point clouds")
    common(sp)
    sp.add_argument("--functional", choices=("sliced", "max_sliced", "discrete", "amplitude"), default="sliced")
    sp.add_argument("--n-dirs", type=int, default=500)
    sp.add_argument("--restarts", type=int, default=8)
    sp.add_argument("--trim", type=float, default=0.0)
    sp.set_defaults(func=cmd_dist)

    sp = sub.add_parser("potential", help="Kantorovich potential of one slice")
    common(sp)
    sp.add_argument("--direction", required=True, help="comma-separated direction, e.g. 1,0,0")
    sp.set_defaults(func=cmd_potential)

    sp = sub.add_parser("cov", help="covariance matrix on a direction grid")
    common(sp)
    sp.add_argument("--n-dirs", type=int, default=20)
    sp.set_defaults(func=cmd_cov)

    for name in ("clt-sim", "bootstrap-sim"):
        sp = sub.add_parser(name, help=f"run a {name.replace('-sim', '')} simulation")
        common(sp, pair=False)
        sp.add_argument("--out-dir", default=None)
        sp.add_argument("--workers", type=int, default=1)
        sp.set_defaults(func=cmd_sim)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command in ("clt-sim", "bootstrap-sim") and not args.config:
        print("error: --config is required", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (SwcltError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
