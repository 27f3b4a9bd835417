"""Command line entry point: ``bvforms <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from . import plotting
from .config import RunConfig, read_key_value
from .errors import BVFormsError, ConfigError
from .forms import QuadForm, class_number, discriminant, is_fundamental, validate_paper_conditions
from .idealarith import FieldContext, dirichlet_class_number, nu, nu_bruteforce, ray_class_size
from .lattice import bv_discrepancy_sum, count_lattice, expected_points, pi_Q, residue_count_table
from .optimizer import gap_pipeline, maximize_Mk
from .report import ArtifactWriter, dumps
from .sieve import (
    SieveConfig,
    ShiftTuple,
    S1_S2_sums,
    brute_S,
    g_omega_over_nu,
    g_omega_over_square,
    select_W_residues,
    sieve_sum_asymptotic,
)
from .simplex import SmoothCutoff

log = logging.getLogger("bvforms")

COMMANDS = ("validate", "nu", "classnum", "count", "bv", "sieve-brute", "mk", "gap")


def _cmd_validate(cfg: RunConfig, out: ArtifactWriter, args):
    Q = QuadForm.parse(cfg.form)
    rep = validate_paper_conditions(Q).as_dict()
    d = discriminant(Q)
    rep["fundamental"] = d.fundamental
    rep["class_number"] = class_number(Q.delta).h
    return rep


def _cmd_nu(cfg, out, args):
    Q = QuadForm.parse(cfg.form)
    ctx = FieldContext.from_form(Q)
    rows, mismatches = [], []
    for q in range(1, cfg.q_max + 1):
        a, b = nu(q, ctx), nu_bruteforce(q, Q)
        h = ray_class_size(q, ctx) if q >= 3 else ""
        rows.append((q, a, b, h))
        if a != b:
            mismatches.append(q)
    out.csv("nu.csv", ["q", "nu", "nu_bruteforce", "ray_class_size"], rows)
    if args.emit_plot_data:
        out.csv("nu_plot.csv", ["x", "y"], [(r[0], r[1] / r[0] ** 2) for r in rows])
    return {"q_max": cfg.q_max, "mismatches": mismatches, "identity_holds": not mismatches}


def _cmd_classnum(cfg, out, args):
    Q = QuadForm.parse(cfg.form)
    cg = class_number(Q.delta)
    res = {"delta": Q.delta, "h": cg.h, "forms": [list(f.as_tuple()) for f in cg.forms]}
    if is_fundamental(Q.delta):
        h_dir = dirichlet_class_number(Q.delta)
        res["dirichlet_estimate"] = h_dir
        res["agrees"] = round(h_dir) == cg.h
    return res


def _cmd_count(cfg, out, args):
    Q = QuadForm.parse(cfg.form)
    q = cfg.modulus
    table = residue_count_table(Q, cfg.X, q)
    area = expected_points(Q, cfg.X)
    rows = [(u, v, int(table[u, v]), area / q**2) for u in range(q) for v in range(q)]
    out.csv("count.csv", ["u", "v", "count", "expected"], rows)
    return {
        "X": cfg.X,
        "pi_Q": pi_Q(Q, cfg.X),
        "lattice_count": count_lattice(Q, cfg.X),
        "area": area,
        "modulus": q,
        "max_relative_deviation": float(np.max(np.abs(table - area / q**2)) / (area / q**2)),
    }


def _cmd_bv(cfg, out, args):
    Q = QuadForm.parse(cfg.form)
    res = bv_discrepancy_sum(
        Q,
        cfg.X,
        cfg.theta,
        grid_per_decade=cfg.grid,
        exact_q_max=cfg.exact_q_max,
        samples=cfg.samples,
        seed=cfg.seed,
        workers=cfg.threads,
        budget=cfg.budget,
        normalize=cfg.normalize,
    )
    rows = [(r.q, r.nu_q, r.argmax_u, r.argmax_v, r.argmax_y, r.discrepancy, r.regime) for r in res.rows]
    rows.append(("sum", "", "", "", "", res.total, ""))
    out.csv("bv.csv", ["q", "nu_q", "argmax_u", "argmax_v", "argmax_y", "discrepancy", "regime"], rows)
    if args.emit_plot_data:
        out.csv("bv_plot.csv", ["x", "y"], [(r.q, r.discrepancy) for r in res.rows])
    if not args.no_plots:
        out.binary(
            "bv.png",
            plotting.bv_figure([r.q for r in res.rows], [r.discrepancy for r in res.rows], f"Q={cfg.form}, x={cfg.X:g}"),
        )
    return {
        "form": list(res.form),
        "x": res.x,
        "theta": res.theta,
        "D": res.total,
        "normalized": res.normalized,
        "moduli": len(res.rows),
        "grid_points": res.grid_points,
        "transform": list(res.transform) if res.transform else None,
    }


def _cmd_sieve_brute(cfg, out, args):
    Q = QuadForm.parse(cfg.form)
    scfg = SieveConfig(
        form=Q,
        shifts=ShiftTuple.parse(cfg.shifts or "0,0;0,2"),
        X=cfg.X,
        theta=cfg.theta,
        delta=cfg.delta,
        D0=cfg.D0,
        rho=cfg.rho,
        R=cfg.R,
    )
    if scfg.R_value <= 1:
        raise ConfigError(f"R = {scfg.R_value:g} must exceed 1")
    k = scfg.k
    F = SmoothCutoff(maximize_Mk(k, cfg.dmax).polynomial)
    S = brute_S(Q, scfg.shifts, scfg, F, budget=min(cfg.budget, 10**7))
    W, r1, r2 = select_W_residues(Q, scfg.shifts, cfg.D0)
    R = scfg.R_value
    S1 = S1_S2_sums(g_omega_over_square(Q), F, R, k, W)
    a1 = sieve_sum_asymptotic(F, R, k, W)
    g2 = g_omega_over_nu(Q)
    S2 = [S1_S2_sums(g2, F, R, k, W, ell=l) for l in range(k)]
    a2 = sieve_sum_asymptotic(F, R, k, W, ell=0)
    out.csv(
        "sieve.csv",
        ["sum", "brute", "asymptotic", "ratio"],
        [("S1", S1, a1, S1 / a1)] + [(f"S2_{l + 1}", s, a2, s / a2) for l, s in enumerate(S2)],
    )
    return {
        "S": S.as_dict(),
        "R": R,
        "S1": S1,
        "S2_ell": S2,
        "asymptotic": {"S1": a1, "S2_ell": a2},
        "ratio": {"S1": S1 / a1, "S2_ell": [s / a2 for s in S2]},
    }


def _cmd_mk(cfg, out, args):
    rows, results = [], []
    for k in range(cfg.kmin, cfg.kmax + 1):
        r = maximize_Mk(k, cfg.dmax)
        rows.append((k, r.Mk, r.eigenvalue, r.iterations, r.residual))
        results.append(r.as_dict())
    out.csv("mk.csv", ["k", "Mk", "eigenvalue", "iterations", "residual"], rows)
    if args.emit_plot_data:
        out.csv("mk_plot.csv", ["x", "y"], [(r[0], r[1]) for r in rows])
    if not args.no_plots:
        out.binary("mk.png", plotting.mk_figure([r[0] for r in rows], [r[1] for r in rows], f"d_max={cfg.dmax}"))
    return {"dmax": cfg.dmax, "table": results}


def _cmd_gap(cfg, out, args):
    Q = QuadForm.parse(cfg.form)
    rep = gap_pipeline(Q, cfg.theta, cfg.delta, cfg.dmax, k_max=cfg.kmax, k_min=cfg.kmin)
    out.csv("gap_trace.csv", ["k", "Mk", "threshold"], rep.trace)
    if args.emit_plot_data:
        out.csv("gap_plot.csv", ["x", "y"], [(k, t) for k, _, t in rep.trace])
    if not args.no_plots:
        ks = [t[0] for t in rep.trace]
        out.binary(
            "gap.png",
            plotting.mk_figure(ks, [t[1] for t in rep.trace], f"Q={cfg.form}", threshold=[t[2] for t in rep.trace]),
        )
    res = rep.as_dict()
    if rep.found:
        log.info("c(Q)=%d; Theorem-1 style reference value 246 (comparison only)", rep.cQ)
    return res


HANDLERS = {
    "validate": _cmd_validate,
    "nu": _cmd_nu,
    "classnum": _cmd_classnum,
    "count": _cmd_count,
    "bv": _cmd_bv,
    "sieve-brute": _cmd_sieve_brute,
    "mk": _cmd_mk,
    "gap": _cmd_gap,
}

# (dmax, kmax) when not configured
_DEFAULTS = {"sieve-brute": (1, 5), "mk": (3, 5), "gap": (4, 60)}

_FLAG_TYPES = {
    "form": str,
    "X": float,
    "theta": float,
    "delta": float,
    "dmax": int,
    "kmin": int,
    "kmax": int,
    "D0": float,
    "rho": float,
    "R": float,
    "shifts": str,
    "q_max": int,
    "modulus": int,
    "grid": int,
    "exact_q_max": int,
    "samples": int,
    "threads": int,
    "budget": int,
    "seed": int,
    "outdir": str,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file (flags override it)")
    for key, typ in _FLAG_TYPES.items():
        flag = "--" + key.replace("_", "-")
        common.add_argument(flag, dest=key, type=str, default=None, metavar=typ.__name__.upper())
    common.add_argument("--normalize", action="store_const", const="true", default=None)
    common.add_argument("--emit-plot-data", action="store_true", help="write (x,y) series CSV files")
    common.add_argument("--no-plots", action="store_true", help="skip PNG figures")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="bvforms", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        file_values = read_key_value(args.config) if args.config else {}
        overrides = {k: getattr(args, k) for k in list(_FLAG_TYPES) + ["normalize"]}
        cfg = RunConfig.build(file_values, overrides)
        np.random.seed(cfg.seed)
        cfg.with_defaults(*_DEFAULTS.get(args.command, (3, 5)))
        embedded = {k: v for k, v in cfg.as_dict().items() if k != "outdir"}
        out = ArtifactWriter(cfg.outdir, args.command, embedded)
        result = HANDLERS[args.command](cfg, out, args)
        path, doc = out.summary(args.command.replace("-", "_") + ".json", result)
        sys.stdout.write(dumps({"summary": str(path), "content_hash": doc["content_hash"]}))
        return 0
    except (BVFormsError, ValueError, OverflowError, ArithmeticError) as exc:
        code = getattr(exc, "exit_code", 1)
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
        return code


def main() -> None:
    sys.exit(run())
