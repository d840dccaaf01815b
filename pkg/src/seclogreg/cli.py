"""Command-line front end.

    seclogreg partition data.csv --scheme horizontal --parties 2 --seed 1 --outdir parts/
    seclogreg fit --parties-dir parts/ --method protocol1 --config run.ini --out fit.txt
    seclogreg bounds --dkw 0.05 0.05
    seclogreg compare --csv data.csv --methods exact_nr,hesslb_clear --out traces.csv
    seclogreg security-check --parties-dir parts/ --method protocol2

Exit codes: 0 ok, 2 non-convergence, 3 input or validation error,
4 security-check failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace

import numpy as np

from . import analysis
from .config import ConfigError, RunConfig
from .data import (DataError, Dataset, bin_ages, combine, load_csv, partition, read_party_files,
                   write_party_files)
from .matinv import ConvergenceError
from .network import MessageBus
from .outputs import FitOutput
from .ring import RingOverflowError

EXIT_OK, EXIT_NONCONVERGENCE, EXIT_INPUT, EXIT_SECURITY = 0, 2, 3, 4


class InputError(Exception):
    pass


# -- inputs ------------------------------------------------------------------

def _schema(path, target, categorical, ignore):
    with open(path, newline="") as fh:
        header = [h.strip() for h in next(csv.reader(fh), [])]
    if not header:
        raise DataError(f"{path}: empty file")
    target = target or header[-1]
    cats = set(categorical)
    schema = {}
    for c in header:
        if c in ignore:
            continue
        schema[c] = "target" if c == target else ("categorical" if c in cats else "numeric")
    if target not in schema:
        raise DataError(f"{path}: target column {target!r} not found")
    return schema


def _split_list(text):
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def _load_clear(args) -> Dataset:
    schema = _schema(args.csv, args.target, _split_list(args.categorical), _split_list(args.ignore))
    ds = load_csv(args.csv, schema)
    if getattr(args, "age_column", None):
        ds = bin_ages(ds, args.age_column, drop_first=True)  # the intercept is always present
    return ds


def _party_inputs(args, cfg: RunConfig):
    """(party inputs, config adjusted to the inputs)."""
    if args.parties_dir:
        inputs, info = read_party_files(args.parties_dir)
        cfg = replace(cfg, modulus_bits=int(info["modulus_bits"]), frac_bits=int(info["frac_bits"]),
                      parties=len(inputs), scheme=info.get("scheme", cfg.scheme))
        return inputs, cfg
    if args.csv:
        ds = _load_clear(args)
        rng = np.random.default_rng(cfg.partition_seed)
        return partition(ds, cfg.scheme, cfg.parties, rng, cfg.codec), cfg
    raise InputError("give either --csv or --parties-dir")


def _config(args, **extra) -> RunConfig:
    over = {k: getattr(args, k, None) for k in ("method", "mode", "seed", "L", "k", "eps_conv",
                                                 "b_threshold", "hessian_mode", "max_outer")}
    over.update(extra)
    return RunConfig.load(args.config, **over)


# -- fitting -----------------------------------------------------------------

def run_fit(cfg: RunConfig, inputs):
    """FitOutput plus trace log-likelihoods (empty in strict mode)."""
    if cfg.method in ("exact_nr", "hesslb_clear"):
        # always the fixed-point sum, so --csv and --parties-dir agree exactly
        ds = combine(inputs)
        if cfg.method == "exact_nr":
            fit = analysis.exact_newton_raphson(ds.X, ds.y, eps=cfg.clear_eps, max_iter=cfg.clear_max_iter)
        else:
            fit = analysis.hessian_lb_clear(ds.X, ds.y, eps=cfg.clear_eps, max_iter=cfg.clear_max_iter)
        out = FitOutput(fit.beta, fit.iterations, fit.inversion_iterations or 0)
        return out, list(fit.loglik)
    bus = MessageBus(len(inputs), seed=cfg.seed)
    if cfg.method == "protocol1":
        from .protocol1 import fit_protocol1
        out = fit_protocol1(inputs, cfg.protocol1(), bus)
    else:
        from .protocol2 import fit_protocol2
        out = fit_protocol2(inputs, cfg.protocol2(), bus)
    return out, (list(out.trace.loglik) if out.trace is not None else [])


def cmd_partition(args):
    cfg = _config(args)
    ds = _load_clear(args)
    scheme = args.scheme or cfg.scheme
    P = args.parties or cfg.parties
    seed = args.seed if args.seed is not None else cfg.partition_seed
    inputs = partition(ds, scheme, P, np.random.default_rng(seed), cfg.codec)
    paths = write_party_files(inputs, args.outdir, scheme, seed, ds.column_names)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_fit(args):
    cfg = _config(args)
    inputs, cfg = _party_inputs(args, cfg)
    out, loglik = run_fit(cfg, inputs)
    text = out.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.trace:
        if cfg.mode == "strict":
            raise InputError("strict mode emits no trace")
        with open(args.trace, "w") as fh:
            fh.write("iteration,loglik\n")
            fh.writelines(f"{i},{v!r}\n" for i, v in enumerate(loglik))
    return EXIT_OK


def cmd_bounds(args):
    lines = []
    if args.dkw:
        eps, alpha = args.dkw
        lines.append(f"L={analysis.dkw_sample_size(eps, alpha)}")
    if args.param:
        R, L, eps, lam = args.param
        lines.append(f"bound={analysis.param_error_bound(R, L, eps, lam)!r}")
    if args.euler:
        lines.append(f"bound={analysis.euler_error_bound(args.euler[0])!r}")
    if args.choose_k:
        n, tau = args.choose_k
        lines.append(f"k={analysis.choose_k(int(n), tau)}")
    if not lines:
        raise InputError("choose one of --dkw, --param, --euler, --choose-k")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def compare_rows(cfg: RunConfig, inputs, methods, repeats=1, L_values=(), k_values=()):
    """Long-format trace rows (method, run, iteration, loglik) and failure notes."""
    rows, failures = [], []
    cfg = replace(cfg, mode="trace")
    jobs = []
    for m in methods:
        if m == "protocol1":
            for L in (L_values or [cfg.L]):
                label = f"protocol1_L{L}" if len(L_values) > 1 else "protocol1"
                jobs += [(label, r, replace(cfg, method=m, L=L, seed=cfg.seed + r)) for r in range(repeats)]
        elif m == "protocol2":
            for k in (k_values or [cfg.k]):
                label = f"protocol2_k{k}" if len(k_values) > 1 else "protocol2"
                jobs.append((label, 0, replace(cfg, method=m, k=k)))
        else:
            jobs.append((m, 0, replace(cfg, method=m)))
    for label, run, c in jobs:
        try:
            _, loglik = run_fit(c, inputs)
        except (ConvergenceError, ValueError, RingOverflowError) as exc:
            failures.append(f"{label} run {run}: {type(exc).__name__}: {exc}")
            continue
        rows += [(label, run, i, v) for i, v in enumerate(loglik)]
    return rows, failures


def cmd_compare(args):
    cfg = _config(args, mode="trace")
    inputs, cfg = _party_inputs(args, cfg)
    methods = _split_list(args.methods)
    bad = [m for m in methods if m not in ("exact_nr", "hesslb_clear", "protocol1", "protocol2")]
    if bad or not methods:
        raise InputError(f"unknown methods {bad}")
    rows, failures = compare_rows(cfg, inputs, methods, args.repeats,
                                  [int(v) for v in _split_list(args.L_values)],
                                  [int(v) for v in _split_list(args.k_values)])
    buf = io.StringIO()
    buf.write("method,run,iteration,loglik\n")
    buf.writelines(f"{m},{r},{i},{v!r}\n" for m, r, i, v in rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    for note in failures:
        print(f"failed: {note}", file=sys.stderr)
    return EXIT_NONCONVERGENCE if failures else EXIT_OK


def cmd_security_check(args):
    from .security import run_security_check

    cfg = _config(args, mode="trace")
    if cfg.method not in ("protocol1", "protocol2"):
        raise InputError("security-check needs method protocol1 or protocol2")
    inputs, cfg = _party_inputs(args, cfg)
    pcfg = cfg.protocol1() if cfg.method == "protocol1" else cfg.protocol2()
    report = run_security_check(inputs, cfg.method, pcfg, alpha=args.alpha)
    text = report.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_SECURITY


# -- parser ------------------------------------------------------------------

def _data_args(p, need_csv_only=False):
    if not need_csv_only:
        p.add_argument("--parties-dir", help="directory written by 'partition'")
    p.add_argument("--csv", help="clear CSV (partitioned in memory per the config)")
    p.add_argument("--target", help="target column (default: last column)")
    p.add_argument("--categorical", help="comma-separated categorical columns")
    p.add_argument("--ignore", help="comma-separated columns to drop")
    p.add_argument("--age-column", help="replace this column by age-bin indicators")


def _run_args(p):
    p.add_argument("--config", help="INI run config (default: $SECLOGREG_CONFIG)")
    p.add_argument("--method", choices=["exact_nr", "hesslb_clear", "protocol1", "protocol2"])
    p.add_argument("--mode", choices=["strict", "trace"])
    p.add_argument("--seed", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--eps-conv", dest="eps_conv", type=float)
    p.add_argument("--b-threshold", dest="b_threshold", type=float)
    p.add_argument("--hessian-mode", dest="hessian_mode", choices=["hessian_lb", "full_newton"])
    p.add_argument("--max-outer", dest="max_outer", type=int)


def build_parser():
    ap = argparse.ArgumentParser(prog="seclogreg", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="split a clear CSV into party files")
    p.add_argument("csv")
    p.add_argument("--scheme", choices=["horizontal", "vertical", "additive_random"])
    p.add_argument("--parties", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--outdir", required=True)
    p.add_argument("--config")
    p.add_argument("--target")
    p.add_argument("--categorical")
    p.add_argument("--ignore")
    p.add_argument("--age-column")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("fit", help="fit and write the output triple")
    _data_args(p)
    _run_args(p)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--trace", help="per-iteration log-likelihood CSV (trace mode only)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bounds", help="error-bound calculators")
    p.add_argument("--dkw", nargs=2, type=float, metavar=("EPS", "ALPHA"))
    p.add_argument("--param", nargs=4, type=float, metavar=("R", "L", "EPS", "LAMBDA"))
    p.add_argument("--euler", nargs=1, type=float, metavar="TAU")
    p.add_argument("--choose-k", dest="choose_k", nargs=2, type=float, metavar=("N", "TAU"))
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("compare", help="log-likelihood traces of several methods")
    _data_args(p)
    _run_args(p)
    p.add_argument("--methods", required=True, help="comma-separated methods")
    p.add_argument("--repeats", type=int, default=1, help="protocol1 replications (seeds seed..seed+R-1)")
    p.add_argument("--L-values", dest="L_values", help="comma-separated L list for protocol1")
    p.add_argument("--k-values", dest="k_values", help="comma-separated k list for protocol2")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("security-check", help="real vs simulated views")
    _data_args(p)
    _run_args(p)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--out")
    p.set_defaults(func=cmd_security_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (InputError, ConfigError, DataError, RingOverflowError, OSError, ValueError,
            np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
