"""Command-line interface.

Every subcommand reads an optional JSON config (``--config``) and lets flags
override its fields; results go to stdout or ``--out``.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .dyadic import DyadicSet, content_upper, find_dense_cube, rescale
from .errors import FracpatError
from .integral import QuadraticPattern, decompose, positivity_certificate
from .pipeline import RunConfig, _build_measure, build_set, run_pipeline, sweep, write_bundle
from .fourier import spectrum
from .patterns import configuration_csv, configuration_set, search_pattern


def _set_args(ap):
    g = ap.add_argument_group("set")
    g.add_argument("--set-file", help="dyadic set JSON (from 'generate')")
    g.add_argument("--kind", choices=["full", "cantor", "percolation"])
    g.add_argument("--resolution", type=int)
    g.add_argument("--pattern", type=lambda s: [int(v) for v in s.split(",")],
                   help="comma-separated kept children, e.g. 0,3")
    g.add_argument("--branching", type=int)
    g.add_argument("--depth", type=int)
    g.add_argument("--prob", type=float, help="percolation keep probability")
    g.add_argument("--seed", type=int)


def _model_args(ap):
    g = ap.add_argument_group("model")
    g.add_argument("--A", type=float)
    g.add_argument("--B", type=float)
    g.add_argument("--T", type=int)
    g.add_argument("--beta", type=float)
    g.add_argument("--s", type=float)
    g.add_argument("--gamma", type=float)
    g.add_argument("--p", type=float)
    g.add_argument("--q", type=float)
    g.add_argument("--l", type=int)
    g.add_argument("--eps", type=float, nargs="+")
    g.add_argument("--measure", choices=["spectral_gap", "frostman", "uniform"])
    g.add_argument("--kappa", type=float)
    g.add_argument("--c-sie", dest="c_sie", type=float)


def _config(args) -> RunConfig:
    cfg = RunConfig.from_json(Path(args.config).read_text()) if args.config else RunConfig()
    spec = dict(cfg.set)
    if args.set_file:
        spec = {"kind": "dyadic", **json.loads(Path(args.set_file).read_text())}
    if args.kind:
        spec = {"kind": args.kind}
    for key, attr in (("resolution", "resolution"), ("pattern", "pattern"), ("branching", "branching"),
                      ("depth", "depth"), ("p", "prob"), ("seed", "seed")):
        v = getattr(args, attr, None)
        if v is not None:
            spec[key] = v
    over = {"set": spec}
    for name in ("A", "B", "T", "beta", "s", "gamma", "p", "q", "l", "eps", "measure", "kappa", "c_sie"):
        v = getattr(args, name, None)
        if v is not None:
            over[name] = v
    return replace(cfg, **over)


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _local_measure(cfg: RunConfig):
    cfg = cfg.validate()
    dset = build_set(cfg.set)
    cube = find_dense_cube(dset, cfg.beta, cfg.dense_delta)
    local = rescale(dset, cube)
    mu, rep = _build_measure(cfg, local)
    return cfg, local, mu, rep


def cmd_generate(args):
    dset = build_set(_config(args).set)
    _emit(dset.to_rle() if args.rle else dset.to_json(), args.out)


def cmd_content(args):
    cfg = _config(args).resolved()
    dset = build_set(cfg.set)
    out = {"resolution": dset.resolution, "beta": cfg.beta, "content": content_upper(dset, cfg.beta)}
    if args.delta is not None:
        q = find_dense_cube(dset, cfg.beta, args.delta)
        out["dense_cube"] = {"level": q.level, "index": q.index,
                             "content": content_upper(dset.restrict(q), cfg.beta)}
    _emit(json.dumps(out, indent=2), args.out)


def cmd_measure(args):
    cfg, local, mu, rep = _local_measure(_config(args))
    out = {"measure": mu.to_dict(), "construction": None if rep is None else rep.to_dict()}
    _emit(json.dumps(out, indent=2), args.out)


def cmd_spectrum(args):
    cfg, local, mu, rep = _local_measure(_config(args))
    _emit(spectrum(mu, args.max_freq, args.step).to_csv(), args.out)


def cmd_decompose(args):
    cfg, local, mu, rep = _local_measure(_config(args))
    pat = QuadraticPattern(cfg.p, cfg.q, cfg.l)
    r = decompose(mu, cfg.eps[0], cfg.A, cfg.B, pat, cfg.s, cfg.gamma, kappa=cfg.kappa, c_sie=cfg.c_sie)
    _emit(r.to_csv() if args.csv else r.to_json(), args.out)


def cmd_certify(args):
    cfg, local, mu, rep = _local_measure(_config(args))
    pat = QuadraticPattern(cfg.p, cfg.q, cfg.l)
    cert, _ = positivity_certificate(mu, cfg.A, cfg.B, pat, cfg.s, cfg.gamma, eps=cfg.eps,
                                     kappa=cfg.kappa, c_sie=cfg.c_sie)
    _emit(json.dumps(cert.to_dict(), indent=2), args.out)


def cmd_search(args):
    cfg = _config(args).resolved()
    pat = QuadraticPattern(cfg.p, cfg.q, cfg.l)
    if args.points:
        pts = [float(v) for v in args.points.split(",")]
        if args.config_set:
            _emit(configuration_csv(configuration_set(pts, cfg.q, not args.distinct)), args.out)
            return
        w = search_pattern(pts, pat, args.distinct)
    else:
        w = search_pattern(build_set(cfg.set), pat, args.distinct)
    _emit(json.dumps(None if w is None else w.to_dict(), indent=2), args.out)


def cmd_sweep(args):
    cfg = _config(args)
    conv = int if args.axis in ("seed", "l", "trilinear_l") else float
    values = [conv(v) for v in args.values.split(",")] if args.values else []
    _emit(sweep(cfg, args.axis, values), args.out)


def cmd_run(args):
    bundle = run_pipeline(_config(args))
    if args.out:
        write_bundle(bundle, args.out)
    summary = {"sha256": bundle["sha256"], "status": bundle["certificate"]["status"],
               "witness": bundle["witness"], "consistent": bundle["consistent"]}
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracpat", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_, model=True):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="RunConfig JSON")
        sp.add_argument("--out", help="output file (directory for 'run')")
        _set_args(sp)
        if model:
            _model_args(sp)
        else:
            sp.add_argument("--beta", type=float)
        sp.set_defaults(func=func)
        return sp

    sp = add("generate", cmd_generate, "emit a dyadic set as JSON", model=False)
    sp.add_argument("--rle", action="store_true", help="run-length text instead of JSON")
    sp = add("content", cmd_content, "dyadic Hausdorff content and dense cube", model=False)
    sp.add_argument("--delta", type=float)
    add("measure", cmd_measure, "build the measure on the rescaled dense cube")
    sp = add("spectrum", cmd_spectrum, "Fourier transform of the measure as CSV")
    sp.add_argument("--max-freq", type=float, default=64.0)
    sp.add_argument("--step", type=float, default=0.25)
    sp = add("decompose", cmd_decompose, "nine-term decomposition at the first eps")
    sp.add_argument("--csv", action="store_true", help="3x3 CSV ledger instead of JSON")
    add("certify", cmd_certify, "positivity certificate over the eps schedule")
    sp = add("search", cmd_search, "brute-force pattern search")
    sp.add_argument("--points", help="comma-separated point set instead of a dyadic set")
    sp.add_argument("--distinct", action="store_true", help="require three distinct points")
    sp.add_argument("--config-set", action="store_true",
                    help="print the configuration set of --points as CSV")
    sp = add("sweep", cmd_sweep, "CSV of results against one parameter")
    sp.add_argument("--axis", required=True)
    sp.add_argument("--values", default="", help="comma-separated values")
    add("run", cmd_run, "full pipeline; writes bundle.json and CSV tables to --out")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except FracpatError as exc:
        print(f"fracpat: error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # reader closed early (e.g. piped into head)
        sys.stderr.close()
        return 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
