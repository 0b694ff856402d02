"""Command-line front end.

    campanato generate --kind power_cusp --beta 0.5 --out f.csv
    campanato compute seminorm --input f.csv --p 1 --lam 1 --variant barred
    campanato suite --config suite.json

Exit codes: 0 all checks pass, 1 some check failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import czd, maximal, seminorms, weights
from .checks import REGISTRY, SuiteConfig, emit_report, run_suite
from .generators import KINDS, generate
from .grid import Domain, GridError, enumerate_cubes, make_cube
from .io import emit, ingest

OUTPUT_ENV = "CAMPANATO_OUTPUT_DIR"
POLICIES = ("auto", "anchored", "dyadic", "dyadic_shifted")


class UsageError(Exception):
    pass


def _domain_args(p: argparse.ArgumentParser):
    p.add_argument("--dimension", type=int, default=1)
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--side", type=float, default=1.0)


def _source_args(p: argparse.ArgumentParser):
    p.add_argument("--input", help="GridFunction file (csv or json)")
    p.add_argument("--kind", choices=KINDS, help="synthesize instead of reading --input")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta", type=float, default=0.5, help="power_cusp exponent")
    _domain_args(p)
    p.add_argument("--policy", choices=POLICIES, default="auto")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="campanato", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a canonical sampled function")
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--beta", type=float)
    g.add_argument("--c", type=float)
    g.add_argument("--sigma", type=float)
    g.add_argument("--sign", type=float)
    g.add_argument("--shift", type=float)
    _domain_args(g)

    c = sub.add_parser("compute", help="evaluate one quantity and print JSON")
    csub = c.add_subparsers(dest="quantity", required=True)

    s = csub.add_parser("seminorm")
    _source_args(s)
    s.add_argument("--p", type=float, default=1.0)
    s.add_argument("--lam", type=float, default=1.0)
    s.add_argument("--variant", choices=seminorms.KINDS, default="barred")
    s.add_argument("--normalization", choices=seminorms.NORMALIZATIONS, default="volume")

    m = csub.add_parser("maximal")
    _source_args(m)
    m.add_argument("--alpha", type=float, default=0.0)
    m.add_argument("--out", help="write the maximal function here")

    z = csub.add_parser("czd")
    _source_args(z)
    z.add_argument("--p", type=float, default=1.0)
    z.add_argument("--tau", type=float, default=czd.DEFAULT_TAU)
    z.add_argument("--depth", type=int, default=4)
    z.add_argument("--profile-out", help="write the decay profile as CSV")

    w = csub.add_parser("weight")
    _source_args(w)
    w.add_argument("--class", dest="weight_class", default="A2", help="A1, A2, Ap:<p> or Apq:<p>,<q>")
    w.add_argument("--rh-constant", type=float, default=1.0)

    u = sub.add_parser("suite", help="run registered checks and emit a report")
    u.add_argument("--config", help="JSON SuiteConfig file")
    u.add_argument("--checks", nargs="*", help=f"override check tags; known: {', '.join(REGISTRY)}")
    u.add_argument("--sizes", nargs="*", type=int)
    u.add_argument("--policy", choices=POLICIES)
    u.add_argument("--seed", type=int)
    u.add_argument("--samples", type=int)
    u.add_argument("--tolerance", type=float)
    u.add_argument("--output-dir")
    u.add_argument("--format", choices=("json", "csv"), default="json")
    u.add_argument("--timings", action="store_true", help="include runtimes (breaks byte-identical reports)")
    return ap


def _source(args):
    if args.input:
        return ingest(args.input)
    if not args.kind:
        raise UsageError("need --input or --kind")
    dom = Domain(args.dimension, args.side, args.resolution)
    extra = {"beta": args.beta} if args.kind == "power_cusp" else {}
    return generate(args.kind, dom, seed=args.seed, **extra)


def _family(f, policy):
    return SuiteConfig(policy=policy).family(f.domain)


def _whole(f):
    return make_cube(f.domain, (0,) * f.domain.n, f.domain.shape)


def cmd_generate(args) -> int:
    dom = Domain(args.dimension, args.side, args.resolution)
    params = {k: getattr(args, k) for k in ("beta", "c", "sigma", "sign", "shift") if getattr(args, k) is not None}
    emit(generate(args.kind, dom, seed=args.seed, **params), args.out)
    return 0


def cmd_compute(args) -> dict:
    f = _source(args)
    if args.quantity == "seminorm":
        spec = seminorms.SeminormSpec(args.p, args.lam, args.variant, args.normalization)
        return seminorms.seminorm(f, spec, _family(f, args.policy)).as_dict()
    if args.quantity == "maximal":
        mf = maximal.global_maximal(f, _family(f, args.policy), args.alpha)
        if args.out:
            emit(mf, args.out)
        return {"alpha": args.alpha, "sup": float(mf.samples.max()), "mean": float(mf.samples.mean())}
    if args.quantity == "czd":
        q0 = _whole(f)
        gens = czd.jn_generations(f, q0, args.p, args.tau, args.depth)
        out = {"scale": gens.scale, "measures": [g.measure for g in gens.generations],
               "counts": [len(g.cubes) for g in gens.generations]}
        if not gens.degenerate:
            out["invariants"] = gens.check()
            ref = np.abs(f.samples).mean()
            prof = czd.distribution(f - ref, q0)
            if args.profile_out:
                Path(args.profile_out).write_text(prof.to_csv())
            try:
                out["fit"] = czd.fit_exponential_decay(prof).as_dict()
            except czd.DecayFitError as exc:
                out["fit"] = {"error": str(exc)}
        return out
    w = weights.Weight.of(f)
    fam = _family(f, args.policy)
    cls = weights.WeightClass.parse(args.weight_class)
    rep = weights.muckenhoupt_constant(w, cls, fam).as_dict()
    rep["reverse_holder_q"] = weights.reverse_holder_exponent(w, fam, args.rh_constant)
    return rep


def _suite_config(args) -> SuiteConfig:
    cfg = SuiteConfig.from_file(args.config) if args.config else SuiteConfig(checks=list(REGISTRY))
    for name in ("checks", "sizes", "policy", "seed", "samples", "tolerance"):
        v = getattr(args, name)
        if v is not None:
            setattr(cfg, name, v)
    if args.output_dir:
        cfg.output_dir = args.output_dir
    if os.environ.get(OUTPUT_ENV):
        cfg.output_dir = os.environ[OUTPUT_ENV]
    return cfg


def cmd_suite(args) -> int:
    cfg = _suite_config(args)
    results = run_suite(cfg)
    path = emit_report(results, Path(cfg.output_dir) / f"report.{args.format}", args.format, args.timings)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.tag}")
    print(f"report: {path}")
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "suite":
            return cmd_suite(args)
        print(json.dumps(cmd_compute(args), indent=2))
        return 0
    except (UsageError, GridError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
