"""Command line interface: ``spherereg <command> ...``.

Exit codes: 0 success, 2 usage error, 3 data error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from .. import coreset as _coreset
from .. import cost as _cost
from ..matching import match_solve
from ..solver import solve
from . import bench as _bench
from .generate import GeneratorConfig, generate
from .io import DataError, read_csv, write_csv
from .oracle import grid_oracle


class UsageError(Exception):
    pass


def _spec(args, additive=False):
    p = 1.0 if args.p is None else args.p
    if args.mestimator_T is not None:
        lip = _cost.Lip("huber_clip", args.mestimator_T)
    elif args.z is not None:
        lip = _cost.Lip("power", args.z)
    else:
        lip = _cost.Lip()
    trim = getattr(args, "trim_k", None) or 0
    if trim:
        agg = _cost.Agg("lp_norm_trimmed", p, trim)
    elif args.z is not None and args.p is None:
        agg = _cost.Agg("sum")
    else:
        agg = _cost.Agg("lp_norm", p)
    spec = _cost.CostSpec(lip, agg)
    if additive and not spec.agg.additive:
        raise UsageError("matching requires additive cost")
    return spec


def _read(args):
    inst = read_csv(args.input, header=args.header, weighted=args.weighted)
    try:
        inst.check_solvable()
    except ValueError as exc:
        raise DataError(str(exc)) from None
    return inst


def _vec(x):
    return ",".join(repr(float(v)) for v in x)


def cmd_gen(args):
    cfg = GeneratorConfig(
        n=args.n, d=args.d, entry_range=args.range, noise_sigma=args.sigma,
        outlier_fraction=args.outlier_fraction, outlier_magnitude=args.outlier_magnitude,
        shuffle=args.shuffle, planted=not args.unplanted, seed=args.seed,
    )
    g = generate(cfg)
    if args.out:
        write_csv(args.out, g.instance, header=args.header)
    else:
        write_csv(sys.stdout, g.instance, header=args.header)
    if args.truth:
        with open(args.truth, "w") as fh:
            x = _vec(g.x_true) if g.x_true is not None else "-"
            perm = ",".join(str(int(i)) for i in g.matching)
            out = ",".join(str(int(i)) for i in g.outliers) or "-"
            fh.write(f"x={x} perm={perm} outliers={out}\n")


def cmd_solve(args):
    inst = _read(args)
    res = solve(inst, _spec(args), workers=args.threads, dedup=args.dedup)
    print(f"{_spec(args).to_record()} {res.to_record()}")


def cmd_solve_outliers(args):
    inst = _read(args)
    if args.trim_k is None:
        raise UsageError("--trim-k is required")
    if not 0 <= args.trim_k < inst.n:
        raise UsageError("trim count exceeds rows")
    spec = _spec(args)
    res = solve(inst, spec, workers=args.threads, dedup=args.dedup)
    print(f"{spec.to_record()} {res.to_record()}")


def cmd_solve_match(args):
    inst = _read(args)
    spec = _spec(args, additive=True)
    res = match_solve(inst, spec, workers=args.threads)
    print(f"{spec.to_record()} {res.to_record()}")


def _coreset_params(args):
    z = 2.0 if args.z is None else args.z
    return dict(z=z, eps=args.eps, delta=args.delta, c=args.c)


def _row_range(text, n):
    if not text:
        return 0, n
    try:
        lo, hi = (int(v) if v else d for v, d in zip(text.split(":"), (0, n)))
    except ValueError:
        raise UsageError(f"bad --rows {text!r}, expected START:STOP") from None
    if not 0 <= lo < hi <= n:
        raise UsageError(f"--rows {text!r} outside 0:{n}")
    return lo, hi


def _core_record(cs):
    bound = _coreset.sample_size(cs.total_sensitivity, cs.eps, cs.delta, cs.c, cs.d_vc)
    meta = " ".join(f"{k}={v!r}" for k, v in cs.metadata().items())
    return f"{meta} bound={bound} within_bound={int(cs.nnz <= bound)}"


def cmd_coreset(args):
    inst = _read(args)
    if args.action == "build":
        lo, hi = _row_range(args.rows, inst.n)
        part = inst.subset(np.arange(lo, hi))
        if args.batches > 1:
            batches = [part.subset(idx) for idx in np.array_split(np.arange(part.n), args.batches)]
            cs = _coreset.merge_reduce_tree(batches, seed=args.seed, workers=args.threads, **_coreset_params(args))
            cs = replace(cs, ids=cs.ids + lo)
        else:
            cs = _coreset.build_coreset(part, seed=args.seed, ids=np.arange(lo, hi), **_coreset_params(args))
        if args.out:
            _coreset.save(cs, args.out)
        print(_core_record(cs))
    elif args.action == "merge":
        if len(args.cores) != 2:
            raise UsageError("merge needs exactly two coreset files")
        left, right = (_coreset.load(p, inst) for p in args.cores)
        params = _coreset_params(args) if args.z is not None else {}
        cs = _coreset.merge_reduce(left, right, seed=args.seed, **params)
        if args.out:
            _coreset.save(cs, args.out)
        print(_core_record(cs))
    else:
        if len(args.cores) != 1:
            raise UsageError("eval needs exactly one coreset file")
        cs = _coreset.load(args.cores[0], inst)
        rng = np.random.default_rng(args.seed)
        X = rng.normal(size=(args.probes, inst.d))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        r = _coreset.cost_ratios(cs, inst, X)
        inside = np.abs(r - 1.0) <= cs.eps_total
        spec = _cost.lp_power(cs.z)
        full = solve(inst, spec, workers=args.threads)
        comp = solve(cs.to_instance(), spec, workers=args.threads)
        print(
            f"probes={args.probes} min_ratio={float(r.min())!r} max_ratio={float(r.max())!r} "
            f"eps_total={cs.eps_total!r} inside={int(inside.sum())} "
            f"full_cost={full.cost!r} coreset_x_full_cost={_cost.evaluate(spec, inst, comp.x)!r}"
        )


def cmd_oracle(args):
    inst = _read(args)
    spec = _spec(args)
    res = solve(inst, spec, workers=args.threads)
    rep = grid_oracle(inst, spec, args.grid_resolution, solver_cost=res.cost)
    print(rep.to_record())


def cmd_bench(args):
    fn = _bench.SUITES[args.suite]
    rows = fn(seed=args.seed, workers=args.threads)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        _bench.write_table(rows, fh, with_time=not args.no_time)
    finally:
        if args.out:
            fh.close()


def _add_cost_flags(p, trim=True):
    p.add_argument("--p", type=float, default=None, help="l_p exponent of the aggregator (default 1)")
    p.add_argument("--z", type=float, default=None, help="power transform |r|^z; alone gives sum |r|^z")
    p.add_argument("--mestimator-T", dest="mestimator_T", type=float, default=None, help="clip residuals at T")
    if trim:
        p.add_argument("--trim-k", dest="trim_k", type=int, default=None, help="ignore the k largest residuals")


def _add_input(p):
    p.add_argument("input", help="CSV with d feature columns then the target")
    p.add_argument("--header", action="store_true", help="first CSV line is a header")
    p.add_argument("--weighted", action="store_true", help="last CSV column holds row weights")


def build_parser():
    ap = argparse.ArgumentParser(prog="spherereg", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker processes (never changes results)")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic instance as CSV", parents=[common])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--range", type=float, default=200.0)
    g.add_argument("--sigma", type=float, default=0.0)
    g.add_argument("--outlier-fraction", type=float, default=0.0)
    g.add_argument("--outlier-magnitude", type=float, default=20000.0)
    g.add_argument("--shuffle", action="store_true")
    g.add_argument("--unplanted", action="store_true", help="uniform targets instead of b = A x*")
    g.add_argument("--header", action="store_true")
    g.add_argument("--out", default=None)
    g.add_argument("--truth", default=None, help="write x*, matching and outlier rows here")
    g.set_defaults(func=cmd_gen)

    for name, func, trim in (("solve", cmd_solve, True), ("solve-outliers", cmd_solve_outliers, True),
                             ("solve-match", cmd_solve_match, False)):
        s = sub.add_parser(name, parents=[common])
        _add_input(s)
        _add_cost_flags(s, trim)
        s.add_argument("--dedup", action="store_true", help="drop coincident candidates before evaluation")
        s.set_defaults(func=func)

    c = sub.add_parser("coreset", help="build, merge or evaluate coresets", parents=[common])
    c.add_argument("action", choices=("build", "merge", "eval"))
    _add_input(c)
    c.add_argument("cores", nargs="*", help="coreset files (merge: two, eval: one)")
    c.add_argument("--z", type=float, default=None)
    c.add_argument("--eps", type=float, default=0.2)
    c.add_argument("--delta", type=float, default=0.1)
    c.add_argument("--c", type=float, default=1.0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--rows", default=None, help="build from rows START:STOP only (ids stay global)")
    c.add_argument("--batches", type=int, default=1, help="build through a merge-reduce tree")
    c.add_argument("--probes", type=int, default=500)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_coreset)

    o = sub.add_parser("oracle", help="compare the solver with a brute-force sphere grid", parents=[common])
    _add_input(o)
    _add_cost_flags(o)
    o.add_argument("--grid-resolution", type=int, default=100_000)
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", help="emit an experiment table as CSV", parents=[common])
    b.add_argument("--suite", choices=sorted(_bench.SUITES), required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--no-time", action="store_true", help="omit the seconds column")
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
