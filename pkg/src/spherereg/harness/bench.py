"""Reproducible cost/time tables for the basic, outlier and matching experiments."""
from __future__ import annotations

import csv
import time

import numpy as np

from .. import cost as _cost
from ..matching import match_solve
from ..solver import solve
from .baselines import icp_baseline, ransac_baseline
from .generate import GeneratorConfig, generate

OUTLIER_FRACTIONS = tuple(round(0.05 * k, 2) for k in range(10))


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def basic_suite(seed=0, sizes=(10, 20, 40), dims=(2, 3), p=1.0, workers=1):
    """Unplanted uniform data, plain l_p."""
    rows = []
    spec = _cost.lp(p)
    for d in dims:
        for n in sizes:
            inst = generate(GeneratorConfig(n, d, planted=False, seed=seed)).instance
            res, sec = _timed(solve, inst, spec, workers=workers)
            rows.append(dict(n=n, d=d, method="candidates", cost=res.cost, seconds=sec))
            rr, sec = _timed(ransac_baseline, inst, p, iterations=50, seed=seed)
            rows.append(dict(n=n, d=d, method="ransac", cost=rr.cost, seconds=sec))
    return rows


def outlier_trial(k, seed=0, n=80, d=3, sigma=30.0, magnitude=20000.0, trim=0.25):
    cfg = GeneratorConfig(n, d, noise_sigma=sigma, outlier_fraction=k, outlier_magnitude=magnitude, seed=seed)
    inst = generate(cfg).instance
    return inst, _cost.trimmed(1.0, int(np.floor(trim * n)))


def outlier_suite(seed=0, fractions=OUTLIER_FRACTIONS, n=80, d=3, workers=1, ransac_iterations=100):
    """Trimmed-l_1 objective over 75% of the rows, planted truth, growing outlier fraction."""
    rows = []
    for k in fractions:
        inst, spec = outlier_trial(k, seed, n, d)
        res, sec = _timed(solve, inst, spec, workers=workers)
        rows.append(dict(k=k, method="candidates", cost=res.cost, seconds=sec))
        rr, sec = _timed(ransac_baseline, inst, 1.0, ransac_iterations, 200.0, seed, report_spec=spec)
        rows.append(dict(k=k, method="ransac", cost=rr.cost, seconds=sec))
    return rows


def matching_suite(seed=0, sizes=(4, 6, 8), d=3, sigma=10.0, workers=1):
    """Shuffled planted rows with small noise, l_1 over vectors and matchings."""
    rows = []
    for n in sizes:
        inst = generate(GeneratorConfig(n, d, noise_sigma=sigma, shuffle=True, seed=seed)).instance
        res, sec = _timed(match_solve, inst, workers=workers)
        rows.append(dict(n=n, method="match", cost=res.cost, seconds=sec))
        rr, sec = _timed(icp_baseline, inst)
        rows.append(dict(n=n, method="icp", cost=rr.cost, seconds=sec))
    return rows


SUITES = {"basic": basic_suite, "outliers": outlier_suite, "matching": matching_suite}


def write_table(rows, fh, with_time=True):
    if not rows:
        return
    cols = [c for c in rows[0] if with_time or c != "seconds"]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])
