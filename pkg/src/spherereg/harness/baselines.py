"""Comparison baselines without certificates: RANSAC for outliers and an
ICP-style solve/assign alternation for unknown matchings."""
from __future__ import annotations

import time

import numpy as np

from .. import cost as _cost
from ..matching import MatchResult, cost_matrix, hungarian
from ..solver import SolveResult, solve


def ransac_baseline(instance, p=1.0, iterations=100, inlier_threshold=None, seed=0, report_spec=None):
    """Best consensus model over random ``d``-row samples, refit on its inliers.

    Each sample is solved exactly with the candidate solver.  Without an
    explicit threshold a row is an inlier when its residual is at most 2.5
    times the sample model's median residual.  The returned cost is
    ``report_spec`` (default plain l_p) on the whole instance.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    n, d = instance.n, instance.d
    fit = _cost.lp(p)
    best = None
    for _ in range(iterations):
        idx = np.sort(rng.choice(n, size=min(d, n), replace=False))
        sub = instance.subset(idx)
        if not np.any(sub.A):
            continue
        x = solve(sub, fit).x
        r = instance.residuals(x)
        thr = 2.5 * float(np.median(r)) if inlier_threshold is None else inlier_threshold
        inl = np.flatnonzero(r <= thr)
        score = (inl.size, -float(np.sum(r[inl] ** p)))
        if best is None or score > best[0]:
            best = (score, inl, x)
    if best is None:
        raise ValueError("no usable sample")
    _, inl, x = best
    if inl.size >= max(d - 1, 1):
        sub = instance.subset(inl)
        if np.any(sub.A):
            x = solve(sub, fit).x
    spec = fit if report_spec is None else report_spec
    return SolveResult(
        x=x,
        cost=_cost.evaluate(spec, instance, x),
        certified_factor=float("nan"),
        generating_indices=tuple(int(i) for i in inl),
        candidates_evaluated=iterations,
        elapsed=time.perf_counter() - t0,
        spec=spec,
    )


def icp_baseline(instance, spec=None, iterations=20):
    """Alternate a solve on the current pairing with an optimal re-assignment."""
    spec = _cost.lp(1.0) if spec is None else spec
    t0 = time.perf_counter()
    perm = np.arange(instance.n)
    x = solve(instance, spec).x
    steps = 0
    for steps in range(1, iterations + 1):
        new = hungarian(cost_matrix(spec, instance, x))
        if np.array_equal(new, perm) and steps > 1:
            break
        perm = new
        x = solve(instance.permuted(perm), spec).x
    Z = cost_matrix(spec, instance, x)
    perm = hungarian(Z)
    return MatchResult(
        x=x,
        matching=perm,
        cost=_cost.evaluate(spec, instance.permuted(perm), x),
        certified_factor=float("nan"),
        rows=(),
        labels=(),
        candidates_evaluated=steps,
        assignments_solved=steps + 1,
        elapsed=time.perf_counter() - t0,
    )
