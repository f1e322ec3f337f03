"""Acceptance criteria, one test per criterion.

Each ``criterion_N(workers)`` returns ``(passed, detail, fingerprint)``; the
fingerprint hashes every solver-side output so the determinism criterion can
replay the others with a different worker count.  A one-line PASS/FAIL
summary per criterion is printed at the end of the pytest run (and by
``python tests/test_acceptance.py``).
"""
import hashlib
import itertools
import math
import sys
import time

import numpy as np
import pytest

from spherereg import cost
from spherereg.candidates import calc_x_candidates
from spherereg.coreset import build_coreset, cost_ratios, sample_size
from spherereg.cost import Agg, Lip, check_log_lipschitz
from spherereg.geometry import TAU, sphere_grid
from spherereg.harness import bench
from spherereg.harness.generate import GeneratorConfig, generate
from spherereg.harness.oracle import grid_oracle, joint_grid_oracle
from spherereg.instance import RegressionInstance
from spherereg.matching import assignment_cost, brute_force_assignment, hungarian, match_solve
from spherereg.solver import solve

LINES = []
_CACHE = {}


class _Hash:
    def __init__(self):
        self.h = hashlib.sha256()

    def add(self, *items):
        for it in items:
            if isinstance(it, np.ndarray):
                self.h.update(np.ascontiguousarray(it).tobytes())
            else:
                self.h.update(repr(it).encode())

    def hexdigest(self):
        return self.h.hexdigest()[:16]


def _mixed_instance(seed, n, d):
    """Half the instances are planted noisy U(200) data, half signed Gaussian data."""
    rng = np.random.default_rng(seed)
    if seed % 2:
        return generate(GeneratorConfig(n, d, noise_sigma=30.0, seed=seed)).instance
    A = rng.normal(size=(n, d)) * rng.uniform(0.2, 3.0, (n, 1))
    return RegressionInstance(A, rng.normal(size=n) * rng.uniform(0.1, 2.0))


# 1. pairwise per-row guarantee of the candidate set
def criterion_1(workers=1):
    fp, worst, t0 = _Hash(), 0.0, time.perf_counter()
    probes = {d: sphere_grid(d, 500).points for d in (2, 3)}
    for k in range(50):
        d = 2 if k < 25 else 3
        rng = np.random.default_rng(100 + k)
        n = int(rng.integers(d, 21 if d == 2 else 13))
        inst = _mixed_instance(100 + k, n, d)
        cs = calc_x_candidates(inst, workers=workers)
        fp.add(cs.vectors, cs.stacks)
        Rc, Rp = inst.residuals(cs.vectors), inst.residuals(probes[d])
        per_probe = ((Rc[None] + TAU) / (Rp[:, None] + TAU)).max(axis=2).min(axis=1)
        worst = max(worst, per_probe.max() / 4 ** (d - 1))
    sec = time.perf_counter() - t0
    return worst <= 1.0, f"worst factor / 4^(d-1) = {worst:.3f} over 50 instances x 500 probes ({sec:.1f}s)", fp.hexdigest()


# 2. cost guarantee against the grid oracle
def _presets(inst):
    T = float(np.median(np.abs(inst.b))) / 2 + 1e-3
    return {
        "l1": cost.lp(1.0),
        "l2": cost.lp(2.0),
        "l2sq": cost.lp_power(2.0),
        "huber": cost.huber(T),
        "trimmed_l1": cost.trimmed(1.0, inst.n // 4),
    }


def criterion_2(workers=1, oracle=True):
    fp, worst, bad, t0 = _Hash(), {}, [], time.perf_counter()
    grids = {2: sphere_grid(2, 100_000), 3: sphere_grid(3, 100_000)} if oracle else {}
    for k in range(100):
        d = 2 + k % 2
        rng = np.random.default_rng(2000 + k)
        n = int(rng.integers(d + 2, 21 if d == 2 else 13))
        inst = _mixed_instance(2000 + k, n, d)
        cs = calc_x_candidates(inst, workers=workers)
        for name, spec in _presets(inst).items():
            res = solve(inst, spec, workers=workers, candidates=cs)
            fp.add(name, res.x, res.cost)
            if not oracle:
                continue
            rep = grid_oracle(inst, spec, grid=grids[d], solver_cost=res.cost)
            if not (res.cost <= res.certified_factor * rep.oracle_minimum + rep.slack) or res.cost < rep.lower_bound - TAU:
                bad.append((k, name))
            worst[name] = max(worst.get(name, 0.0), rep.ratio / res.certified_factor)
    sec = time.perf_counter() - t0
    detail = ", ".join(f"{k}:{v:.3f}" for k, v in worst.items())
    return not bad, f"violations={len(bad)}; worst ratio/factor {detail} ({sec:.1f}s)", fp.hexdigest()


# 3. noiseless exact recovery (plain and shuffled)
def criterion_3(workers=1):
    fp, worst_cost, worst_x, t0 = _Hash(), 0.0, 0.0, time.perf_counter()
    for seed in range(5):
        g = generate(GeneratorConfig(40, 3, seed=300 + seed))
        res = solve(g.instance, cost.lp(1.0), workers=workers)
        fp.add(res.x, res.cost)
        worst_cost = max(worst_cost, res.cost)
    for seed in range(3):
        g = generate(GeneratorConfig(12, 3, shuffle=True, seed=400 + seed))
        res = match_solve(g.instance, workers=workers)
        fp.add(res.x, res.cost, res.matching)
        worst_cost = max(worst_cost, res.cost)
        worst_x = max(worst_x, min(np.linalg.norm(res.x - g.x_true), np.linalg.norm(res.x + g.x_true)))
    sec = time.perf_counter() - t0
    ok = worst_cost <= 1e-9 and worst_x <= 1e-6
    return ok, f"max cost {worst_cost:.2e} (<= 1e-9), max |x - (+/-)x*| {worst_x:.2e} (<= 1e-6) ({sec:.1f}s)", fp.hexdigest()


# 4. unknown matching against the exhaustive joint oracle
def criterion_4(workers=1, oracle=True):
    fp, worst, bad, t0 = _Hash(), 0.0, 0, time.perf_counter()
    grid = sphere_grid(2, 100_000) if oracle else None
    for k in range(20):
        inst = _mixed_instance(500 + k, 5, 2)
        res = match_solve(inst, workers=workers)
        fp.add(res.x, res.cost, res.matching)
        if not oracle:
            continue
        rep = joint_grid_oracle(inst, cost.lp(1.0), grid=grid, solver_cost=res.cost)
        bad += not (res.cost <= 4 * rep.oracle_minimum + rep.slack and res.cost >= rep.lower_bound - TAU)
        worst = max(worst, rep.ratio)
    sec = time.perf_counter() - t0
    return bad == 0, f"violations={bad}; worst ratio {worst:.3f} (<= 4) over 20 instances ({sec:.1f}s)", fp.hexdigest()


# 5. assignment exactness
def criterion_5(workers=1):
    fp, bad, t0 = _Hash(), 0, time.perf_counter()
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        C = rng.integers(0, 20, (n, n)).astype(float)
        perm = hungarian(C)
        _, best = brute_force_assignment(C)
        fp.add(perm)
        bad += assignment_cost(C, perm) != best
    sec = time.perf_counter() - t0
    return bad == 0, f"{200 - bad}/200 integer matrices match brute force exactly ({sec:.1f}s)", fp.hexdigest()


# 6. coreset relative-error property and sparsity
C6 = dict(n=2000, d=3, z=2.0, eps=0.2, delta=0.1, builds=20, probes=500, need=18)


def criterion_6(workers=1):
    fp, t0 = _Hash(), time.perf_counter()
    inst = generate(GeneratorConfig(C6["n"], C6["d"], noise_sigma=30.0, seed=6)).instance
    rng = np.random.default_rng(60)
    good, sparse_ok, worst = 0, True, 0.0
    for b in range(C6["builds"]):
        cs = build_coreset(inst, C6["z"], C6["eps"], C6["delta"], seed=1000 + b)
        fp.add(cs.ids, cs.weights)
        X = rng.normal(size=(C6["probes"], 3))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        dev = float(np.abs(cost_ratios(cs, inst, X) - 1.0).max())
        worst = max(worst, dev)
        good += dev <= C6["eps"]
        bound = sample_size(cs.total_sensitivity, C6["eps"], C6["delta"], 1.0, C6["d"] + 2)
        sparse_ok &= cs.nnz <= bound
    sec = time.perf_counter() - t0
    ok = good >= C6["need"] and sparse_ok
    return ok, (f"{good}/20 builds inside [0.8, 1.2] on all probes (need >= 18), worst |ratio-1| {worst:.3f}, "
                f"sparsity ok={sparse_ok} ({sec:.1f}s)"), fp.hexdigest()


# 7. solving on the coreset
def criterion_7(workers=1):
    fp, t0 = _Hash(), time.perf_counter()
    eps, spec = 0.2, cost.lp_power(2.0)
    worst_full, worst_core, trials = 0.0, 0.0, 0
    for data_seed in range(4):
        inst = generate(GeneratorConfig(2000, 3, noise_sigma=30.0, seed=70 + data_seed)).instance
        full = solve(inst, spec, workers=workers)
        fp.add(full.x, full.cost)
        for b in range(5):
            cs = build_coreset(inst, 2.0, eps, 0.1, seed=7000 + 10 * data_seed + b)
            res = solve(cs.to_instance(), spec, workers=workers)
            fp.add(res.x, res.cost)
            worst_full = max(worst_full, cost.evaluate(spec, inst, res.x) / full.cost)
            worst_core = max(worst_core, res.cost / full.cost)
            trials += 1
    sec = time.perf_counter() - t0
    ok = worst_full <= 1 + 3 * eps and worst_core <= 1 + 3 * eps
    return ok, (f"{trials} trials: full-data cost of coreset solution <= {worst_full:.4f} x full solve, "
                f"coreset objective <= {worst_core:.4f} x (limit {1 + 3 * eps:.1f}) ({sec:.1f}s)"), fp.hexdigest()


# 8. outlier robustness profile
def criterion_8(workers=1):
    fp, t0 = _Hash(), time.perf_counter()
    fractions = (0.0, 0.1, 0.2, 0.35)
    mean = {}
    for k in fractions:
        costs = []
        for seed in range(5):
            inst, spec = bench.outlier_trial(k, seed=800 + seed)
            res = solve(inst, spec, workers=workers)
            fp.add(res.x, res.cost)
            costs.append(res.cost)
        mean[k] = float(np.mean(costs))
    flat = max(mean[k] for k in (0.0, 0.1, 0.2)) / mean[0.0]
    jump = mean[0.35] / mean[0.0]
    sec = time.perf_counter() - t0
    ok = flat <= 3.0 and jump >= 5.0
    curve = ", ".join(f"k={k}:{v:.0f}" for k, v in mean.items())
    return ok, f"mean trimmed cost {curve}; plateau {flat:.2f}x (<= 3), jump {jump:.1f}x (>= 5) ({sec:.1f}s)", fp.hexdigest()


# 10. log-Lipschitz certification of the cost presets
def criterion_10(workers=1):
    fp = _Hash()
    lips = [(Lip(), 1.0), (Lip("huber_clip", 2.0), 1.0), (Lip("huber_clip", 50.0), 1.0)]
    lips += [(Lip("power", z), z) for z in (0.5, 1.0, 2.0, 3.5)]
    aggs = [(Agg("lp_norm", p), 1.0) for p in (0.5, 1.0, 2.0, 3.5)]
    aggs += [(Agg("lp_norm_trimmed", p, k), 1.0) for p, k in ((1.0, 1), (2.0, 3))] + [(Agg("sum"), 1.0)]
    passes = fails = 0
    for kind, r in lips + aggs:
        declared = check_log_lipschitz(kind, r)
        understated = check_log_lipschitz(kind, 0.8 * r)
        fp.add(declared, understated)
        passes += declared
        fails += not understated
    total = len(lips) + len(aggs)
    ok = passes == total and fails == total
    return ok, f"{passes}/{total} pass with declared constants, {fails}/{total} rejected at 0.8x", fp.hexdigest()


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 10: criterion_10}


def _result(n):
    if n not in _CACHE:
        _CACHE[n] = CRITERIA[n](1)
    return _CACHE[n]


# 9. determinism across worker counts and repeated runs
def criterion_9(workers=4):
    t0 = time.perf_counter()
    diffs = []
    for n, fn in CRITERIA.items():
        base = _result(n)[2]
        kw = {"oracle": False} if n in (2, 4) else {}
        if fn(workers, **kw)[2] != base:
            diffs.append(n)
    sec = time.perf_counter() - t0
    return not diffs, f"outputs differing between 1 and {workers} workers: {diffs or 'none'} ({sec:.1f}s)", ""


def _check(n):
    ok, detail, _ = criterion_9() if n == 9 else _result(n)
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
    assert ok, line


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 7, 8, 9, 10])
def test_criterion(n):
    _check(n)


if __name__ == "__main__":
    failed = 0
    for n in range(1, 11):
        try:
            _check(n)
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
