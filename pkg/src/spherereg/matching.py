"""Regression with an unknown pairing between rows of ``A`` and entries of ``b``.

Candidates come from stacking subsets of rows against ordered subsets of
targets; each candidate is paired with its optimal assignment, and the best
(vector, assignment) pair is returned.  Only additive aggregators make the
per-candidate assignment exact, so other cost specs are rejected.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from . import cost as _cost
from ._parallel import ordered_map
from .candidates import CHUNK, _combinations, objective_rotations
from .geometry import TAU
from .optset import calc_opt_batch

BATCH = 512


def _check_square(cost_matrix):
    C = np.asarray(cost_matrix, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError("cost matrix must be square")
    if not np.all(np.isfinite(C)):
        raise ValueError("cost matrix must be finite")
    return C


def hungarian(cost_matrix):
    """Minimum-cost perfect assignment; ``perm[i]`` is the column given to row ``i``.

    Shortest augmenting paths with row/column potentials, O(n^3).
    """
    C = _check_square(cost_matrix)
    n = C.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64)
    inf = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)  # p[j]: row matched to column j (1-based, 0 = free)
    way = [0] * (n + 1)
    rows = C.tolist()
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            ci = rows[i0 - 1]
            ui = u[i0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = ci[j - 1] - ui - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    perm = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        perm[p[j] - 1] = j - 1
    return perm


def assignment_cost(cost_matrix, perm):
    C = np.asarray(cost_matrix, dtype=float)
    return float(np.sum(C[np.arange(C.shape[0]), perm]))


def brute_force_assignment(cost_matrix):
    """Lexicographically first optimal permutation by exhaustive search (small n only)."""
    C = _check_square(cost_matrix)
    n = C.shape[0]
    best, best_perm = float("inf"), None
    for perm in itertools.permutations(range(n)):
        total = sum(C[i, perm[i]] for i in range(n))
        if total < best:
            best, best_perm = total, perm
    return np.array(best_perm if best_perm is not None else (), dtype=np.int64), best


def lex_smallest_optimal(cost_matrix, tol=None):
    """Lexicographically smallest permutation whose cost is optimal (within ``tol``)."""
    C = _check_square(cost_matrix)
    n = C.shape[0]
    opt = assignment_cost(C, hungarian(C))
    tol = TAU * (1.0 + abs(opt)) if tol is None else tol
    perm = np.empty(n, dtype=np.int64)
    rows_left = list(range(n))
    cols_left = list(range(n))
    fixed = 0.0
    for i in range(n):
        rest = rows_left[1:]
        for j in cols_left:
            cols = [c for c in cols_left if c != j]
            sub = C[np.ix_(rest, cols)]
            tail = assignment_cost(sub, hungarian(sub)) if rest else 0.0
            if fixed + C[i, j] + tail <= opt + tol:
                perm[i] = j
                fixed += C[i, j]
                cols_left = cols
                break
        rows_left = rest
    return perm


@dataclass(frozen=True)
class MatchResult:
    x: np.ndarray
    matching: np.ndarray
    cost: float
    certified_factor: float
    rows: tuple
    labels: tuple
    candidates_evaluated: int
    assignments_solved: int
    elapsed: float

    def to_record(self):
        x = ",".join(repr(float(v)) for v in self.x)
        perm = ",".join(str(int(i)) for i in self.matching)
        return (
            f"cost={self.cost!r} factor={self.certified_factor!r} x={x} perm={perm} "
            f"candidates={self.candidates_evaluated} assignments={self.assignments_solved} "
            f"elapsed={self.elapsed:.6f}"
        )


def cost_matrix(spec, instance, x):
    """``Z[i, j] = w_i lip(|a_i^T x - b_j|)``."""
    R = np.abs((instance.A @ x)[:, None] - instance.b[None, :])
    return instance.weights[:, None] * spec.lip(R)


def _ordered(n, r):
    return np.array(list(itertools.permutations(range(n), r)), dtype=np.int64).reshape(-1, r)


def doubled_stacks(instance, objective_order="all"):
    """Row and label index arrays (same shape) for every paired stack, canonical order."""
    n, d = instance.A.shape
    norms = np.linalg.norm(instance.A, axis=1)
    pool = np.flatnonzero(norms > TAU * norms.max())
    out = []
    for r in range(1, d):
        if r > pool.size:
            break
        I = _combinations(pool, r)
        L = _ordered(n, r)
        ii = np.repeat(I, L.shape[0], axis=0)
        ll = np.tile(L, (I.shape[0], 1))
        # the same column rotation keeps every row with its label
        out.append((objective_rotations(ii, objective_order), objective_rotations(ll, objective_order)))
    return out


def match_bound(n, d, objective_order="all"):
    """Upper bound on the number of doubled-enumeration candidates."""
    from math import comb, perm

    mult = (lambda r: r) if objective_order == "all" else (lambda r: 1)
    return 2 * sum(mult(r) * comb(n, r) * perm(n, r) for r in range(1, d))


def _paired_opt(args):
    A, b, ri, rl = args
    rows = A[ri]
    offs = b[rl]
    sign = np.where(offs >= 0.0, 1.0, -1.0)
    return calc_opt_batch(rows * sign[..., None], np.abs(offs))


def match_candidates(instance, objective_order="all", workers=1):
    """Candidate vectors with their generating row and label stacks."""
    A, b = instance.A, instance.b
    d = instance.d
    vec_parts, row_parts, lab_parts = [], [], []
    for ri, rl in doubled_stacks(instance, objective_order):
        blocks = [(s, min(s + CHUNK, len(ri))) for s in range(0, len(ri), CHUNK)]
        parts = ordered_map(_paired_opt, [(A, b, ri[s:e], rl[s:e]) for s, e in blocks], workers)
        vecs = np.concatenate([p[0] for p in parts])
        valid = np.concatenate([p[1] for p in parts])
        s_idx, slot = np.nonzero(valid)
        r = ri.shape[1]
        pr = np.full((s_idx.size, d - 1), -1, dtype=np.int64)
        pl = pr.copy()
        pr[:, :r] = ri[s_idx]
        pl[:, :r] = rl[s_idx]
        vec_parts.append(vecs[s_idx, slot])
        row_parts.append(pr)
        lab_parts.append(pl)
    return np.concatenate(vec_parts), np.concatenate(row_parts), np.concatenate(lab_parts)


def _lower_bounds(args):
    spec, instance, X = args
    # any assignment costs at least the sum of row minima and of column minima
    R = np.abs((X @ instance.A.T)[:, :, None] - instance.b[None, None, :])
    Z = instance.weights[None, :, None] * spec.lip(R)
    return np.maximum(Z.min(axis=2).sum(axis=1), Z.min(axis=1).sum(axis=1))


def _assign(args):
    spec, instance, X = args
    out = []
    for x in X:
        Z = cost_matrix(spec, instance, x)
        perm = hungarian(Z)
        out.append(assignment_cost(Z, perm))
    return np.array(out)


def match_solve(instance, spec=None, workers=1, objective_order="all"):
    """Best (unit vector, matching) pair over the doubled candidate enumeration."""
    spec = _cost.lp(1.0) if spec is None else spec
    if not spec.agg.additive:
        raise ValueError("matching requires additive cost")
    t0 = time.perf_counter()
    instance.check_solvable()
    X, rows, labels = match_candidates(instance, objective_order, workers)
    N = X.shape[0]
    step = max(1, CHUNK // max(1, instance.n * instance.n))
    lb = np.concatenate(
        ordered_map(_lower_bounds, [(spec, instance, X[s : s + step]) for s in range(0, N, step)], workers)
    )
    order = np.argsort(lb, kind="stable")
    best_cost, best_k, solved = float("inf"), -1, 0
    for s in range(0, N, BATCH):
        idx = order[s : s + BATCH]
        if lb[idx[0]] > best_cost + TAU * (1.0 + best_cost):
            break
        sub = [idx[t : t + 64] for t in range(0, idx.size, 64)]
        costs = np.concatenate(ordered_map(_assign, [(spec, instance, X[g]) for g in sub], workers))
        solved += idx.size
        for k, c in zip(idx, costs):
            if c < best_cost or (c == best_cost and k < best_k):
                best_cost, best_k = float(c), int(k)
    x = X[best_k].copy()
    perm = lex_smallest_optimal(cost_matrix(spec, instance, x))
    r = int(np.count_nonzero(rows[best_k] >= 0))
    return MatchResult(
        x=x,
        matching=perm,
        cost=_cost.evaluate(spec, instance.permuted(perm), x),
        certified_factor=4.0 ** ((instance.d - 1) * spec.r),
        rows=tuple(int(i) for i in rows[best_k, :r]),
        labels=tuple(int(i) for i in labels[best_k, :r]),
        candidates_evaluated=N,
        assignments_solved=solved,
        elapsed=time.perf_counter() - t0,
    )
