"""Candidate unit vectors from exhaustive enumeration of small row subsets.

For every subset of at most ``d-1`` non-zero rows the opt set of the stacked
constraints is computed and all results are collected.  For every unit vector
``x*`` some candidate ``x'`` then satisfies
``|a_i^T x' - b_i| <= 4^(d-1) |a_i^T x* - b_i|`` simultaneously for all rows.

Which stacked row plays the objective matters whenever the objective hyperplane
misses the sphere cut out by the others.  By default every row of a subset is
tried as the objective (the rest stay in increasing index order as equality
constraints); ``objective_order="last"`` keeps only the largest index as the
objective, which is cheaper but can miss the guarantee on small instances.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from ._parallel import ordered_map
from .geometry import TAU
from .instance import RegressionInstance
from .optset import calc_opt_batch

CHUNK = 1 << 14


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Candidates in canonical order: subset size, subset, objective row, branch.

    ``stacks[k, :sizes[k]]`` lists the generating rows in the order they were
    stacked (objective last); the remaining entries are ``-1``.
    """

    vectors: np.ndarray
    stacks: np.ndarray
    sizes: np.ndarray
    branch: np.ndarray
    infinite: np.ndarray

    def __len__(self):
        return self.vectors.shape[0]

    def stack(self, k):
        return tuple(int(i) for i in self.stacks[k, : self.sizes[k]])

    def generating_indices(self, k):
        return tuple(sorted(self.stack(k)))

    def take(self, idx):
        idx = np.asarray(idx)
        return CandidateSet(
            self.vectors[idx], self.stacks[idx], self.sizes[idx], self.branch[idx], self.infinite[idx]
        )

    def dedup(self, tol=TAU):
        """Drop numerically coincident candidates, keeping the first of each group."""
        if len(self) == 0:
            return self
        key = np.round(self.vectors / tol).astype(np.int64)
        _, first = np.unique(key, axis=0, return_index=True)
        return self.take(np.sort(first))


def sign_normalize(instance):
    """Flip rows with negative targets so every ``b_i >= 0``; residuals are unchanged."""
    sign = np.where(instance.b >= 0.0, 1.0, -1.0)
    if np.all(sign > 0):
        return instance
    return RegressionInstance(instance.A * sign[:, None], np.abs(instance.b), instance.weights)


def candidate_bound(n, d, objective_order="all"):
    """Upper bound on the number of candidates."""
    mult = (lambda r: r) if objective_order == "all" else (lambda r: 1)
    return 2 * sum(mult(r) * comb(n, r) for r in range(1, d))


def _combinations(pool, r):
    k = len(pool)
    if r == 1:
        return pool[:, None]
    if r == 2:
        i, j = np.triu_indices(k, 1)
        return np.column_stack([pool[i], pool[j]])
    flat = np.fromiter(itertools.chain.from_iterable(itertools.combinations(range(k), r)), dtype=np.int64)
    return pool[flat.reshape(-1, r)]


def objective_rotations(combos, objective_order="all"):
    """Expand sorted subsets into stacks, one per choice of objective row.

    Output rows are grouped by subset (stack ``j`` of a subset has its ``j``-th
    smallest row moved to the end).
    """
    c, r = combos.shape
    if objective_order == "last" or r == 1:
        return combos
    if objective_order != "all":
        raise ValueError(f"unknown objective_order {objective_order!r}")
    out = np.empty((c, r, r), dtype=combos.dtype)
    for j in range(r):
        out[:, j, : r - 1] = np.delete(combos, j, axis=1)
        out[:, j, r - 1] = combos[:, j]
    return out.reshape(c * r, r)


def _opt_chunk(args):
    A, b, stacks = args
    vecs, valid, inf = calc_opt_batch(A[stacks], b[stacks])
    return vecs, valid, inf


def opt_over_stacks(A, b, stacks, workers=1):
    """Run the batched opt computation over ``stacks`` in fixed-size chunks.

    Chunk boundaries never depend on ``workers``, so neither does the output.
    """
    blocks = [(s, min(s + CHUNK, len(stacks))) for s in range(0, len(stacks), CHUNK)]
    parts = ordered_map(_opt_chunk, [(A, b, stacks[s:e]) for s, e in blocks], workers)
    d = A.shape[1]
    if not parts:
        return np.empty((0, 2, d)), np.empty((0, 2), bool), np.empty(0, bool)
    return (
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
        np.concatenate([p[2] for p in parts]),
    )


def flatten_opt(vecs, valid, inf, stacks, d):
    """Turn per-stack opt results into candidate rows (canonical order kept)."""
    s_idx, slot = np.nonzero(valid)
    r = stacks.shape[1]
    padded = np.full((s_idx.size, d - 1), -1, dtype=np.int64)
    padded[:, :r] = stacks[s_idx]
    return vecs[s_idx, slot], padded, np.full(s_idx.size, r), slot, inf[s_idx]


def calc_x_candidates(instance, objective_order="all", workers=1, dedup=False):
    """Candidate set for ``instance`` (see module docstring)."""
    instance.check_solvable()
    norm = sign_normalize(instance)
    A, b = norm.A, norm.b
    n, d = A.shape
    row_norms = np.linalg.norm(A, axis=1)
    pool = np.flatnonzero(row_norms > TAU * row_norms.max())

    parts = []
    for r in range(1, d):
        if r > pool.size:
            break
        stacks = objective_rotations(_combinations(pool, r), objective_order)
        vecs, valid, inf = opt_over_stacks(A, b, stacks, workers)
        parts.append(flatten_opt(vecs, valid, inf, stacks, d))

    cs = CandidateSet(*(np.concatenate(col) for col in zip(*parts)))
    return cs.dedup() if dedup else cs
