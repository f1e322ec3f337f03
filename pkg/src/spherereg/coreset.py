"""Sensitivity-sampling coresets for ``sum_i w_i |a_i^T x - b_i|^z``.

Row sensitivities are bounded with leverage scores of the lifted matrix
``W^(1/z) [A | b | 1]``; rows are then drawn i.i.d. in proportion to those
bounds and reweighted so every cost is estimated without bias.  Coresets
compose: the weighted union of two coresets can be compressed again, which
gives merge-reduce trees for batched or streamed data.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from ._parallel import ordered_map
from .instance import RegressionInstance, concat

log = logging.getLogger(__name__)

MAGIC = "spherereg-coreset v1"


@dataclass(frozen=True)
class SensitivityProfile:
    s: np.ndarray
    total: float
    z: float
    clamped: int = 0


def lifted_matrix(instance, z):
    scale = instance.weights ** (1.0 / z)
    M = np.column_stack([instance.A, instance.b, np.ones(instance.n)])
    # the constant column is scaled too, so zero-weight rows lift to zero
    return M * scale[:, None]


def leverage_scores(M, rcond=1e-12):
    U, sv, _ = np.linalg.svd(M, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        raise ValueError("all-zero effective matrix")
    U = U[:, sv > rcond * sv[0]]
    return np.einsum("ij,ij->i", U, U)


def sensitivity_bounds(instance, z=2.0):
    """Per-row upper bounds on ``sup_x w_i r_i(x)^z / sum_j w_j r_j(x)^z``."""
    if z < 1:
        raise ValueError("z must be >= 1")
    M = lifted_matrix(instance, z)
    lev = np.clip(leverage_scores(M), 0.0, None)
    lev[~np.any(M, axis=1)] = 0.0  # rows lifting to zero never contribute
    s = lev ** (z / 2.0)
    if z > 2:
        s = s * instance.n ** (z / 2.0 - 1.0)
    clamped = int(np.count_nonzero(s > 1.0))
    if clamped:
        log.info("sensitivity bound clamped at 1 for %d of %d rows", clamped, instance.n)
    s = np.minimum(s, 1.0)
    return SensitivityProfile(s=s, total=float(s.sum()), z=float(z), clamped=clamped)


def sample_size(total, eps, delta, c=1.0, d_vc=3):
    """``ceil((c t / eps^2) (d_vc log t + log(1/delta)))``."""
    return int(math.ceil((c * total / eps**2) * (d_vc * max(math.log(total), 0.0) + math.log(1.0 / delta))))


@dataclass(frozen=True, eq=False)
class Coreset:
    """Sparse reweighting of source rows ``ids`` (kept rows cached in ``A``, ``b``)."""

    ids: np.ndarray
    weights: np.ndarray
    eps: float
    delta: float
    z: float
    sample_size: int
    n: int
    exact: bool
    total_sensitivity: float
    c: float = 1.0
    d_vc: int = 0
    levels: int = 0
    eps_total: float = 0.0
    A: np.ndarray | None = None
    b: np.ndarray | None = None

    @property
    def nnz(self):
        return int(self.ids.size)

    def to_instance(self):
        if self.A is None:
            raise ValueError("coreset has no rows attached; use attach()")
        return RegressionInstance(self.A, self.b, self.weights)

    def attach(self, source):
        """Bind rows of ``source`` (indexed by ``ids``)."""
        return replace(self, A=source.A[self.ids], b=source.b[self.ids])

    def metadata(self):
        return {
            "n": self.n,
            "nnz": self.nnz,
            "sample_size": self.sample_size,
            "eps": self.eps,
            "delta": self.delta,
            "z": self.z,
            "c": self.c,
            "d_vc": self.d_vc,
            "exact": int(self.exact),
            "total_sensitivity": self.total_sensitivity,
            "levels": self.levels,
            "eps_total": self.eps_total,
        }


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def build_coreset(instance, z=2.0, eps=0.2, delta=0.1, c=1.0, seed=0, d_vc=None, ids=None):
    """Compress ``instance`` by sensitivity sampling with replacement.

    ``ids`` maps rows of ``instance`` to source row ids (default ``0..n-1``).
    When the sample would not be smaller than ``n`` the exact coreset
    ``u = w`` is returned instead.
    """
    if not (0 < eps < 1 and 0 < delta < 1):
        raise ValueError("eps and delta must lie in (0, 1)")
    if c <= 0:
        raise ValueError("c must be positive")
    d_vc = instance.d + 2 if d_vc is None else int(d_vc)
    ids = np.arange(instance.n) if ids is None else np.asarray(ids, dtype=np.int64)
    prof = sensitivity_bounds(instance, z)
    m = sample_size(prof.total, eps, delta, c, d_vc)
    common = dict(eps=eps, delta=delta, z=float(z), sample_size=m, n=instance.n,
                  total_sensitivity=prof.total, c=c, d_vc=d_vc)
    if m >= instance.n:
        keep = np.flatnonzero(instance.weights > 0)
        return Coreset(ids=ids[keep], weights=instance.weights[keep].copy(), exact=True,
                       A=instance.A[keep], b=instance.b[keep], **common)
    rng = _rng(seed)
    draws = rng.choice(instance.n, size=m, replace=True, p=prof.s / prof.total)
    counts = np.bincount(draws, minlength=instance.n)
    keep = np.flatnonzero(counts)
    u = counts[keep] * prof.total * instance.weights[keep] / (prof.s[keep] * m)
    return Coreset(ids=ids[keep], weights=u, exact=False, eps_total=eps,
                   A=instance.A[keep], b=instance.b[keep], **common)


def weighted_union(*coresets):
    """Row multiset union of coresets (``None`` entries are skipped)."""
    parts = [cs for cs in coresets if cs is not None and cs.nnz]
    if not parts:
        raise ValueError("nothing to merge")
    inst = concat(*(cs.to_instance() for cs in parts))
    return inst, np.concatenate([cs.ids for cs in parts])


def merge_reduce(left, right, z=None, eps=None, delta=None, c=None, seed=0, d_vc=None):
    """Compress the weighted union of two coresets (``right`` may be ``None``)."""
    parts = [cs for cs in (left, right) if cs is not None]
    first = parts[0]
    if len(parts) == 2 and right.z != left.z:
        raise ValueError("coresets were built for different z")
    z = first.z if z is None else z
    eps = first.eps if eps is None else eps
    delta = first.delta if delta is None else delta
    c = first.c if c is None else c
    inst, ids = weighted_union(*parts)
    out = build_coreset(inst, z, eps, delta, c, seed, d_vc, ids=ids)
    child_eps = max(cs.eps_total for cs in parts)
    total = child_eps if out.exact else (1.0 + eps) * (1.0 + child_eps) - 1.0
    return replace(out, n=sum(cs.n for cs in parts), levels=max(cs.levels for cs in parts) + 1,
                   eps_total=total)


def node_seed(root, level, node):
    """Independent generator for tree node ``(level, node)`` under ``root``."""
    return np.random.default_rng(np.random.SeedSequence(root, spawn_key=(level, node)))


def _leaf(args):
    inst, ids, params, root, node = args
    return build_coreset(inst, seed=node_seed(root, 0, node), ids=ids, **params)


def _pair(args):
    left, right, params, root, level, node = args
    return merge_reduce(left, right, seed=node_seed(root, level, node), **params)


def merge_reduce_tree(batches, z=2.0, eps=0.2, delta=0.1, c=1.0, seed=0, d_vc=None, workers=1):
    """Coreset of the union of ``batches`` via a balanced merge-reduce tree.

    Leaves are compressed first; adjacent nodes are then merged level by
    level, an odd last node moving up unchanged.  Depth is ``ceil(log2 B)``.
    """
    params = dict(z=z, eps=eps, delta=delta, c=c, d_vc=d_vc)
    jobs, offset = [], 0
    for node, inst in enumerate(batches):
        jobs.append((inst, offset + np.arange(inst.n), params, seed, node))
        offset += inst.n
    if not jobs:
        raise ValueError("no batches")
    level_nodes = ordered_map(_leaf, jobs, workers)
    level = 0
    while len(level_nodes) > 1:
        level += 1
        pairs = [(level_nodes[k], level_nodes[k + 1], params, seed, level, k // 2)
                 for k in range(0, len(level_nodes) - 1, 2)]
        merged = ordered_map(_pair, pairs, workers)
        if len(level_nodes) % 2:
            merged.append(level_nodes[-1])
        level_nodes = merged
    return level_nodes[0]


class StreamingCoreset:
    """Binary-counter merge-reduce over batches arriving one at a time."""

    def __init__(self, z=2.0, eps=0.2, delta=0.1, c=1.0, seed=0, d_vc=None):
        self.params = dict(z=z, eps=eps, delta=delta, c=c, d_vc=d_vc)
        self.seed = seed
        self.buckets = {}
        self.seen = 0
        self.batches = 0
        self._merges = {}

    def add(self, batch):
        ids = self.seen + np.arange(batch.n)
        node = build_coreset(batch, seed=node_seed(self.seed, 0, self.batches), ids=ids, **self.params)
        self.seen += batch.n
        self.batches += 1
        level = 0
        while level in self.buckets:
            node = self._merge(self.buckets.pop(level), node, level + 1)
            level += 1
        self.buckets[level] = node

    def _merge(self, left, right, level):
        k = self._merges.get(level, 0)
        self._merges[level] = k + 1
        return merge_reduce(left, right, seed=node_seed(self.seed, level, k), **self.params)

    def result(self):
        if not self.buckets:
            raise ValueError("no batches")
        nodes = [self.buckets[lv] for lv in sorted(self.buckets)]
        out = nodes[0]
        for lv, node in zip(sorted(self.buckets)[1:], nodes[1:]):
            out = self._merge(node, out, lv + 1)
        return out


def cost_ratios(coreset, instance, X):
    """``sum u r^z / sum w r^z`` for each probe row of ``X``."""
    R = instance.residuals(np.atleast_2d(X))
    full = (R**coreset.z) @ instance.weights
    sub = RegressionInstance(instance.A[coreset.ids], instance.b[coreset.ids], coreset.weights)
    part = (sub.residuals(np.atleast_2d(X)) ** coreset.z) @ sub.weights
    return part / full


def save(coreset, path):
    meta = coreset.metadata()
    lines = [MAGIC] + [f"{k}={v!r}" for k, v in meta.items()] + ["---"]
    lines += [f"{int(i)} {float(w)!r}" for i, w in zip(coreset.ids, coreset.weights)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load(path, source=None):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MAGIC:
        raise ValueError(f"{path}: not a coreset file")
    try:
        sep = lines.index("---")
    except ValueError:
        raise ValueError(f"{path}: missing body separator") from None
    meta = dict(line.split("=", 1) for line in lines[1:sep])
    body = [line.split() for line in lines[sep + 1 :] if line.strip()]
    ids = np.array([int(r[0]) for r in body], dtype=np.int64)
    weights = np.array([float(r[1]) for r in body])
    cs = Coreset(
        ids=ids, weights=weights, eps=float(meta["eps"]), delta=float(meta["delta"]), z=float(meta["z"]),
        sample_size=int(meta["sample_size"]), n=int(meta["n"]), exact=bool(int(meta["exact"])),
        total_sensitivity=float(meta["total_sensitivity"]), c=float(meta["c"]), d_vc=int(meta["d_vc"]),
        levels=int(meta["levels"]), eps_total=float(meta["eps_total"]),
    )
    return cs.attach(source) if source is not None else cs
