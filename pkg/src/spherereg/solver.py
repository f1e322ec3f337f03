"""Best candidate under a cost spec, with its certified approximation factor."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import cost as _cost
from ._parallel import ordered_map
from .candidates import CandidateSet, calc_x_candidates

EVAL_CHUNK = 4096


@dataclass(frozen=True)
class SolveResult:
    x: np.ndarray
    cost: float
    certified_factor: float
    generating_indices: tuple
    candidates_evaluated: int
    elapsed: float
    stack: tuple = ()
    spec: _cost.CostSpec | None = field(default=None, compare=False)

    def to_record(self):
        x = " ".join(repr(float(v)) for v in self.x)
        idx = ",".join(str(i) for i in self.generating_indices) or "-"
        return (
            f"cost={self.cost!r} factor={self.certified_factor!r} x={x.replace(' ', ',')} "
            f"indices={idx} candidates={self.candidates_evaluated} elapsed={self.elapsed:.6f}"
        )


def _eval_block(args):
    spec, instance, X = args
    return _cost.evaluate_many(spec, instance, X)


def evaluate_candidates(spec, instance, vectors, workers=1):
    """Cost of every candidate, computed in fixed blocks so ``workers`` never changes a value."""
    blocks = [vectors[s : s + EVAL_CHUNK] for s in range(0, len(vectors), EVAL_CHUNK)]
    parts = ordered_map(_eval_block, [(spec, instance, X) for X in blocks], workers)
    return np.concatenate(parts) if parts else np.empty(0)


def best_candidate(spec, instance, cands: CandidateSet, workers=1):
    """Index and cost of the cheapest candidate; ties go to the first in canonical order."""
    costs = evaluate_candidates(spec, instance, cands.vectors, workers)
    k = int(np.argmin(costs))
    return k, float(costs[k])


def solve(instance, spec=None, workers=1, objective_order="all", dedup=False, candidates=None):
    """Minimise ``spec`` over the candidate set of ``instance``.

    ``candidates`` may carry a precomputed set (e.g. from the same ``A`` and
    ``b`` under a different spec); otherwise it is enumerated here.
    """
    spec = _cost.lp(1.0) if spec is None else spec
    t0 = time.perf_counter()
    if spec.agg.kind == "lp_norm_trimmed" and spec.agg.k >= instance.n:
        raise ValueError("trim count exceeds rows")
    cands = candidates
    if cands is None:
        cands = calc_x_candidates(instance, objective_order=objective_order, workers=workers, dedup=dedup)
    k, c = best_candidate(spec, instance, cands, workers)
    return SolveResult(
        x=cands.vectors[k].copy(),
        cost=c,
        certified_factor=_cost.lifted_factor(spec, instance.d),
        generating_indices=cands.generating_indices(k),
        candidates_evaluated=len(cands),
        elapsed=time.perf_counter() - t0,
        stack=cands.stack(k),
        spec=spec,
    )


def solve_with_outliers(instance, p=1.0, k=0, **kw):
    """Solve ``||small(Ax - b, n - k)||_p``: the ``k`` worst rows are ignored per candidate."""
    if not 0 <= k < instance.n:
        raise ValueError("trim count exceeds rows")
    return solve(instance, _cost.trimmed(p, k), **kw)


def solve_mestimator(instance, T, p=1.0, **kw):
    """Solve with residuals clipped at ``T``."""
    return solve(instance, _cost.huber(T, p), **kw)
