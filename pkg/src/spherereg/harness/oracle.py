"""Brute-force references on a sphere grid (d <= 3).

Each residual ``|a_i^T x - b_i|`` moves by at most ``||a_i||`` times the
geodesic distance moved by ``x``, and every unit vector lies within the
grid's covering radius of some grid point.  So the grid minimum is an upper
bound on the true optimum and the grid minimum of the residuals shrunk by
that per-row slack is a lower bound; ``slack`` is the gap between the two.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .. import cost as _cost
from ..geometry import TAU, sphere_grid

CHUNK = 1 << 15


@dataclass(frozen=True)
class OracleReport:
    oracle_minimum: float
    grid_resolution: int
    slack: float
    solver_cost: float
    ratio: float
    certified_factor: float
    lower_bound: float = 0.0
    argmin: np.ndarray | None = None

    @property
    def within_certificate(self):
        return self.solver_cost <= self.certified_factor * self.oracle_minimum + self.slack

    def to_record(self):
        return (
            f"oracle_minimum={self.oracle_minimum!r} lower_bound={self.lower_bound!r} slack={self.slack!r} "
            f"solver_cost={self.solver_cost!r} ratio={self.ratio!r} factor={self.certified_factor!r} "
            f"grid_resolution={self.grid_resolution} within={int(self.within_certificate)}"
        )


def _report(lo, hi, arg, res, solver_cost, factor):
    solver_cost = float("nan") if solver_cost is None else float(solver_cost)
    return OracleReport(
        oracle_minimum=hi,
        grid_resolution=res,
        slack=hi - lo,
        solver_cost=solver_cost,
        ratio=solver_cost / max(hi, TAU),
        certified_factor=float("nan") if factor is None else float(factor),
        lower_bound=lo,
        argmin=arg,
    )


def grid_oracle(instance, spec, resolution=100_000, solver_cost=None, certified_factor=None, grid=None):
    """Grid minimum of ``spec`` with a sound lower bound on the true optimum."""
    grid = sphere_grid(instance.d, resolution) if grid is None else grid
    delta = np.linalg.norm(instance.A, axis=1) * grid.covering_radius
    hi, lo, arg = np.inf, np.inf, None
    for s in range(0, len(grid), CHUNK):
        P = grid.points[s : s + CHUNK]
        R = instance.residuals(P)
        up = _cost.from_residuals(spec, R, instance.weights)
        down = _cost.from_residuals(spec, np.maximum(R - delta, 0.0), instance.weights)
        k = int(np.argmin(up))
        if up[k] < hi:
            hi, arg = float(up[k]), P[k].copy()
        lo = min(lo, float(down.min()))
    if certified_factor is None:
        certified_factor = _cost.lifted_factor(spec, instance.d)
    return _report(lo, hi, arg, grid.resolution, solver_cost, certified_factor)


def joint_grid_oracle(instance, spec, resolution=100_000, solver_cost=None, certified_factor=None, grid=None):
    """Grid minimum over unit vectors and all row matchings (additive costs, n <= 7)."""
    if instance.n > 7:
        raise ValueError("joint oracle supports n <= 7")
    if not spec.agg.additive:
        raise ValueError("matching requires additive cost")
    grid = sphere_grid(instance.d, resolution) if grid is None else grid
    n = instance.n
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    delta = np.linalg.norm(instance.A, axis=1) * grid.covering_radius
    w = instance.weights
    rows = np.arange(n)
    hi, lo, arg = np.inf, np.inf, None
    for s in range(0, len(grid), CHUNK // 8):
        P = grid.points[s : s + CHUNK // 8]
        R = np.abs((P @ instance.A.T)[:, :, None] - instance.b[None, None, :])  # (G, i, j)
        Zu = w[None, :, None] * spec.lip(R)
        Zd = w[None, :, None] * spec.lip(np.maximum(R - delta[None, :, None], 0.0))
        up = Zu[:, rows[None, :], perms].sum(axis=2)  # (G, perms)
        down = Zd[:, rows[None, :], perms].sum(axis=2)
        g, q = np.unravel_index(int(np.argmin(up)), up.shape)
        if up[g, q] < hi:
            hi, arg = float(up[g, q]), (P[g].copy(), perms[q].copy())
        lo = min(lo, float(down.min()))
    if certified_factor is None:
        certified_factor = 4.0 ** ((instance.d - 1) * spec.r)
    return _report(lo, hi, arg, grid.resolution, solver_cost, certified_factor)
