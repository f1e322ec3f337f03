"""Closest unit vectors to a hyperplane, restricted to other hyperplanes.

Given rows ``a_1..a_m`` and offsets ``b_1..b_m >= 0`` (``m <= d-1``), the opt
set is the set of unit vectors on ``a_i^T x = b_i`` for ``i < m`` that minimise
``|a_m^T x - b_m|``.  It is computed by reflecting ``a_1`` onto ``e_d``,
projecting the remaining hyperplanes into the circle (sphere) cut out by the
first one, rescaling that to a unit sphere of one dimension less, and recursing.

:func:`calc_opt` is the scalar reference; :func:`calc_opt_batch` runs the same
recursion over many stacks at once and defers any stack that hits a
degenerate projection back to :func:`calc_opt`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import TAU, householder_vector


@dataclass(frozen=True)
class OptResult:
    vectors: tuple
    infinite_family: bool = False

    def __len__(self):
        return len(self.vectors)

    def as_array(self, d):
        if not self.vectors:
            return np.empty((0, d))
        return np.vstack(self.vectors)


def _reflect(v, y):
    # (I - 2 v v^T) y for each row of y; v is None for the identity
    if v is None:
        return np.array(y, dtype=float, copy=True)
    return y - 2.0 * np.outer(y @ v, v) if y.ndim == 2 else y - 2.0 * (y @ v) * v


def _check_stack(rows, offsets):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    if rows.ndim != 2 or offsets.ndim != 1 or rows.shape[0] != offsets.shape[0]:
        raise ValueError("malformed constraint stack")
    m, d = rows.shape
    if d < 2 or not 1 <= m <= d - 1:
        raise ValueError("malformed constraint stack")
    if not (np.all(np.isfinite(rows)) and np.all(np.isfinite(offsets))):
        raise ValueError("malformed constraint stack")
    if np.any(np.linalg.norm(rows, axis=1) <= TAU) or np.any(offsets < 0):
        raise ValueError("malformed constraint stack")
    return rows, offsets


def calc_opt(rows, offsets):
    """Opt set of the stack ``(rows, offsets)``.

    Returns an :class:`OptResult` with at most two vectors.  An empty result
    means the equality constraints have no common point on the sphere.  When
    the true set is infinite a single representative is returned and
    ``infinite_family`` is set.
    """
    rows, offsets = _check_stack(rows, offsets)
    return _calc_opt(rows, offsets)


def _calc_opt(rows, offsets):
    m, d = rows.shape
    a1 = rows[0]
    n1 = float(np.linalg.norm(a1))
    beta = offsets[0] / n1

    if beta >= 1.0 - TAU:
        if m == 1:
            return OptResult((a1 / n1,))
        # the only point of the sphere on h_1 cannot also be closest to h_m
        return OptResult(())

    h = math.sqrt(1.0 - beta * beta)
    if m == 1:
        if d == 2:
            u = a1 / n1
            perp = np.array([-u[1], u[0]])
            return OptResult((beta * u + h * perp, beta * u - h * perp))
        v = householder_vector(a1)
        y = np.zeros(d)
        y[0], y[-1] = h, beta
        return OptResult((_reflect(v, y),), infinite_family=True)

    v = householder_vector(a1)
    ra = _reflect(v, rows[1:])
    a_red = ra[:, :-1]
    b_red = (offsets[1:] - beta * ra[:, -1]) / h
    sign = np.where(b_red >= 0.0, 1.0, -1.0)
    a_red = a_red * sign[:, None]
    b_red = np.abs(b_red)

    zero_tol = TAU * float(np.max(np.linalg.norm(rows, axis=1)))
    zero = np.all(np.abs(a_red) <= zero_tol, axis=1)

    def lift(xs):
        return tuple(_reflect(v, np.append(h * x, beta)) for x in xs)

    if zero.all():
        rep = np.zeros(d - 1)
        rep[0] = 1.0
        return OptResult(lift([rep]), infinite_family=True)

    sub = _reduced(a_red, b_red, zero, zero_tol)
    return OptResult(lift(sub.vectors), sub.infinite_family)


def _reduced(a_red, b_red, zero, tol):
    """Solve the projected stack, absorbing rows that projected to zero.

    A zero equality row is vacuous when its offset vanishes and infeasible
    otherwise.  A zero objective row makes every feasible point optimal, so a
    representative of the feasible set is returned.
    """
    keep = []
    for i in range(len(b_red) - 1):
        if zero[i]:
            if b_red[i] > tol:
                return OptResult(())
            continue
        keep.append(i)
    last = len(b_red) - 1
    dim = a_red.shape[1]
    if not zero[last]:
        keep.append(last)
        return _calc_opt(a_red[keep], b_red[keep])

    if not keep:
        rep = np.zeros(dim)
        rep[0] = 1.0
        return OptResult((rep,), infinite_family=True)
    feas = _calc_opt(a_red[keep], b_red[keep])
    ak, bk = a_red[keep[-1]], b_red[keep[-1]]
    hits = tuple(x for x in feas.vectors if abs(ak @ x - bk) <= tol)
    return OptResult(hits, infinite_family=bool(hits))


def calc_opt_batch(rows, offsets):
    """Vectorised :func:`calc_opt` over stacks of identical shape.

    ``rows`` has shape ``(B, m, d)`` and ``offsets`` ``(B, m)``; inputs are
    assumed valid (callers build them from non-zero, sign-normalised rows).
    Returns ``(vectors, valid, infinite)`` with shapes ``(B, 2, d)``,
    ``(B, 2)`` and ``(B,)``; slots that carry no vector are NaN and invalid.
    """
    rows = np.asarray(rows, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    out, valid, inf, fallback = _batch(rows, offsets)
    for b in np.flatnonzero(fallback):
        res = _calc_opt(rows[b], offsets[b])
        out[b] = np.nan
        valid[b] = False
        for k, x in enumerate(res.vectors):
            out[b, k] = x
            valid[b, k] = True
        inf[b] = res.infinite_family
    return out, valid, inf


def _batch(rows, offsets):
    B, m, d = rows.shape
    out = np.full((B, 2, d), np.nan)
    valid = np.zeros((B, 2), dtype=bool)
    inf = np.zeros(B, dtype=bool)
    fallback = np.zeros(B, dtype=bool)
    if B == 0:
        return out, valid, inf, fallback

    a1 = rows[:, 0]
    n1 = np.linalg.norm(a1, axis=1)
    beta = offsets[:, 0] / n1
    far = beta >= 1.0 - TAU

    if m == 1:
        out[far, 0] = a1[far] / n1[far, None]
        valid[far, 0] = True
    near = np.flatnonzero(~far)
    if near.size == 0:
        return out, valid, inf, fallback

    bn = beta[near]
    h = np.sqrt(1.0 - bn * bn)
    u = a1[near] / n1[near, None]

    if m == 1 and d == 2:
        perp = np.column_stack([-u[:, 1], u[:, 0]])
        out[near, 0] = bn[:, None] * u + h[:, None] * perp
        out[near, 1] = bn[:, None] * u - h[:, None] * perp
        valid[near] = True
        return out, valid, inf, fallback

    v = u.copy()
    v[:, -1] -= 1.0
    vn = np.linalg.norm(v, axis=1)
    aligned = vn <= TAU
    v = np.where(aligned[:, None], 0.0, v / np.where(aligned, 1.0, vn)[:, None])

    def reflect(y):
        return y - 2.0 * np.sum(y * v, axis=-1, keepdims=True) * v

    if m == 1:
        y = np.zeros((near.size, d))
        y[:, 0], y[:, -1] = h, bn
        out[near, 0] = reflect(y)
        valid[near, 0] = True
        inf[near] = True
        return out, valid, inf, fallback

    rest = rows[near, 1:]
    ra = rest - 2.0 * np.einsum("bkd,bd->bk", rest, v)[:, :, None] * v[:, None, :]
    a_red = ra[:, :, :-1]
    b_red = (offsets[near, 1:] - bn[:, None] * ra[:, :, -1]) / h[:, None]
    sign = np.where(b_red >= 0.0, 1.0, -1.0)
    a_red = a_red * sign[:, :, None]
    b_red = np.abs(b_red)

    zero_tol = TAU * np.max(np.linalg.norm(rows[near], axis=2), axis=1)
    zero = np.all(np.abs(a_red) <= zero_tol[:, None, None], axis=2)
    degenerate = zero.any(axis=1)
    fallback[near[degenerate]] = True

    gen = np.flatnonzero(~degenerate)
    sub_out, sub_valid, sub_inf, sub_fb = _batch(a_red[gen], b_red[gen])
    idx = near[gen]
    hg, bg, vg = h[gen], bn[gen], v[gen]
    y = np.concatenate(
        [hg[:, None, None] * sub_out, np.broadcast_to(bg[:, None, None], (gen.size, 2, 1))],
        axis=2,
    )
    x = y - 2.0 * np.sum(y * vg[:, None, :], axis=2, keepdims=True) * vg[:, None, :]
    x[~sub_valid] = np.nan
    out[idx] = x
    valid[idx] = sub_valid
    inf[idx] = sub_inf
    fallback[idx] |= sub_fb
    return out, valid, inf, fallback
