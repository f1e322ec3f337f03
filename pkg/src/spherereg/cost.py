"""Objective family ``f(lip(r_1), ..., lip(r_n))`` over per-row residuals.

``lip`` is an ``r``-log-Lipschitz transform of one residual and ``f`` an
``s``-log-Lipschitz, non-decreasing aggregator; a candidate that is within a
factor ``c`` of ``x*`` on every row is then within ``c^(r s)`` on the cost.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .geometry import TAU

LIP_KINDS = ("identity", "power", "huber_clip")
AGG_KINDS = ("lp_norm", "lp_norm_trimmed", "sum")


@dataclass(frozen=True)
class Lip:
    kind: str = "identity"
    param: float | None = None  # z for power, T for huber_clip

    def __post_init__(self):
        if self.kind not in LIP_KINDS:
            raise ValueError(f"unknown lip kind {self.kind!r}")
        if self.kind == "identity":
            if self.param is not None:
                raise ValueError("identity takes no parameter")
        elif self.param is None or not self.param > 0:
            raise ValueError(f"{self.kind} needs a positive parameter")

    @property
    def constant(self):
        return float(self.param) if self.kind == "power" else 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            return x
        if self.kind == "power":
            return x**self.param
        return np.minimum(x, self.param)


@dataclass(frozen=True)
class Agg:
    kind: str = "lp_norm"
    p: float = 1.0
    k: int = 0

    def __post_init__(self):
        if self.kind not in AGG_KINDS:
            raise ValueError(f"unknown aggregator kind {self.kind!r}")
        if self.kind != "sum" and not self.p > 0:
            raise ValueError("p must be positive")
        if self.k < 0 or (self.kind != "lp_norm_trimmed" and self.k):
            raise ValueError("trim count k only applies to lp_norm_trimmed")

    @property
    def constant(self):
        # every aggregator here is positively homogeneous of degree one
        return 1.0

    @property
    def additive(self):
        return self.kind == "sum" or (self.kind == "lp_norm" and self.p == 1)

    def __call__(self, values, weights=None):
        """Aggregate along the last axis."""
        v = np.asarray(values, dtype=float)
        w = np.ones(v.shape[-1]) if weights is None else np.asarray(weights, dtype=float)
        return _aggregate(self, v, w)


def _aggregate(agg, v, w):
    n = v.shape[-1]
    if agg.kind == "sum":
        return np.sum(v * w, axis=-1)
    if agg.kind == "lp_norm_trimmed":
        if agg.k >= n:
            raise ValueError("trim count exceeds rows")
        if agg.k:
            order = np.argsort(v, axis=-1, kind="stable")[..., : n - agg.k]
            v = np.take_along_axis(v, order, axis=-1)
            w = np.take_along_axis(np.broadcast_to(w, v.shape[:-1] + (n,)), order, axis=-1)
    p = agg.p
    if p == 1:
        return np.sum(v * w, axis=-1)
    if p == 2:
        return np.sqrt(np.sum(w * v * v, axis=-1))
    # (sum w v^p)^(1/p) in log space; zero entries contribute -inf
    with np.errstate(divide="ignore"):
        logs = np.log(w) + p * np.log(v)
    return np.exp(logsumexp(logs, axis=-1) / p)


@dataclass(frozen=True)
class CostSpec:
    lip: Lip = Lip()
    agg: Agg = Agg()

    @property
    def r(self):
        return self.lip.constant

    @property
    def s(self):
        return self.agg.constant

    def to_record(self):
        parts = [f"lip={self.lip.kind}"]
        if self.lip.kind == "power":
            parts.append(f"z={self.lip.param!r}")
        elif self.lip.kind == "huber_clip":
            parts.append(f"T={self.lip.param!r}")
        parts.append(f"agg={self.agg.kind}")
        if self.agg.kind != "sum":
            parts.append(f"p={self.agg.p!r}")
        if self.agg.kind == "lp_norm_trimmed":
            parts.append(f"k={self.agg.k}")
        return " ".join(parts)

    @classmethod
    def from_record(cls, text):
        fields = dict(tok.split("=", 1) for tok in text.split())
        lip_kind = fields.get("lip", "identity")
        param = fields.get("z") if lip_kind == "power" else fields.get("T")
        lip = Lip(lip_kind, None if lip_kind == "identity" else float(param))
        agg = Agg(fields.get("agg", "lp_norm"), float(fields.get("p", 1.0)), int(fields.get("k", 0)))
        return cls(lip, agg)

    def __str__(self):
        return self.to_record()


def lp(p=1.0):
    return CostSpec(Lip(), Agg("lp_norm", p))


def lp_power(z=2.0):
    """``sum |a_i^T x - b_i|^z``, the form the coreset approximates."""
    return CostSpec(Lip("power", z), Agg("sum"))


def huber(T, p=1.0):
    """Clipped residuals ``(sum min(r_i, T)^p)^(1/p)``; ``p=1`` is the plain M-estimator sum."""
    return CostSpec(Lip("huber_clip", T), Agg("lp_norm", p))


def trimmed(p=1.0, k=0):
    """``||small(Ax - b, n - k)||_p``: the ``k`` largest residuals are ignored."""
    return CostSpec(Lip(), Agg("lp_norm_trimmed", p, k))


PRESETS = {
    "l1": lp(1.0),
    "l2": lp(2.0),
    "l2sq": lp_power(2.0),
}


def transformed_residuals(spec, instance, X):
    """``lip(|A x - b|)`` for each row of ``X`` (shape (N, n)); rows with zero weight dropped."""
    R = instance.residuals(np.atleast_2d(X))
    keep = instance.weights > 0
    return spec.lip(R[:, keep]), instance.weights[keep]


def from_residuals(spec, R, weights):
    """Cost of raw residual vectors ``R`` (last axis = rows)."""
    R = np.asarray(R, dtype=float)
    keep = np.asarray(weights) > 0
    if spec.agg.kind == "lp_norm_trimmed" and spec.agg.k >= int(keep.sum()):
        raise ValueError("trim count exceeds rows")
    return spec.agg(spec.lip(R[..., keep]), np.asarray(weights, dtype=float)[keep])


def evaluate_many(spec, instance, X, chunk=4096):
    """Cost for every row of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if spec.agg.kind == "lp_norm_trimmed" and spec.agg.k >= int(np.count_nonzero(instance.weights > 0)):
        raise ValueError("trim count exceeds rows")
    if spec.lip.kind == "power" and spec.lip.param == 2 and spec.agg.kind == "sum":
        return _quadratic(instance, X)
    out = np.empty(X.shape[0])
    for s in range(0, X.shape[0], chunk):
        v, w = transformed_residuals(spec, instance, X[s : s + chunk])
        out[s : s + chunk] = spec.agg(v, w)
    return out


def _quadratic(instance, X):
    # sum w (a^T x - b)^2 from the weighted Gram matrix; O(d^2) per candidate
    w, A, b = instance.weights, instance.A, instance.b
    G = A.T @ (w[:, None] * A)
    g = A.T @ (w * b)
    c = float(np.sum(w * b * b))
    val = np.einsum("ij,jk,ik->i", X, G, X) - 2.0 * X @ g + c
    return np.maximum(val, 0.0)


def evaluate(spec, instance, x):
    """Cost of a single unit vector ``x``."""
    x = np.asarray(x, dtype=float)
    v, w = transformed_residuals(spec, instance, x[None, :])
    if spec.agg.kind == "lp_norm_trimmed" and spec.agg.k >= v.shape[1]:
        raise ValueError("trim count exceeds rows")
    return float(spec.agg(v, w)[0])


def lifted_factor(spec, d):
    """Certified approximation factor ``4^((d-1) r s)``."""
    return 4.0 ** ((d - 1) * spec.r * spec.s)


def loose_factor(spec, d):
    """Looser ``4^(max(r, 1) (d-1) s)`` factor, never below :func:`lifted_factor`."""
    return 4.0 ** ((d - 1) * max(spec.r, 1.0) * spec.s)


def check_log_lipschitz(kind, claimed_r, samples=1000, seed=0, x_max=100.0, c_max=10.0, tol=TAU):
    """Sampled test of ``h(c x) <= c^r h(x)`` for ``c >= 1`` plus monotonicity.

    The slack ``tol`` is relative to the size of the right-hand side, so exact
    power laws survive floating point rounding at large arguments.

    ``kind`` is a :class:`Lip` (scalar inputs) or an :class:`Agg` (vector
    inputs of random length).  Returns ``True`` when no sampled pair violates
    either property.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    rng = np.random.default_rng(seed)
    c = np.concatenate([[1.0, 1.5, 2.0, 4.0], rng.uniform(1.0, c_max, samples - 4)])
    if isinstance(kind, Lip):
        x = rng.uniform(0.0, x_max, samples)
        hx, hcx = kind(x), kind(c * x)
        bump = kind(x + rng.uniform(0.0, x_max, samples))
        bound = c**claimed_r * hx
        ok = np.all(hcx <= bound + tol * (1 + bound)) and np.all(bump >= hx - tol * (1 + hx))
        return bool(ok)
    if isinstance(kind, Agg):
        n = max(kind.k + 2, 5)
        v = rng.uniform(0.0, x_max, (samples, n))
        hv, hcv = kind(v), kind(c[:, None] * v)
        bump = kind(v + rng.uniform(0.0, x_max, (samples, n)))
        bound = c**claimed_r * hv
        ok = np.all(hcv <= bound + tol * (1 + bound)) and np.all(bump >= hv - tol * (1 + hv))
        return bool(ok)
    raise TypeError("kind must be a Lip or Agg descriptor")
