from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class RegressionInstance:
    """Rows ``A`` (n x d), targets ``b`` (n) and non-negative row weights."""

    A: np.ndarray
    b: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        if A.ndim != 2:
            raise ValueError("A must be a 2-d matrix")
        n, d = A.shape
        if b.shape[0] != n:
            raise ValueError(f"A has {n} rows but b has {b.shape[0]} entries")
        if d < 2:
            raise ValueError("need d >= 2")
        w = np.ones(n) if self.weights is None else np.array(self.weights, dtype=float).reshape(-1)
        if w.shape[0] != n:
            raise ValueError(f"expected {n} weights, got {w.shape[0]}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(w))):
            raise ValueError("instance contains non-finite values")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        for arr in (A, b, w):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "weights", w)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def d(self):
        return self.A.shape[1]

    def residuals(self, x):
        """``|A x - b|`` for one vector, or an (N, n) matrix for N row-stacked vectors."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return np.abs(self.A @ x - self.b)
        return np.abs(x @ self.A.T - self.b)

    def permuted(self, perm):
        """Instance pairing row ``i`` of ``A`` with ``b[perm[i]]``."""
        return RegressionInstance(self.A, self.b[np.asarray(perm)], self.weights)

    def subset(self, idx, weights=None):
        idx = np.asarray(idx, dtype=int)
        w = self.weights[idx] if weights is None else weights
        return RegressionInstance(self.A[idx], self.b[idx], w)

    def check_solvable(self):
        if self.n < self.d - 1:
            raise ValueError(f"need n >= d-1 rows, got n={self.n}, d={self.d}")
        if not np.any(self.A):
            raise ValueError("zero matrix")

    def __eq__(self, other):
        if not isinstance(other, RegressionInstance):
            return NotImplemented
        return (
            np.array_equal(self.A, other.A)
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None


def concat(*instances):
    """Row-wise union of weighted instances of equal dimension."""
    instances = [inst for inst in instances if inst is not None and inst.n > 0]
    if not instances:
        raise ValueError("nothing to concatenate")
    d = instances[0].d
    if any(inst.d != d for inst in instances):
        raise ValueError("dimension mismatch")
    return RegressionInstance(
        np.vstack([i.A for i in instances]),
        np.concatenate([i.b for i in instances]),
        np.concatenate([i.weights for i in instances]),
    )
