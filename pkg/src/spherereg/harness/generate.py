"""Seeded synthetic instances: uniform entries, optional planted solution,
Gaussian noise, gross outliers and a hidden row shuffle."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..instance import RegressionInstance


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    d: int
    entry_range: float = 200.0
    noise_sigma: float = 0.0
    outlier_fraction: float = 0.0
    outlier_magnitude: float = 20000.0
    shuffle: bool = False
    planted: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.d < 2 or self.n < self.d - 1:
            raise ValueError("need d >= 2 and n >= d-1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if not 0.0 <= self.outlier_fraction <= 0.5:
            raise ValueError("outlier_fraction must lie in [0, 0.5]")

    @property
    def outlier_count(self):
        return int(np.floor(self.outlier_fraction * self.n))


@dataclass(frozen=True, eq=False)
class Generated:
    instance: RegressionInstance
    x_true: np.ndarray | None
    matching: np.ndarray  # row i of A belongs with b[matching[i]]
    outliers: np.ndarray
    config: GeneratorConfig


def generate(config: GeneratorConfig) -> Generated:
    rng = np.random.default_rng(config.seed)
    n, d = config.n, config.d
    A = rng.uniform(0.0, config.entry_range, (n, d))
    x_true = None
    if config.planted:
        x_true = rng.normal(size=d)
        x_true /= np.linalg.norm(x_true)
        b = A @ x_true
    else:
        b = rng.uniform(0.0, config.entry_range, n)
    if config.noise_sigma > 0:
        A = A + rng.normal(0.0, config.noise_sigma, A.shape)
        b = b + rng.normal(0.0, config.noise_sigma, n)
    outliers = np.sort(rng.choice(n, size=config.outlier_count, replace=False))
    if outliers.size:
        A[outliers] += rng.uniform(0.0, config.outlier_magnitude, (outliers.size, d))
        b[outliers] += rng.uniform(0.0, config.outlier_magnitude, outliers.size)
    matching = np.arange(n)
    if config.shuffle:
        matching = rng.permutation(n)
        A = A[matching]
        outliers = np.sort(np.flatnonzero(np.isin(matching, outliers)))
    return Generated(RegressionInstance(A, b), x_true, matching, outliers, config)
