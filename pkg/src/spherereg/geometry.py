"""Small-dimension linear algebra on the unit sphere.

Everything here works on plain ``numpy`` arrays; a unit vector is a 1-d float
array whose Euclidean norm is one up to :data:`TAU`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

#: tolerance for geometric predicates (zero norms, constraint satisfaction)
TAU = 1e-9
#: tolerance for orthogonality residuals
ORTHO_TOL = 1e-12


def is_unit(x, tol=TAU):
    return abs(np.linalg.norm(x) - 1.0) <= tol


def orthogonality_residual(m):
    """Entrywise max of ``|M^T M - I|``."""
    m = np.asarray(m, dtype=float)
    return float(np.max(np.abs(m.T @ m - np.eye(m.shape[1]))))


def householder_vector(a, tol=TAU):
    """Return ``v`` with ``(I - 2 v v^T) a/|a| = e_d``, or ``None`` if already aligned.

    ``v`` is normalised, so the reflection is ``I - 2 outer(v, v)``.
    """
    a = np.asarray(a, dtype=float)
    norm = np.linalg.norm(a)
    if norm <= tol:
        raise ValueError("degenerate direction")
    u = a / norm
    v = u.copy()
    v[-1] -= 1.0
    vnorm = np.linalg.norm(v)
    if vnorm <= tol:
        return None
    return v / vnorm


def align_to_last_axis(a):
    """Orthogonal ``R`` (a Householder reflection) with ``R a/|a| = e_d``.

    Identity is returned when ``a`` already points along ``e_d``.  ``R`` is
    symmetric, so it is its own inverse.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size < 1:
        raise ValueError("expected a non-empty 1-d vector")
    v = householder_vector(a)
    d = a.size
    if v is None:
        return np.eye(d)
    return np.eye(d) - 2.0 * np.outer(v, v)


def geodesic(x, y):
    """Great-circle distance between unit vectors (row-wise for 2-d input)."""
    dot = np.clip(np.sum(np.asarray(x) * np.asarray(y), axis=-1), -1.0, 1.0)
    return np.arccos(dot)


@dataclass(frozen=True)
class SphereGrid:
    """Deterministic point set on S^1 (equal angles) or S^2 (Fibonacci lattice)."""

    dimension: int
    resolution: int
    points: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.points)

    @cached_property
    def nearest_gap(self):
        """Largest geodesic distance from a grid point to its nearest neighbour."""
        if self.dimension == 2:
            return 2.0 * math.pi / self.resolution
        from scipy.spatial import cKDTree

        dist, _ = cKDTree(self.points).query(self.points, k=2)
        chord = float(dist[:, 1].max())
        return 2.0 * math.asin(min(1.0, chord / 2.0))

    @cached_property
    def covering_radius(self):
        """Largest geodesic distance from any point of the sphere to the grid.

        Every unit vector has a grid point at most this far away, which is what
        makes grid minima usable as sound bounds.  On S^2 the farthest points are
        the circumcentres of the spherical Delaunay triangles, read off the
        convex hull facets.
        """
        if self.dimension == 2:
            return math.pi / self.resolution
        from scipy.spatial import ConvexHull

        hull = ConvexHull(self.points)
        p = self.points[hull.simplices]  # (T, 3, 3)
        normals = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        # orient outward so the circumcentre is on the near side of the sphere
        sign = np.sign(np.sum(normals * p[:, 0], axis=1))
        normals *= sign[:, None]
        return float(geodesic(normals, p[:, 0]).max())


def sphere_grid(d, resolution):
    """Unit vectors spread over S^{d-1} for ``d`` in {2, 3}."""
    if d not in (2, 3):
        raise ValueError("oracle supports d <= 3")
    resolution = int(resolution)
    if resolution < 4:
        raise ValueError("resolution must be at least 4")
    k = np.arange(resolution, dtype=float)
    if d == 2:
        theta = 2.0 * np.pi * k / resolution
        pts = np.column_stack([np.cos(theta), np.sin(theta)])
    else:
        golden = math.pi * (3.0 - math.sqrt(5.0))
        z = 1.0 - (2.0 * k + 1.0) / resolution
        rad = np.sqrt(1.0 - z * z)
        theta = golden * k
        pts = np.column_stack([rad * np.cos(theta), rad * np.sin(theta), z])
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    pts.setflags(write=False)
    return SphereGrid(d, resolution, pts)
