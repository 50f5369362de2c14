"""Hausdorff semi-metric and metric between finite point clouds.

Every cloud carries the weight of its ambient norm, ``||v||^2 = w * sum(v_i^2)``:
``w = 1`` gives the Euclidean norm (absolute value in one dimension), ``w = h``
the discrete L2 norm of a grid function with spacing ``h``.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

# rows of A per block when forming pairwise differences
_BLOCK = 256


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Nonempty finite set of state vectors, one per row of ``points``."""

    points: np.ndarray
    weight: float = 1.0

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            # a 1-D input is a list of scalar states
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ContractViolation(f"points must be a 2-D array, got shape {pts.shape}")
        if pts.shape[0] == 0 or pts.shape[1] == 0:
            raise ContractViolation("a point cloud must be nonempty")
        if not np.all(np.isfinite(pts)):
            raise ContractViolation("point coordinates must be finite")
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise ContractViolation("norm weight must be positive and finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weight", float(self.weight))

    @classmethod
    def singleton(cls, x, weight=1.0):
        return cls(np.atleast_1d(np.asarray(x, dtype=float))[None, :], weight)

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def norms(self):
        return np.sqrt(self.weight * np.sum(self.points * self.points, axis=1))

    def diameter(self):
        return _pairwise_extreme(self, self, reduce="max")

    def as_set(self):
        return {tuple(p) for p in self.points.tolist()}

    def __repr__(self):
        return f"PointCloud(n={len(self)}, dim={self.dim}, weight={self.weight:g})"


def _check_compatible(A, B):
    if A.dim != B.dim:
        raise ContractViolation(f"dimension mismatch: {A.dim} != {B.dim}")
    if A.weight != B.weight:
        raise ContractViolation(f"norm weight mismatch: {A.weight} != {B.weight}")


def _sq_dists_block(a, b):
    diff = a[:, None, :] - b[None, :, :]
    return np.sum(diff * diff, axis=2)


def _tiny_min_dist(a, B):
    # squares of differences below ~1e-154 underflow; rescale to recover them
    diff = B - a
    s = np.max(np.abs(diff), axis=1)
    s[s == 0.0] = 1.0
    return float(np.min(s * np.sqrt(np.sum((diff / s[:, None]) ** 2, axis=1))))


def _pairwise_extreme(A, B, reduce="min"):
    # reduce="min": max_a min_b ||a-b||;  reduce="max": max_a max_b ||a-b||
    _check_compatible(A, B)
    best, tiny = 0.0, 0.0
    for start in range(0, len(A), _BLOCK):
        block = A.points[start:start + _BLOCK]
        sq = _sq_dists_block(block, B.points)
        row = sq.min(axis=1) if reduce == "min" else sq.max(axis=1)
        best = max(best, float(row.max()))
        if reduce == "min" and best == 0.0:
            for i in np.flatnonzero(row == 0.0):
                tiny = max(tiny, _tiny_min_dist(block[i], B.points))
    # sqrt is monotone, so taking it after the reductions keeps results exact
    return math.sqrt(A.weight * best) if best > 0.0 else math.sqrt(A.weight) * tiny


def semi_dist(A, B):
    """Hausdorff semi-metric ``max_{a in A} min_{b in B} ||a - b||``."""
    return _pairwise_extreme(A, B, reduce="min")


def hausdorff_dist(A, B):
    """Hausdorff metric ``max(semi_dist(A, B), semi_dist(B, A))``."""
    return max(semi_dist(A, B), semi_dist(B, A))


def radius(A):
    """Largest norm of a point of ``A``."""
    return float(A.norms().max())


@dataclass(frozen=True)
class FamilyDiagnostics:
    time_range: tuple
    max_radius: float
    argmax_t: float
    bounded: bool
    direction: str = "forward"


def _slices_of(family):
    if isinstance(family, Mapping):
        return family
    return family.slices


def family_diagnostics(family, direction="forward"):
    """Maximal slice radius over ``t >= 0`` (forward) or ``t <= 0`` (backward).

    ``family`` is either a mapping ``t -> PointCloud`` or an object with a
    ``slices`` mapping (e.g. an ``AttractorFamily``).
    """
    if direction not in ("forward", "backward"):
        raise ValueError(f"unknown direction {direction!r}")
    slices = _slices_of(family)
    keep = sorted(t for t in slices if (t >= 0 if direction == "forward" else t <= 0))
    if not keep:
        raise ContractViolation(f"no slices in the {direction} time range")
    radii = [radius(slices[t]) for t in keep]
    i = int(np.argmax(radii))
    return FamilyDiagnostics(
        time_range=(keep[0], keep[-1]),
        max_radius=radii[i],
        argmax_t=keep[i],
        bounded=math.isfinite(radii[i]),
        direction=direction,
    )
