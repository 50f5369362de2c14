"""Deterministic ensembles inside norm balls (scrambled Sobol points)."""
from __future__ import annotations

import warnings
from functools import lru_cache

import numpy as np
from scipy.stats import qmc

from .errors import ContractViolation


@lru_cache(maxsize=64)
def _unit_ball_points(dim, weight, m, seed):
    sob = qmc.Sobol(d=dim + 1, scramble=True, seed=seed)
    with warnings.catch_warnings():
        # balance warning for non power-of-two sizes is harmless here
        warnings.simplefilter("ignore", UserWarning)
        u = sob.random(m)
    cube = 2.0 * u[:, :dim] - 1.0
    norms = np.sqrt(weight * np.sum(cube * cube, axis=1))
    norms[norms == 0.0] = 1.0
    pts = cube / norms[:, None] * u[:, dim:]
    pts.setflags(write=False)
    return pts


def unit_ball_points(dim, weight, m, seed=0):
    """``m`` points of norm < 1 (ambient weight ``weight``), fixed by ``seed``."""
    if m < 1:
        raise ContractViolation("ensemble size must be positive")
    return _unit_ball_points(int(dim), float(weight), int(m), int(seed))


class BallSampler:
    """Draws the same scaled ensemble inside a ball of radius ``radius(t)``.

    ``radius`` is a number or a callable of time, typically a model's
    absorbing radius.
    """

    def __init__(self, dim, norm_weight, m, radius, seed=0):
        self.dim = int(dim)
        self.norm_weight = float(norm_weight)
        self.m = int(m)
        self.seed = int(seed)
        self._radius = radius
        self._unit = unit_ball_points(self.dim, self.norm_weight, self.m, self.seed)

    def radius(self, t):
        r = self._radius(t) if callable(self._radius) else self._radius
        return float(r)

    def draw(self, t):
        return self.radius(t) * self._unit

    def __repr__(self):
        return f"BallSampler(dim={self.dim}, m={self.m}, seed={self.seed})"


def absorbing_sampler(model, m=16, seed=0):
    """Sampler filling the model's absorbing ball at each time."""
    return BallSampler(model.dim, model.norm_weight, m, model.absorbing_radius, seed)


def fixed_ball_sampler(model, R, m=16, seed=0):
    return BallSampler(model.dim, model.norm_weight, m, float(R), seed)
