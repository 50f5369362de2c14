"""Processes, semigroups and their axioms on a fixed time lattice.

All evolution times are integer multiples of the model step ``dt``; step ``k``
advances the state from ``k*dt`` to ``(k+1)*dt``. Since every stepper is a
deterministic function of ``(x, k)``, identity and cocycle properties hold
bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

_ALIGN_RTOL = 1e-9


def lattice_index(t, dt):
    """Index ``k`` with ``t == k*dt``; raises if ``t`` is off the lattice."""
    q = t / dt
    k = round(q)
    if abs(q - k) > _ALIGN_RTOL * max(1.0, abs(q)):
        raise ContractViolation(f"time {t!r} is not a multiple of dt={dt!r}")
    return int(k)


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    dt: float
    n_steps: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ContractViolation("dt must be positive")
        if self.n_steps < 1:
            raise ContractViolation("n_steps must be positive")
        lattice_index(self.t_start, self.dt)

    @property
    def k_start(self):
        return lattice_index(self.t_start, self.dt)

    @property
    def times(self):
        return (self.k_start + np.arange(self.n_steps + 1)) * self.dt

    @property
    def t_end(self):
        return (self.k_start + self.n_steps) * self.dt


class ProcessModel:
    """Two-parameter evolution ``U(t, tau, x)`` driven by a single-step map.

    Subclasses implement :meth:`step`. States are arrays of shape ``(dim,)``
    or batches of shape ``(m, dim)``. ``norm_weight`` defines the ambient
    norm shared with :class:`~pullback.metric.PointCloud`.
    """

    name = "process"

    def __init__(self, dim, dt, norm_weight=1.0, params=None):
        if dim < 1:
            raise ContractViolation("state dimension must be positive")
        if not dt > 0:
            raise ContractViolation("dt must be positive")
        self.dim = int(dim)
        self.dt = float(dt)
        self.norm_weight = float(norm_weight)
        self.params = dict(params or {})

    def step(self, x, k):
        raise NotImplementedError

    def advance(self, x, k0, n):
        """Apply ``n`` steps starting at lattice index ``k0``."""
        for k in range(k0, k0 + n):
            x = self.step(x, k)
        return x

    def norm(self, x):
        x = np.asarray(x, dtype=float)
        return np.sqrt(self.norm_weight * np.sum(x * x, axis=-1))

    def _check_state(self, x):
        x = np.array(x, dtype=float)
        if x.shape[-1:] != (self.dim,) or x.ndim > 2:
            raise ContractViolation(f"state shape {x.shape} incompatible with dim={self.dim}")
        return x

    def evolve(self, t, tau, x):
        return evolve_process(self, t, tau, x)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, dt={self.dt:g})"


class SemigroupModel:
    """Time-homogeneous evolution ``S(T, x)`` of an autonomous process.

    Wraps a :class:`ProcessModel` whose step does not depend on time; the
    semigroup always steps from lattice index 0.
    """

    def __init__(self, process):
        if not getattr(process, "is_autonomous", False):
            raise ContractViolation("a semigroup needs an autonomous (time-independent) process")
        self.process = process
        self.dim = process.dim
        self.dt = process.dt
        self.norm_weight = process.norm_weight
        self.name = f"semigroup[{process.name}]"

    def advance(self, x, n):
        return self.process.advance(x, 0, n)

    def norm(self, x):
        return self.process.norm(x)

    def absorbing_radius(self, t=0.0):
        return self.process.absorbing_radius(0.0)

    def evolve(self, T, x):
        return evolve_semigroup(self, T, x)

    def __repr__(self):
        return f"SemigroupModel({self.process!r})"


class EmbeddedSemigroup(ProcessModel):
    """The process ``U(t, s, x) := S(t - s, x)`` generated by a semigroup."""

    is_autonomous = True

    def __init__(self, semigroup):
        super().__init__(semigroup.dim, semigroup.dt, semigroup.norm_weight)
        self.semigroup = semigroup
        self.name = f"embedded[{semigroup.process.name}]"

    def step(self, x, k):
        return self.semigroup.advance(x, 1)

    def advance(self, x, k0, n):
        return self.semigroup.advance(x, n)

    def absorbing_radius(self, t=0.0):
        return self.semigroup.absorbing_radius(0.0)


def evolve_process(model, t, tau, x):
    """``U(t, tau, x)`` for lattice-aligned ``tau <= t``."""
    if t < tau:
        raise ContractViolation(f"cannot evolve backwards: t={t!r} < tau={tau!r}")
    k0 = lattice_index(tau, model.dt)
    k1 = lattice_index(t, model.dt)
    x = model._check_state(x)
    if k1 == k0:
        return x
    return model.advance(x, k0, k1 - k0)


def evolve_semigroup(model, T, x):
    """``S(T, x)`` for a lattice-aligned duration ``T >= 0``."""
    if T < 0:
        raise ContractViolation(f"semigroup time must be nonnegative, got {T!r}")
    n = lattice_index(T, model.dt)
    x = model.process._check_state(x)
    if n == 0:
        return x
    return model.advance(x, n)


def embed_semigroup_as_process(S):
    return EmbeddedSemigroup(S)


def check_axioms(model, triples, states):
    """Largest identity/cocycle defect over sample triples and states.

    For a :class:`ProcessModel` the triples are ``(tau, s, t)`` with
    ``tau <= s <= t``; for a :class:`SemigroupModel` they are ``(0, s, t)``
    and the cocycle law reads ``S(t, x) = S(t - s, S(s, x))``.
    """
    worst = 0.0
    states = np.atleast_2d(np.asarray(states, dtype=float))
    for tau, s, t in triples:
        if not tau <= s <= t:
            raise ContractViolation(f"triple ({tau}, {s}, {t}) is not ordered")
        for x in states:
            if isinstance(model, SemigroupModel):
                ident = evolve_semigroup(model, 0.0, x)
                direct = evolve_semigroup(model, t - tau, x)
                composed = evolve_semigroup(model, t - s, evolve_semigroup(model, s - tau, x))
            else:
                ident = evolve_process(model, tau, tau, x)
                direct = evolve_process(model, t, tau, x)
                composed = evolve_process(model, t, s, evolve_process(model, s, tau, x))
            worst = max(worst,
                        float(model.norm(ident - x)),
                        float(model.norm(composed - direct)))
    return worst


def lipschitz_ratio(model, t, tau, x, y):
    """``||U(t,tau,x) - U(t,tau,y)|| / ||x - y||`` for a pair of distinct states."""
    num = float(model.norm(evolve_process(model, t, tau, x) - evolve_process(model, t, tau, y)))
    den = float(model.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)))
    if den == 0.0:
        raise ContractViolation("Lipschitz ratio needs distinct states")
    return num / den if math.isfinite(num) else math.inf
