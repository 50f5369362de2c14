"""Concrete dissipative systems: a solvable scalar ODE and a 1-D reaction-diffusion PDE.

Scalar model::

    x' = -lam * x + g(t),            g(t) = g0 + h(t) * phi

stepped with an exponential integrator (exact linear part, Gauss-Legendre
quadrature of the forcing convolution over each step).

Reaction-diffusion model on ``[-L, L]`` with homogeneous Dirichlet data::

    u_t - u_xx + lam * u + f(u) = g(x, t)

discretised by second differences on ``N`` interior nodes and stepped by
first-order IMEX: diffusion and ``lam * u`` implicit, ``f(u)`` and ``g``
explicit at the left end of the step.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import solve_banded
from scipy.linalg.lapack import dpttrf, dpttrs

from . import forcing as fc
from .dynamics import ProcessModel, SemigroupModel, lattice_index
from .errors import BlowUpError, ContractViolation, NonConvergenceError

log = logging.getLogger(__name__)

# lattice steps per cached forcing block; step k always lives at the same
# position of block k // _CHUNK, which keeps evaluation bitwise reproducible
_CHUNK = 4096
_MAX_BLOCKS = 256
_GL_NODES = 4
_BLOWUP_CHECK_EVERY = 256


class _BlockCache:
    def __init__(self, build):
        self._build = build
        self._blocks = {}

    def __call__(self, c):
        blk = self._blocks.get(c)
        if blk is None:
            if len(self._blocks) >= _MAX_BLOCKS:
                self._blocks.clear()
            blk = self._build(c)
            blk.setflags(write=False)
            self._blocks[c] = blk
        return blk


# ---------------------------------------------------------------------------
# nonlinearities


@dataclass(frozen=True)
class Nonlinearity:
    name: str
    f: object = field(repr=False)
    df: object = field(repr=False)


NONLINEARITIES = {
    "cubic": Nonlinearity("cubic", lambda u: u * u * u, lambda u: 3.0 * u * u),
    "linear": Nonlinearity("linear", lambda u: u, lambda u: np.ones_like(u)),
    "zero": Nonlinearity("zero", lambda u: np.zeros_like(u), lambda u: np.zeros_like(u)),
    "negative_linear": Nonlinearity("negative_linear", lambda u: -u, lambda u: -np.ones_like(u)),
}


@dataclass(frozen=True)
class NonlinearityReport:
    """Largest violation of each structural condition; all <= 0 when compliant."""

    sign: float
    origin: float
    lower_derivative: float
    growth: float
    # well-posedness is only validated for growth exponents p <= 2
    validated: bool = True

    @property
    def compliant(self):
        return max(self.sign, self.origin, self.lower_derivative, self.growth) <= 0.0


def check_nonlinearity(f, c, p, u_max=10.0, n=2001):
    """Sample ``f(u)u >= 0``, ``f(0) = 0``, ``f' >= -c`` and ``|f'| <= c(1+|u|^p)``."""
    if isinstance(f, str):
        f = NONLINEARITIES[f]
    if n < 1000:
        raise ContractViolation("sample at least 10^3 points")
    u = np.linspace(-u_max, u_max, n)
    fu, dfu = f.f(u), f.df(u)
    if p > 2:
        log.warning("growth exponent p=%g > 2 is outside the validated range", p)
    return NonlinearityReport(
        sign=float(np.max(-fu * u)),
        origin=abs(float(f.f(np.zeros(1))[0])),
        lower_derivative=float(np.max(-c - dfu)),
        growth=float(np.max(np.abs(dfu) - c * (1.0 + np.abs(u) ** p))),
        validated=p <= 2,
    )


# ---------------------------------------------------------------------------
# models


class _ForcedModel(ProcessModel):
    """Common plumbing for models driven by a :class:`~pullback.forcing.ForcingSpec`."""

    def __init__(self, dim, dt, lam, forcing, norm_weight, params):
        if not lam > 0:
            raise ContractViolation("decay rate lam must be positive")
        super().__init__(dim, dt, norm_weight, params)
        if forcing.dim != dim:
            raise ContractViolation("forcing dimension does not match the state dimension")
        if forcing.weight != norm_weight:
            raise ContractViolation("forcing and state norms differ")
        self.lam = float(lam)
        self.forcing = forcing

    @property
    def is_autonomous(self):
        return self.forcing.is_autonomous

    def with_forcing(self, forcing):
        raise NotImplementedError

    def autonomous_limit(self):
        return self.with_forcing(self.forcing.limit())

    def semigroup(self):
        """Semigroup of the limiting autonomous equation (forcing ``g0``)."""
        return SemigroupModel(self.autonomous_limit())

    def absorbing_radius(self, t):
        return absorbing_radius(self, t)

    def trajectory(self, tau, t, x0, stride=1):
        return trajectory(self, tau, t, x0, stride)


class ScalarLinearModel(_ForcedModel):
    """``x' = -lam x + g(t)`` in one dimension with ``phi = 1`` by default."""

    def __init__(self, lam, forcing, dt=1e-3, name="scalar"):
        super().__init__(forcing.dim, dt, lam, forcing, forcing.weight,
                         {"lam": lam, "amplitude": repr(forcing.amplitude)})
        self.name = name
        self._decay = math.exp(-self.lam * self.dt)
        self._g0_step = self.forcing.g0 * (-math.expm1(-self.lam * self.dt) / self.lam)
        nodes, weights = leggauss(_GL_NODES)
        self._nodes = 0.5 * (nodes + 1.0)
        self._wexp = 0.5 * weights * np.exp(-self.lam * self.dt * (1.0 - self._nodes))
        self._increments = _BlockCache(self._build_block)

    @classmethod
    def from_scalars(cls, lam, g0, amplitude, phi=1.0, dt=1e-3, name="scalar"):
        return cls(lam, fc.ForcingSpec([g0], [phi], amplitude), dt=dt, name=name)

    def with_forcing(self, forcing):
        return ScalarLinearModel(self.lam, forcing, dt=self.dt, name=self.name + "-limit")

    def _build_block(self, c):
        ks = np.arange(c * _CHUNK, (c + 1) * _CHUNK, dtype=float)
        if self.forcing.amplitude.is_zero:
            q = np.zeros(_CHUNK)
        else:
            s = (ks[:, None] + self._nodes[None, :]) * self.dt
            q = self.dt * np.sum(np.asarray(self.forcing.amplitude(s)) * self._wexp, axis=1)
        return self._g0_step[None, :] + q[:, None] * self.forcing.phi[None, :]

    def step(self, x, k):
        c, j = divmod(k, _CHUNK)
        return self._decay * x + self._increments(c)[j]

    def advance(self, x, k0, n):
        E = self._decay
        k, end = k0, k0 + n
        while k < end:
            c, off = divmod(k, _CHUNK)
            block = self._increments(c)
            stop = min(end - c * _CHUNK, _CHUNK)
            for j in range(off, stop):
                x = E * x + block[j]
            k = c * _CHUNK + stop
        return x


class ReactionDiffusionModel(_ForcedModel):
    """Semilinear heat equation on ``[-L, L]`` with Dirichlet data, IMEX stepping."""

    def __init__(self, L, N, lam, nonlinearity, forcing, dt=1e-3, name="rd"):
        h = 2.0 * L / (N + 1)
        if isinstance(nonlinearity, str):
            nonlinearity = NONLINEARITIES[nonlinearity]
        super().__init__(N, dt, lam, forcing, h,
                         {"L": L, "N": N, "lam": lam, "f": nonlinearity.name,
                          "amplitude": repr(forcing.amplitude)})
        self.name = name
        self.L = float(L)
        self.N = int(N)
        self.h = h
        self.x = -self.L + h * np.arange(1, N + 1)
        self.nonlinearity = nonlinearity
        d = np.full(N, 1.0 + dt * (self.lam + 2.0 / h**2))
        e = np.full(N - 1, -dt / h**2)
        self._d, self._e, info = dpttrf(d, e)
        if info != 0:
            raise ContractViolation(f"implicit operator factorisation failed (info={info})")
        self._dt_g0 = (self.dt * self.forcing.g0)[:, None]
        self._phi = self.forcing.phi[:, None]
        self._amplitudes = _BlockCache(self._build_block)

    @classmethod
    def grid(cls, L, N):
        h = 2.0 * L / (N + 1)
        return -L + h * np.arange(1, N + 1)

    def with_forcing(self, forcing):
        return ReactionDiffusionModel(self.L, self.N, self.lam, self.nonlinearity, forcing,
                                      dt=self.dt, name=self.name + "-limit")

    def _build_block(self, c):
        ks = np.arange(c * _CHUNK, (c + 1) * _CHUNK, dtype=float)
        return self.dt * np.asarray(self.forcing.amplitude(ks * self.dt), dtype=float)

    def _rhs(self, X, dth):
        rhs = X - self.dt * self.nonlinearity.f(X) + self._dt_g0
        if dth != 0.0:
            rhs = rhs + dth * self._phi
        return rhs

    def step(self, x, k):
        return self.advance(x, k, 1)

    def advance(self, x, k0, n):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = x[:, None] if single else x.T
        perturbed = not self.forcing.amplitude.is_zero
        k, end = k0, k0 + n
        with np.errstate(over="ignore", invalid="ignore"):
            while k < end:
                c, off = divmod(k, _CHUNK)
                dth = self._amplitudes(c) if perturbed else None
                stop = min(end - c * _CHUNK, _CHUNK)
                for j in range(off, stop):
                    rhs = self._rhs(X, dth[j] if perturbed else 0.0)
                    X, _ = dpttrs(self._d, self._e, rhs)
                    if (j - off) % _BLOWUP_CHECK_EVERY == 0 and not np.all(np.isfinite(X)):
                        raise BlowUpError("non-finite state in reaction-diffusion step",
                                          t=(c * _CHUNK + j + 1) * self.dt)
                k = c * _CHUNK + stop
        if not np.all(np.isfinite(X)):
            raise BlowUpError("non-finite state in reaction-diffusion step", t=end * self.dt)
        return X[:, 0].copy() if single else X.T.copy()

    def laplacian_eigenvalue(self, k):
        """Eigenvalue of ``-Delta_h`` for the mode ``sin(pi k (x + L) / (2L))``."""
        return 4.0 * math.sin(math.pi * k * self.h / (4.0 * self.L)) ** 2 / self.h**2

    def neg_laplacian(self, u):
        u = np.asarray(u, dtype=float)
        out = 2.0 * u
        out[1:] -= u[:-1]
        out[:-1] -= u[1:]
        return out / self.h**2


def rd_step(model, state, t):
    """One IMEX step of the reaction-diffusion model from lattice time ``t``."""
    return model.step(model._check_state(state), lattice_index(t, model.dt))


def rd_steady_state(model, tol=1e-10, max_iter=50):
    """Newton solve of ``-Delta_h u + lam u + f(u) = g0`` starting from zero."""
    g0 = model.forcing.g0
    u = np.zeros(model.N)
    off = np.full(model.N, -1.0 / model.h**2)
    history = []
    for _ in range(max_iter):
        F = model.neg_laplacian(u) + model.lam * u + model.nonlinearity.f(u) - g0
        res = float(model.norm(F))
        history.append(res)
        if res <= tol:
            return u
        if len(history) > 5 and res >= 0.5 * history[-5]:
            break
        ab = np.empty((3, model.N))
        ab[0] = off
        ab[1] = 2.0 / model.h**2 + model.lam + model.nonlinearity.df(u)
        ab[2] = off
        u = u + solve_banded((1, 1), ab, -F)
    raise NonConvergenceError("Newton iteration for the steady state stagnated",
                              last_defect=history[-1], history=history)


# ---------------------------------------------------------------------------
# closed forms and monitors


def scalar_exact_pullback(model, t):
    """Bounded entire solution ``a(t) = int_{-inf}^t exp(-lam (t-s)) g(s) ds``.

    This is the single point of the pullback attractor of the scalar model.
    Raises ``DivergentIntegralError`` for forcings that are not tempered.
    """
    fs = model.forcing
    val = fs.g0 / model.lam
    if not fs.amplitude.is_zero:
        val = val + fs.phi * fs.amplitude.integral(-math.inf, t, 1, model.lam, ref=t)
    return float(val[0]) if val.size == 1 else val


def absorbing_radius(model, t):
    """Radius of the absorbing ball ``||u||^2 <= (1/lam) int_{-inf}^t e^{lam(s-t)} ||g||^2 ds + 1``."""
    past = model.forcing.weighted_sq_integral(-math.inf, t, model.lam, ref=t)
    return math.sqrt(past / model.lam + 1.0)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray


def trajectory(model, tau, t, x0, stride=1):
    """States of ``U(s, tau, x0)`` at every ``stride``-th lattice time in ``[tau, t]``."""
    k0, k1 = lattice_index(tau, model.dt), lattice_index(t, model.dt)
    if k1 < k0:
        raise ContractViolation("trajectory end precedes its start")
    x = model._check_state(x0)
    times, states = [k0 * model.dt], [x]
    k = k0
    while k < k1:
        n = min(stride, k1 - k)
        x = model.advance(x, k, n)
        k += n
        times.append(k * model.dt)
        states.append(x)
    return Trajectory(np.array(times), np.array(states))


def _relative_excess(values, bounds):
    worst = -math.inf
    for v, b in zip(values, bounds):
        if b > 0:
            worst = max(worst, (v - b) / b)
        else:
            worst = max(worst, math.inf if v > 0 else 0.0)
    return worst


def energy_bound(model, tau, t, u0_sq):
    """``e^{lam(tau-t)} ||u0||^2 + (1/lam) int_tau^t e^{lam(s-t)} ||g(s)||^2 ds``."""
    lam = model.lam
    return (math.exp(lam * (tau - t)) * u0_sq
            + model.forcing.weighted_sq_integral(tau, t, lam, ref=t) / lam)


def energy_monitor(model, traj):
    """Worst relative excess of ``||u(t)||^2`` over its dissipative energy bound.

    Negative values mean every sampled time satisfies the bound with slack.
    """
    tau = float(traj.times[0])
    sq = model.norm(traj.states) ** 2
    bounds = [energy_bound(model, tau, float(t), float(sq[0])) for t in traj.times]
    return _relative_excess(sq[1:], bounds[1:])


def difference_envelope(model, tau, t, growth=1.0):
    """``int_tau^t e^{growth (t-s)} ||g(s) - g0||^2 ds``."""
    return model.forcing.perturbation_sq_integral(tau, t, weight_rate=-growth, ref=t)


def difference_monitor(model, x0, tau, t, stride=1, growth=1.0):
    """Worst relative excess of ``||u_g - u_g0||^2`` over its Gronwall envelope.

    Both trajectories start from ``x0`` at ``tau``; one is driven by ``g``,
    the other by the limit ``g0``.
    """
    u = trajectory(model, tau, t, x0, stride)
    v = trajectory(model.autonomous_limit(), tau, t, x0, stride)
    w_sq = model.norm(u.states - v.states) ** 2
    env = [difference_envelope(model, tau, float(s), growth) for s in u.times]
    return _relative_excess(w_sq[1:], env[1:])


# ---------------------------------------------------------------------------
# presets


def gaussian_profile(x):
    return np.exp(-x * x / 4.0)


def manufactured_profile(x, L):
    """Forcing whose steady state (with f = 0, lam = 1) is ``cos(pi x / (2L))``."""
    return (1.0 + math.pi**2 / (4.0 * L**2)) * np.cos(math.pi * x / (2.0 * L))


def preset_s1(dt=1e-3, amplitude=None):
    """lam = 1, g(t) = 2 + exp(-|t|)."""
    amp = fc.two_sided_exp(1.0, 1.0) if amplitude is None else amplitude
    return ScalarLinearModel.from_scalars(1.0, 2.0, amp, dt=dt, name="S1")


def preset_pair(dt=1e-3):
    """Scalar pair with g_A = 2(1 + e^t) and g_B = 2(1 + 2 e^t), lam = 1."""
    A = ScalarLinearModel.from_scalars(1.0, 2.0, fc.exponential(2.0, 1.0), dt=dt, name="PAIR-A")
    B = ScalarLinearModel.from_scalars(1.0, 2.0, fc.exponential(4.0, 1.0), dt=dt, name="PAIR-B")
    return A, B


def preset_r1(L=32.0, N=256, dt=1e-3, lam=1.0, nonlinearity="cubic", amplitude=None,
              g0_scale=1.0):
    """lam = 1, f = u^3, g0 = exp(-x^2/4), g = g0 (1 + exp(-|t|))."""
    x = ReactionDiffusionModel.grid(L, N)
    g0 = g0_scale * gaussian_profile(x)
    amp = fc.two_sided_exp(1.0, 1.0) if amplitude is None else amplitude
    forcing = fc.ForcingSpec(g0, g0, amp, weight=2.0 * L / (N + 1))
    return ReactionDiffusionModel(L, N, lam, nonlinearity, forcing, dt=dt, name="R1")


def preset_manufactured(L=32.0, N=256, dt=1e-3):
    """f = 0, lam = 1, autonomous forcing with exact steady state ``cos(pi x / (2L))``."""
    x = ReactionDiffusionModel.grid(L, N)
    g0 = manufactured_profile(x, L)
    forcing = fc.ForcingSpec(g0, np.zeros_like(g0), fc.zero(), weight=2.0 * L / (N + 1))
    return ReactionDiffusionModel(L, N, 1.0, "zero", forcing, dt=dt, name="MANUFACTURED")
