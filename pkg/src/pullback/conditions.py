"""Quantitative checks of the tail and asymptotic-autonomy hypotheses.

Stable condition ids: ``tempered``, ``cond_g``, ``cond_g2``, ``g1_window``,
``remark_pointwise``, ``gap_7_1``, ``gap_15_1``, ``gap_16_4``, ``gap_24_00``.

A sampled sequence "tends to zero" when its last value (in the direction of
approach) is at most ``eps_cond`` and its last three values are
non-increasing. Suprema over balls and over pullback lengths are sampled on
finite ensembles and grids; the grids are recorded in every report.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .dynamics import EmbeddedSemigroup, evolve_process, evolve_semigroup
from .errors import ContractViolation
from .forcing import DivergentIntegralError
from .sampling import unit_ball_points

EPS_COND = 1e-6
TAU_MAX = 40.0
ENVELOPE_ATOL = 1e-8

CONDITION_IDS = ("tempered", "cond_g", "cond_g2", "g1_window", "remark_pointwise",
                 "gap_7_1", "gap_15_1", "gap_16_4", "gap_24_00")


def decays(values, eps=EPS_COND):
    """Finite-data surrogate for ``values -> 0`` (values in approach order)."""
    v = [float(x) for x in values]
    if not v or not math.isfinite(v[-1]) or v[-1] > eps:
        return False
    tail = v[-3:]
    return all(b <= a for a, b in zip(tail, tail[1:]))


@dataclass
class TailReport:
    condition: str
    grid: np.ndarray
    values: np.ndarray
    verdict: bool
    direction: str = "forward"
    eps: float = EPS_COND

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(self.grid) <= 0):
            raise ContractViolation("tail report grid must be strictly increasing")
        if np.any(self.values < 0) or np.any(np.isnan(self.values)):
            raise ContractViolation("tail values must be nonnegative")


@dataclass
class GapReport:
    condition: str
    times: np.ndarray
    values: np.ndarray
    verdict: bool
    envelope: np.ndarray | None = None
    envelope_dominated: bool | None = None
    direction: str = "forward"
    windows: tuple = ()
    ensemble: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ContractViolation("gap values must be finite and nonnegative")

    def value_at(self, t):
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(t)
        return float(self.values[i])


def _approach_order(grid, values, direction):
    order = np.argsort(grid)
    vals = np.asarray(values, dtype=float)[order]
    return vals if direction == "forward" else vals[::-1]


# ---------------------------------------------------------------------------
# forcing tails


def tempered_check(forcing, lam):
    """``int_{-inf}^0 e^{lam s} ||g(s)||^2 ds``; raises on divergence."""
    return forcing.weighted_sq_integral(-math.inf, 0.0, lam, ref=0.0)


def forward_l2_tail(forcing, tau):
    """``int_tau^inf ||g(s) - g0||^2 ds`` (``inf`` when divergent)."""
    try:
        return forcing.perturbation_sq_integral(tau, math.inf)
    except DivergentIntegralError:
        return math.inf


def backward_l2_tail(forcing, tau):
    """``int_{-inf}^tau ||g(s) - g0||^2 ds`` (``inf`` when divergent)."""
    try:
        return forcing.perturbation_sq_integral(-math.inf, tau)
    except DivergentIntegralError:
        return math.inf


def windowed_tail(forcing, t, T):
    """``int_{t-T}^t ||g(s) - g0||^2 ds``."""
    if not T > 0:
        raise ContractViolation("window length must be positive")
    head = forward_l2_tail(forcing, t - T)
    if math.isfinite(head):
        return head - forward_l2_tail(forcing, t)
    return forcing.perturbation_sq_integral(t - T, t)


def tail_report(condition, forcing, grid, eps=EPS_COND, window=None):
    grid = np.asarray(sorted(grid), dtype=float)
    if condition == "cond_g":
        vals, direction = [forward_l2_tail(forcing, s) for s in grid], "forward"
    elif condition == "cond_g2":
        vals, direction = [backward_l2_tail(forcing, s) for s in grid], "backward"
    elif condition == "g1_window":
        if window is None:
            raise ContractViolation("g1_window needs a window length")
        vals, direction = [windowed_tail(forcing, s, window) for s in grid], "forward"
    else:
        raise ValueError(f"unknown tail condition {condition!r}")
    verdict = decays(_approach_order(grid, vals, direction), eps)
    return TailReport(condition, grid, vals, verdict, direction, eps)


def pointwise_limit_check(forcing, direction, grid, eps=EPS_COND):
    """``||g(t) - g0||`` on ``grid`` with a decay verdict in ``direction``."""
    grid = np.asarray(sorted(grid), dtype=float)
    vals = np.asarray(forcing.perturbation_norm(grid), dtype=float)
    verdict = decays(_approach_order(grid, vals, direction), eps)
    return TailReport("remark_pointwise", grid, vals, verdict, direction, eps)


# ---------------------------------------------------------------------------
# autonomy gaps


def ball_states(model, R, m=16, seed=0):
    return R * unit_ball_points(model.dim, model.norm_weight, m, seed)


def _max_norm(model, diff):
    return float(np.max(model.norm(diff)))


def _forcing_of(model):
    if isinstance(model, EmbeddedSemigroup):
        return model.semigroup.process.forcing
    return getattr(model, "forcing", None)


def autonomy_gap_forward(U, S, R, t, T, m=16, seed=0):
    """``max_x ||U(t+T, t, x) - S(T, x)||`` over ``m`` points of the ball of radius ``R``."""
    x = ball_states(U, R, m, seed)
    return _max_norm(U, evolve_process(U, t + T, t, x) - evolve_semigroup(S, T, x))


def autonomy_gap_backward(U, S, R, t, tau_grid, m=16, seed=0):
    """``max_{x, tau} ||U(t, t-tau, x) - S(tau, x)||`` over sampled ``x`` and ``tau``."""
    x = ball_states(U, R, m, seed)
    return max(_max_norm(U, evolve_process(U, t, t - tau, x) - evolve_semigroup(S, tau, x))
               for tau in tau_grid)


def process_gap_backward(U, V, R, t, tau_grid, m=16, seed=0):
    """``max_{x, tau} ||U(t, t-tau, x) - V(t, t-tau, x)||`` for two processes."""
    x = ball_states(U, R, m, seed)
    return max(_max_norm(U, evolve_process(U, t, t - tau, x) - evolve_process(V, t, t - tau, x))
               for tau in tau_grid)


def forward_gap_report(U, S, R, times, windows, eps=EPS_COND, m=16, seed=0,
                       verdict_times=None, growth=1.0):
    """Gap ``max_T max_x ||U(t+T,t,x) - S(T,x)||`` per ``t`` with Gronwall envelopes.

    The envelope for window ``T`` is ``int_t^{t+T} e^{growth (t+T-s)} ||g-g0||^2 ds``;
    dominance is checked on squared gaps with absolute slack ``ENVELOPE_ATOL``.
    """
    times = np.asarray(sorted(set(float(s) for s in times)), dtype=float)
    x = ball_states(U, R, m, seed)
    limit = {T: evolve_semigroup(S, T, x) for T in windows}
    fs = _forcing_of(U)
    vals, env, dominated = [], [], True
    for t in times:
        best, best_env = 0.0, 0.0
        for T in windows:
            gap = _max_norm(U, evolve_process(U, t + T, t, x) - limit[T])
            if fs is not None:
                e_sq = fs.perturbation_sq_integral(t, t + T, weight_rate=-growth, ref=t + T)
                dominated &= gap * gap <= e_sq + ENVELOPE_ATOL
                best_env = max(best_env, math.sqrt(e_sq))
            best = max(best, gap)
        vals.append(best)
        env.append(best_env)
    vt = times if verdict_times is None else np.asarray(sorted(verdict_times), dtype=float)
    vv = [vals[int(np.argmin(np.abs(times - s)))] for s in vt]
    verdict = decays(_approach_order(vt, vv, "forward"), eps)
    return GapReport("gap_7_1", times, vals, verdict,
                     envelope=np.asarray(env) if fs is not None else None,
                     envelope_dominated=dominated if fs is not None else None,
                     direction="forward", windows=tuple(windows),
                     ensemble={"m": m, "seed": seed, "radius": R})


def _difference_tail(fa, fb, t):
    # int_{-inf}^t ||g_a(s) - g_b(s)||^2 ds
    if fb is None or fa is None:
        return None
    if np.array_equal(fa.g0, fb.g0) and fb.is_autonomous:
        return fa.perturbation_sq_integral(-math.inf, t)
    w = fa.weight
    dg0 = fa.g0 - fb.g0

    def integrand(s):
        d = dg0 + float(fa.amplitude(s)) * fa.phi - float(fb.amplitude(s)) * fb.phi
        return w * float(np.dot(d, d))

    # relative tolerance only: the tail can be far below any fixed absolute floor
    val, err = integrate.quad(integrand, -math.inf, t, limit=200, epsabs=0.0, epsrel=1e-12)
    if not math.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
        return math.inf
    return val


def backward_gap_report(U, V, R, times, tau_grid, eps=EPS_COND, m=16, seed=0,
                        verdict_times=None):
    """Sampled ``sup_{x, tau} ||U(t,t-tau,x) - V(t,t-tau,x)||`` over backward times.

    ``V`` is either a second process or an :class:`EmbeddedSemigroup`, in
    which case the condition id is ``gap_16_4`` and the semigroup side is
    evaluated once per ``tau`` (exact by translation invariance). The
    envelope is ``sqrt(int_{-inf}^t ||g_U - g_V||^2 ds)``, valid for ``lam >= 1/2``.
    """
    tau_grid = tuple(float(s) for s in tau_grid)
    if not tau_grid or min(tau_grid) <= 0:
        raise ContractViolation("tau grid must be nonempty and positive")
    times = np.asarray(sorted(set(float(s) for s in times)), dtype=float)
    embedded = isinstance(V, EmbeddedSemigroup)
    x = ball_states(U, R, m, seed)
    cached = {tau: evolve_process(V, tau, 0.0, x) for tau in tau_grid} if embedded else {}
    fa, fb = _forcing_of(U), _forcing_of(V)
    vals, env = [], []
    dominated = True
    for t in times:
        gap = 0.0
        for tau in tau_grid:
            other = cached[tau] if embedded else evolve_process(V, t, t - tau, x)
            gap = max(gap, _max_norm(U, evolve_process(U, t, t - tau, x) - other))
        vals.append(gap)
        tail = _difference_tail(fa, fb, t)
        if tail is not None:
            env.append(math.sqrt(tail))
            dominated &= gap * gap <= tail + ENVELOPE_ATOL
    vt = times if verdict_times is None else np.asarray(sorted(verdict_times), dtype=float)
    vv = [vals[int(np.argmin(np.abs(times - s)))] for s in vt]
    verdict = decays(_approach_order(vt, vv, "backward"), eps)
    has_env = len(env) == len(times)
    return GapReport("gap_16_4" if embedded else "gap_24_00", times, vals, verdict,
                     envelope=np.asarray(env) if has_env else None,
                     envelope_dominated=dominated if has_env else None,
                     direction="backward", windows=tau_grid,
                     ensemble={"m": m, "seed": seed, "radius": R, "tau_max": max(tau_grid)})


def autonomy_gap_sequence(U, S, anchor, x0, T, times, eps=EPS_COND):
    """``||U(t, t-T, x_t) - S(T, x0)||`` along an anchor sequence ``x_t = anchor(t)``.

    Only a sampled probe: the underlying condition quantifies over every
    sequence converging to ``x0``.
    """
    times = np.asarray(sorted(times), dtype=float)
    target = evolve_semigroup(S, T, x0)
    vals = [float(U.norm(evolve_process(U, t, t - T, anchor(t)) - target)) for t in times]
    verdict = decays(_approach_order(times, vals, "backward"), eps)
    return GapReport("gap_15_1", times, vals, verdict, direction="backward", windows=(T,))
