"""Pullback attractor approximation and the convergence experiments.

Slices ``A(t)`` are approximated by pulling back a seeded ensemble from the
absorbing ball at ``t - T`` and doubling ``T`` until two consecutive windows
agree in the Hausdorff metric. Global attractors of semigroups are obtained
by forward evolution of an ensemble until it stops moving and collapses.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import conditions as cc
from .dynamics import EmbeddedSemigroup, embed_semigroup_as_process, evolve_process, \
    evolve_semigroup, lattice_index
from .errors import ContractViolation, NonConvergenceError
from .metric import PointCloud, family_diagnostics, hausdorff_dist, semi_dist
from .sampling import absorbing_sampler

log = logging.getLogger(__name__)

REPORT_COLUMNS = ("t", "semi_dist", "hausdorff_dist", "gap", "absorbing_radius")


@dataclass
class AttractorFamily:
    slices: dict
    pullback_window: dict
    cauchy_defect: dict
    ensemble_size: int
    slice_tol: float | None = None

    def __post_init__(self):
        if not self.slices:
            raise ContractViolation("an attractor family needs at least one slice")
        dims = {c.dim for c in self.slices.values()}
        if len(dims) != 1:
            raise ContractViolation("slices of one family must share a dimension")
        if self.slice_tol is not None:
            bad = [t for t, d in self.cauchy_defect.items() if d > self.slice_tol]
            if bad:
                raise ContractViolation(f"slices {bad} exceed the slice tolerance")

    @property
    def times(self):
        return sorted(self.slices)

    def __getitem__(self, t):
        return self.slices[t]


@dataclass
class ConvergenceReport:
    direction: str
    model_ids: tuple
    rows: list
    hypotheses: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        ts = [r[0] for r in self.rows]
        if ts != sorted(ts):
            raise ContractViolation("report rows must be sorted by t")
        for r in self.rows:
            if not all(math.isfinite(v) and v >= 0 for v in r[1:]):
                raise ContractViolation(f"report row {r} has a negative or non-finite entry")

    def column(self, name):
        i = REPORT_COLUMNS.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    @property
    def hypotheses_verified(self):
        return all(self.hypotheses.values())

    @property
    def distance_column(self):
        return "semi_dist" if self.direction == "forward" else "hausdorff_dist"

    def eventual_decay(self):
        """Distance at the extreme time of the grid is no larger than at its midpoint."""
        if not self.rows:
            return False
        d = self.column(self.distance_column)
        ts = self.column("t")
        order = np.argsort(ts) if self.direction == "forward" else np.argsort(-ts)
        d = d[order]
        return bool(d[-1] <= d[len(d) // 2])


# ---------------------------------------------------------------------------
# slices


def _check_window(U, T):
    if not T > 0:
        raise ContractViolation("pullback window must be positive")
    lattice_index(T, U.dt)


def pullback_slice(U, sampler, t, T):
    """``{U(t, t-T, x_i)}`` for the sampler's ensemble in the ball at ``t - T``."""
    _check_window(U, T)
    x = sampler.draw(t - T)
    R = sampler.radius(t - T)
    if np.any(U.norm(x) > R * (1.0 + 1e-12)):
        raise ContractViolation("sampler produced states outside its declared ball")
    return PointCloud(evolve_process(U, t, t - T, x), U.norm_weight)


def pullback_slice_converged(U, sampler, t, tol, T0=5.0, T_max=320.0):
    """Double ``T`` from ``T0`` until ``dist_H(slice_T, slice_{T/2}) <= tol``.

    Returns ``(cloud, T_used, defect)``.
    """
    if not tol > 0:
        raise ContractViolation("tolerance must be positive")
    T = float(T0)
    prev = pullback_slice(U, sampler, t, T / 2)
    history = []
    while True:
        cur = pullback_slice(U, sampler, t, T)
        defect = hausdorff_dist(cur, prev)
        history.append(defect)
        if defect <= tol:
            return cur, T, defect
        if 2 * T > T_max:
            raise NonConvergenceError(
                f"pullback slice at t={t} did not converge up to T={T}",
                last_defect=defect, history=history)
        prev, T = cur, 2 * T


def pullback_family(U, sampler, t_grid, tol, T0=5.0, T_max=320.0, window=None):
    """Slices on ``t_grid``; adaptive windows unless a fixed ``window`` is given.

    With a fixed window the recorded Cauchy defect compares windows ``T`` and
    ``T/2`` and is not checked against ``tol``.
    """
    slices, windows, defects = {}, {}, {}
    for t in sorted(float(s) for s in t_grid):
        if window is None:
            cloud, T, d = pullback_slice_converged(U, sampler, t, tol, T0, T_max)
        else:
            T = float(window)
            cloud = pullback_slice(U, sampler, t, T)
            d = hausdorff_dist(cloud, pullback_slice(U, sampler, t, T / 2))
        slices[t], windows[t], defects[t] = cloud, T, d
    return AttractorFamily(slices, windows, defects, sampler.m,
                           slice_tol=tol if window is None else None)


def global_attractor(S, sampler, tol, T0=5.0, T_max=640.0):
    """Forward-evolve an ensemble until its displacement per doubling and diameter are ``<= tol``."""
    if not tol > 0:
        raise ContractViolation("tolerance must be positive")
    _check_window(S, T0)
    x = evolve_semigroup(S, T0, sampler.draw(0.0))
    total = float(T0)
    prev = PointCloud(x, S.norm_weight)
    while True:
        x = evolve_semigroup(S, total, x)
        total *= 2
        cur = PointCloud(x, S.norm_weight)
        disp, diam = hausdorff_dist(cur, prev), cur.diameter()
        if disp <= tol and diam <= tol:
            log.debug("global attractor converged at T=%g (disp=%.3g, diam=%.3g)", total, disp, diam)
            return cur
        if total > T_max:
            raise NonConvergenceError("global attractor iteration did not converge",
                                      last_defect=max(disp, diam))
        prev = cur


# ---------------------------------------------------------------------------
# certification


def invariance_residual(U, family):
    """``max dist_H(U(t, s, A(s)), A(t))`` over adjacent slice times ``s < t``."""
    ts = family.times
    if len(ts) < 2:
        raise ContractViolation("invariance residual needs at least two slices")
    worst = 0.0
    for s, t in zip(ts, ts[1:]):
        image = PointCloud(evolve_process(U, t, s, family[s].points), family[s].weight)
        worst = max(worst, hausdorff_dist(image, family[t]))
    return worst


def attraction_residual(U, B0, family, T_grid):
    """``[(T, max_t dist(U(t, t-T, B0), A(t)))]`` for each pullback length ``T``."""
    out = []
    for T in T_grid:
        worst = 0.0
        for t in family.times:
            image = PointCloud(evolve_process(U, t, t - T, B0.points), B0.weight)
            worst = max(worst, semi_dist(image, family[t]))
        out.append((float(T), worst))
    return out


# ---------------------------------------------------------------------------
# experiments


def _model_id(model):
    return getattr(model, "name", type(model).__name__)


def forward_convergence_experiment(U, S, t_grid, tol, *, ensemble_size=16, seed=0, T0=5.0,
                                   T_max=320.0, gap_windows=(1.0, 2.0, 4.0), gap_t_grid=None,
                                   eps_cond=cc.EPS_COND, attractor=None):
    """Semi-distance from pullback slices ``A(t)``, ``t >= 0``, to the global attractor of ``S``.

    Hypotheses checked first: forward boundedness of the family and decay of
    the forward autonomy gap. Failures are recorded, not raised.
    """
    if min(t_grid) < 0:
        raise ContractViolation("forward experiments need t >= 0")
    family = pullback_family(U, absorbing_sampler(U, ensemble_size, seed), t_grid, tol, T0, T_max)
    diag = family_diagnostics(family, "forward")
    if attractor is None:
        attractor = global_attractor(S, absorbing_sampler(S, ensemble_size, seed), tol, T0)
    gap_t = list(t_grid) if gap_t_grid is None else list(gap_t_grid)
    gaps = cc.forward_gap_report(U, S, diag.max_radius, list(t_grid) + gap_t, gap_windows,
                                 eps=eps_cond, m=ensemble_size, seed=seed, verdict_times=gap_t)
    rows = []
    for t in family.times:
        A = family[t]
        rows.append((t, semi_dist(A, attractor), hausdorff_dist(A, attractor),
                     gaps.value_at(t), U.absorbing_radius(t)))
    hyp = {"forward_bounded": diag.bounded, "gap_7_1": gaps.verdict}
    if gaps.envelope_dominated is not None:
        hyp["gap_7_1_envelope"] = gaps.envelope_dominated
    report = ConvergenceReport("forward", (_model_id(U), _model_id(S)), rows, hyp,
                               {"diagnostics": diag, "gaps": gaps, "family": family,
                                "attractor": attractor})
    if not report.hypotheses_verified:
        log.warning("forward experiment: hypotheses unverified %s", hyp)
    return report


def attractor_pair_experiment(U, V, t_grid, tol, *, ensemble_size=16, seed=0, T0=5.0,
                              T_max=320.0, tau_grid=(1.0, 2.0, 5.0, 10.0, 20.0, cc.TAU_MAX),
                              gap_t_grid=None, eps_cond=cc.EPS_COND):
    """Semi- and full Hausdorff distances between the attractors of ``U`` and ``V`` as ``t -> -inf``."""
    if max(t_grid) > 0:
        raise ContractViolation("backward experiments need t <= 0")
    fam_u = pullback_family(U, absorbing_sampler(U, ensemble_size, seed), t_grid, tol, T0, T_max)
    fam_v = pullback_family(V, absorbing_sampler(V, ensemble_size, seed), t_grid, tol, T0, T_max)
    diag_u = family_diagnostics(fam_u, "backward")
    diag_v = family_diagnostics(fam_v, "backward")
    R = max(diag_u.max_radius, diag_v.max_radius)
    gap_t = list(t_grid) if gap_t_grid is None else list(gap_t_grid)
    gaps = cc.backward_gap_report(U, V, R, list(t_grid) + gap_t, tau_grid, eps=eps_cond,
                                  m=ensemble_size, seed=seed, verdict_times=gap_t)
    rows = []
    for t in fam_u.times:
        A, B = fam_u[t], fam_v[t]
        rows.append((t, semi_dist(A, B), hausdorff_dist(A, B), gaps.value_at(t),
                     U.absorbing_radius(t)))
    hyp = {"backward_bounded": diag_u.bounded, "backward_bounded_limit": diag_v.bounded,
           gaps.condition: gaps.verdict}
    if gaps.envelope_dominated is not None:
        hyp[gaps.condition + "_envelope"] = gaps.envelope_dominated
    report = ConvergenceReport("backward", (_model_id(U), _model_id(V)), rows, hyp,
                               {"diagnostics": diag_u, "diagnostics_limit": diag_v,
                                "gaps": gaps, "family": fam_u, "family_limit": fam_v})
    if not report.hypotheses_verified:
        log.warning("backward experiment: hypotheses unverified %s", hyp)
    return report


def backward_convergence_experiment(U, S, t_grid, tol, **kwargs):
    """Full Hausdorff distance from ``A(t)`` to the global attractor of ``S`` as ``t -> -inf``.

    Runs the pair experiment against the process ``(t, s) -> S(t - s)``,
    whose pullback slices are all the global attractor.
    """
    return attractor_pair_experiment(U, embed_semigroup_as_process(S), t_grid, tol, **kwargs)


__all__ = [
    "AttractorFamily", "ConvergenceReport", "REPORT_COLUMNS", "EmbeddedSemigroup",
    "pullback_slice", "pullback_slice_converged", "pullback_family", "global_attractor",
    "invariance_residual", "attraction_residual", "forward_convergence_experiment",
    "backward_convergence_experiment", "attractor_pair_experiment",
]
