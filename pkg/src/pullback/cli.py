"""Command-line front end and experiment runner.

Subcommands map to experiment kinds::

    pullback oracle             closed-form / Newton oracles
    pullback attractor          pullback slices on the t-grid
    pullback converge-forward   pullback attractor -> global attractor as t -> +inf
    pullback converge-backward  same, full Hausdorff metric, as t -> -inf
    pullback pair               two asymptotically close processes
    pullback check-conditions   forcing tails and autonomy gaps

Log verbosity is read from ``PULLBACK_LOG_LEVEL`` (default ``WARNING``).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import conditions as cc
from . import engine
from . import models as md
from .config import ConfigError, config_from_dict, build_models, model_family
from .dynamics import embed_semigroup_as_process
from .errors import BlowUpError, NonConvergenceError
from .forcing import DivergentIntegralError
from .metric import family_diagnostics

log = logging.getLogger("pullback")

SUBCOMMANDS = {
    "oracle": "oracle",
    "attractor": "attractor",
    "converge-forward": "forward",
    "converge-backward": "backward",
    "pair": "pair",
    "check-conditions": "check",
}
LOG_FLOOR = 1e-16
HARD_ERRORS = (BlowUpError, NonConvergenceError, DivergentIntegralError, FloatingPointError,
               np.linalg.LinAlgError)


def fmt(v):
    return format(float(v), ".17g")


# ---------------------------------------------------------------------------
# output


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return Path(path)


def _curves(report):
    if isinstance(report, engine.ConvergenceReport):
        ts = report.column("t")
        return {name: (ts, report.column(name)) for name in engine.REPORT_COLUMNS[1:]}
    if isinstance(report, cc.TailReport):
        return {report.condition: (report.grid, report.values)}
    if isinstance(report, cc.GapReport):
        out = {report.condition: (report.times, report.values)}
        if report.envelope is not None:
            out[report.condition + "_envelope"] = (report.times, report.envelope)
        return out
    raise TypeError(f"no plot data for {type(report).__name__}")


def emit_plotdata(report, out_dir, stem="report"):
    """Write ``t value`` files per curve plus ``t log10(value) flag`` companions.

    Values below ``1e-16`` (including zeros) are clamped in the log file and
    flagged with 1. An empty report writes nothing and logs a warning.
    """
    curves = _curves(report)
    if not curves or all(len(t) == 0 for t, _ in curves.values()):
        log.warning("empty report %r: no plot data written", stem)
        return []
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, (ts, vals) in curves.items():
        lin = out_dir / f"{stem}_{name}.dat"
        lg = out_dir / f"{stem}_{name}_log10.dat"
        with open(lin, "w", encoding="utf-8") as fh:
            fh.write("# t value\n")
            for t, v in zip(ts, vals):
                fh.write(f"{fmt(t)} {fmt(v)}\n")
        with open(lg, "w", encoding="utf-8") as fh:
            fh.write("# t log10_value clamped\n")
            for t, v in zip(ts, vals):
                clamped = not (v >= LOG_FLOOR)
                fh.write(f"{fmt(t)} {fmt(math.log10(LOG_FLOOR if clamped else v))} "
                         f"{int(clamped)}\n")
        paths += [lin, lg]
    return paths


def sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    config: dict
    version: str
    wall_time: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    checksums: dict = field(default_factory=dict)
    exit_code: int = 0
    error: str | None = None

    def to_json(self):
        return json.dumps(self.__dict__, indent=2, sort_keys=True)


@dataclass
class RunResult:
    exit_code: int
    manifest: RunManifest
    reports: dict
    files: list


class _Phases:
    def __init__(self):
        self.times = {}

    def __call__(self, name):
        return _Timer(self.times, name)


class _Timer:
    def __init__(self, sink, name):
        self.sink, self.name = sink, name

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.sink[self.name] = self.sink.get(self.name, 0.0) + time.perf_counter() - self.t0


# ---------------------------------------------------------------------------
# experiments


def _convergence_rows(report):
    return [list(r) for r in report.rows]


def _run_convergence(cfg, U, V, phase):
    kw = dict(ensemble_size=cfg.ensemble_size, seed=cfg.seed, T0=cfg.T0, T_max=cfg.T_max,
              gap_t_grid=cfg.gap_t_grid or None, eps_cond=cfg.eps_cond)
    with phase("experiment"):
        if cfg.kind == "forward":
            rep = engine.forward_convergence_experiment(U, U.semigroup(), cfg.t_grid,
                                                        cfg.slice_tol, gap_windows=cfg.gap_windows,
                                                        **kw)
        elif cfg.kind == "backward":
            rep = engine.backward_convergence_experiment(U, U.semigroup(), cfg.t_grid,
                                                         cfg.slice_tol, tau_grid=cfg.tau_grid, **kw)
        else:
            rep = engine.attractor_pair_experiment(U, V, cfg.t_grid, cfg.slice_tol,
                                                   tau_grid=cfg.tau_grid, **kw)
    return {"report": rep}, dict(rep.hypotheses)


def _run_oracle(cfg, U, out, phase):
    files, verdicts = [], {}
    with phase("oracle"):
        if model_family(cfg.preset) == "scalar":
            sampler = engine.absorbing_sampler(U, cfg.ensemble_size, cfg.seed)
            fam = engine.pullback_family(U, sampler, cfg.t_grid, cfg.slice_tol, cfg.T0, cfg.T_max)
            rows = []
            for t in fam.times:
                pts = fam[t].points[:, 0]
                exact = md.scalar_exact_pullback(U, t)
                rows.append([t, float(np.mean(pts)), exact, float(np.max(np.abs(pts - exact)))])
            verdicts["oracle_match"] = all(r[3] <= 1e-6 for r in rows)
            files.append(write_csv(out / "oracle.csv", ["t", "numeric", "exact", "abs_error"], rows))
        else:
            S = U.semigroup()
            newton = md.rd_steady_state(U.autonomous_limit())
            evolved = engine.global_attractor(
                S, engine.absorbing_sampler(S, cfg.ensemble_size, cfg.seed), cfg.slice_tol,
                cfg.T0).points[0]
            cols = {"x": U.x, "u_newton": newton, "u_evolved": evolved}
            if cfg.model["g0"] == "manufactured" and cfg.model["f"] == "zero" \
                    and cfg.model["lam"] == 1.0:
                cols["u_exact"] = np.cos(math.pi * U.x / (2.0 * U.L))
            err = float(U.norm(newton - evolved))
            verdicts["oracle_match"] = err <= 1e-6
            files.append(write_csv(out / "snapshot_steady.csv", list(cols),
                                   zip(*[list(map(float, c)) for c in cols.values()])))
            files.append(write_csv(out / "oracle.csv", ["t", "numeric", "exact", "abs_error"],
                                   [[0.0, float(U.norm(evolved)), float(U.norm(newton)), err]]))
    return files, verdicts


def _run_attractor(cfg, U, out, phase):
    files = []
    with phase("attractor"):
        sampler = engine.absorbing_sampler(U, cfg.ensemble_size, cfg.seed)
        fam = engine.pullback_family(U, sampler, cfg.t_grid, cfg.slice_tol, cfg.T0, cfg.T_max)
    rows = []
    for t in fam.times:
        A = fam[t]
        rows.append([t, fam.pullback_window[t], fam.cauchy_defect[t], float(A.norms().max()),
                     A.diameter(), U.absorbing_radius(t)])
    files.append(write_csv(out / "family.csv", ["t", "pullback_window", "cauchy_defect", "radius",
                                                "diameter", "absorbing_radius"], rows))
    verdicts = {"inside_absorbing_ball": all(r[3] <= r[5] for r in rows)}
    if model_family(cfg.preset) == "rd":
        for t in fam.times:
            files.append(write_csv(out / f"snapshot_t{fmt(t)}.csv", ["x", "u"],
                                   zip(map(float, U.x), map(float, fam[t].points[0]))))
    return files, verdicts, fam


def _run_check(cfg, U, V, out, phase):
    fs = U.forcing
    fwd = sorted(cfg.t_grid)
    bwd = sorted(-t for t in cfg.t_grid)
    reports, verdicts, rows = {}, {}, []
    with phase("tails"):
        try:
            tv = cc.tempered_check(fs, U.lam)
            verdicts["tempered"] = math.isfinite(tv)
        except DivergentIntegralError as exc:
            log.warning("tempered check diverges: %s", exc)
            tv, verdicts["tempered"] = math.inf, False
        rows.append(["tempered", "past", 0.0, "", fmt(tv)])
        tails = {"cond_g": cc.tail_report("cond_g", fs, fwd, cfg.eps_cond),
                 "cond_g2": cc.tail_report("cond_g2", fs, bwd, cfg.eps_cond),
                 "remark_pointwise_forward": cc.pointwise_limit_check(fs, "forward", fwd,
                                                                      cfg.eps_cond),
                 "remark_pointwise_backward": cc.pointwise_limit_check(fs, "backward", bwd,
                                                                       cfg.eps_cond)}
        for T in cfg.gap_windows:
            tails["g1_window_T" + fmt(T)] = cc.tail_report("g1_window", fs, fwd, cfg.eps_cond,
                                                           window=T)
        for key, rep in tails.items():
            reports[key] = rep
            verdicts[key] = rep.verdict
            for s, v in zip(rep.grid, rep.values):
                rows.append([key, rep.direction, fmt(s), "", fmt(v)])
    with phase("gaps"):
        R_f = max(U.absorbing_radius(t) for t in fwd)
        R_b = max(U.absorbing_radius(t) for t in bwd)
        S = U.semigroup()
        gaps = [cc.forward_gap_report(U, S, R_f, fwd, cfg.gap_windows, cfg.eps_cond,
                                      cfg.ensemble_size, cfg.seed),
                cc.backward_gap_report(U, embed_semigroup_as_process(S), R_b, bwd, cfg.tau_grid,
                                       cfg.eps_cond, cfg.ensemble_size, cfg.seed)]
        x = cc.ball_states(U, R_b, 2, cfg.seed)
        x0, v = x[0], x[1]
        gaps.append(cc.autonomy_gap_sequence(U, S, lambda t: x0 + math.exp(t) * v, x0,
                                             cfg.gap_windows[0], bwd, cfg.eps_cond))
        if V is not None:
            gaps.append(cc.backward_gap_report(U, V, R_b, bwd, cfg.tau_grid, cfg.eps_cond,
                                               cfg.ensemble_size, cfg.seed))
        for rep in gaps:
            reports[rep.condition] = rep
            verdicts[rep.condition] = rep.verdict
            if rep.envelope_dominated is not None:
                verdicts[rep.condition + "_envelope"] = rep.envelope_dominated
            env = rep.envelope if rep.envelope is not None else [None] * len(rep.times)
            for s, g, e in zip(rep.times, rep.values, env):
                rows.append([rep.condition, rep.direction, fmt(s), "" if e is None else fmt(e),
                             fmt(g)])
    files = [write_csv(out / "conditions.csv", ["condition", "direction", "t", "envelope", "value"],
                       rows)]
    return files, verdicts, reports


def run_experiment(cfg, out_dir=None):
    """Run one configured experiment, writing CSV, plot data and ``manifest.json``.

    Exit codes: 0 success, 2 completed with an unverified hypothesis, 1 hard
    numerical error (a diagnostic row goes to ``error.csv``).
    """
    out = Path(out_dir if out_dir is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    phase = _Phases()
    manifest = RunManifest(config=cfg.to_dict(), version=__version__)
    files, reports, verdicts = [], {}, {}
    code = 0
    try:
        with phase("setup"):
            U, V = build_models(cfg)
        if cfg.kind in ("forward", "backward", "pair"):
            reports, verdicts = _run_convergence(cfg, U, V, phase)
            rep = reports["report"]
            files.append(write_csv(out / "report.csv", engine.REPORT_COLUMNS,
                                   _convergence_rows(rep)))
            files += emit_plotdata(rep, out / "plot", "report")
            diag = rep.details["diagnostics"]
            manifest.verdicts["max_radius"] = diag.max_radius
        elif cfg.kind == "oracle":
            f, verdicts = _run_oracle(cfg, U, out, phase)
            files += f
        elif cfg.kind == "attractor":
            f, verdicts, fam = _run_attractor(cfg, U, out, phase)
            files += f
            if len(fam.times) > 1:
                manifest.verdicts["invariance_residual"] = engine.invariance_residual(U, fam)
            diag = family_diagnostics(fam, "forward" if min(fam.times) >= 0 else "backward")
            manifest.verdicts["max_radius"] = diag.max_radius
        else:
            f, verdicts, reports = _run_check(cfg, U, V, out, phase)
            files += f
            for key, rep in reports.items():
                files += emit_plotdata(rep, out / "plot", key)
        verdicts = {k: bool(v) for k, v in verdicts.items()}
        write_csv(out / "verdicts.csv", ["hypothesis", "verified"],
                  [[k, str(v).lower()] for k, v in sorted(verdicts.items())])
        files.append(out / "verdicts.csv")
        code = 0 if all(verdicts.values()) else 2
    except HARD_ERRORS as exc:
        log.error("run failed: %s: %s", type(exc).__name__, exc)
        files.append(write_csv(out / "error.csv", ["stage", "error", "t", "message"],
                               [[cfg.kind, type(exc).__name__,
                                 "" if getattr(exc, "t", None) is None else fmt(exc.t), str(exc)]]))
        manifest.error = f"{type(exc).__name__}: {exc}"
        code = 1
    manifest.verdicts.update(verdicts)
    manifest.wall_time = phase.times
    manifest.exit_code = code
    manifest.checksums = {str(Path(p).relative_to(out)): sha256(p) for p in sorted(set(files))}
    (out / "manifest.json").write_text(manifest.to_json() + "\n", encoding="utf-8")
    return RunResult(code, manifest, reports, files)


# ---------------------------------------------------------------------------
# argument parsing


def _configure_logging():
    level = os.environ.get("PULLBACK_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def build_parser():
    p = argparse.ArgumentParser(prog="pullback", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="JSON experiment configuration")
        s.add_argument("--out", type=Path, help="output directory (overrides config)")
        s.add_argument("--seed", type=int, help="ensemble seed (unsigned 64-bit)")
        s.add_argument("--preset", help="S1, R1, PAIR-AB or MANUFACTURED")
    return p


def load_config(command, config_path=None, preset=None, seed=None, out=None):
    doc = {}
    if config_path is not None:
        try:
            doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError([f"invalid JSON: {exc}"]) from None
        if not isinstance(doc, dict):
            raise ConfigError(["configuration must be a JSON object"])
    if preset is not None:
        doc["preset"] = preset
    if seed is not None:
        doc["seed"] = seed
    if out is not None:
        doc["output"] = str(out)
    doc.pop("experiment", None)
    return config_from_dict(doc, kind=SUBCOMMANDS[command])


def main(argv=None):
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.command, args.config, args.preset, args.seed, args.out)
    except (ConfigError, OSError) as exc:
        errors = exc.errors if isinstance(exc, ConfigError) else [str(exc)]
        for e in errors:
            print(f"config error: {e}", file=sys.stderr)
        return 1
    result = run_experiment(cfg)
    print(f"{args.command}: exit {result.exit_code}, outputs in {cfg.output}")
    for k, v in sorted(result.manifest.verdicts.items()):
        print(f"  {k}: {v}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
