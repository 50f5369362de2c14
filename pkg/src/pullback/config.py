"""Experiment configuration: JSON parsing, validation, defaults and model construction."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import forcing as fc
from . import models as md

PRESETS = ("S1", "R1", "PAIR-AB", "MANUFACTURED")
KINDS = ("forward", "backward", "pair", "oracle", "check", "attractor")
AMPLITUDES = ("two_sided_exp", "exponential", "constant", "zero", "power_law")

_SCALAR_MODEL = {"lam": 1.0, "g0": 2.0, "h": "two_sided_exp", "h_amplitude": 1.0,
                 "h_rate": 1.0, "h_exponent": 0.25, "dt": 1e-3}
_RD_MODEL = {"lam": 1.0, "f": "cubic", "g0": "gaussian", "g0_scale": 1.0, "h": "two_sided_exp",
             "h_amplitude": 1.0, "h_rate": 1.0, "h_exponent": 0.25, "L": 32.0, "N": 256,
             "dt": 1e-3}

MODEL_DEFAULTS = {
    "S1": dict(_SCALAR_MODEL),
    "PAIR-AB": dict(_SCALAR_MODEL, h="exponential", h_amplitude=2.0, pair_h_amplitude=4.0),
    "R1": dict(_RD_MODEL),
    "MANUFACTURED": dict(_RD_MODEL, f="zero", g0="manufactured", h="zero"),
}


def _rng(start, stop, step):
    n = int(round((stop - start) / step))
    return tuple(round(start + i * step, 12) for i in range(n + 1))


_SCALAR_GRIDS = {
    "forward": dict(t=_rng(0, 10, 0.5), gap_t=_rng(0, 20, 2)),
    "backward": dict(t=_rng(-10, 0, 1), gap_t=_rng(-20, 0, 2)),
    "pair": dict(t=_rng(-10, 0, 1), gap_t=_rng(-20, 0, 2)),
    "oracle": dict(t=_rng(-10, 10, 1), gap_t=()),
    "attractor": dict(t=_rng(-5, 5, 1), gap_t=()),
    "check": dict(t=_rng(0, 20, 2), gap_t=()),
}
_RD_GRIDS = {
    "forward": dict(t=_rng(0, 8, 2), gap_t=_rng(0, 20, 4)),
    "backward": dict(t=_rng(-8, 0, 2), gap_t=_rng(-20, 0, 4)),
    "pair": dict(t=_rng(-8, 0, 2), gap_t=_rng(-20, 0, 4)),
    "oracle": dict(t=(0.0,), gap_t=()),
    "attractor": dict(t=_rng(-4, 4, 2), gap_t=()),
    "check": dict(t=_rng(0, 20, 4), gap_t=()),
}
_RUN_DEFAULTS = {
    "scalar": dict(ensemble_size=16, slice_tol=1e-8),
    "rd": dict(ensemble_size=8, slice_tol=1e-7),
}

_TOP_KEYS = {"experiment", "preset", "model", "grids", "tolerances", "ensemble_size", "seed",
             "output"}
_GRID_KEYS = {"t", "gap_t", "tau", "T", "T0", "T_max"}
_TOL_KEYS = {"slice", "cond"}


def model_family(preset):
    return "scalar" if preset in ("S1", "PAIR-AB") else "rd"


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    preset: str
    model: dict = field(hash=False)
    t_grid: tuple
    gap_t_grid: tuple
    tau_grid: tuple
    gap_windows: tuple
    T0: float
    T_max: float
    slice_tol: float
    eps_cond: float
    ensemble_size: int
    seed: int
    output: str

    def to_dict(self):
        return {
            "experiment": self.kind,
            "preset": self.preset,
            "model": dict(sorted(self.model.items())),
            "grids": {"t": list(self.t_grid), "gap_t": list(self.gap_t_grid),
                      "tau": list(self.tau_grid), "T": list(self.gap_windows),
                      "T0": self.T0, "T_max": self.T_max},
            "tolerances": {"slice": self.slice_tol, "cond": self.eps_cond},
            "ensemble_size": self.ensemble_size,
            "seed": self.seed,
            "output": self.output,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _grid(value, name, errors):
    if isinstance(value, dict):
        extra = set(value) - {"start", "stop", "step"}
        if extra:
            errors.append(f"unknown key(s) in grid {name!r}: {sorted(extra)}")
            return ()
        try:
            start, stop, step = (float(value[k]) for k in ("start", "stop", "step"))
        except (KeyError, TypeError, ValueError):
            errors.append(f"grid {name!r} needs numeric start, stop and step")
            return ()
        if not step > 0 or stop < start:
            errors.append(f"grid {name!r} needs step > 0 and stop >= start")
            return ()
        return _rng(start, stop, step)
    if not isinstance(value, (list, tuple)) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        errors.append(f"grid {name!r} must be a list of numbers or a start/stop/step object")
        return ()
    vals = tuple(float(v) for v in value)
    if any(not math.isfinite(v) for v in vals):
        errors.append(f"grid {name!r} must be finite")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        errors.append(f"grid {name!r} must be strictly increasing")
    return vals


def _positive(value, name, errors, integer=False):
    ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    if integer:
        ok = ok and float(value).is_integer()
    if not ok or not (value > 0) or not math.isfinite(value):
        errors.append(f"{name} must be positive")
        return None
    return int(value) if integer else float(value)


def _validate_model(preset, overrides, errors):
    base = dict(MODEL_DEFAULTS[preset])
    unknown = set(overrides) - set(base)
    for k in sorted(unknown):
        errors.append(f"unknown model key {k!r}")
    model = dict(base)
    model.update({k: v for k, v in overrides.items() if k in base})
    for key in ("lam", "dt", "h_rate", "L", "g0_scale"):
        if key in model:
            v = _positive(model[key], key, errors)
            if v is not None:
                model[key] = v
    for key in ("h_amplitude", "pair_h_amplitude", "h_exponent"):
        if key in model:
            v = model[key]
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                errors.append(f"{key} must be a finite number")
            else:
                model[key] = float(v)
    if "N" in model:
        v = _positive(model["N"], "N", errors, integer=True)
        if v is not None and v < 3:
            errors.append("N must be at least 3")
        model["N"] = v if v is not None else model["N"]
    if model.get("h") not in AMPLITUDES:
        errors.append(f"h must be one of {AMPLITUDES}")
    if "f" in model and model["f"] not in md.NONLINEARITIES:
        errors.append(f"f must be one of {tuple(md.NONLINEARITIES)}")
    if model_family(preset) == "scalar":
        if not isinstance(model["g0"], (int, float)) or isinstance(model["g0"], bool):
            errors.append("g0 must be a number for scalar presets")
        else:
            model["g0"] = float(model["g0"])
    elif model["g0"] not in ("gaussian", "manufactured", "zero"):
        errors.append("g0 must be one of ('gaussian', 'manufactured', 'zero')")
    return model


def parse_config(text, kind=None):
    """Parse and validate a JSON experiment configuration.

    ``kind`` (the CLI subcommand) takes precedence over the document's
    ``experiment`` key. Raises :class:`ConfigError` listing every problem.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"invalid JSON: {exc}"]) from None
    if not isinstance(doc, dict):
        raise ConfigError(["configuration must be a JSON object"])
    return config_from_dict(doc, kind)


def config_from_dict(doc, kind=None):
    errors = []
    for k in sorted(set(doc) - _TOP_KEYS):
        errors.append(f"unknown key {k!r}")
    kind = kind or doc.get("experiment", "forward")
    if kind not in KINDS:
        errors.append(f"experiment must be one of {KINDS}")
    preset = doc.get("preset", "S1")
    if preset not in PRESETS:
        raise ConfigError(errors + [f"preset must be one of {PRESETS}"])
    family = model_family(preset)
    model_over = doc.get("model", {})
    if not isinstance(model_over, dict):
        errors.append("model must be an object")
        model_over = {}
    model = _validate_model(preset, model_over, errors)

    grids = doc.get("grids", {})
    tols = doc.get("tolerances", {})
    for name, sect, keys in (("grids", grids, _GRID_KEYS), ("tolerances", tols, _TOL_KEYS)):
        if not isinstance(sect, dict):
            errors.append(f"{name} must be an object")
        else:
            for k in sorted(set(sect) - keys):
                errors.append(f"unknown key {name}.{k!r}")
    grids = grids if isinstance(grids, dict) else {}
    tols = tols if isinstance(tols, dict) else {}
    defaults = (_SCALAR_GRIDS if family == "scalar" else _RD_GRIDS).get(kind, _SCALAR_GRIDS["forward"])
    t_grid = _grid(grids.get("t", list(defaults["t"])), "t", errors)
    gap_t = _grid(grids.get("gap_t", list(defaults["gap_t"])), "gap_t", errors)
    tau = _grid(grids.get("tau", [1.0, 2.0, 5.0, 10.0, 20.0, 40.0]), "tau", errors)
    windows = _grid(grids.get("T", [1.0, 2.0, 4.0]), "T", errors)
    if not t_grid:
        errors.append("grid 't' must be nonempty")
    if not tau or min(tau, default=1.0) <= 0:
        errors.append("grid 'tau' must be nonempty and positive")
    if not windows or min(windows, default=1.0) <= 0:
        errors.append("grid 'T' must be nonempty and positive")
    if kind == "pair" and preset != "PAIR-AB":
        errors.append("pair experiments need preset 'PAIR-AB'")
    if kind == "forward" and t_grid and min(t_grid) < 0:
        errors.append("forward experiments need t >= 0")
    if kind in ("backward", "pair") and t_grid and max(t_grid) > 0:
        errors.append("backward experiments need t <= 0")
    T0 = _positive(grids.get("T0", 5.0), "T0", errors)
    T_max = _positive(grids.get("T_max", 320.0), "T_max", errors)
    run = _RUN_DEFAULTS[family]
    slice_tol = _positive(tols.get("slice", run["slice_tol"]), "slice tolerance", errors)
    eps_cond = _positive(tols.get("cond", 1e-6), "cond tolerance", errors)
    m = _positive(doc.get("ensemble_size", run["ensemble_size"]), "ensemble_size", errors,
                  integer=True)
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        errors.append("seed must be an unsigned 64-bit integer")
    output = doc.get("output", "out")
    if not isinstance(output, str) or not output:
        errors.append("output must be a nonempty path string")
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(kind, preset, model, t_grid, gap_t, tau, windows, T0, T_max,
                            slice_tol, eps_cond, m, seed, output)


# ---------------------------------------------------------------------------
# model construction


def _amplitude(model, scale_key="h_amplitude"):
    h, a = model["h"], model[scale_key]
    if h == "two_sided_exp":
        return fc.two_sided_exp(a, model["h_rate"])
    if h == "exponential":
        return fc.exponential(a, model["h_rate"])
    if h == "constant":
        return fc.constant(a)
    if h == "power_law":
        return fc.PowerLaw(a, model["h_exponent"])
    return fc.zero()


def build_models(config):
    """``(U, V)``: the process and, for the pair preset, its partner process (else ``None``)."""
    p = config.model
    if config.preset in ("S1", "PAIR-AB"):
        U = md.ScalarLinearModel.from_scalars(p["lam"], p["g0"], _amplitude(p), dt=p["dt"],
                                              name=config.preset if config.preset == "S1" else "PAIR-A")
        V = None
        if config.preset == "PAIR-AB":
            V = md.ScalarLinearModel.from_scalars(p["lam"], p["g0"],
                                                  _amplitude(p, "pair_h_amplitude"),
                                                  dt=p["dt"], name="PAIR-B")
        return U, V
    L, N = p["L"], p["N"]
    x = md.ReactionDiffusionModel.grid(L, N)
    if p["g0"] == "gaussian":
        g0 = md.gaussian_profile(x)
    elif p["g0"] == "manufactured":
        g0 = md.manufactured_profile(x, L)
    else:
        g0 = np.zeros(N)
    g0 = p["g0_scale"] * g0
    phi = g0 if p["g0"] != "zero" else md.gaussian_profile(x)
    forcing = fc.ForcingSpec(g0, phi, _amplitude(p), weight=2.0 * L / (N + 1))
    U = md.ReactionDiffusionModel(L, N, p["lam"], p["f"], forcing, dt=p["dt"], name=config.preset)
    return U, None


def default_config(preset="S1", kind="forward", **overrides):
    doc = {"preset": preset, "experiment": kind}
    doc.update(overrides)
    return config_from_dict(doc)


__all__ = ["ExperimentConfig", "ConfigError", "parse_config", "config_from_dict",
           "default_config", "build_models", "PRESETS", "KINDS", "asdict"]
