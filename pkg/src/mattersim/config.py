"""JSON run configurations for the command-line tool.

One JSON object per run. Unknown keys are rejected so that a typo in a
physics parameter cannot silently fall back to a default.
"""
from __future__ import annotations

import json
import math
from dataclasses import replace
from pathlib import Path

from .analytic import design_pi_pulse
from .core import GAUSSIAN, RECTANGULAR, TABULATED, PlaneWaveState, PulseEnvelope
from .interferometer import (ANALYTIC, NUMERIC, InterferometerConfig, bragg_pi_pulse,
                             mit_2002)
from .propagator import PropagationSettings

COMMANDS = ("bands", "diffract", "interferometer", "sensitivity", "design-pulse")


class ConfigError(ValueError):
    """Invalid run configuration."""


def load(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _number(obj, key, where, default=None, required=False, minimum=None, integer=False):
    if key not in obj:
        if required:
            raise ConfigError(f"{where}: missing required key '{key}'")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number")
    if integer and int(val) != val:
        raise ConfigError(f"{where}.{key} must be an integer")
    if not math.isfinite(val):
        raise ConfigError(f"{where}.{key} must be finite")
    if minimum is not None and val < minimum:
        raise ConfigError(f"{where}.{key} must be >= {minimum}")
    return int(val) if integer else float(val)


_ENVELOPE_KEYS = {
    RECTANGULAR: {"shape", "q_max", "tau_start", "tau_end"},
    GAUSSIAN: {"shape", "q_max", "center", "sigma"},
    TABULATED: {"shape", "q_max", "samples"},
}


def envelope(raw, where="pulse") -> PulseEnvelope:
    """Parse an envelope; ``"q_max": "pi"`` designs a pi pulse of that shape."""
    if not isinstance(raw, dict) or raw.get("shape") not in _ENVELOPE_KEYS:
        raise ConfigError(f"{where}.shape must be one of {', '.join(_ENVELOPE_KEYS)}")
    shape = raw["shape"]
    _check_keys(raw, _ENVELOPE_KEYS[shape], where)
    want_pi = raw.get("q_max") == "pi"
    try:
        if shape == RECTANGULAR:
            a = _number(raw, "tau_start", where, required=True)
            b = _number(raw, "tau_end", where, required=True)
            if want_pi:
                q = design_pi_pulse(RECTANGULAR, b - a)
            else:
                q = _number(raw, "q_max", where, required=True, minimum=0)
            return PulseEnvelope.rectangular(q, a, b)
        if shape == GAUSSIAN:
            c = _number(raw, "center", where, required=True)
            s = _number(raw, "sigma", where, required=True)
            q = design_pi_pulse(GAUSSIAN, s) if want_pi else _number(
                raw, "q_max", where, required=True, minimum=0)
            return PulseEnvelope.gaussian(q, c, s)
        samples = raw.get("samples")
        if (not isinstance(samples, list)
                or not all(isinstance(r, list) and len(r) == 2 for r in samples)):
            raise ConfigError(f"{where}.samples must be a list of [tau, q] pairs")
        env = PulseEnvelope.tabulated([r[0] for r in samples], [r[1] for r in samples])
        if want_pi:
            q = design_pi_pulse(TABULATED, template=env)
            env = env.scaled(q / env.q_max)
        elif "q_max" in raw:
            raise ConfigError(f"{where}.q_max for tabulated pulses may only be \"pi\"")
        return env
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def settings(raw) -> PropagationSettings:
    if raw is None:
        return PropagationSettings()
    _check_keys(raw, {"phase_tolerance", "max_step", "truncation_threshold"}, "settings")
    kw = {k: _number(raw, k, "settings") for k in raw}
    try:
        return PropagationSettings(**kw)
    except ValueError as exc:
        raise ConfigError(f"settings: {exc}") from exc


def _mode(cfg, override):
    mode = override or cfg.get("mode", ANALYTIC)
    if mode not in (ANALYTIC, NUMERIC):
        raise ConfigError(f"mode must be 'analytic' or 'numeric', got {mode!r}")
    return mode


def _command_key(cfg, command):
    if "command" in cfg and cfg["command"] != command:
        raise ConfigError(f"config is for command {cfg['command']!r}, not {command!r}")


BANDS_KEYS = {"command", "q", "n_kappa", "n_bands", "p_span"}


def bands_args(cfg) -> dict:
    _check_keys(cfg, BANDS_KEYS, "config")
    _command_key(cfg, "bands")
    out = {
        "q": _number(cfg, "q", "config", required=True, minimum=0),
        "n_kappa": _number(cfg, "n_kappa", "config", default=101, minimum=2, integer=True),
        "n_bands": _number(cfg, "n_bands", "config", default=5, minimum=1, integer=True),
        "p_span": _number(cfg, "p_span", "config", minimum=1, integer=True),
    }
    if out["p_span"] is not None and out["n_bands"] > 2 * out["p_span"]:
        raise ConfigError("n_bands must be <= 2 * p_span")
    return out


DIFFRACT_KEYS = {"command", "mode", "gamma", "pulse", "initial_order", "initial_state",
                 "kappa", "tau_a", "tau_b", "settings"}


def diffract_args(cfg, mode_override=None) -> dict:
    _check_keys(cfg, DIFFRACT_KEYS, "config")
    _command_key(cfg, "diffract")
    mode = _mode(cfg, mode_override)
    gamma = _number(cfg, "gamma", "config", minimum=0)
    pulse = envelope(cfg["pulse"]) if "pulse" in cfg else None
    kappa = _number(cfg, "kappa", "config", default=0.0)
    if not -1 < kappa <= 1:
        raise ConfigError("config.kappa must lie in (-1, 1]")
    if "initial_state" in cfg and "initial_order" in cfg:
        raise ConfigError("give either initial_order or initial_state, not both")
    if "initial_state" in cfg:
        raw = cfg["initial_state"]
        if not isinstance(raw, dict) or not raw:
            raise ConfigError("initial_state must map order -> [re, im]")
        try:
            amps = {int(p): complex(v[0], v[1]) for p, v in raw.items()}
        except (ValueError, TypeError, IndexError) as exc:
            raise ConfigError("initial_state must map integer order -> [re, im]") from exc
        try:
            state = PlaneWaveState.from_orders(amps, kappa=kappa)
        except ValueError as exc:
            raise ConfigError(f"initial_state: {exc}") from exc
    else:
        order = _number(cfg, "initial_order", "config", default=0, integer=True)
        state = PlaneWaveState.basis(order, kappa)

    if mode == ANALYTIC:
        if (gamma is None) == (pulse is None):
            raise ConfigError("analytic diffract needs exactly one of 'gamma' or 'pulse'")
        if "tau_a" in cfg or "tau_b" in cfg or "settings" in cfg:
            raise ConfigError("tau_a, tau_b and settings apply to numeric mode only")
    else:
        if gamma is not None:
            raise ConfigError("numeric diffract takes a 'pulse', not 'gamma'")
    env = pulse or PulseEnvelope.off()
    tau_a = _number(cfg, "tau_a", "config", default=env.tau_start)
    tau_b = _number(cfg, "tau_b", "config", default=env.tau_end)
    if tau_b < tau_a:
        raise ConfigError("tau_b must be >= tau_a")
    return {"mode": mode, "gamma": gamma, "pulse": pulse, "state": state,
            "tau_a": tau_a, "tau_b": tau_b, "settings": settings(cfg.get("settings"))}


INTERFEROMETER_KEYS = {"command", "preset", "mode", "gamma", "T", "bragg", "bragg_q",
                       "detection", "power_scale", "splitting_duration",
                       "three_state_projection", "settings"}


def interferometer_config(cfg, mode_override=None, extra_keys=(),
                          command="interferometer") -> InterferometerConfig:
    _check_keys(cfg, INTERFEROMETER_KEYS | set(extra_keys), "config")
    _command_key(cfg, command)
    mode = _mode(cfg, mode_override)
    if "preset" in cfg:
        if cfg["preset"] != "mit-2002":
            raise ConfigError(f"unknown preset {cfg['preset']!r} (known: mit-2002)")
        clash = set(cfg) & {"gamma", "bragg", "bragg_q", "splitting_duration"}
        if clash:
            raise ConfigError(f"preset fixes {', '.join(sorted(clash))}")
        T = _number(cfg, "T", "config", default=10.0)
        base = mit_2002(mode=mode, T=T)
    else:
        base = None
    if "bragg" in cfg and "bragg_q" in cfg:
        raise ConfigError("give either 'bragg' or 'bragg_q', not both")

    kw = {"mode": mode}
    if base is None:
        kw["gamma"] = _number(cfg, "gamma", "config", default=1.17, minimum=0)
        kw["splitting_duration"] = _number(cfg, "splitting_duration", "config",
                                           default=0.0234, minimum=0)
        T = _number(cfg, "T", "config")
        if "bragg" in cfg:
            kw["bragg_env"] = envelope(cfg["bragg"], "bragg")
        else:
            q = _number(cfg, "bragg_q", "config", default=0.2, minimum=0)
            if q <= 0:
                raise ConfigError("config.bragg_q must be > 0")
            if T is None:
                T = math.pi / q**2 + 5.0
            kw["bragg_env"] = bragg_pi_pulse(q, T)
        kw["T"] = T
    det = cfg.get("detection", {})
    _check_keys(det, {"start", "length", "n_samples"}, "detection")
    kw["detection_start"] = _number(det, "start", "detection")
    kw["detection_length"] = _number(det, "length", "detection", default=math.pi / 4)
    kw["n_samples"] = _number(det, "n_samples", "detection", default=64, integer=True)
    kw["power_scale"] = _number(cfg, "power_scale", "config", default=0.0)
    proj = cfg.get("three_state_projection", False)
    if not isinstance(proj, bool):
        raise ConfigError("config.three_state_projection must be true or false")
    kw["three_state_projection"] = proj
    kw["settings"] = settings(cfg.get("settings"))
    try:
        if base is not None:
            return replace(base, **kw)
        return InterferometerConfig(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def sensitivity_args(cfg, mode_override=None) -> dict:
    eps = cfg.get("eps", [-0.01, -0.005, 0.0, 0.005, 0.01])
    if (not isinstance(eps, list) or not eps
            or not all(isinstance(e, (int, float)) and not isinstance(e, bool) for e in eps)):
        raise ConfigError("config.eps must be a non-empty list of numbers")
    if any(abs(e) > 0.1 for e in eps):
        raise ConfigError("config.eps entries must satisfy |eps| <= 0.1")
    base = interferometer_config(cfg, mode_override, extra_keys={"eps"},
                                 command="sensitivity")
    return {"config": base, "eps": [float(e) for e in eps]}


DESIGN_KEYS = {"command", "shape", "duration", "sigma", "samples"}


def design_args(cfg) -> dict:
    _check_keys(cfg, DESIGN_KEYS, "config")
    _command_key(cfg, "design-pulse")
    shape = cfg.get("shape")
    if shape == RECTANGULAR:
        return {"shape": shape, "duration": _number(cfg, "duration", "config", required=True)}
    if shape == GAUSSIAN:
        return {"shape": shape, "duration": _number(cfg, "sigma", "config", required=True)}
    if shape == TABULATED:
        return {"shape": shape, "template": envelope({"shape": TABULATED,
                                                       "samples": cfg.get("samples")},
                                                      "config")}
    raise ConfigError("config.shape must be rectangular, gaussian or tabulated")


def validate(cfg, command=None, mode_override=None):
    """Parse ``cfg`` for ``command`` (or its own ``"command"`` key)."""
    command = command or cfg.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"config needs a 'command' key naming one of {', '.join(COMMANDS)}")
    if command == "bands":
        return bands_args(cfg)
    if command == "diffract":
        return diffract_args(cfg, mode_override)
    if command == "interferometer":
        return interferometer_config(cfg, mode_override)
    if command == "sensitivity":
        return sensitivity_args(cfg, mode_override)
    return design_args(cfg)
