"""Command-line front end: JSON config in, CSV or JSON out.

Exit codes: 0 success, 2 invalid configuration, 3 numerical
non-convergence, 4 degenerate signal fit.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from . import config as cfgmod
from .analytic import bragg_apply, design_pi_pulse, rabi_phase, raman_nath_state
from .bloch import band_structure
from .core import ConvergenceError, DegenerateFitError, PulseEnvelope
from .interferometer import power_sensitivity, simulate
from .propagator import diffraction_spectrum, propagate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_DEGENERATE = 4


def fmt(x) -> str:
    """Floats with 12 significant digits; everything else via str."""
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _num(x):
    if isinstance(x, float):
        if math.isnan(x):
            return None
        return float(format(x, ".12g"))
    return x


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def json_text(obj) -> str:
    def clean(o):
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        return _num(o)
    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


def write_atomic(path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


def run_bands(args, cfg):
    a = cfgmod.bands_args(cfg)
    bs = band_structure(a["q"], a["n_kappa"], a["n_bands"], a["p_span"])
    rows = list(bs.rows())
    if args.format == "json":
        emit(json_text({"q": bs.q, "bands": [dict(kappa=k, band=b, energy=e)
                                               for k, b, e in rows]}), args.out)
    else:
        emit(csv_text(["kappa", "band", "energy"], rows), args.out)


def run_diffract(args, cfg):
    a = cfgmod.diffract_args(cfg, args.mode)
    if a["mode"] == "analytic":
        if a["gamma"] is not None:
            state = raman_nath_state(a["gamma"], kappa=a["state"].kappa)
        else:
            state = bragg_apply(a["state"], a["pulse"])
    else:
        env = a["pulse"] or PulseEnvelope.off()
        state = propagate(a["state"], env, a["tau_a"], a["tau_b"], a["settings"])
    rows = diffraction_spectrum(state)
    if args.format == "json":
        emit(json_text({"mode": a["mode"], "orders": [dict(order=p, population=n, phase=f)
                                                       for p, n, f in rows]}), args.out)
    else:
        emit(csv_text(["order", "population", "phase"], rows), args.out)


def _fit_summary(trace):
    return {"phase_mod_pi": trace.phase, "amplitude": trace.amplitude,
            "offset": trace.offset, "residual": trace.residual, "mode": trace.mode,
            "degenerate": trace.degenerate}


def _sidecar(out, suffix):
    if out is None:
        return None
    p = Path(out)
    return p.with_name(p.stem + suffix)


def _report(args, summary):
    """Echo a fit summary: stdout when data went to a file, else stderr."""
    if args.out is not None:
        sys.stdout.write(json_text(summary))
    elif args.format == "csv":
        sys.stderr.write(json_text(summary))


def run_interferometer(args, cfg):
    config = cfgmod.interferometer_config(cfg, args.mode)
    trace = simulate(config)
    summary = _fit_summary(trace)
    rows = list(zip(trace.taus.tolist(), trace.signal.tolist()))
    if args.format == "json":
        emit(json_text({"fit": summary,
                        "trace": [dict(tau=t, signal=s) for t, s in rows]}), args.out)
    else:
        emit(csv_text(["tau", "signal"], rows), args.out)
        side = _sidecar(args.out, ".fit.json")
        if side is not None:
            write_atomic(side, json_text(summary))
    _report(args, summary)
    if trace.degenerate:
        raise DegenerateFitError("signal has no oscillation at the beat frequency "
                               "(zero contrast); phase is undefined")


def run_sensitivity(args, cfg):
    a = cfgmod.sensitivity_args(cfg, args.mode)
    res = power_sensitivity(a["config"], a["eps"])
    summary = {
        "mode": a["config"].mode,
        "slope": res.slope,
        "paper_mode_slope": res.paper_mode_slope,
        "exact_mode_slope": res.exact_mode_slope,
        "delta_phase_1pct": res.per_percent(res.slope),
        "paper_mode_delta_phase_1pct": res.per_percent(res.paper_mode_slope),
        "exact_mode_delta_phase_1pct": res.per_percent(res.exact_mode_slope),
    }
    rows = list(zip(res.eps.tolist(), res.phases.tolist()))
    if args.format == "json":
        summary["points"] = [dict(eps=e, phase=p) for e, p in rows]
        emit(json_text(summary), args.out)
    else:
        emit(csv_text(["eps", "phase"], rows), args.out)
        side = _sidecar(args.out, ".summary.json")
        if side is not None:
            write_atomic(side, json_text(summary))
        _report(args, summary)


def run_design(args, cfg):
    a = cfgmod.design_args(cfg)
    if a["shape"] == "tabulated":
        template = a["template"]
        q = design_pi_pulse("tabulated", template=template)
        env = template.scaled(q / template.q_max)
    else:
        q = design_pi_pulse(a["shape"], a["duration"])
        env = (PulseEnvelope.rectangular(q, 0.0, a["duration"]) if a["shape"] == "rectangular"
               else PulseEnvelope.gaussian(q, 0.0, a["duration"]))
    result = {"shape": a["shape"], "q_max": q, "rabi_phase": rabi_phase(env)}
    if args.format == "json":
        emit(json_text(result), args.out)
    else:
        emit(csv_text(["shape", "q_max", "rabi_phase"], [(a["shape"], q, result["rabi_phase"])]),
             args.out)


def run_validate(args, cfg):
    cfgmod.validate(cfg, mode_override=args.mode)
    sys.stdout.write(f"ok: valid {cfg.get('command')} config\n")


RUNNERS = {
    "bands": run_bands,
    "diffract": run_diffract,
    "interferometer": run_interferometer,
    "sensitivity": run_sensitivity,
    "design-pulse": run_design,
    "validate-config": run_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mattersim",
        description="Diffraction phases of matter waves in a standing light wave.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--mode", choices=("analytic", "numeric"), default=None,
                       help="overrides the config's mode")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load(args.config)
        RUNNERS[args.command](args, cfg)
    except (cfgmod.ConfigError, ValueError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except ConvergenceError as exc:
        sys.stderr.write(f"numerical non-convergence: {exc}\n")
        return EXIT_CONVERGENCE
    except DegenerateFitError as exc:
        sys.stderr.write(f"degenerate fit: {exc}\n")
        return EXIT_DEGENERATE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
