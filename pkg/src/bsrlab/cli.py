"""Command-line front end.

    bsrlab <command> --config <file> [--out <dir>] [--threads N] [--seed S]

The config is a JSON object; keys not listed for the command are rejected.
Relative paths inside it are resolved against the config file's directory.
Exit status: 0 on success, 2 on validation errors, 3 on numeric failures.
Errors are reported on stderr as one JSON object.
"""
import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import USE_NUMBA
from .errors import ConfigError, NumericError, ValidationError, MissingTraceError
from .experiments import (fingerprint, incomplete_sweep, stability_sweep, sweep_summary,
                          sweep_to_csv)
from .oscillatory import random_band_limited, report_summary, report_to_csv, vdc_decay_report
from .radial import RadialPotential, RobinCoefficient, assemble_bsd
from .reconstruction import field_report, field_to_csv, reconstruct_field, rho_hat_at
from .spectral import (PerturbationSpec, dumps_json, load_bsd, perturb_eigenvalues, save_bsd,
                       write_atomic)
from .sphere import BoundaryFunction, HarmonicIndex

COMMANDS = ("forward", "perturb", "reconstruct", "vdc", "stability", "incomplete", "validate")

# key -> default (REQUIRED marks mandatory keys)
REQUIRED = object()
SCHEMAS = {
    "forward": {"potential": REQUIRED, "alpha": REQUIRED, "lambda_max": REQUIRED,
                "l_max": None, "mesh": 1000, "output": "bsd.json"},
    "perturb": {"input": REQUIRED, "rule": "constant", "amplitude": 0.0, "eps": None,
                "transient": 0, "output": "bsd_perturbed.json"},
    "reconstruct": {"reference": REQUIRED, "target": REQUIRED, "delta": None, "transient": 0,
                    "spacing": math.pi / 2, "tau_ladder": [16.0, 32.0], "lambda_cap": None,
                    "synthesize": False, "spatial_n": 9, "xi": None, "output": "field"},
    "vdc": {"density": REQUIRED, "theta": [0.0, 0.0, 1.0], "tau_range": [1.0, 100.0], "s": 2.0,
            "output": "vdc"},
    "stability": {"reference": REQUIRED, "deltas": REQUIRED, "spacing": math.pi / 2,
                  "tau_ladder": [16.0, 32.0], "lambda_cap": None, "output": "stability"},
    "incomplete": {"reference": REQUIRED, "target": REQUIRED, "n0_ladder": REQUIRED,
                   "xi_probes": [[0.0, 0.0, 0.0]], "tau_ladder": [16.0, 32.0], "lambda_cap": None,
                   "decay_range": [8.0, 64.0], "output": "incomplete"},
    "validate": {"input": REQUIRED},
}
POTENTIAL_KEYS = {
    "constant": {"value"},
    "gaussian": {"amplitude", "width", "center", "l2_norm"},
    "samples": {"grid", "values"},
}
DENSITY_KEYS = {
    "constant": {"value"},
    "harmonic": {"l", "m", "amplitude"},
    "random": {"lmax"},
    "coefficients": {"re", "im"},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("UsageError", message, 2)
        sys.exit(2)


def build_parser():
    p = _Parser(
        prog="bsrlab",
        description="Boundary-spectral-data reconstruction laboratory on the unit ball.",
        formatter_class=lambda prog: argparse.HelpFormatter(prog, width=88, max_help_position=30),
    )
    p.add_argument("command", choices=COMMANDS, help="pipeline to run")
    p.add_argument("--config", required=True, metavar="FILE", help="JSON configuration file")
    p.add_argument("--out", default=".", metavar="DIR", help="output directory (default: .)")
    p.add_argument("--threads", type=int, default=1, metavar="N",
                   help="worker cap for grid evaluations (default: 1)")
    p.add_argument("--seed", type=int, default=0, metavar="S", help="random seed (default: 0)")
    p.add_argument("--version", action="version", version=f"bsrlab {__version__}")
    return p


def _emit_error(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": str(message), "exit_code": code}) + "\n")


# ---------------------------------------------------------------------------
# configuration


def load_config(path, command):
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    schema = SCHEMAS[command]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config keys for {command!r}: {', '.join(unknown)}")
    cfg = {}
    for key, default in schema.items():
        if key in raw:
            cfg[key] = raw[key]
        elif default is REQUIRED:
            raise ConfigError(f"missing required config key {key!r}")
        else:
            cfg[key] = default
    return cfg, path.parent


def _num(cfg, key, positive=False, integer=False):
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key!r} must be a number")
    if integer and int(v) != v:
        raise ConfigError(f"{key!r} must be an integer")
    if not math.isfinite(v) or (positive and v <= 0):
        raise ConfigError(f"{key!r} must be {'positive and ' if positive else ''}finite")
    return int(v) if integer else float(v)


def _vector(v, key, size=3):
    try:
        arr = np.asarray(v, dtype=np.float64)
    except (TypeError, ValueError):
        raise ConfigError(f"{key!r} must be a list of numbers") from None
    if arr.shape != (size,) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{key!r} must be a list of {size} finite numbers")
    return arr


def _list(v, key, min_len=1):
    if not isinstance(v, list) or len(v) < min_len:
        raise ConfigError(f"{key!r} must be a list with at least {min_len} entries")
    try:
        return [float(x) for x in v]
    except (TypeError, ValueError):
        raise ConfigError(f"{key!r} must contain numbers") from None


def _sub(spec, allowed, what):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"{what} must be an object with a 'kind'")
    kind = spec["kind"]
    if kind not in allowed:
        raise ConfigError(f"unknown {what} kind {kind!r}")
    extra = sorted(set(spec) - allowed[kind] - {"kind", "norm_budget"})
    if extra:
        raise ConfigError(f"unknown {what} keys: {', '.join(extra)}")
    return kind


def make_potential(spec):
    kind = _sub(spec, POTENTIAL_KEYS, "potential")
    budget = float(spec.get("norm_budget", 10.0))
    if kind == "constant":
        return RadialPotential.constant(float(spec.get("value", 0.0)), budget if "norm_budget" in spec else None)
    if kind == "gaussian":
        width = float(spec.get("width", 0.25))
        center = float(spec.get("center", 0.0))
        if "l2_norm" in spec:
            if "amplitude" in spec:
                raise ConfigError("give either 'amplitude' or 'l2_norm', not both")
            unit = RadialPotential.gaussian(1.0, width, center, norm_budget=budget)
            amp = float(spec["l2_norm"]) / unit.lsigma_norm()
        else:
            amp = float(spec.get("amplitude", 1.0))
        return RadialPotential.gaussian(amp, width, center, norm_budget=budget)
    return RadialPotential(np.asarray(spec["grid"], dtype=np.float64),
                           np.asarray(spec["values"], dtype=np.float64), budget, "samples")


def make_density(spec, seed):
    kind = _sub(spec, DENSITY_KEYS, "density")
    if kind == "constant":
        c = complex(float(spec.get("value", 1.0)))
        return BoundaryFunction.spectral(np.array([[c * math.sqrt(4.0 * math.pi)]]))
    if kind == "harmonic":
        idx = HarmonicIndex(int(spec["l"]), int(spec["m"]))
        return BoundaryFunction.from_index(idx, float(spec.get("amplitude", 1.0)))
    if kind == "random":
        return random_band_limited(np.random.default_rng(seed), int(spec.get("lmax", 8)))
    re = np.asarray(spec["re"], dtype=np.float64)
    im = np.asarray(spec.get("im", np.zeros_like(re)), dtype=np.float64)
    if re.ndim != 2 or re.shape[1] != 2 * re.shape[0] - 1 or im.shape != re.shape:
        raise ConfigError("coefficients must be (L+1) x (2L+1) arrays")
    return BoundaryFunction.spectral(re + 1j * im)


# ---------------------------------------------------------------------------
# commands


def _path(base, p):
    p = Path(p)
    return p if p.is_absolute() else base / p


def cmd_forward(cfg, base, out, args):
    q = make_potential(cfg["potential"])
    alpha = RobinCoefficient(_num(cfg, "alpha"))
    lam_max = _num(cfg, "lambda_max", positive=True)
    l_max = cfg["l_max"]
    if l_max is None:
        # degree l has no eigenvalue below (l + 1/2)^2 + min q, so this cap always suffices
        l_max = int(math.ceil(math.sqrt(max(lam_max - min(q.minimum, 0.0), 0.0)))) + 2
    else:
        l_max = _num(cfg, "l_max", integer=True)
    bsd = assemble_bsd(q, alpha, l_max, lam_max, _num(cfg, "mesh", positive=True, integer=True))
    target = out / cfg["output"]
    save_bsd(bsd, target)
    return {"entries": len(bsd), "lambda_1": float(bsd.lam[0]), "l_max": l_max}, [target]


def cmd_perturb(cfg, base, out, args):
    bsd = load_bsd(_path(base, cfg["input"]))
    if cfg["rule"] == "explicit":
        if cfg["eps"] is None:
            raise ConfigError("rule 'explicit' needs 'eps'")
        spec = PerturbationSpec.explicit(_list(cfg["eps"], "eps"), _num(cfg, "transient", integer=True))
    else:
        if cfg["eps"] is not None:
            raise ConfigError("'eps' is only used with rule 'explicit'")
        spec = PerturbationSpec(cfg["rule"], _num(cfg, "amplitude"),
                                transient=_num(cfg, "transient", integer=True))
    res = perturb_eigenvalues(bsd, spec)
    target = out / cfg["output"]
    save_bsd(res, target)
    return {"entries": len(res), "delta": spec.delta(len(res)),
            "Lambda_1": spec.sup_norm(len(res))}, [target]


def _data_delta(bsd, bsd_t, transient):
    """Tail sup of |lam_n - lam~_n| beyond ``transient`` entries."""
    d = np.abs(bsd.lam - bsd_t.lam)[int(transient):]
    return float(d.max()) if d.size else 0.0


def cmd_reconstruct(cfg, base, out, args):
    bsd = load_bsd(_path(base, cfg["reference"]))
    bsd_t = load_bsd(_path(base, cfg["target"]))
    ladder = _list(cfg["tau_ladder"], "tau_ladder", 2)
    cap = None if cfg["lambda_cap"] is None else _num(cfg, "lambda_cap", positive=True)
    if cfg["xi"] is not None:
        pts = cfg["xi"]
        if not isinstance(pts, list) or not pts:
            raise ConfigError("'xi' must be a list of 3-vectors")
        rows = []
        for p in pts:
            est = rho_hat_at(bsd, bsd_t, _vector(p, "xi"), ladder, cap)
            rows.append({"xi": [float(v) for v in est.xi], "re": est.value.real, "im": est.value.imag,
                         "error": est.error, "extrapolation": est.extrapolation, "tail": est.tail,
                         "excluded": est.excluded})
        target = out / f"{cfg['output']}_points.json"
        write_atomic(target, dumps_json({"points": rows}))
        return {"points": len(rows), "max_error": max(r["error"] for r in rows)}, [target]
    delta = cfg["delta"]
    if delta is None:
        delta = _data_delta(bsd, bsd_t, _num(cfg, "transient", integer=True))
        if delta == 0.0:
            raise ConfigError("eigenvalues agree beyond the transient; give 'delta' explicitly")
    else:
        delta = _num(cfg, "delta", positive=True)
    f = reconstruct_field(bsd, bsd_t, delta, _num(cfg, "spacing", positive=True), ladder, cap,
                          bool(cfg["synthesize"]), _num(cfg, "spatial_n", positive=True, integer=True),
                          args.threads)
    csv_path = out / f"{cfg['output']}.csv"
    json_path = out / f"{cfg['output']}.json"
    write_atomic(csv_path, field_to_csv(f))
    rep = field_report(f)
    written = [csv_path, json_path]
    if f.real_field is not None:
        real_path = out / f"{cfg['output']}_real.csv"
        lines = ["x1,x2,x3,value"] + [",".join(_f(v) for v in (*p, r)) for p, r in zip(f.real_points, f.real_field)]
        write_atomic(real_path, "\n".join(lines) + "\n")
        written.append(real_path)
    write_atomic(json_path, dumps_json(rep))
    return {"delta": delta, "r_cut": f.r_cut, "h_minus1": rep["h_minus1"]}, written


def _f(v):
    return format(float(v), ".17g")


def cmd_vdc(cfg, base, out, args):
    phi = make_density(cfg["density"], args.seed)
    theta = _vector(cfg["theta"], "theta")
    n = np.linalg.norm(theta)
    if n == 0:
        raise ConfigError("'theta' must be nonzero")
    rep = vdc_decay_report(phi, theta / n, _list(cfg["tau_range"], "tau_range", 2), _num(cfg, "s"))
    csv_path = out / f"{cfg['output']}.csv"
    json_path = out / f"{cfg['output']}.json"
    write_atomic(csv_path, report_to_csv(rep))
    write_atomic(json_path, dumps_json(report_summary(rep)))
    return {"exponent": rep.fitted_exponent, "constant": rep.bound_constant}, [csv_path, json_path]


def cmd_stability(cfg, base, out, args):
    bsd = load_bsd(_path(base, cfg["reference"]))
    cap = None if cfg["lambda_cap"] is None else _num(cfg, "lambda_cap", positive=True)
    res = stability_sweep(bsd, _list(cfg["deltas"], "deltas", 5), _num(cfg, "spacing", positive=True),
                          _list(cfg["tau_ladder"], "tau_ladder", 2), cap, args.seed, args.threads)
    return _write_sweep(res, out, cfg["output"])


def cmd_incomplete(cfg, base, out, args):
    bsd = load_bsd(_path(base, cfg["reference"]))
    bsd_t = load_bsd(_path(base, cfg["target"]))
    cap = None if cfg["lambda_cap"] is None else _num(cfg, "lambda_cap", positive=True)
    n0 = cfg["n0_ladder"]
    if not isinstance(n0, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in n0):
        raise ConfigError("'n0_ladder' must be a list of integers")
    xis = [_vector(p, "xi_probes") for p in cfg["xi_probes"]]
    res = incomplete_sweep(bsd, bsd_t, n0, xis, _list(cfg["tau_ladder"], "tau_ladder", 2), cap,
                           _list(cfg["decay_range"], "decay_range", 2))
    return _write_sweep(res, out, cfg["output"])


def _write_sweep(res, out, stem):
    csv_path = out / f"{stem}.csv"
    json_path = out / f"{stem}.json"
    write_atomic(csv_path, sweep_to_csv(res))
    summary = sweep_summary(res)
    write_atomic(json_path, dumps_json(summary))
    return {"slope": summary["slope"], "constant": summary["constant"]}, [csv_path, json_path]


def cmd_validate(cfg, base, out, args):
    bsd = load_bsd(_path(base, cfg["input"]))
    return {"entries": len(bsd), "valid": True}, []


HANDLERS = {
    "forward": cmd_forward,
    "perturb": cmd_perturb,
    "reconstruct": cmd_reconstruct,
    "vdc": cmd_vdc,
    "stability": cmd_stability,
    "incomplete": cmd_incomplete,
    "validate": cmd_validate,
}


def run(args):
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    cfg, base = load_config(args.config, args.command)
    out = Path(args.out)
    writes = args.command != "validate"
    if writes:
        out.mkdir(parents=True, exist_ok=True)
    summary, written = HANDLERS[args.command](cfg, base, out, args)
    if writes:
        manifest = {
            "command": args.command,
            "config": cfg,
            "config_file": str(Path(args.config)),
            "fingerprint": fingerprint({"command": args.command, "config": cfg, "seed": args.seed}),
            "seed": args.seed,
            "threads": args.threads,
            "version": __version__,
            "numba": USE_NUMBA,
            "outputs": [p.name for p in written],
            "summary": summary,
        }
        write_atomic(out / "manifest.json", dumps_json(manifest))
    return summary


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        summary = run(args)
    except (ValidationError, MissingTraceError) as exc:
        _emit_error(type(exc).__name__, exc, 2)
        return 2
    except (NumericError, FloatingPointError, ZeroDivisionError, OverflowError) as exc:
        _emit_error(type(exc).__name__, exc, 3)
        return 3
    except (OSError, KeyError, TypeError, ValueError) as exc:
        # malformed inputs that slipped past schema checks
        _emit_error(type(exc).__name__, exc, 2)
        return 2
    items = " ".join(f"{k}={_fmt_summary(v)}" for k, v in summary.items())
    print(f"{args.command}: ok {items}")
    return 0


def _fmt_summary(v):
    if isinstance(v, float):
        return format(v, ".6g")
    return str(v)


if __name__ == "__main__":
    sys.exit(main())
