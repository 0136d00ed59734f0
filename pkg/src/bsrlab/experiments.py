"""Scripted sweeps: Hoelder stability in the eigenvalue perturbation size and
the effect of missing boundary traces, plus the reference configuration."""
from dataclasses import dataclass, field
import csv
import hashlib
import io
import json
import math

import numpy as np

from .errors import ConfigError, InvalidArgument
from .oscillatory import finite_sum_decay
from .radial import RadialPotential, RobinCoefficient, assemble_bsd, check_incomplete_data_conditions
from .reconstruction import (DEFAULT_LADDER, cutoff_radius, h_minus1_norm, reconstruct_field,
                             rho_hat_at)
from .spectral import PerturbationSpec, _fmt, drop_traces, perturb_eigenvalues

STABILITY_EXPONENT = 2.0 / 5.0


@dataclass(frozen=True, eq=False)
class SweepResult:
    parameter: str
    ladder: np.ndarray
    metrics: list
    slope: float
    slope_interval: tuple
    constant: float
    fingerprint: str
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        lad = np.asarray(self.ladder, dtype=np.float64)
        d = np.diff(lad)
        if lad.size and not (np.all(d > 0) or np.all(d < 0)):
            raise InvalidArgument("sweep ladder must be strictly monotone")
        for row in self.metrics:
            for k, v in row.items():
                if isinstance(v, float) and k.endswith(("error", "norm", "bound")) and v < 0:
                    raise InvalidArgument(f"metric {k} must be nonnegative")


def fingerprint(obj):
    """SHA-256 of the canonical JSON form of ``obj`` (arrays become lists)."""
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        return repr(o)
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=default)
    return hashlib.sha256(text.encode()).hexdigest()


def bsd_digest(bsd):
    h = hashlib.sha256()
    for arr in (bsd.lam, bsd.l, bsd.m, bsd.boundary_value, bsd.trace_known):
        h.update(np.ascontiguousarray(arr).tobytes())
    h.update(repr((bsd.alpha, bsd.lambda_max)).encode())
    return h.hexdigest()


def fit_loglog(x, y):
    x = np.log(np.asarray(x, dtype=np.float64))
    y = np.log(np.asarray(y, dtype=np.float64))
    return float(np.polyfit(x, y, 1)[0])


def bootstrap_slope(x, y, rng, rounds=200):
    """Percentile interval (5%, 95%) of the log-log slope over resampled ladder points."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.size
    out = []
    for _ in range(rounds):
        idx = rng.integers(0, n, n)
        if np.unique(idx).size < 2:
            continue
        out.append(fit_loglog(x[idx], y[idx]))
    if not out:
        s = fit_loglog(x, y)
        return (s, s)
    return (float(np.percentile(out, 5)), float(np.percentile(out, 95)))


# ---------------------------------------------------------------------------
# reference configuration


def gaussian_bump(target_norm=0.1, width=0.25, norm_budget=10.0):
    """Radial Gaussian exp(-r^2 / (2 width^2)) scaled to the requested L^2(ball) norm."""
    unit = RadialPotential.gaussian(1.0, width, norm_budget=norm_budget)
    return RadialPotential.gaussian(target_norm / unit.lsigma_norm(), width, norm_budget=norm_budget)


def reference_pair(lambda_max=4096.0, l_max=70, mesh=1000, alpha=1.0):
    """q = 0 against a Gaussian bump with ||q~||_{L^2} = 0.1, Robin alpha = 1."""
    q = RadialPotential.constant(0.0)
    q_t = gaussian_bump()
    a = RobinCoefficient(alpha)
    bsd = assemble_bsd(q, a, l_max, lambda_max, mesh)
    bsd_t = assemble_bsd(q_t, a, l_max, lambda_max, mesh)
    return q, q_t, bsd, bsd_t


# ---------------------------------------------------------------------------
# sweeps


def _check_delta_ladder(deltas):
    d = np.asarray(deltas, dtype=np.float64)
    if d.ndim != 1 or d.size < 5:
        raise InvalidArgument("delta ladder needs at least 5 points")
    if np.any(d <= 0):
        raise InvalidArgument("delta values must be positive")
    if not (np.all(np.diff(d) > 0) or np.all(np.diff(d) < 0)):
        raise InvalidArgument("delta ladder must be strictly monotone")
    if math.log10(d.max() / d.min()) < 2.0 - 1e-12:
        raise InvalidArgument("delta ladder must span at least two decades")
    return d


def stability_sweep(bsd, deltas, spacing=math.pi / 2, tau_ladder=DEFAULT_LADDER, lam_cap=None,
                    seed=0, threads=1):
    """Uniform eigenvalue shifts with shared traces, reconstructed with cutoff delta^(-2/5).

    A uniform shift with shared traces is the exact data of q + delta, so the
    reconstructed field responds to delta chi_ball; its H^{-1} proxy is recorded
    as the error and compared against C delta^(2/5).
    """
    d = _check_delta_ladder(deltas)
    rows = []
    for delta in d:
        bsd_t = perturb_eigenvalues(bsd, PerturbationSpec("constant", float(delta)))
        f = reconstruct_field(bsd, bsd_t, float(delta), spacing, tau_ladder, lam_cap, threads=threads)
        err = h_minus1_norm(f)
        rows.append({
            "delta": float(delta),
            "r_cut": f.r_cut,
            "grid_points": int(len(f.grid)),
            "h_minus1_error": err,
            "sup_rho_hat": float(np.max(np.abs(f.rho_hat))),
            "tail_bound": f.error_budget["tail"],
            "excluded_bound": f.error_budget["excluded"],
            "extrapolation_bound": f.error_budget["extrapolation"],
        })
    errs = np.array([r["h_minus1_error"] for r in rows])
    slope = fit_loglog(d, errs)
    interval = bootstrap_slope(d, errs, np.random.default_rng(seed))
    const = float(np.max(errs / d ** STABILITY_EXPONENT))
    fp = fingerprint({"kind": "stability", "bsd": bsd_digest(bsd), "deltas": d, "spacing": spacing,
                      "tau_ladder": list(tau_ladder), "lam_cap": lam_cap, "seed": seed})
    return SweepResult("delta", d, rows, slope, interval, const, fp,
                       {"exponent": STABILITY_EXPONENT})


def _potential_min(bsd):
    pot = bsd.provenance.get("potential")
    if isinstance(pot, dict) and "min" in pot:
        return float(pot["min"])
    return None


class _MinOnly:
    def __init__(self, value):
        self.minimum = value


def incomplete_data_gate(bsd, bsd_t, q=None, q_t=None, c_floor=0.0):
    """Condition check for incomplete-data runs, from potentials or BSD provenance."""
    if q is None or q_t is None:
        m0, m1 = _potential_min(bsd), _potential_min(bsd_t)
        if m0 is None or m1 is None:
            raise ConfigError("cannot verify conditions c1/c2: potential minimum not recorded in BSD provenance")
        q, q_t = _MinOnly(m0), _MinOnly(m1)
    return check_incomplete_data_conditions(q, bsd.alpha, q_t, c_floor)


def incomplete_sweep(bsd, bsd_t, n0_ladder, xi_probes, tau_ladder=DEFAULT_LADDER, lam_cap=None,
                     decay_range=(8.0, 64.0), q=None, q_t=None):
    """Drop the traces n < n0 and compare the extrapolated rho_hat with the full-data value."""
    cond = incomplete_data_gate(bsd, bsd_t, q, q_t)
    ladder = np.asarray(n0_ladder, dtype=np.int64)
    if ladder.ndim != 1 or ladder.size < 1 or np.any(ladder < 1) or np.any(ladder > 32):
        raise InvalidArgument("n0 ladder must lie in [1, 32]")
    if ladder.size > 1 and np.any(np.diff(ladder) <= 0):
        raise InvalidArgument("n0 ladder must be strictly increasing")
    xis = [np.asarray(x, dtype=np.float64).reshape(3) for x in xi_probes]
    if not xis:
        raise InvalidArgument("need at least one probe frequency")
    full = [rho_hat_at(bsd, bsd_t, x, tau_ladder, lam_cap) for x in xis]
    rows = []
    for n0 in ladder:
        b_t = drop_traces(bsd_t, int(n0))
        for x, ref in zip(xis, full):
            est = rho_hat_at(bsd, b_t, x, tau_ladder, lam_cap)
            decay = finite_sum_decay(bsd, bsd_t, int(n0), x, decay_range)
            diff = abs(est.value - ref.value)
            rows.append({
                "n0": int(n0),
                "xi": [float(v) for v in x],
                "rho_hat_re": est.value.real,
                "rho_hat_im": est.value.imag,
                "full_re": ref.value.real,
                "full_im": ref.value.imag,
                "total_error": est.error,
                "excluded_bound": est.excluded,
                "full_error": ref.error,
                "difference": diff,
                "consistent": bool(diff <= est.error + ref.error),
                "decay_exponent": decay.exponent,
                "decay_ok": bool(decay.exponent <= -1.5),
            })
    per_n0 = np.array([max(r["total_error"] for r in rows if r["n0"] == n) for n in ladder])
    if ladder.size >= 2:
        slope = fit_loglog(ladder, per_n0)
        interval = bootstrap_slope(ladder, per_n0, np.random.default_rng(0))
    else:
        slope, interval = math.nan, (math.nan, math.nan)
    fp = fingerprint({"kind": "incomplete", "bsd": bsd_digest(bsd), "bsd_t": bsd_digest(bsd_t),
                      "n0": ladder, "xi": [x.tolist() for x in xis], "tau_ladder": list(tau_ladder),
                      "lam_cap": lam_cap, "decay_range": list(decay_range)})
    return SweepResult("n0", ladder.astype(np.float64), rows, slope, interval, float(per_n0.max()), fp,
                       {"condition": cond})


# ---------------------------------------------------------------------------
# export


def sweep_to_csv(res):
    if not res.metrics:
        return ""
    keys = list(res.metrics[0].keys())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for row in res.metrics:
        out = []
        for k in keys:
            v = row[k]
            if isinstance(v, list):
                out.append(" ".join(_fmt(float(t)) for t in v))
            elif isinstance(v, float):
                # an exactly vanishing finite sum has exponent -inf; CSV readers parse "-inf"
                out.append(_fmt(v) if math.isfinite(v) else str(v))
            else:
                out.append(str(v).lower() if isinstance(v, bool) else str(v))
        w.writerow(out)
    return buf.getvalue()


def _finite_or_none(v):
    return float(v) if math.isfinite(v) else None


def sweep_summary(res):
    """JSON-ready summary; a slope that cannot be fitted (single ladder point) becomes null."""
    return {
        "parameter": res.parameter,
        "ladder": [float(v) for v in res.ladder],
        "slope": _finite_or_none(res.slope),
        "slope_interval": [_finite_or_none(v) for v in res.slope_interval],
        "constant": res.constant,
        "fingerprint": res.fingerprint,
        **res.extra,
    }


def cutoff_tradeoff(delta, error_scale, rho_norm_sq, factors=(0.25, 0.5, 1.0, 2.0, 4.0)):
    """Total proxy error r^3 (C delta)^2 + r^-2 ||rho||^2 at multiples of delta^(-2/5)."""
    r0 = cutoff_radius(delta)
    return {f: (f * r0) ** 3 * (error_scale * delta) ** 2 + (f * r0) ** -2 * rho_norm_sq for f in factors}
