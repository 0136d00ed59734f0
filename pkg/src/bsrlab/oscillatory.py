"""Oscillatory boundary integrals on S^2 and uniform-in-tau pairing bounds.

The integral I(tau) = int_{S^2} exp(i tau theta.x) phi(x) ds is evaluated on a
product rule whose polar axis is theta, so the phase depends on the polar
coordinate only and the azimuthal rule just has to resolve phi.
"""
from dataclasses import dataclass
import csv
import io
import math

import numpy as np

from .errors import InvalidArgument, ResolutionError
from .kernels import oscillatory_sum
from .probe import make_probe, trace_values
from .sphere import BoundaryFunction, _unit, build_quadrature, harmonics_at, hs_norm
from .spectral import _fmt, dumps_json, write_atomic

NODES_PER_WAVELENGTH = 10
MAX_POLAR = 4096
ROUNDOFF_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class OscillatoryReport:
    theta: np.ndarray
    tau_values: np.ndarray
    magnitudes: np.ndarray
    fitted_exponent: float
    bound_constant: float
    s: float
    hs_norm: float
    envelope_slope: float

    def bounds(self):
        """C ||phi||_{H^s} / tau along the ladder."""
        return self.bound_constant * self.hs_norm / self.tau_values


def _density_lmax(phi):
    if isinstance(phi, BoundaryFunction):
        return phi.lmax
    return 0


def _polar_count(tau, lmax):
    return int(math.ceil(NODES_PER_WAVELENGTH * abs(tau) / math.pi)) + int(lmax) + 8


def _ladder_on(phi, theta, taus, polar, lmax):
    azimuth = max(4, 2 * lmax + 2)
    quad = build_quadrature(polar, azimuth, axis=theta)
    if isinstance(phi, BoundaryFunction):
        if phi.coeffs is None and phi.quad is not None and phi.quad.rotation is None:
            vals = phi.with_coefficients().evaluate(quad.nodes)
        else:
            vals = phi.evaluate(quad.nodes)
    else:
        vals = np.broadcast_to(np.asarray(phi, dtype=np.complex128), (quad.size,))
    return np.array([oscillatory_sum(quad.nodes, quad.weights, vals, theta, t) for t in taus])


def oscillatory_ladder(phi, theta, taus, rtol=1e-12):
    """I(tau) for every tau in ``taus`` on one theta-aligned rule.

    The rule starts at 10 nodes per wavelength for the largest tau and grows
    by half until two successive ladders agree to ``rtol`` relative to the L1
    size of the integrand.
    """
    theta = _unit(theta, "theta")
    taus = np.atleast_1d(np.asarray(taus, dtype=np.float64))
    lmax = _density_lmax(phi)
    scale = _l1_scale(phi)
    if scale == 0.0:
        return np.zeros(taus.size, dtype=np.complex128)
    polar = _polar_count(float(np.max(np.abs(taus))), lmax)
    prev = _ladder_on(phi, theta, taus, polar, lmax)
    while True:
        nxt = polar + max(8, polar // 2)
        if nxt > MAX_POLAR:
            raise ResolutionError(
                f"oscillatory integral unresolved at tau={float(np.max(taus)):g} with {polar} polar nodes")
        cur = _ladder_on(phi, theta, taus, nxt, lmax)
        if np.max(np.abs(cur - prev)) <= rtol * scale:
            return cur
        prev, polar = cur, nxt


def boundary_oscillatory_integral(phi, theta, tau, quad=None, rtol=1e-12):
    """int_{S^2} exp(i tau theta.x) phi(x) ds(x).

    ``phi`` is a :class:`BoundaryFunction` (band-limited) or a constant.  The
    rule is aligned with theta and refined as in :func:`oscillatory_ladder`;
    a finer ``quad`` only raises the polar count.
    """
    lmax = _density_lmax(phi)
    if quad is not None and quad.polar_count > _polar_count(float(tau), lmax):
        theta = _unit(theta, "theta")
        return complex(_ladder_on(phi, theta, [float(tau)], quad.polar_count, lmax)[0])
    return complex(oscillatory_ladder(phi, theta, [float(tau)], rtol)[0])


def _l1_scale(phi):
    if isinstance(phi, BoundaryFunction):
        c = phi.coefficients()
        return float(math.sqrt(4.0 * math.pi) * math.sqrt(np.sum(np.abs(c) ** 2)))
    return float(4.0 * math.pi * abs(complex(phi)))


def closed_form_constant(tau):
    """int_{S^2} exp(i tau theta.x) ds = 4 pi sin(tau) / tau."""
    return 4.0 * math.pi * math.sin(tau) / tau if tau != 0 else 4.0 * math.pi


def upper_envelope(x, y):
    """Local maxima of ``y`` (strict on the left, weak on the right), endpoints excluded."""
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if y.size < 3:
        return x, y
    inner = (y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])
    idx = np.flatnonzero(inner) + 1
    if idx.size < 2:
        return x, y
    return x[idx], y[idx]


def loglog_slope(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    ok = (x > 0) & (y > 0)
    if np.count_nonzero(ok) < 2:
        return -math.inf if np.all(y[x > 0] == 0) else math.nan
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def _tau_grid(tau_range):
    arr = np.asarray(tau_range, dtype=np.float64)
    if arr.ndim == 1 and arr.size == 2:
        lo, hi = float(arr[0]), float(arr[1])
        if not hi > lo:
            raise InvalidArgument("tau range must be increasing")
        return np.linspace(lo, hi, int(math.ceil((hi - lo) * 20)) + 1)
    if arr.ndim != 1 or arr.size < 3 or np.any(np.diff(arr) <= 0):
        raise InvalidArgument("tau values must be an increasing list of at least 3 points")
    return arr


def vdc_decay_report(phi, theta, tau_range=(1.0, 100.0), s=2.0):
    """Decay of |I(tau)| and the empirical constant in |I| <= C ||phi||_{H^s} / tau.

    ``tau_range`` is either ``(lo, hi)``, sampled at spacing 0.05 so every
    oscillation contributes a local maximum, or an explicit increasing ladder.
    """
    if not s > 1.0:
        raise InvalidArgument(f"s = {s} must exceed (d-1)/2 = 1")
    taus = _tau_grid(tau_range)
    if taus[0] < 1.0 or taus[-1] > 200.0:
        raise InvalidArgument("tau values must lie in [1, 200]")
    theta = _unit(theta, "theta")
    if not isinstance(phi, BoundaryFunction):
        phi = BoundaryFunction.spectral(np.array([[complex(phi) * math.sqrt(4.0 * math.pi)]]))
    mags = np.abs(oscillatory_ladder(phi, theta, taus))
    norm = hs_norm(phi, s)
    ex, ey = upper_envelope(taus, mags)
    exponent = -loglog_slope(ex, ey)
    tx, ty = upper_envelope(taus, taus * mags)
    env_slope = loglog_slope(tx, ty)
    const = float(np.max(taus * mags) / norm) if norm > 0 else 0.0
    return OscillatoryReport(theta, taus, mags, exponent, const, float(s), norm, env_slope)


def report_to_csv(rep):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tau", "abs_I", "bound"])
    for t, m, b in zip(rep.tau_values, rep.magnitudes, rep.bounds()):
        w.writerow([_fmt(float(t)), _fmt(float(m)), _fmt(float(b))])
    return buf.getvalue()


def report_summary(rep):
    return {"exponent": rep.fitted_exponent, "constant": rep.bound_constant, "s": rep.s,
            "envelope_slope_tau_I": rep.envelope_slope, "hs_norm": rep.hs_norm,
            "theta": [float(v) for v in rep.theta]}


def save_report(rep, csv_path, json_path):
    write_atomic(csv_path, report_to_csv(rep))
    write_atomic(json_path, dumps_json(report_summary(rep)))


def random_band_limited(rng, lmax=8, real=True):
    """Random density with Gaussian coefficients up to degree ``lmax``.

    With ``real`` the coefficients obey c_{l,-m} = (-1)^m conj(c_{l,m}).
    """
    c = np.zeros((lmax + 1, 2 * lmax + 1), dtype=np.complex128)
    for ell in range(lmax + 1):
        for m in range(0, ell + 1):
            if m == 0:
                v = rng.standard_normal() + (0j if real else 1j * rng.standard_normal())
                c[ell, lmax] = v
            else:
                v = (rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2.0)
                c[ell, lmax + m] = v
                c[ell, lmax - m] = ((-1) ** m) * v.conjugate() if real else \
                    (rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2.0)
    return BoundaryFunction.spectral(c)


# ---------------------------------------------------------------------------
# pairing bounds


@dataclass(frozen=True, eq=False)
class PairingBound:
    """|(g, psi_n)| along a tau ladder, with the split g = J0 part + J1 part.

    J0 carries i sqrt(lam) omega.x exp(...), J1 carries alpha exp(...).
    """

    tau_values: np.ndarray
    magnitudes: np.ndarray
    j0: np.ndarray
    j1: np.ndarray
    maximum: float
    slope: float
    hs_norm: float
    constant: float

    def __float__(self):
        return self.maximum


def _pairing_parts(entry, alpha, probe):
    lmax = entry.l
    polar = _polar_count(abs(probe.sqrt_lam), lmax)
    quad = build_quadrature(polar, max(8, 2 * lmax + 4), axis=probe.omega)
    k = probe.sqrt_lam
    t = quad.nodes @ probe.omega
    e = np.exp(1j * k * t)
    y = harmonics_at(lmax, quad.nodes)[entry.l, entry.l + entry.m]
    w = quad.weights * entry.boundary_value * y.conj()
    j0 = complex(np.sum(w * 1j * k * t * e))
    j1 = complex(np.sum(w * alpha * e))
    # L1 size of the integrand: pairings below roundoff of this are zero
    scale = float(np.sum(np.abs(w) * np.abs(1j * k * t + alpha) * np.abs(e)))
    return j0, j1, scale


def pairing_uniform_bound(entry, alpha, xi, tau_range=(4.0, 64.0), s=2.0, samples=61):
    """max over the ladder of |(g, psi_n)| and its log-log trend in tau.

    The constant is max |(g, psi_n)| / ((1 + alpha) ||psi_n||_{H^m}) with
    m = ceil(s) + 1.
    """
    xi = np.asarray(xi, dtype=np.float64).reshape(3)
    arr = np.asarray(tau_range, dtype=np.float64)
    if arr.size == 2:
        taus = np.geomspace(arr[0], arr[1], int(samples))
    else:
        taus = arr
    if taus[0] <= np.linalg.norm(xi) / 2:
        raise InvalidArgument("tau ladder must lie above |xi|/2")
    alpha = float(alpha)
    parts = np.array([_pairing_parts(entry, alpha, make_probe(xi, t)) for t in taus])
    j0, j1 = parts[:, 0], parts[:, 1]
    mags = np.abs(j0 + j1)
    mags[mags <= ROUNDOFF_FLOOR * parts[:, 2].real] = 0.0
    m = int(math.ceil(s)) + 1
    c = np.zeros((entry.l + 1, 2 * entry.l + 1))
    c[entry.l, entry.l + entry.m] = entry.boundary_value
    norm = hs_norm(c, m)
    ex, ey = upper_envelope(taus, mags)
    slope = loglog_slope(ex, ey) if ex.size >= 2 else loglog_slope(taus, mags)
    mx = float(mags.max())
    const = mx / ((1.0 + alpha) * norm) if norm > 0 else 0.0
    return PairingBound(taus, mags, j0, j1, mx, slope, norm, const)


@dataclass(frozen=True, eq=False)
class FiniteSumDecay:
    tau_values: np.ndarray
    magnitudes: np.ndarray
    exponent: float
    exact_zero: bool


def finite_sum_decay(bsd, bsd_t, n0, xi, tau_range=(8.0, 64.0), samples=25):
    """|sum_{n<n0} (d_n - d~_n) / (lam_n - lam_tau)| on a geometric tau ladder and its log-log slope.

    Uses the stored boundary values even where traces are flagged unknown, so
    synthetically perturbed traces can be compared directly.
    """
    if len(bsd) != len(bsd_t):
        raise InvalidArgument("BSD lengths differ")
    n0 = int(n0)
    if n0 < 1 or n0 > len(bsd) + 1:
        raise InvalidArgument(f"n0 = {n0} out of range")
    xi = np.asarray(xi, dtype=np.float64).reshape(3)
    arr = np.asarray(tau_range, dtype=np.float64)
    taus = np.geomspace(arr[0], arr[1], int(samples)) if arr.size == 2 else arr
    k = n0 - 1
    if k == 0:
        return FiniteSumDecay(taus, np.zeros(taus.size), -math.inf, True)
    b0 = bsd.boundary_value[:k]
    b1 = bsd_t.boundary_value[:k]
    lam = bsd.lam[:k]
    mags = np.empty(taus.size)
    for i, t in enumerate(taus):
        probe = make_probe(-xi, t)
        lmax = int(max(bsd.l[:k].max(), bsd_t.l[:k].max()))
        polar = _polar_count(abs(probe.sqrt_lam), lmax)
        quad = build_quadrature(polar, max(8, 2 * polar))
        g = trace_values(probe, bsd.alpha, quad.nodes, "g")
        h = trace_values(probe, bsd.alpha, quad.nodes, "h")
        cg = quad.project(g, lmax)
        ch = quad.project(h, lmax)
        a0 = cg[bsd.l[:k], bsd.m[:k] + lmax] * ch[bsd.l[:k], bsd.m[:k] + lmax].conj()
        a1 = cg[bsd_t.l[:k], bsd_t.m[:k] + lmax] * ch[bsd_t.l[:k], bsd_t.m[:k] + lmax].conj()
        mags[i] = abs(np.sum((b0 * b0 * a0 - b1 * b1 * a1) / (lam - probe.lam)))
    if not np.any(mags):
        return FiniteSumDecay(taus, mags, -math.inf, True)
    return FiniteSumDecay(taus, mags, loglog_slope(taus, mags), False)
