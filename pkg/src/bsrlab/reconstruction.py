"""Series recovery of the Fourier transform of a potential difference.

For two boundary spectral data sets (reference and tilde) and a probe at
frequency xi the truncated series

    sum1 = sum_n (d_n - d~_n) / (lam_n - lam_tau)
    sum2 = sum_n (lam~_n - lam_n) d~_n / ((lam_n - lam_tau)(lam~_n - lam_tau))

tends, as tau -> infinity, to the integral of rho = (q~ - q) chi_ball against
exp(i k (omega - theta).x) with k (omega - theta) = (1 + i/tau) xi.  With the
convention rho_hat(xi) = int exp(-i xi.x) rho dx the probe is therefore built
at -xi.  Limits in tau are taken by two-point Richardson extrapolation in 1/tau.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
import csv
import io
import math

import numpy as np
from scipy import integrate

from .errors import DomainError, InvalidArgument, PairingError
from .probe import make_probe, go_trace, trace_bandwidth, trace_quadrature
from .spectral import dumps_json, write_atomic, _fmt

DEFAULT_LADDER = (16.0, 32.0)
CAP_FACTOR = 4.0


@dataclass(frozen=True, eq=False)
class SeriesEvaluation:
    probe: object
    sum1: complex
    sum2: complex
    N_used: int
    tail_bound: float
    excluded_bound: float
    excluded_sum: complex = 0j
    lam_cap: float = math.inf
    cap_ok: bool = True

    @property
    def value(self):
        return self.sum1 + self.sum2


@dataclass(frozen=True, eq=False)
class RhoHatEstimate:
    """Extrapolated rho_hat(xi) with its error budget.

    Unpacks as ``value, error``.
    """

    xi: np.ndarray
    value: complex
    error: float
    extrapolation: float
    tail: float
    excluded: float
    evaluations: tuple

    def __iter__(self):
        yield self.value
        yield self.error


@dataclass(frozen=True, eq=False)
class FourierField:
    grid: np.ndarray
    spacing: float
    rho_hat: np.ndarray
    delta: float
    r_cut: float
    errors: np.ndarray | None = None
    error_budget: dict = field(default_factory=dict)
    real_points: np.ndarray | None = None
    real_field: np.ndarray | None = None

    @property
    def cell_volume(self):
        return self.spacing ** 3


# ---------------------------------------------------------------------------
# trace coefficients


@lru_cache(maxsize=256)
def _coefficients_cached(xi, tau, alpha, lmax):
    probe = make_probe(np.array(xi), tau)
    quad = trace_quadrature(tau, lmax)
    cg = go_trace(probe, alpha, quad, "g").values.coefficients(lmax)
    ch = go_trace(probe, alpha, quad, "h").values.coefficients(lmax)
    cg.flags.writeable = False
    ch.flags.writeable = False
    return cg, ch


def probe_coefficients(probe, alpha, lmax):
    """Harmonic coefficients (g, Y_lm) and (h, Y_lm) up to degree ``lmax``."""
    key = tuple(float(v) for v in probe.xi)
    return _coefficients_cached(key, float(probe.tau), float(alpha), int(lmax))


def _degree_span(bsd, bsd_t, tau):
    lmax = 0
    for b in (bsd, bsd_t):
        if len(b):
            lmax = max(lmax, int(b.l.max()))
    return max(lmax, trace_bandwidth(tau))


def _check_pair(bsd, bsd_t):
    if len(bsd) != len(bsd_t):
        raise PairingError(f"BSD lengths differ: {len(bsd)} vs {len(bsd_t)}")
    if bsd.alpha != bsd_t.alpha:
        raise PairingError(f"Robin coefficients differ: {bsd.alpha!r} vs {bsd_t.alpha!r}")


def _resolve_cap(bsd, bsd_t, lam_cap):
    top = min(bsd.lambda_max, bsd_t.lambda_max)
    if lam_cap is None:
        return top
    lam_cap = float(lam_cap)
    if lam_cap > top:
        raise InvalidArgument(f"lam_cap = {lam_cap:g} exceeds the data cap {top:g}")
    return lam_cap


def _entry_factors(bsd, cg, ch):
    lmax = cg.shape[0] - 1
    col = bsd.m + lmax
    return cg[bsd.l, col], ch[bsd.l, col]


def trace_bound_sq(lam):
    """Upper bound for psi_n(x)^2 on the sphere: 3 + 2 sqrt(lam).

    From |u|^2_{L^2(S^2)} <= 3|u|^2 + 2|u||grad u| (divergence theorem with the
    field x |u|^2) and |grad psi_n|^2 <= lam_n, valid when q >= 0, alpha >= 0.
    """
    return 3.0 + 2.0 * np.sqrt(np.maximum(lam, 0.0))


# ---------------------------------------------------------------------------
# series


def s_star_series(bsd, bsd_t, probe, lam_cap=None, cap_factor=CAP_FACTOR):
    """Both sums over entries with lam_n <= lam_cap, plus tail and exclusion bounds."""
    _check_pair(bsd, bsd_t)
    cap = _resolve_cap(bsd, bsd_t, lam_cap)
    lmax = _degree_span(bsd, bsd_t, probe.tau)
    cg, ch = probe_coefficients(probe, bsd.alpha, lmax)
    lt = probe.lam

    a0, c0 = _entry_factors(bsd, cg, ch)
    a1, c1 = _entry_factors(bsd_t, cg, ch)
    b0 = bsd.boundary_value
    b1 = bsd_t.boundary_value
    d0 = (b0 * a0) * (b0 * c0.conj())
    d1 = (b1 * a1) * (b1 * c1.conj())
    lam0 = bsd.lam
    lam1 = bsd_t.lam

    inside = lam0 <= cap
    known = bsd.trace_known & bsd_t.trace_known
    use = inside & known
    r0 = lam0[use] - lt
    r1 = lam1[use] - lt
    sum1 = complex(np.sum((d0[use] - d1[use]) / r0))
    sum2 = complex(np.sum((lam1[use] - lam0[use]) * d1[use] / (r0 * r1)))

    skip = inside & ~known
    excluded_bound = 0.0
    excluded_sum = 0j
    if np.any(skip):
        g0 = np.abs(a0[skip] * c0[skip])
        g1 = np.abs(a1[skip] * c1[skip])
        m0 = np.where(bsd.trace_known[skip], np.abs(d0[skip]), trace_bound_sq(lam0[skip]) * g0)
        m1 = np.where(bsd_t.trace_known[skip], np.abs(d1[skip]), trace_bound_sq(lam1[skip]) * g1)
        excluded_bound = float(np.sum(m0 / np.abs(lam0[skip] - lt) + m1 / np.abs(lam1[skip] - lt)))
        s0 = lam0[skip] - lt
        s1 = lam1[skip] - lt
        excluded_sum = complex(np.sum((d0[skip] - d1[skip]) / s0
                                      + (lam1[skip] - lam0[skip]) * d1[skip] / (s0 * s1)))

    tb = _tail_bound(bsd, bsd_t, probe, cap, cg, ch)
    return SeriesEvaluation(probe, sum1, sum2, int(np.count_nonzero(use)), tb, excluded_bound,
                            excluded_sum, cap, cap >= cap_factor * probe.tau ** 2)


def u_series_norm(bsd, trace, lam):
    """(sum_n |(trace, psi_n)|^2 / |lam_n - lam|^2)^(1/2) over entries with known traces."""
    sel = bsd.trace_known
    if not np.any(sel):
        return 0.0
    lmax = int(bsd.l[sel].max())
    coeffs = trace.values.coefficients(lmax) if hasattr(trace, "values") else np.asarray(trace)
    lmax = coeffs.shape[0] - 1
    pair = bsd.boundary_value[sel] * coeffs[bsd.l[sel], bsd.m[sel] + lmax]
    return float(math.sqrt(np.sum(np.abs(pair) ** 2 / np.abs(bsd.lam[sel] - lam) ** 2)))


def tail_bound(bsd, bsd_t, probe, lam_cap=None):
    """Bound on the part of the series left out above ``lam_cap``.

    Two pieces: a Cauchy-Schwarz bound over data entries in (lam_cap, lambda_max]
    and a remainder for the spectrum beyond the data, where radial modes of each
    degree are placed at sqrt(lam) = sqrt(lambda_max) + pi j (never sparser than
    the true spectrum) with the squared boundary value grown linearly in sqrt(lam).
    """
    _check_pair(bsd, bsd_t)
    cap = _resolve_cap(bsd, bsd_t, lam_cap)
    lmax = _degree_span(bsd, bsd_t, probe.tau)
    cg, ch = probe_coefficients(probe, bsd.alpha, lmax)
    return _tail_bound(bsd, bsd_t, probe, cap, cg, ch)


def _tail_bound(bsd, bsd_t, probe, cap, cg, ch):
    dl = np.abs(bsd_t.lam - bsd.lam)
    if not np.any(dl):
        return 0.0
    lt = probe.lam
    tau = probe.tau
    lam1 = bsd_t.lam
    lam_top = min(bsd.lambda_max, bsd_t.lambda_max)
    total = 0.0

    over = bsd.lam > cap
    if np.any(over):
        big_lambda_1 = float(dl.max())
        big_lambda_n = float(dl[over].max())
        a1, c1 = _entry_factors(bsd_t, cg, ch)
        b1 = bsd_t.boundary_value[over]
        den = np.abs(lam1[over] - lt) ** 2
        ug = math.sqrt(np.sum(np.abs(b1 * a1[over]) ** 2 / den))
        uh = math.sqrt(np.sum(np.abs(b1 * c1[over]) ** 2 / den))
        total += (1.0 + big_lambda_1 / (2.0 * tau)) * ug * uh * big_lambda_n

    total += _weyl_remainder(bsd, bsd_t, lt, lam_top, cg, ch, dl)
    return float(total)


def _weyl_remainder(bsd, bsd_t, lt, lam_top, cg, ch, dl):
    energy = np.sum(np.abs(cg) * np.abs(ch), axis=1)
    a = abs(lt)
    im = abs(lt.imag)
    mu0 = math.sqrt(lam_top)
    lam1 = bsd_t.lam
    upper = lam1 > lam_top / 4.0
    if not np.any(upper):
        upper = np.ones(len(bsd_t), dtype=bool)
    slope = bsd_t.boundary_value ** 2 / np.sqrt(np.maximum(lam1, 1.0))
    glob_dl = float(dl[upper].max())
    glob_slope = float(slope[upper].max())
    nterms = 4096
    mu = mu0 + math.pi * np.arange(nterms)
    total = 0.0
    for ell in range(energy.size):
        if energy[ell] == 0.0:
            continue
        sel = upper & (bsd_t.l == ell)
        if np.any(sel):
            big_lambda, c = float(dl[sel].max()), float(slope[sel].max())
        else:
            big_lambda, c = glob_dl, glob_slope
        if big_lambda == 0.0:
            continue
        r0 = np.maximum(mu * mu - a, im)
        r1 = np.maximum(mu * mu - a - big_lambda, im)
        s = np.sum(c * np.maximum(mu, 1.0) / (r0 * r1))
        # integral bound for the modes past the explicit terms
        end = mu[-1] + math.pi
        s += c / (2.0 * math.pi * max(end * end - a - big_lambda, im))
        total += energy[ell] * big_lambda * s
    return total


# ---------------------------------------------------------------------------
# extrapolation in tau


def _check_ladder(xi, ladder):
    ladder = tuple(float(t) for t in ladder)
    if len(ladder) < 2:
        raise InvalidArgument("tau ladder needs at least two points")
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise InvalidArgument("tau ladder must be strictly increasing")
    nx = float(np.linalg.norm(xi))
    if not ladder[0] > nx / 2.0:
        raise DomainError(f"tau ladder starts at {ladder[0]:g} <= |xi|/2 = {nx / 2:g}")
    return ladder


def rho_hat_at(bsd, bsd_t, xi, tau_ladder=DEFAULT_LADDER, lam_cap=None, cap_factor=CAP_FACTOR):
    """Extrapolated rho_hat(xi) and error = |f(tau_2) - f_inf| + tail + excluded.

    Bounds at the two ladder points enter with the Richardson weights, since
    f_inf = (tau_2 f_2 - tau_1 f_1) / (tau_2 - tau_1).
    """
    xi = np.asarray(xi, dtype=np.float64).reshape(3)
    ladder = _check_ladder(xi, tau_ladder)
    evals = tuple(s_star_series(bsd, bsd_t, make_probe(-xi, t), lam_cap, cap_factor) for t in ladder)
    e1, e2 = evals[-2], evals[-1]
    t1, t2 = ladder[-2], ladder[-1]
    w2 = t2 / (t2 - t1)
    w1 = t1 / (t2 - t1)
    f_inf = w2 * e2.value - w1 * e1.value
    extrap = abs(e2.value - f_inf)
    tail = w2 * e2.tail_bound + w1 * e1.tail_bound
    excl = w2 * e2.excluded_bound + w1 * e1.excluded_bound
    return RhoHatEstimate(xi, complex(f_inf), float(extrap + tail + excl), float(extrap),
                          float(tail), float(excl), evals)


# ---------------------------------------------------------------------------
# oracle and field


def fourier_oracle_radial(rho, xi):
    """4 pi int_0^1 rho(r) sinc(|xi| r) r^2 dr for a radial profile on the unit ball."""
    k = float(np.linalg.norm(np.atleast_1d(np.asarray(xi, dtype=np.float64))))
    f = _as_profile(rho)

    def integrand(r):
        x = k * r
        s = 1.0 - x * x / 6.0 if x < 1e-4 else math.sin(x) / x
        return float(f(r)) * s * r * r

    points = None if k < 10.0 else np.linspace(0.0, 1.0, int(k) + 2)[1:-1]
    val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-15, epsrel=1e-12, limit=400, points=points)
    return complex(4.0 * math.pi * val, 0.0)


def _as_profile(rho):
    if callable(rho):
        return rho
    if isinstance(rho, (int, float)):
        c = float(rho)
        return lambda r: c
    grid, values = rho
    grid = np.asarray(grid, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    return lambda r: np.interp(r, grid, values)


def potential_difference(q, q_t):
    """Radial profile of q~ - q."""
    return lambda r: q_t(r) - q(r)


def _is_rotation_invariant(bsd, bsd_t):
    """True when the series depends on xi only through |xi|.

    Holds if both data sets share (l, m) per index, every degenerate block is a
    complete m-multiplet, and eigenvalue, boundary value and trace flag are
    constant on each block in both data sets.
    """
    if not (np.array_equal(bsd.l, bsd_t.l) and np.array_equal(bsd.m, bsd_t.m)):
        return False
    for ell, idx in bsd.groups():
        if idx.size != 2 * ell + 1 or sorted(bsd.m[idx].tolist()) != list(range(-ell, ell + 1)):
            return False
        for b in (bsd, bsd_t):
            for col in (b.lam, b.boundary_value, b.trace_known):
                v = col[idx]
                if np.any(v != v[0]):
                    return False
    return True


def fourier_grid(r_cut, spacing):
    if not (spacing > 0 and math.isfinite(spacing)) or not (r_cut > 0 and math.isfinite(r_cut)):
        raise InvalidArgument("grid needs positive finite spacing and radius")
    if spacing > math.pi / 2 + 1e-15:
        raise InvalidArgument(f"spacing {spacing:g} exceeds pi/2")
    n = int(math.floor(r_cut / spacing + 1e-12))
    ax = np.arange(-n, n + 1)
    ii, jj, kk = np.meshgrid(ax, ax, ax, indexing="ij")
    idx = np.stack([ii.ravel(), jj.ravel(), kk.ravel()], axis=1)
    r2 = np.sum(idx * idx, axis=1)
    keep = r2 * spacing ** 2 <= r_cut ** 2 * (1.0 + 1e-12)
    if not np.any(keep):
        raise InvalidArgument("degenerate grid")
    return idx[keep], r2[keep]


def cutoff_radius(delta, dim=3):
    if not delta > 0:
        raise InvalidArgument("delta must be positive")
    return float(delta ** (-2.0 / (dim + 2)))


def reconstruct_field(bsd, bsd_t, delta, spacing=math.pi / 2, tau_ladder=DEFAULT_LADDER,
                      lam_cap=None, synthesize=False, spatial_n=9, threads=1, r_cut=None):
    """Sample rho_hat on a Cartesian grid inside |xi| <= delta^(-2/5)."""
    _check_pair(bsd, bsd_t)
    rc = cutoff_radius(delta) if r_cut is None else float(r_cut)
    idx, r2 = fourier_grid(rc, spacing)
    pts = idx * spacing
    _check_ladder(np.array([0.0, 0.0, rc]), tau_ladder)

    if _is_rotation_invariant(bsd, bsd_t):
        keys, inverse = np.unique(r2, return_inverse=True)
        targets = [np.array([0.0, 0.0, math.sqrt(k) * spacing]) for k in keys]
    else:
        inverse = np.arange(len(pts))
        targets = list(pts)

    def work(xi):
        return rho_hat_at(bsd, bsd_t, xi, tau_ladder, lam_cap)

    if threads > 1 and len(targets) > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            ests = list(pool.map(work, targets))
        # pool.map preserves input order
    else:
        ests = [work(t) for t in targets]

    vals = np.array([e.value for e in ests], dtype=np.complex128)[inverse]
    errs = np.array([e.error for e in ests])[inverse]
    # pair each xi with -xi: the grid is symmetric, so reversing the sorted index list pairs them
    order = np.lexsort(idx.T[::-1])
    vals_sorted = vals[order]
    sym = np.empty_like(vals)
    sym[order] = 0.5 * (vals_sorted + vals_sorted[::-1].conj())
    budget = {
        "tail": float(max(e.tail for e in ests)),
        "excluded": float(max(e.excluded for e in ests)),
        "extrapolation": float(max(e.extrapolation for e in ests)),
    }
    field_ = FourierField(pts, float(spacing), sym, float(delta), rc, errs, budget)
    if synthesize:
        field_ = synthesize_field(field_, spatial_n)
    return field_


def ball_points(n):
    ax = np.linspace(-1.0, 1.0, int(n))
    x, y, z = np.meshgrid(ax, ax, ax, indexing="ij")
    p = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)
    return p[np.sum(p * p, axis=1) <= 1.0 + 1e-12]


def synthesize_field(f, spatial_n=9, points=None):
    """(2 pi)^-3 sum rho_hat(xi) exp(i xi.x) dxi^3 at points in the ball."""
    pts = ball_points(spatial_n) if points is None else np.asarray(points, dtype=np.float64)
    phase = np.exp(1j * (pts @ f.grid.T))
    vals = phase @ f.rho_hat * f.cell_volume / (2.0 * math.pi) ** 3
    return FourierField(f.grid, f.spacing, f.rho_hat, f.delta, f.r_cut, f.errors, f.error_budget,
                        pts, vals.real)


def h_minus1_norm(f):
    """((2 pi)^-3 sum |rho_hat|^2 / (1 + |xi|^2) dxi^3)^(1/2)."""
    w = 1.0 / (1.0 + np.sum(f.grid * f.grid, axis=1))
    s = np.sum(w * np.abs(f.rho_hat) ** 2) * f.cell_volume / (2.0 * math.pi) ** 3
    return float(math.sqrt(s))


# ---------------------------------------------------------------------------
# export


def field_to_csv(f):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["xi1", "xi2", "xi3", "re_rho_hat", "im_rho_hat"])
    for p, v in zip(f.grid, f.rho_hat):
        w.writerow([_fmt(float(p[0])), _fmt(float(p[1])), _fmt(float(p[2])),
                    _fmt(float(v.real)), _fmt(float(v.imag))])
    return buf.getvalue()


def field_report(f):
    return {
        "delta": f.delta,
        "r_cut": f.r_cut,
        "h_minus1": h_minus1_norm(f),
        "error_budget": dict(f.error_budget),
        "grid_points": int(len(f.grid)),
        "spacing": f.spacing,
    }


def save_field(f, csv_path, json_path):
    write_atomic(csv_path, field_to_csv(f))
    write_atomic(json_path, dumps_json(field_report(f)))
