"""Isozaki frequency probes, geometric-optics boundary traces and pairings.

Conventions
-----------
``(f1, f2) = int_{S^2} f1 conj(f2) ds``.  For a probe with k = sqrt(lambda_tau)
= tau + i the two traces are

    g(x) = (i k omega.x + alpha) exp(i k omega.x)
    h(x) = (i conj(k) theta.x + alpha) exp(i conj(k) theta.x)

so that g-phase * conj(h-phase) = exp(i k (omega - theta).x) is the plane
wave whose integral against the potential difference appears in the Isozaki
identity.  On the unit sphere the outward normal is nu(x) = x.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError, InvalidArgument, MissingTraceError, PairingError
from .kernels import addition_double_sum, legendre_series, spherical_jn_complex
from .sphere import BoundaryFunction, build_quadrature, harmonics_at


@dataclass(frozen=True, eq=False)
class FrequencyProbe:
    xi: np.ndarray
    eta: np.ndarray
    tau: float
    lam: complex
    omega: np.ndarray
    theta: np.ndarray
    zeta: np.ndarray

    @property
    def sqrt_lam(self):
        # principal root of (tau + i)^2
        return complex(self.tau, 1.0)

    @property
    def xi_norm(self):
        return float(np.linalg.norm(self.xi))


def _choose_eta(xi):
    i = int(np.argmin(np.abs(xi)))
    e = np.zeros(3)
    e[i] = 1.0
    nrm2 = float(xi @ xi)
    if nrm2 > 0.0:
        e = e - (e @ xi) / nrm2 * xi
        e /= np.linalg.norm(e)
    return e


def make_probe(xi, tau):
    """Probe with omega - theta = xi / tau on the unit sphere."""
    xi = np.asarray(xi, dtype=np.float64).reshape(3)
    tau = float(tau)
    nx = float(np.linalg.norm(xi))
    if not tau > nx / 2.0:
        raise DomainError(f"tau = {tau:g} must exceed |xi|/2 = {nx / 2:g}")
    eta = _choose_eta(xi)
    b = math.sqrt(1.0 - nx * nx / (4.0 * tau * tau))
    half = xi / (2.0 * tau)
    theta = b * eta - half
    omega = b * eta + half
    zeta = xi + (nx * nx / (1.0 + b)) * eta / (2.0 * tau)
    return FrequencyProbe(xi, eta, tau, complex(tau, 1.0) ** 2, omega, theta, zeta)


# ---------------------------------------------------------------------------
# traces


@dataclass(frozen=True, eq=False)
class GoTrace:
    kind: str
    values: BoundaryFunction
    probe: FrequencyProbe
    alpha: float

    @property
    def wavenumber(self):
        k = self.probe.sqrt_lam
        return k if self.kind == "g" else k.conjugate()

    @property
    def direction(self):
        return self.probe.omega if self.kind == "g" else self.probe.theta


def trace_values(probe, alpha, points, kind):
    if kind == "g":
        k, d = probe.sqrt_lam, probe.omega
    elif kind == "h":
        k, d = probe.sqrt_lam.conjugate(), probe.theta
    else:
        raise InvalidArgument(f"trace kind must be 'g' or 'h', got {kind!r}")
    t = np.asarray(points) @ d
    return (1j * k * t + alpha) * np.exp(1j * k * t)


def go_trace(probe, alpha, quad, kind):
    vals = trace_values(probe, float(alpha), quad.nodes, kind)
    return GoTrace(kind, BoundaryFunction.nodal(quad, vals), probe, float(alpha))


def trace_bandwidth(tau):
    """Degree beyond which the trace coefficients are below double precision."""
    k = math.hypot(tau, 1.0)
    return int(math.ceil(k + 10.0 * k ** (1.0 / 3.0) + 16.0))


def trace_quadrature(tau, lmax):
    """Product rule that projects the traces exactly onto degrees <= lmax."""
    band = trace_bandwidth(tau) + int(lmax)
    polar = max(8, band // 2 + 2)
    azimuth = max(8, band + 2)
    azimuth += azimuth % 2
    return build_quadrature(polar, azimuth)


def trace_coefficients(trace, lmax):
    """``c[l, m + lmax] = (trace, Y_lm)`` by quadrature."""
    return trace.values.coefficients(lmax)


def robin_plane_wave_factor(k, alpha, lmax):
    """a_l(k) = k j_l'(k) + alpha j_l(k), l = 0..lmax, for complex k."""
    j = spherical_jn_complex(lmax + 1, k)
    ls = np.arange(lmax + 1)
    jp = np.empty(lmax + 1, dtype=np.complex128)
    jp[0] = -j[1]
    jp[1:] = j[:lmax] - (ls[1:] + 1) / k * j[1:lmax + 1]
    return k * jp + alpha * j[: lmax + 1]


def analytic_trace_coefficients(probe, alpha, lmax, kind):
    """Plane-wave expansion of a trace: (trace, Y_lm) = 4 pi i^l a_l(k) conj(Y_lm(d))."""
    if kind == "g":
        k, d = probe.sqrt_lam, probe.omega
    else:
        k, d = probe.sqrt_lam.conjugate(), probe.theta
    a = robin_plane_wave_factor(k, float(alpha), lmax)
    ylm = harmonics_at(lmax, (d / np.linalg.norm(d))[None, :])[:, :, 0]
    il = 1j ** np.arange(lmax + 1)
    return 4.0 * math.pi * (il * a)[:, None] * ylm.conj()


def analytic_group_pairing(probe, alpha, lmax):
    """D_l = sum_m (g, Y_lm)(Y_lm, h) = 4 pi (2l+1) a_l(k)^2 P_l(omega . theta)."""
    k = probe.sqrt_lam
    a = robin_plane_wave_factor(k, float(alpha), lmax)
    c = float(np.clip(probe.omega @ probe.theta, -1.0, 1.0))
    p = legendre_series(lmax, c)
    ls = np.arange(lmax + 1)
    return 4.0 * math.pi * (2 * ls + 1) * a * a * p


# ---------------------------------------------------------------------------
# pairings with boundary spectral data


def _entry_harmonic(entry, quad):
    ylm = harmonics_at(entry.l, quad.nodes)[entry.l, entry.l + entry.m]
    return entry.boundary_value * ylm


def pairing_dn(g, h, entry, quad=None):
    """d_n = (g, psi_n)(psi_n, h) by quadrature; psi_n = boundary_value * Y_lm."""
    if not entry.trace_known:
        raise MissingTraceError(f"trace of entry n={entry.n} is unknown")
    quad = quad or g.values.quad
    gv = g.values.on(quad).values
    hv = h.values.on(quad).values
    psi = _entry_harmonic(entry, quad)
    w = quad.weights
    return complex(np.sum(w * gv * psi.conj()) * np.sum(w * psi * hv.conj()))


def _find_group(bsd, ell, k):
    idx = np.flatnonzero(bsd.l == ell)
    if idx.size == 0:
        raise PairingError(f"no entries with l={ell}")
    levels = np.unique(bsd.lam_base[idx])
    if not 1 <= k <= levels.size:
        raise PairingError(f"degree l={ell} has {levels.size} radial modes, asked for k={k}")
    members = idx[bsd.lam_base[idx] == levels[k - 1]]
    if sorted(bsd.m[members].tolist()) != list(range(-ell, ell + 1)):
        raise PairingError(f"group (l={ell}, k={k}) is incomplete")
    if len(set(bsd.boundary_value[members].tolist())) != 1:
        raise PairingError(f"group (l={ell}, k={k}) has differing boundary values")
    if not np.all(bsd.trace_known[members]):
        raise MissingTraceError(f"group (l={ell}, k={k}) has unknown traces")
    return members


def pairing_group_sum(g, h, bsd, ell, k):
    """Sum of d_n over the (l, k) block via the addition theorem.

    sum_m Y_lm(x) conj(Y_lm(y)) = (2l+1)/(4 pi) P_l(x.y), so the m-sum collapses
    to one double quadrature sum whose cost does not depend on 2l+1.
    """
    members = _find_group(bsd, ell, k)
    b = float(bsd.boundary_value[members[0]])
    quad = g.values.quad
    hv = h.values.on(quad).values
    a = quad.weights * g.values.values
    c = quad.weights * hv.conj()
    total = addition_double_sum(quad.nodes, a, c, ell)
    return complex(b * b * (2 * ell + 1) / (4.0 * math.pi) * total)


def entry_pairings(bsd, cg, ch):
    """Per-entry (g, psi_n) and (psi_n, h) from trace coefficients."""
    lmax = cg.shape[0] - 1
    if bsd.l.size and int(bsd.l.max()) > lmax:
        raise InvalidArgument(f"coefficients up to l={lmax} do not cover l={int(bsd.l.max())}")
    col = bsd.m + lmax
    b = bsd.boundary_value
    gp = b * cg[bsd.l, col]
    hp = b * ch[bsd.l, col].conj()
    return gp, hp
