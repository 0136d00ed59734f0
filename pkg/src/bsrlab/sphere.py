"""Quadrature, spherical harmonics and Sobolev norms on the unit sphere S^2."""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import integrate, special

from .errors import DivergenceError, InvalidArgument
from .kernels import legendre_table

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class HarmonicIndex:
    l: int
    m: int

    def __post_init__(self):
        if self.l < 0 or abs(self.m) > self.l:
            raise InvalidArgument(f"invalid harmonic index (l={self.l}, m={self.m})")


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Gauss-Legendre (polar) x uniform (azimuth) product rule.

    ``rotation`` maps the rule's polar axis e3 onto ``rotation @ e3``; the fast
    FFT projection is only used when it is ``None``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    polar_count: int
    azimuth_count: int
    cos_polar: np.ndarray
    polar_weights: np.ndarray
    azimuths: np.ndarray
    rotation: np.ndarray | None = None

    @property
    def lmax_exact(self):
        return min(self.polar_count - 1, self.azimuth_count // 2 - 1)

    @property
    def size(self):
        return self.nodes.shape[0]

    def integrate(self, values):
        return np.sum(self.weights * np.asarray(values))

    def project(self, values, lmax=None):
        """Harmonic coefficients ``c[l, m + lmax] = (f, Y_lm)`` of nodal values."""
        lmax = self.lmax_exact if lmax is None else int(lmax)
        values = np.asarray(values, dtype=np.complex128)
        if self.rotation is not None:
            ylm = harmonics_at(lmax, self.nodes)
            return np.einsum("lmn,n->lm", ylm.conj(), self.weights * values)
        grid = values.reshape(self.polar_count, self.azimuth_count)
        # F[i, m] = sum_j f_ij exp(-i m phi_j)
        spec = np.fft.fft(grid, axis=1) * (2.0 * math.pi / self.azimuth_count)
        ptab = legendre_table(lmax, self.cos_polar)
        wp = self.polar_weights
        out = np.zeros((lmax + 1, 2 * lmax + 1), dtype=np.complex128)
        for m in range(0, lmax + 1):
            if m >= self.azimuth_count:
                break
            pm = ptab[m:, m, :] * wp  # (l >= m, polar)
            out[m:, lmax + m] = pm @ spec[:, m]
            if m > 0:
                out[m:, lmax - m] = ((-1) ** m) * (pm @ spec[:, (-m) % self.azimuth_count])
        return out


def build_quadrature(polar_count, azimuth_count, axis=None):
    """Product rule on S^2 with ``polar_count`` Gauss nodes in cos(theta)."""
    polar_count = int(polar_count)
    azimuth_count = int(azimuth_count)
    if polar_count < 2 or azimuth_count < 4:
        raise InvalidArgument(
            f"quadrature needs polar_count >= 2 and azimuth_count >= 4, "
            f"got ({polar_count}, {azimuth_count})")
    t, w = np.polynomial.legendre.leggauss(polar_count)
    t = t[::-1].copy()  # north pole first
    w = w[::-1].copy()
    phi = 2.0 * math.pi * np.arange(azimuth_count) / azimuth_count
    st = np.sqrt(1.0 - t * t)
    nodes = np.empty((polar_count, azimuth_count, 3))
    nodes[..., 0] = st[:, None] * np.cos(phi)[None, :]
    nodes[..., 1] = st[:, None] * np.sin(phi)[None, :]
    nodes[..., 2] = t[:, None]
    nodes = nodes.reshape(-1, 3)
    weights = np.repeat(w, azimuth_count) * (2.0 * math.pi / azimuth_count)
    rot = None
    if axis is not None:
        rot = rotation_to(axis)
        if not np.allclose(rot, np.eye(3), atol=0.0, rtol=0.0):
            nodes = nodes @ rot.T
        else:
            rot = None
    nodes /= np.linalg.norm(nodes, axis=1)[:, None]
    return SphereQuadrature(nodes, weights, polar_count, azimuth_count, t, w, phi, rot)


def rotation_to(axis):
    """Proper rotation taking e3 to the unit vector ``axis``."""
    a = _unit(axis, "axis")
    e3 = np.array([0.0, 0.0, 1.0])
    c = float(a @ e3)
    if c > 1.0 - 1e-15:
        return np.eye(3)
    if c < -1.0 + 1e-15:
        return np.diag([1.0, -1.0, -1.0])
    v = np.cross(e3, a)
    vx = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    return np.eye(3) + vx + vx @ vx / (1.0 + c)


def _unit(v, name="point", tol=1e-12):
    v = np.asarray(v, dtype=np.float64).reshape(3)
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise InvalidArgument(f"{name} must be a unit vector, |{name}| = {np.linalg.norm(v)!r}")
    return v


def harmonics_at(lmax, points):
    """Complex orthonormal harmonics at ``points``: array ``(lmax+1, 2*lmax+1, N)``."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    z = np.clip(pts[:, 2], -1.0, 1.0)
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    ptab = legendre_table(lmax, z)
    out = np.zeros((lmax + 1, 2 * lmax + 1, pts.shape[0]), dtype=np.complex128)
    for m in range(0, lmax + 1):
        e = np.exp(1j * m * phi)
        out[m:, lmax + m] = ptab[m:, m] * e
        if m > 0:
            out[m:, lmax - m] = ((-1) ** m) * ptab[m:, m] * e.conj()
    return out


def eval_harmonic(idx, point):
    """Y_lm(point) with Condon-Shortley phase."""
    if not isinstance(idx, HarmonicIndex):
        idx = HarmonicIndex(*idx)
    p = _unit(point)
    return complex(harmonics_at(idx.l, p[None, :])[idx.l, idx.l + idx.m, 0])


def synthesize(coeffs, points):
    """Evaluate sum_lm c_lm Y_lm at ``points``."""
    coeffs = np.asarray(coeffs)
    lmax = coeffs.shape[0] - 1
    ylm = harmonics_at(lmax, points)
    return np.einsum("lm,lmn->n", coeffs, ylm)


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    """A function on S^2 held as nodal values, harmonic coefficients, or both."""

    quad: SphereQuadrature | None = None
    values: np.ndarray | None = None
    coeffs: np.ndarray | None = None

    def __post_init__(self):
        if self.values is None and self.coeffs is None:
            raise InvalidArgument("BoundaryFunction needs nodal values or coefficients")
        if self.values is not None and self.quad is None:
            raise InvalidArgument("nodal values need a quadrature")

    @classmethod
    def nodal(cls, quad, values):
        vals = np.asarray(values, dtype=np.complex128)
        if vals.shape != (quad.size,):
            vals = np.broadcast_to(vals, (quad.size,)).copy()
        return cls(quad=quad, values=vals)

    @classmethod
    def spectral(cls, coeffs):
        return cls(coeffs=np.asarray(coeffs, dtype=np.complex128))

    @classmethod
    def from_index(cls, idx, amplitude=1.0):
        if not isinstance(idx, HarmonicIndex):
            idx = HarmonicIndex(*idx)
        c = np.zeros((idx.l + 1, 2 * idx.l + 1), dtype=np.complex128)
        c[idx.l, idx.l + idx.m] = amplitude
        return cls(coeffs=c)

    @property
    def lmax(self):
        if self.coeffs is not None:
            return self.coeffs.shape[0] - 1
        return self.quad.lmax_exact

    def coefficients(self, lmax=None):
        if self.coeffs is not None and (lmax is None or lmax == self.lmax):
            return self.coeffs
        if self.coeffs is not None:
            return _resize(self.coeffs, lmax)
        return self.quad.project(self.values, lmax)

    def with_coefficients(self, lmax=None):
        return BoundaryFunction(self.quad, self.values, self.coefficients(lmax))

    def evaluate(self, points):
        if self.coeffs is None and self.quad is not None and points is self.quad.nodes:
            return self.values
        return synthesize(self.coefficients(), points)

    def on(self, quad):
        if self.quad is quad and self.values is not None:
            return self
        return BoundaryFunction(quad, self.evaluate(quad.nodes), self.coeffs)


def _resize(coeffs, lmax):
    old = coeffs.shape[0] - 1
    out = np.zeros((lmax + 1, 2 * lmax + 1), dtype=np.complex128)
    k = min(old, lmax)
    out[: k + 1, lmax - k: lmax + k + 1] = coeffs[: k + 1, old - k: old + k + 1]
    return out


def hs_norm(f, s):
    """Spectral H^s(S^2) norm with weights (1 + l(l+1))^s."""
    if s < 0:
        raise InvalidArgument("s must be nonnegative")
    c = f.coefficients() if isinstance(f, BoundaryFunction) else np.asarray(f)
    l = np.arange(c.shape[0], dtype=np.float64)
    w = (1.0 + l * (l + 1.0)) ** s
    return float(math.sqrt(np.sum(w[:, None] * np.abs(c) ** 2)))


@dataclass(frozen=True, eq=False)
class StationaryPointSet:
    """Stationary points of x -> theta.x on S^2 with their tangential Hessians."""

    theta: np.ndarray
    points: tuple
    hessian_indices: tuple
    hessians: tuple = field(default=())


def tangent_basis(p):
    p = np.asarray(p, dtype=np.float64)
    a = np.array([1.0, 0.0, 0.0]) if abs(p[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = a - (a @ p) * p
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(p, e1)
    return np.stack([e1, e2], axis=1)


def stationary_points(theta):
    """The sphere has exactly two: the maximum at +theta and the minimum at -theta."""
    theta = _unit(theta, "theta")
    points, indices, hessians = [], [], []
    for p in (theta, -theta):
        e = tangent_basis(p)
        # tangential Hessian of a linear function on S^2 is -(theta . nu) Id
        hess = -(theta @ p) * (e.T @ e)
        if abs(np.linalg.det(hess)) < 1e-12:
            raise InvalidArgument("degenerate stationary point")
        points.append(p.copy())
        indices.append(int(np.sum(np.linalg.eigvalsh(hess) < 0.0)))
        hessians.append(hess)
    return StationaryPointSet(theta, tuple(points), tuple(indices), tuple(hessians))


def c_s_constant(s, dim):
    """C_s = integral over R^dim of (1 + |x|^2)^(-s) dx, by radial quadrature."""
    dim = int(dim)
    if dim < 1:
        raise InvalidArgument("dim must be a positive integer")
    if s <= dim / 2.0:
        raise DivergenceError(f"integral diverges for s = {s} <= dim/2 = {dim / 2}")
    area = 2.0 * math.pi ** (dim / 2.0) / special.gamma(dim / 2.0)
    val, _ = integrate.quad(lambda r: r ** (dim - 1) * (1.0 + r * r) ** (-s), 0.0, np.inf,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return float(area * val)
