"""Robin eigenpairs of -Laplace + q on the unit ball for radial q.

Separation u = R(r) Y_lm(x/|x|) and the substitution v = r R reduce each
degree l to

    -v'' + (l(l+1)/r^2 + q(r)) v = lam v,   v(0) = 0,   v'(1) + (alpha - 1) v(1) = 0.

The radial problem is discretised on a cell-centred uniform mesh (first node
at h/2, so the centrifugal term is never evaluated at r = 0).  Ghost values
v_0 = -v_1 and the face-centred Robin relation keep the matrix symmetric
tridiagonal.  Eigenvalues and boundary values are Richardson-extrapolated from
meshes N and 2N, removing the O(h^2) term.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import interpolate, linalg

from .errors import CapError, ConfigError, InvalidArgument, NumericError
from .spectral import BoundarySpectralData

SIGMA = 2.0  # max(2, d/2) for d = 3


@dataclass(frozen=True, eq=False)
class RadialPotential:
    """Sampled radial profile q(r) on [0, 1] in the class {||q||_{L^2(ball)} <= M}."""

    grid: np.ndarray
    values: np.ndarray
    norm_budget: float = 10.0
    label: str = "sampled"
    sigma: float = SIGMA
    _spline: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise ConfigError("potential grid and values must be 1-D of equal length >= 2")
        if np.any(np.diff(grid) <= 0) or grid[0] != 0.0 or grid[-1] != 1.0:
            raise ConfigError("potential grid must increase strictly from 0 to 1")
        if not np.all(np.isfinite(values)):
            raise ConfigError("potential values must be finite")
        if not self.norm_budget > 0:
            raise ConfigError("norm budget M must be positive")
        norm = self.lsigma_norm()
        if norm > self.norm_budget * (1.0 + 1e-12):
            raise ConfigError(f"||q||_L{self.sigma:g} = {norm:.6g} exceeds budget M = {self.norm_budget:g}")
        if np.all(values == values[0]):
            spl = None
        elif grid.size >= 4:
            spl = interpolate.CubicSpline(grid, values)
        else:
            spl = interpolate.interp1d(grid, values)
        object.__setattr__(self, "_spline", spl)

    @classmethod
    def constant(cls, c, norm_budget=None):
        budget = norm_budget if norm_budget is not None else max(1.0, 2.0 * abs(c) * math.sqrt(4 * math.pi / 3))
        return cls(np.array([0.0, 1.0]), np.array([float(c), float(c)]), budget, f"constant({c:g})")

    @classmethod
    def from_function(cls, func, samples=4001, norm_budget=10.0, label="function"):
        r = np.linspace(0.0, 1.0, samples)
        return cls(r, np.asarray(func(r), dtype=np.float64), norm_budget, label)

    @classmethod
    def gaussian(cls, amplitude, width, center=0.0, samples=4001, norm_budget=10.0):
        return cls.from_function(lambda r: amplitude * np.exp(-0.5 * ((r - center) / width) ** 2),
                                 samples, norm_budget,
                                 f"gaussian(amplitude={amplitude:.17g}, width={width:.17g}, center={center:.17g})")

    def __call__(self, r):
        r = np.asarray(r, dtype=np.float64)
        if self._spline is None:
            return np.full(r.shape, self.values[0])
        return np.asarray(self._spline(r), dtype=np.float64)

    def lsigma_norm(self):
        """(4 pi int_0^1 |q|^sigma r^2 dr)^(1/sigma) by Simpson's rule on the sample grid."""
        from scipy.integrate import simpson
        f = np.abs(self.values) ** self.sigma * self.grid ** 2
        return float((4.0 * math.pi * simpson(f, x=self.grid)) ** (1.0 / self.sigma))

    @property
    def minimum(self):
        return float(np.min(self.values))

    def describe(self):
        return {"label": self.label, "norm_budget": float(self.norm_budget),
                "lsigma_norm": self.lsigma_norm(), "min": self.minimum,
                "max": float(np.max(self.values))}


@dataclass(frozen=True)
class RobinCoefficient:
    value: float
    regularity_class: str = "constant"

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < 0.0:
            raise ConfigError(f"Robin coefficient must be a finite alpha >= 0, got {self.value!r}")


def check_incomplete_data_conditions(q, alpha, q_other=None, c_floor=0.0):
    """Gate for incomplete-data experiments: (q, q~ >= 0, alpha >= c > 0) or (q, q~ >= c > 0, alpha >= 0).

    Returns the name of the satisfied condition, raising :class:`ConfigError`
    that names the violated inequalities otherwise.
    """
    a = alpha.value if isinstance(alpha, RobinCoefficient) else float(alpha)
    qmin = min(p.minimum for p in (q, q_other) if p is not None)
    if qmin >= 0.0 and a > c_floor:
        return "c1"
    if qmin > c_floor and a >= 0.0:
        return "c2"
    raise ConfigError(
        f"neither condition holds: c1 needs q, q~ >= 0 and alpha >= c > 0 "
        f"(min q = {qmin:.6g}, alpha = {a:.6g}); c2 needs q, q~ >= c > 0 and alpha >= 0")


@dataclass(frozen=True, eq=False)
class RadialMode:
    l: int
    k: int
    lam: float
    boundary_value: float
    radii: np.ndarray
    radial_profile: np.ndarray


def _as_alpha(alpha):
    return alpha if isinstance(alpha, RobinCoefficient) else RobinCoefficient(float(alpha))


def _tridiagonal(q, alpha, l, n):
    h = 1.0 / n
    r = (np.arange(1, n + 1) - 0.5) * h
    beta = 1.0 - alpha
    gamma = (1.0 + 0.5 * h * beta) / (1.0 - 0.5 * h * beta)
    diag = 2.0 / h**2 + l * (l + 1.0) / r**2 + q(r)
    diag[0] += 1.0 / h**2
    diag[-1] -= gamma / h**2
    off = np.full(n - 1, -1.0 / h**2)
    return r, diag, off, gamma


def _fd_modes(q, alpha, l, n, count=None, upper=None):
    r, d, e, gamma = _tridiagonal(q, alpha, l, n)
    try:
        if count is not None:
            w, v = linalg.eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1))
        else:
            w, v = linalg.eigh_tridiagonal(d, e, select="v", select_range=(-np.inf, upper))
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"tridiagonal eigensolver failed for l={l}, N={n}: {exc}") from None
    h = 1.0 / n
    v = v / math.sqrt(h)  # h * sum v_i^2 = 1
    bval = 0.5 * (1.0 + gamma) * v[-1, :]
    sign = np.where(bval < 0.0, -1.0, 1.0)
    return r, w, v * sign, bval * sign


def solve_radial_modes(q, alpha, l, count, mesh=1000, refine=True):
    """Lowest ``count`` Robin eigenpairs of degree ``l``.

    With ``refine`` the eigenvalues and boundary values are extrapolated from
    meshes ``mesh`` and ``2*mesh``; profiles come from the finer mesh.
    """
    alpha = _as_alpha(alpha)
    if count < 1:
        raise InvalidArgument("count must be >= 1")
    if mesh < 200:
        raise InvalidArgument("mesh must be >= 200")
    if l < 0:
        raise InvalidArgument("degree must be nonnegative")
    lam, bval, r, prof = _solve(q, alpha.value, l, count, mesh, refine)
    return [RadialMode(l, k + 1, float(lam[k]), float(bval[k]), r, prof[:, k]) for k in range(count)]


def _solve(q, a, l, count, mesh, refine):
    _, w1, v1, b1 = _fd_modes(q, a, l, mesh, count=count)
    if not refine:
        r, _, _, _ = _tridiagonal(q, a, l, mesh)
        return w1, b1, r, v1 / r[:, None]
    r2, w2, v2, b2 = _fd_modes(q, a, l, 2 * mesh, count=count)
    lam = (4.0 * w2 - w1) / 3.0
    bval = (4.0 * b2 - b1) / 3.0
    return lam, bval, r2, v2 / r2[:, None]


def _count_below(q, a, l, mesh, upper):
    # Sturm count on the coarse mesh with a safety margin for the O(h^2) bias
    r, d, e, _ = _tridiagonal(q, a, l, mesh)
    w = linalg.eigvalsh_tridiagonal(d, e, select="v", select_range=(-np.inf, upper))
    return w.size


def assemble_bsd(q, alpha, l_max, lambda_max, mesh=1000, refine=True):
    """Boundary spectral data with every eigenvalue <= ``lambda_max`` for l <= ``l_max``.

    Raises :class:`CapError` when degree ``l_max`` itself still has an
    eigenvalue below the cap (the degree cap would truncate the spectrum).
    """
    alpha = _as_alpha(alpha)
    if l_max < 0:
        raise InvalidArgument("l_max must be >= 0")
    if mesh < 200:
        raise InvalidArgument("mesh must be >= 200")
    lam_all, l_all, m_all, b_all = [], [], [], []
    first = None
    for l in range(l_max + 1):
        cnt = _count_below(q, alpha.value, l, mesh, lambda_max * 1.05 + 10.0)
        if cnt == 0:
            continue
        lam, bval, _, _ = _solve(q, alpha.value, l, cnt, mesh, refine)
        keep = lam <= lambda_max
        if l == l_max and np.any(keep):
            raise CapError(f"degree cap l_max={l_max} has eigenvalue {lam[keep][0]:.6g} <= "
                           f"lambda_max={lambda_max:g}; raise l_max", ell=l)
        if l == 0 and lam.size:
            first = lam[0]
        for lk, bk in zip(lam[keep], bval[keep]):
            for m in range(-l, l + 1):
                lam_all.append(lk)
                l_all.append(l)
                m_all.append(m)
                b_all.append(bk)
    lam_all = np.asarray(lam_all)
    if first is not None and not lambda_max > min(first, lam_all.min(initial=np.inf)):
        raise InvalidArgument("lambda_max must exceed the first eigenvalue")
    if lam_all.size == 0:
        raise InvalidArgument("lambda_max must exceed the first eigenvalue")
    l_all = np.asarray(l_all)
    m_all = np.asarray(m_all)
    order = np.lexsort((m_all, l_all, lam_all))
    prov = {
        "potential": q.describe() if hasattr(q, "describe") else str(q),
        "solver": {"method": "cell-centred FD, Richardson(N, 2N)" if refine else "cell-centred FD",
                   "mesh": int(mesh)},
        "l_max": int(l_max),
        "lambda_max": float(lambda_max),
    }
    return BoundarySpectralData.from_arrays(
        lam_all[order], l_all[order], m_all[order], np.asarray(b_all)[order],
        alpha.value, lambda_max, provenance=prov)
