"""Hot numeric loops.

Every kernel exists twice: a numba-compiled loop version (``*_loop``) and a
vectorised numpy version (``*_numpy``).  The public name points at one of them
depending on :data:`bsrlab._accel.USE_NUMBA`.  Both are always importable so
tests and ``benchmarks/bench_kernels.py`` can compare them.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "legendre_table",
    "legendre_series",
    "addition_double_sum",
    "oscillatory_sum",
    "spherical_jn_complex",
    "USE_NUMBA",
]


# ---------------------------------------------------------------------------
# fully normalised associated Legendre functions (Condon-Shortley phase)
#   Y_lm(theta, phi) = P[l, m] (cos theta) * exp(i m phi),  m >= 0


def legendre_table_numpy(lmax, x):
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    n = x.shape[0]
    u = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    out = np.zeros((lmax + 1, lmax + 1, n))
    out[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for m in range(1, lmax + 1):
        out[m, m] = -math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * u * out[m - 1, m - 1]
    for m in range(0, lmax):
        out[m + 1, m] = math.sqrt(2.0 * m + 3.0) * x * out[m, m]
    for m in range(0, lmax + 1):
        for l in range(m + 2, lmax + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            out[l, m] = a * (x * out[l - 1, m] - b * out[l - 2, m])
    return out


def _legendre_table_loop(lmax, x):
    # point index innermost: every row out[l, m] is written contiguously
    n = x.shape[0]
    out = np.zeros((lmax + 1, lmax + 1, n))
    u = np.empty(n)
    for i in range(n):
        u[i] = math.sqrt(max(0.0, 1.0 - x[i] * x[i]))
        out[0, 0, i] = 1.0 / math.sqrt(4.0 * math.pi)
    for m in range(1, lmax + 1):
        c = -math.sqrt((2.0 * m + 1.0) / (2.0 * m))
        for i in range(n):
            out[m, m, i] = c * u[i] * out[m - 1, m - 1, i]
    for m in range(0, lmax):
        c = math.sqrt(2.0 * m + 3.0)
        for i in range(n):
            out[m + 1, m, i] = c * x[i] * out[m, m, i]
    for m in range(0, lmax + 1):
        for l in range(m + 2, lmax + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            for i in range(n):
                out[l, m, i] = a * (x[i] * out[l - 1, m, i] - b * out[l - 2, m, i])
    return out


legendre_table_loop = njit(_legendre_table_loop)


def legendre_table(lmax, x):
    """Normalised associated Legendre values, shape ``(lmax+1, lmax+1, len(x))``."""
    x = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=np.float64)))
    if USE_NUMBA:
        return legendre_table_loop(int(lmax), x)
    return legendre_table_numpy(int(lmax), x)


# ---------------------------------------------------------------------------
# plain Legendre polynomials P_l(x) for all l <= lmax


def legendre_series(lmax, x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((lmax + 1,) + x.shape)
    out[0] = 1.0
    if lmax >= 1:
        out[1] = x
    for l in range(2, lmax + 1):
        out[l] = ((2 * l - 1) * x * out[l - 1] - (l - 1) * out[l - 2]) / l
    return out


# ---------------------------------------------------------------------------
# addition-theorem double sum  sum_ij a_i b_j P_l(x_i . x_j)


def addition_double_sum_numpy(nodes, a, b, ell):
    c = np.clip(nodes @ nodes.T, -1.0, 1.0)
    p_prev = np.ones_like(c)
    if ell == 0:
        p = p_prev
    else:
        p = c.copy()
        for l in range(2, ell + 1):
            p_prev, p = p, ((2 * l - 1) * c * p - (l - 1) * p_prev) / l
    return complex(a @ (p @ b))


def _addition_double_sum_loop(nodes, a, b, ell):
    n = nodes.shape[0]
    total = 0.0 + 0.0j
    for i in range(n):
        row = 0.0 + 0.0j
        for j in range(n):
            c = nodes[i, 0] * nodes[j, 0] + nodes[i, 1] * nodes[j, 1] + nodes[i, 2] * nodes[j, 2]
            if c > 1.0:
                c = 1.0
            elif c < -1.0:
                c = -1.0
            p0 = 1.0
            p1 = c
            if ell == 0:
                p1 = 1.0
            for l in range(2, ell + 1):
                p2 = ((2 * l - 1) * c * p1 - (l - 1) * p0) / l
                p0 = p1
                p1 = p2
            row += p1 * b[j]
        total += a[i] * row
    return total


addition_double_sum_loop = njit(_addition_double_sum_loop)


def addition_double_sum(nodes, a, b, ell):
    nodes = np.ascontiguousarray(nodes, dtype=np.float64)
    a = np.ascontiguousarray(a, dtype=np.complex128)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    if USE_NUMBA:
        return complex(addition_double_sum_loop(nodes, a, b, int(ell)))
    return addition_double_sum_numpy(nodes, a, b, int(ell))


# ---------------------------------------------------------------------------
# oscillatory quadrature sum  sum_i w_i v_i exp(i tau theta . x_i)


def oscillatory_sum_numpy(nodes, weights, values, theta, tau):
    phase = tau * (nodes @ theta)
    return complex(np.sum(weights * values * np.exp(1j * phase)))


def _oscillatory_sum_loop(nodes, weights, values, theta, tau):
    total = 0.0 + 0.0j
    for i in range(nodes.shape[0]):
        ph = tau * (nodes[i, 0] * theta[0] + nodes[i, 1] * theta[1] + nodes[i, 2] * theta[2])
        total += weights[i] * values[i] * complex(math.cos(ph), math.sin(ph))
    return total


oscillatory_sum_loop = njit(_oscillatory_sum_loop)


def oscillatory_sum(nodes, weights, values, theta, tau):
    nodes = np.ascontiguousarray(nodes, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    values = np.ascontiguousarray(values, dtype=np.complex128)
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    if USE_NUMBA:
        return complex(oscillatory_sum_loop(nodes, weights, values, theta, float(tau)))
    return oscillatory_sum_numpy(nodes, weights, values, theta, float(tau))


# ---------------------------------------------------------------------------
# spherical Bessel j_l(z), complex z, l = 0..lmax
#   upward recurrence when lmax <= |z| (stable there), Miller's downward
#   recurrence normalised against j_0 or j_1 otherwise


def _spherical_jn_complex_impl(lmax, z):
    out = np.zeros(lmax + 1, dtype=np.complex128)
    az = abs(z)
    if az < 1e-300:
        out[0] = 1.0
        return out
    s = np.sin(z)
    c = np.cos(z)
    j0 = s / z
    j1 = s / (z * z) - c / z
    if lmax <= az:
        out[0] = j0
        if lmax >= 1:
            out[1] = j1
        for l in range(1, lmax):
            out[l + 1] = (2 * l + 1) / z * out[l] - out[l - 1]
        return out
    start = lmax + 16 + int(math.sqrt(40.0 * (lmax + az))) + int(az)
    f_next = 0.0 + 0.0j
    f_cur = 1e-250 + 0.0j
    tmp = np.zeros(start + 1, dtype=np.complex128)
    tmp[start] = f_cur
    for l in range(start, 0, -1):
        f_prev = (2 * l + 1) / z * f_cur - f_next
        f_next = f_cur
        f_cur = f_prev
        tmp[l - 1] = f_cur
        if abs(f_cur) > 1e200:
            for k in range(l - 1, start + 1):
                tmp[k] *= 1e-200
            f_cur *= 1e-200
            f_next *= 1e-200
    if abs(j0) >= abs(j1):
        scale = j0 / tmp[0]
    else:
        scale = j1 / tmp[1]
    for l in range(lmax + 1):
        out[l] = tmp[l] * scale
    return out


spherical_jn_complex_loop = njit(_spherical_jn_complex_impl)
spherical_jn_complex_numpy = _spherical_jn_complex_impl


def spherical_jn_complex(lmax, z):
    """Return ``[j_0(z), ..., j_lmax(z)]`` for complex ``z``."""
    if USE_NUMBA:
        return spherical_jn_complex_loop(int(lmax), complex(z))
    return spherical_jn_complex_numpy(int(lmax), complex(z))
