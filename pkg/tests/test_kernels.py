import math

import numpy as np
import pytest
from scipy import special

from bsrlab import kernels as K


def test_legendre_loop_matches_numpy():
    x = np.linspace(-1.0, 1.0, 57)
    a = K.legendre_table_numpy(20, x)
    b = K.legendre_table_loop(20, x)
    assert np.max(np.abs(a - b)) < 1e-13


def test_legendre_table_matches_scipy_harmonics():
    theta = np.array([0.1, 0.7, 1.3, 2.2, 3.0])
    p = K.legendre_table(12, np.cos(theta))
    for ell in (0, 3, 12):
        for m in (0, 1, ell):
            if m > ell:
                continue
            ref = special.sph_harm_y(ell, m, theta, 0.0).real
            assert np.allclose(p[ell, m], ref, atol=1e-13)


def test_legendre_series_values():
    x = np.array([-1.0, -0.3, 0.0, 0.5, 1.0])
    p = K.legendre_series(6, x)
    for n in range(7):
        assert np.allclose(p[n], special.eval_legendre(n, x), atol=1e-14)


def test_addition_double_sum_paths_agree(rng):
    nodes = rng.standard_normal((40, 3))
    nodes /= np.linalg.norm(nodes, axis=1)[:, None]
    a = rng.standard_normal(40) + 1j * rng.standard_normal(40)
    b = rng.standard_normal(40) + 1j * rng.standard_normal(40)
    for ell in (0, 1, 5):
        x = K.addition_double_sum_numpy(nodes, a, b, ell)
        y = K.addition_double_sum_loop(nodes, a, b, ell)
        assert abs(x - y) <= 1e-12 * max(1.0, abs(x))


def test_oscillatory_sum_paths_agree(rng):
    nodes = rng.standard_normal((100, 3))
    nodes /= np.linalg.norm(nodes, axis=1)[:, None]
    w = rng.random(100)
    v = rng.standard_normal(100) + 0j
    th = np.array([0.0, 0.6, 0.8])
    x = K.oscillatory_sum_numpy(nodes, w, v, th, 7.5)
    y = K.oscillatory_sum_loop(nodes, w, v, th, 7.5)
    assert abs(x - y) < 1e-12


@pytest.mark.parametrize("z", [32 + 1j, 16 + 1j, 0.5 + 0.1j, 5 + 1j, 64 + 1j, 2.0 + 0j])
def test_spherical_jn_complex_matches_scipy(z):
    lmax = 60
    got = K.spherical_jn_complex(lmax, z)
    ref = special.spherical_jn(np.arange(lmax + 1), z)
    scale = np.maximum(np.abs(ref), 1e-300)
    good = np.abs(ref) > 1e-250
    assert np.max(np.abs(got - ref)[good] / scale[good]) < 1e-10


def test_spherical_jn_paths_agree():
    a = K.spherical_jn_complex_numpy(40, 12 + 1j)
    b = K.spherical_jn_complex_loop(40, 12 + 1j)
    assert np.max(np.abs(a - b)) < 1e-15 * 10


def test_spherical_jn_at_zero():
    out = K.spherical_jn_complex(5, 0j)
    assert out[0] == 1.0 and np.all(out[1:] == 0.0)


def test_disable_flag_selects_numpy(monkeypatch):
    import importlib
    import bsrlab._accel as acc
    monkeypatch.setenv("BSRLAB_DISABLE_NUMBA", "1")
    mod = importlib.reload(acc)
    try:
        assert mod.USE_NUMBA is False
    finally:
        monkeypatch.delenv("BSRLAB_DISABLE_NUMBA")
        importlib.reload(acc)


def test_disable_flag_selects_numpy_path():
    import os
    import subprocess
    import sys
    code = ("import bsrlab, numpy as np;"
            "from bsrlab.oscillatory import oscillatory_ladder;"
            "print(bsrlab.USE_NUMBA, repr(complex(oscillatory_ladder(1.0, [0, 0, 1], [10.0])[0])))")
    out = {}
    for flag in ("1", "0"):
        env = dict(os.environ, BSRLAB_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
        assert res.returncode == 0, res.stderr
        out[flag] = res.stdout.split(maxsplit=1)
    assert out["1"][0] == "False" and out["0"][0] == "True"
    assert abs(complex(out["1"][1]) - complex(out["0"][1])) < 1e-12
