import json
import math

import numpy as np
import pytest
from scipy.special import spherical_jn

from bsrlab.errors import InvalidArgument
from bsrlab.oscillatory import (boundary_oscillatory_integral, closed_form_constant,
                                finite_sum_decay, loglog_slope, oscillatory_ladder,
                                pairing_uniform_bound, random_band_limited, report_to_csv,
                                save_report, upper_envelope, vdc_decay_report)
from bsrlab.sphere import eval_harmonic
from bsrlab.spectral import scale_traces


def _analytic(phi, theta, tau):
    c = phi.coefficients()
    L = c.shape[0] - 1
    total = 0j
    for ell in range(L + 1):
        for m in range(-ell, ell + 1):
            total += c[ell, L + m] * 4 * math.pi * 1j ** ell * spherical_jn(ell, tau) \
                * eval_harmonic((ell, m), theta)
    return total


@pytest.mark.parametrize("tau", [0.5, math.pi, 10.0, 77.0])
def test_constant_density_closed_form(tau):
    v = boundary_oscillatory_integral(1.0, [0, 0, 1], tau)
    assert abs(v - closed_form_constant(tau)) < 1e-12 * 4 * math.pi


def test_band_limited_matches_bessel_series(rng):
    phi = random_band_limited(rng, lmax=6)
    theta = np.array([0.3, -0.5, 0.8])
    theta /= np.linalg.norm(theta)
    taus = [1.0, 7.5, 40.0]
    vals = oscillatory_ladder(phi, theta, taus)
    for t, v in zip(taus, vals):
        ref = _analytic(phi, theta, t)
        assert abs(v - ref) < 1e-10 * max(1.0, abs(ref))


def test_real_density_has_real_coefficients_symmetry(rng):
    phi = random_band_limited(rng, lmax=4, real=True)
    pts = np.array([[0, 0, 1.0], [0.6, 0.8, 0.0]])
    assert np.max(np.abs(phi.evaluate(pts).imag)) < 1e-13


def test_envelope_and_slope():
    x = np.linspace(1, 50, 2000)
    y = np.abs(np.sin(x)) / x
    ex, ey = upper_envelope(x, y)
    assert ex.size > 10
    assert abs(loglog_slope(ex, ey) + 1.0) < 0.02


def test_vdc_constant_density():
    rep = vdc_decay_report(1.0, [1, 0, 0], (1.0, 100.0))
    assert abs(rep.fitted_exponent - 1.0) < 0.02
    assert np.all(rep.tau_values * rep.magnitudes <= rep.bound_constant * rep.hs_norm * (1 + 1e-12))


def test_vdc_rejects_bad_arguments():
    with pytest.raises(InvalidArgument):
        vdc_decay_report(1.0, [0, 0, 1], s=1.0)
    with pytest.raises(InvalidArgument):
        vdc_decay_report(1.0, [0, 0, 1], (0.5, 10.0))
    with pytest.raises(InvalidArgument):
        vdc_decay_report(1.0, [0, 0, 0])


def test_report_export(tmp_path):
    rep = vdc_decay_report(1.0, [0, 0, 1], [1.0, 2.0, 4.0])
    lines = report_to_csv(rep).splitlines()
    assert lines[0] == "tau,abs_I,bound" and len(lines) == 4
    save_report(rep, tmp_path / "r.csv", tmp_path / "r.json")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["s"] == 2.0


def test_pairing_bound_is_flat(free_bsd):
    for n in (1, 2, 5):
        pb = pairing_uniform_bound(free_bsd.entry(n), 1.0, [0, 0, 0])
        assert pb.slope <= 0.05
        assert math.isfinite(float(pb)) and pb.constant > 0
        assert np.allclose(np.abs(pb.j0 + pb.j1), pb.magnitudes, atol=1e-10 * pb.maximum)


def test_finite_sum_decay(free_bsd):
    scaled = scale_traces(free_bsd, 1.1, 4)
    dec = finite_sum_decay(free_bsd, scaled, 5, [0, 0, 0], samples=9)
    assert dec.exponent < -1.5 and not dec.exact_zero
    same = finite_sum_decay(free_bsd, free_bsd, 5, [0, 0, 0], samples=5)
    assert same.exact_zero and same.exponent == -math.inf
    assert finite_sum_decay(free_bsd, scaled, 1, [0, 0, 0]).exact_zero
