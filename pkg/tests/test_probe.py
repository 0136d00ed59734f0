import cmath
import math

import numpy as np
import pytest

from bsrlab.errors import DomainError, MissingTraceError, PairingError
from bsrlab.probe import (analytic_group_pairing, analytic_trace_coefficients, entry_pairings,
                          go_trace, make_probe, pairing_dn, pairing_group_sum, trace_coefficients,
                          trace_quadrature, trace_values)
from bsrlab.spectral import drop_traces


def test_probe_example():
    p = make_probe([2.0, 0.0, 0.0], 10.0)
    assert p.lam == 99 + 20j
    assert np.allclose(p.omega - p.theta, [0.2, 0, 0], atol=1e-15)
    assert abs(np.linalg.norm(p.omega) - 1) < 1e-12
    assert np.linalg.norm(p.zeta) <= 2 * math.sqrt(2)


def test_probe_zero_frequency():
    p = make_probe([0, 0, 0], 5.0)
    assert np.array_equal(p.eta, [1, 0, 0])
    assert np.array_equal(p.omega, p.theta)


def test_probe_domain():
    with pytest.raises(DomainError):
        make_probe([4.0, 0, 0], 2.0)


def test_probe_invariants_random(rng):
    for _ in range(200):
        xi = rng.uniform(-5, 5, 3)
        tau = np.linalg.norm(xi) / 2 * (1 + rng.uniform(1e-3, 4)) + 1e-3
        p = make_probe(xi, tau)
        assert abs(p.eta @ xi) < 1e-14 * max(1.0, np.linalg.norm(xi))
        assert abs(np.linalg.norm(p.omega) - 1) < 1e-12
        assert np.allclose(p.sqrt_lam * (p.omega - p.theta), (1 + 1j / tau) * xi, atol=1e-12)
        assert np.linalg.norm(p.zeta) <= math.sqrt(2) * np.linalg.norm(xi) + 1e-12


def test_trace_at_aligned_node():
    p = make_probe([0, 0, 0], 10.0)
    v = trace_values(p, 1.0, p.omega[None, :], "g")[0]
    assert abs(v - 10j * cmath.exp(-1) * cmath.exp(10j)) < 1e-12


def test_trace_bound_nodewise():
    p = make_probe([0.5, -1, 0.2], 10.0)
    q = trace_quadrature(10.0, 4)
    v = go_trace(p, 1.0, q, "g").values.values
    assert np.max(np.abs(v)) <= (math.sqrt(101) + 1) * math.e * (1 + 1e-12)


def test_phase_product_is_plane_wave():
    p = make_probe([1.0, 2.0, -0.5], 8.0)
    q = trace_quadrature(8.0, 2)
    x = q.nodes
    k = p.sqrt_lam
    gphase = np.exp(1j * k * (x @ p.omega))
    hphase = np.exp(1j * k.conjugate() * (x @ p.theta))
    assert np.allclose(gphase * hphase.conj(), np.exp(1j * (1 + 1j / 8.0) * (x @ p.xi)), atol=1e-12)


def test_h_is_reflected_conjugate_of_g_at_zero_frequency():
    p = make_probe([0, 0, 0], 6.0)
    q = trace_quadrature(6.0, 2)
    g = trace_values(p, 1.0, q.nodes, "g")
    h = trace_values(p, 1.0, -q.nodes, "h")
    assert np.allclose(h, g.conj(), atol=1e-13)


@pytest.mark.parametrize("xi", [(0, 0, 0), (1.0, 0.5, 0.0), (0, 0, 4.0)])
def test_quadrature_coefficients_match_plane_wave(xi):
    tau, L = 16.0, 30
    p = make_probe(xi, tau)
    q = trace_quadrature(tau, L)
    for kind in ("g", "h"):
        c = trace_coefficients(go_trace(p, 1.0, q, kind), L)
        a = analytic_trace_coefficients(p, 1.0, L, kind)
        assert np.max(np.abs(c - a)) < 1e-10 * np.max(np.abs(a))
    cg = trace_coefficients(go_trace(p, 1.0, q, "g"), L)
    ch = trace_coefficients(go_trace(p, 1.0, q, "h"), L)
    d = np.sum(cg * ch.conj(), axis=1)
    ref = analytic_group_pairing(p, 1.0, L)
    assert np.max(np.abs(d - ref)) < 1e-10 * np.max(np.abs(ref))


def _traces(xi, tau, L=6):
    p = make_probe(xi, tau)
    q = trace_quadrature(tau, L)
    return go_trace(p, 1.0, q, "g"), go_trace(p, 1.0, q, "h"), q


def test_pairing_dn_first_entry_closed_form(free_bsd):
    g, h, q = _traces([0.7, 0, 0.3], 12.0)
    e = free_bsd.entry(1)
    d = pairing_dn(g, h, e)
    cg = analytic_trace_coefficients(g.probe, 1.0, 0, "g")[0, 0]
    ch = analytic_trace_coefficients(g.probe, 1.0, 0, "h")[0, 0]
    ref = e.boundary_value ** 2 * cg * ch.conjugate()
    assert abs(d - ref) < 1e-8 * abs(ref)


def test_pairing_dn_sign_and_conjugation(free_bsd):
    g, h, q = _traces([1.0, 0.2, 0.0], 9.0)
    e = free_bsd.entry(3)
    flipped = type(e)(e.n, e.lam, e.l, e.m, -e.boundary_value, True)
    assert abs(pairing_dn(g, h, e) - pairing_dn(g, h, flipped)) < 1e-13
    assert abs(pairing_dn(h, g, e) - pairing_dn(g, h, e).conjugate()) < 1e-12
    same = pairing_dn(g, g, e)
    assert abs(same.imag) < 1e-12 * abs(same) and same.real >= 0


def test_pairing_dn_missing_trace(free_bsd):
    g, h, q = _traces([0, 0, 0], 5.0)
    e = drop_traces(free_bsd, 2).entry(1)
    with pytest.raises(MissingTraceError):
        pairing_dn(g, h, e)


@pytest.mark.parametrize("ell,k", [(0, 1), (1, 1), (3, 2)])
def test_group_sum_matches_m_sum(free_bsd, ell, k):
    g, h, q = _traces([0.4, -0.3, 0.9], 7.0, L=4)
    idx = np.flatnonzero(free_bsd.l == ell)
    level = np.unique(free_bsd.lam_base[idx])[k - 1]
    members = idx[free_bsd.lam_base[idx] == level]
    direct = sum(pairing_dn(g, h, free_bsd.entry(int(i) + 1)) for i in members)
    grouped = pairing_group_sum(g, h, free_bsd, ell, k)
    assert abs(grouped - direct) <= 1e-10 * max(1.0, abs(direct))
    same = pairing_group_sum(g, g, free_bsd, ell, k)
    assert abs(same.imag) < 1e-10 * abs(same) and same.real >= 0


def test_group_sum_errors(free_bsd):
    g, h, q = _traces([0, 0, 0], 5.0, L=2)
    with pytest.raises(PairingError):
        pairing_group_sum(g, h, free_bsd, 40, 1)
    with pytest.raises(PairingError):
        pairing_group_sum(g, h, free_bsd, 0, 99)
    with pytest.raises(MissingTraceError):
        pairing_group_sum(g, h, drop_traces(free_bsd, 3), 0, 1)


def test_entry_pairings_vector(free_bsd):
    g, h, q = _traces([0.1, 0.2, 0.3], 6.0, L=16)
    cg = trace_coefficients(g, 16)
    ch = trace_coefficients(h, 16)
    gp, hp = entry_pairings(free_bsd, cg, ch)
    for n in (1, 5, 40):
        assert abs(gp[n - 1] * hp[n - 1] - pairing_dn(g, h, free_bsd.entry(n))) < 1e-10
