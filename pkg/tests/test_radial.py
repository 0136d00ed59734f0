import math

import numpy as np
import pytest

from bsrlab.errors import CapError, ConfigError, InvalidArgument
from bsrlab.radial import (RadialPotential, RobinCoefficient, assemble_bsd,
                           check_incomplete_data_conditions, solve_radial_modes)

from oracles import robin_boundary_value, robin_roots


def test_first_eigenvalue_pi_squared_over_four():
    m = solve_radial_modes(RadialPotential.constant(0.0), 1.0, 0, 1)[0]
    assert abs(m.lam - math.pi ** 2 / 4) < 1e-8 * m.lam


@pytest.mark.parametrize("ell", [0, 1, 4, 10])
def test_free_ball_matches_bessel_roots(ell):
    ref = robin_roots(ell, 1.0, 200.0)
    modes = solve_radial_modes(RadialPotential.constant(0.0), 1.0, ell, ref.size)
    got = np.array([m.lam for m in modes])
    assert np.max(np.abs(got - ref) / ref) < 1e-8


def test_boundary_values_match_bessel():
    ref = robin_roots(2, 1.0, 200.0)
    modes = solve_radial_modes(RadialPotential.constant(0.0), 1.0, 2, ref.size)
    for m, lam in zip(modes, ref):
        assert abs(m.boundary_value - robin_boundary_value(2, math.sqrt(lam))) < 1e-7


def test_dirichlet_like_large_alpha_increases_eigenvalues():
    a = solve_radial_modes(RadialPotential.constant(0.0), 1.0, 0, 3)
    b = solve_radial_modes(RadialPotential.constant(0.0), 5.0, 0, 3)
    assert all(y.lam > x.lam for x, y in zip(a, b))


def test_neumann_constant_mode():
    m = solve_radial_modes(RadialPotential.constant(0.0), 0.0, 0, 1)[0]
    assert abs(m.lam) < 1e-9


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_constant_shift(c):
    base = solve_radial_modes(RadialPotential.constant(0.0), 1.0, 3, 5)
    shifted = solve_radial_modes(RadialPotential.constant(c), 1.0, 3, 5)
    for a, b in zip(base, shifted):
        assert abs(b.lam - a.lam - c) < 1e-10


def test_profile_normalised():
    m = solve_radial_modes(RadialPotential.gaussian(0.3, 0.25), 1.0, 1, 2)[1]
    h = m.radii[1] - m.radii[0]
    assert abs(h * np.sum((m.radii * m.radial_profile) ** 2) - 1.0) < 1e-12
    assert m.boundary_value > 0


def test_assemble_sorted_and_capped(free_bsd):
    assert np.all(np.diff(free_bsd.lam) >= 0)
    assert free_bsd.lam[-1] <= 200.0
    ref = sum((2 * l + 1) * robin_roots(l, 1.0, 200.0).size for l in range(17))
    assert len(free_bsd) == ref


def test_cap_error_when_degree_cap_too_small():
    with pytest.raises(CapError) as exc:
        assemble_bsd(RadialPotential.constant(0.0), 1.0, 3, 200.0)
    assert exc.value.ell == 3


def test_lambda_below_first_eigenvalue():
    with pytest.raises(InvalidArgument):
        assemble_bsd(RadialPotential.constant(0.0), 1.0, 3, 1.0)


def test_potential_validation():
    with pytest.raises(ConfigError):
        RadialPotential(np.array([0.0, 0.5]), np.array([1.0, 1.0]))
    with pytest.raises(ConfigError):
        RadialPotential.constant(100.0, norm_budget=1.0)
    with pytest.raises(ConfigError):
        RobinCoefficient(-1.0)


def test_incomplete_data_gate():
    zero = RadialPotential.constant(0.0)
    pos = RadialPotential.constant(0.5)
    neg = RadialPotential.constant(-0.5)
    assert check_incomplete_data_conditions(zero, 1.0, zero) == "c1"
    assert check_incomplete_data_conditions(pos, 0.0, pos) == "c2"
    with pytest.raises(ConfigError):
        check_incomplete_data_conditions(zero, 0.0, zero)
    with pytest.raises(ConfigError):
        check_incomplete_data_conditions(neg, 1.0, zero)
