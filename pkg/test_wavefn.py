import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import pbdv

from errors import BranchViolation, OrderBeyondTable, ParameterDomain, RegionViolation
from models import PendulumParams
from utils import log_derivative
from wavefn import (CORRECTED_SIPS, barrier_error_estimate, barrier_log_derivative, barrier_wavefunction,
                    canonical_monodromy, check_printed_form, from_canonical, match_barrier_amplitude,
                    matching_angle, monodromy_numeric, normalization_constants, parabolic_cylinder,
                    parabolic_cylinder_derivative, pi_well_coefficients, printed_discrepancies, region_tag,
                    s_rows_from_pattern, sips_coefficients, sips_coefficients_recursive, to_canonical,
                    well_error_estimate, well_wavefunction)


@pytest.mark.parametrize("n", [0, 1, 2, 5])
def test_parabolic_cylinder_matches_scipy(n):
    for z in (-2.5, -0.3, 0.0, 1.1, 3.0):
        value, derivative = pbdv(n, z)
        assert parabolic_cylinder(n, z) == pytest.approx(value, rel=1e-10, abs=1e-14)
        assert parabolic_cylinder_derivative(n, z) == pytest.approx(derivative, rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("n", range(1, 9))
def test_parabolic_cylinder_identities(n):
    z = np.linspace(-4.0, 4.0, 17)
    upper = parabolic_cylinder(n + 1, z)
    lower = parabolic_cylinder(n - 1, z)
    middle = parabolic_cylinder(n, z)
    assert np.allclose(z * middle, upper + n * lower, rtol=1e-12, atol=1e-12)
    assert np.allclose(parabolic_cylinder_derivative(n, z), 0.5 * (n * lower - upper), rtol=1e-12, atol=1e-12)


def test_parabolic_cylinder_orthogonality():
    for m in range(9):
        for n in range(m, 9):
            integral, _ = quad(lambda z: parabolic_cylinder(m, z) * parabolic_cylinder(n, z), -np.inf, np.inf)
            expected = math.factorial(n) * math.sqrt(2.0 * math.pi) if m == n else 0.0
            assert integral == pytest.approx(expected, rel=1e-7, abs=1e-7 * math.factorial(n))


def test_parabolic_cylinder_rejects_fractional_orders():
    with pytest.raises(ParameterDomain):
        parabolic_cylinder(1.5, 0.0)


def test_printed_table_has_three_defects():
    assert printed_discrepancies() == [(1, -4), (1, -2), (2, -8)]


def test_recursion_reproduces_the_stored_table():
    table = sips_coefficients_recursive(2)
    assert table.C == CORRECTED_SIPS
    assert table.S == s_rows_from_pattern(CORRECTED_SIPS)
    assert table.source == "recursive"


def test_table_orders_are_bounded():
    with pytest.raises(OrderBeyondTable):
        sips_coefficients(L=3)
    with pytest.raises(OrderBeyondTable):
        sips_coefficients_recursive(4)
    with pytest.raises(ParameterDomain):
        sips_coefficients_recursive(0)


def test_fixed_table_drops_vanishing_entries():
    table = sips_coefficients(mu=0, A=2)
    # mu!/(mu-j)! vanishes for mu = 0
    assert set(table.C[1]) == {2, 4}
    assert table.coefficient("C", 2, 2).constant_value() == pytest.approx((-36 - 32) / 64)


def test_pi_well_table_flips_the_bias():
    table = sips_coefficients()
    flipped = pi_well_coefficients(table)
    assert flipped.well == "pi"
    assert flipped.values("C", 2, 3) == table.values("C", 2, -3)
    with pytest.raises(ParameterDomain):
        pi_well_coefficients(flipped)


def test_harmonic_limit_is_a_parabolic_cylinder_function(deep):
    phi = np.linspace(-0.2, 0.2, 9)
    z = math.sqrt(2.0) * deep.B ** 0.25 * np.sin(phi)
    values = well_wavefunction(deep, 3, phi, "C", L=0, normalization="none")
    assert np.allclose(values, parabolic_cylinder(3, z))


@pytest.mark.parametrize("mu", [0, 1, 2, 3])
@pytest.mark.parametrize("kind", ["C", "S"])
@pytest.mark.parametrize("well", ["0", "pi"])
def test_printed_normalization(deep, mu, kind, well):
    center = 0.0 if well == "0" else math.pi
    integral, _ = quad(lambda x: well_wavefunction(deep, mu, x, kind, well) ** 2,
                       center - math.pi / 2, center + math.pi / 2, points=[center], limit=200)
    assert integral == pytest.approx(1.0, abs=1e-3)


def test_quadrature_normalization_is_close_to_printed(deep):
    printed = normalization_constants(deep, 1)
    numeric = normalization_constants(deep, 1, method="quadrature")
    assert numeric == pytest.approx(printed, rel=1e-3)
    with pytest.raises(ParameterDomain):
        normalization_constants(deep, 1, method="guess")


@pytest.mark.parametrize("mu", [0, 1, 2, 3])
def test_well_function_has_mu_nodes(deep, mu):
    values = well_wavefunction(deep, mu, np.linspace(-0.3, 0.3, 601))
    signs = np.sign(values[np.abs(values) > 1e-12])
    assert np.count_nonzero(np.diff(signs)) == mu


def test_region_tags(deep):
    phi = np.array([0.0, math.asin(0.1), 1.0, math.pi])
    assert list(region_tag(deep, 0, phi)) == ["well", "overlap", "barrier", "barrier"]
    assert list(region_tag(deep, 0, phi, well="pi")) == ["barrier", "barrier", "barrier", "well"]


@pytest.mark.parametrize("mu", [0, 1])
@pytest.mark.parametrize("well", ["0", "pi"])
def test_log_derivatives_agree_in_the_overlap(deep, mu, well):
    chi = math.asin(math.sqrt(3.0 * (mu + 0.5) / deep.sqrt_b))
    phi = chi if well == "0" else math.pi - chi
    inside = log_derivative(lambda x: well_wavefunction(deep, mu, x, "C", well), phi)
    outside = barrier_log_derivative(deep, mu, phi, well)
    assert outside == pytest.approx(inside, rel=0.1)


@pytest.mark.parametrize("well, phi", [("0", 0.5), ("pi", math.pi - 0.5)])
def test_barrier_log_derivative_matches_finite_differences(deep, well, phi):
    expected = log_derivative(lambda x: barrier_wavefunction(deep, 1, x, well), phi)
    assert barrier_log_derivative(deep, 1, phi, well) == pytest.approx(expected, rel=1e-6)


def test_matched_amplitude_joins_the_two_forms(deep):
    amplitude = match_barrier_amplitude(deep, 0)
    assert amplitude > 0.0
    phi = math.asin(0.12)
    inside = well_wavefunction(deep, 0, phi)
    outside = barrier_wavefunction(deep, 0, phi, amplitude=amplitude)
    assert outside == pytest.approx(inside, rel=0.05)


def test_matching_angle_is_the_outer_overlap_edge(deep):
    phi = matching_angle(deep, 0)
    assert math.sin(phi) ** 2 == pytest.approx(4.0 * 0.5 / deep.sqrt_b)
    assert matching_angle(deep, 0, "pi") == pytest.approx(math.pi - phi)


def test_barrier_error_estimate_shrinks_with_order(deep):
    assert float(barrier_error_estimate(deep, 0, math.pi / 2)) == pytest.approx(0.0, abs=1e-15)
    coarse = float(barrier_error_estimate(deep, 0, 1.0, order=2))
    fine = float(barrier_error_estimate(deep, 0, 1.0, order=6))
    assert 0.0 < fine < coarse
    estimates = barrier_error_estimate(deep, 0, np.array([0.8, 1.0, 1.2]))
    assert np.all(estimates >= 0.0)


def test_well_error_estimate_is_small_inside_the_well(deep):
    phi = np.array([0.0, 0.02, 0.05])
    estimate = well_error_estimate(deep, 0, phi)
    assert np.all(estimate >= 0.0)
    assert estimate[0] < 1e-3 * abs(well_wavefunction(deep, 0, 0.0))
    assert isinstance(well_error_estimate(deep, 0, 0.01), float)


def test_barrier_form_inside_the_well_is_rejected_when_strict(deep):
    with pytest.raises(RegionViolation):
        barrier_wavefunction(deep, 0, 0.01, strict=True)
    with pytest.raises(ParameterDomain):
        barrier_wavefunction(deep, 0, 0.5, form="guess")


def test_printed_barrier_form_is_flagged_only_for_the_pi_well(deep):
    assert not check_printed_form(deep, 0, "0").flagged
    assert check_printed_form(deep, 0, "pi").flagged


def test_canonical_coordinate_round_trip():
    phi = np.linspace(0.1, 3.0, 11)
    assert np.allclose(from_canonical(to_canonical(phi)), phi)
    assert to_canonical(math.pi / 2) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(BranchViolation):
        to_canonical(0.0)
    with pytest.raises(BranchViolation):
        to_canonical(4.0)
    assert np.iscomplexobj(to_canonical(np.array([4.0]), allow_complex=True))


@pytest.mark.parametrize("mu", [0, 1, 2])
def test_monodromy_matches_the_canonical_factor(mu):
    p = PendulumParams(A=1.0, B=400.0)
    assert monodromy_numeric(p, mu) == pytest.approx(canonical_monodromy(mu), abs=1e-6)
    assert monodromy_numeric(p, mu, well="pi") == pytest.approx(
        canonical_monodromy(mu, well="pi", sqrt_minus_one=1j), abs=1e-6)


def test_monodromy_rejects_the_pole():
    with pytest.raises(BranchViolation):
        monodromy_numeric(PendulumParams(A=0.0, B=400.0), 0, rho=0.0)
