from fractions import Fraction

import numpy as np
import pytest

from config import MAX_RICCATI_ORDER
from contour import (ENERGY_VARIABLES, TrigLaurentSum, exact_mu_of_energy, export_integrands,
                     exponent_integrals, import_integrands, integrand_table, invert_to_energy,
                     max_reversion_order, mu_of_energy, numeric_contour_integral, numeric_order_integral,
                     path_integral, quantize_energy, residue_integral, riccati_orders)
from errors import OrderBeyondTable, ParameterDomain, PathSingularity
from models import PendulumParams
from polynomial import Poly
from series import PRINTED_OSCILLATORY


def test_zero_point_integral_is_minus_one_half():
    assert exponent_integrals(0)[0] == Poly.constant(ENERGY_VARIABLES, Fraction(-1, 2))


def test_first_order_integral():
    E = Poly.variable(ENERGY_VARIABLES, "E")
    A = Poly.variable(ENERGY_VARIABLES, "A")
    assert exponent_integrals(1)[1] == E / 2 + A / 2 + Fraction(1, 16)


@pytest.mark.parametrize("e, k", [(0, 1), (0, 3), (0, 5), (0, 7), (1, 1), (1, 3), (1, 5)])
def test_residue_rule_matches_quadrature(e, k):
    value = path_integral(lambda z: np.cos(z) ** e / np.sin(z) ** k)
    assert value.real == pytest.approx(float(residue_integral(e, k)), abs=1e-9)
    assert abs(value.imag) < 1e-9


def test_reversion_reproduces_the_printed_coefficients():
    generated = invert_to_energy(None, None, 2).coefficients
    assert tuple(generated) == PRINTED_OSCILLATORY


def test_reversion_order_is_bounded():
    with pytest.raises(OrderBeyondTable):
        invert_to_energy(None, None, max_reversion_order() + 1)
    with pytest.raises(OrderBeyondTable):
        riccati_orders(MAX_RICCATI_ORDER + 1)
    with pytest.raises(ParameterDomain):
        invert_to_energy(None, -1, 1)


def test_derivative_matches_finite_differences():
    v = riccati_orders(3)[4]
    phi, h = 0.7, 1e-5
    values = dict(E=2.5, A=-0.75)
    expected = (v.evaluate(phi + h, **values) - v.evaluate(phi - h, **values)) / (2 * h)
    assert float(v.derivative().evaluate(phi, **values)) == pytest.approx(float(expected), rel=1e-6)


def test_antiderivative_differentiates_back():
    v1 = riccati_orders(1)[2]
    single, log_tan, log_sin = v1.antiderivative()
    rebuilt = single.derivative() + TrigLaurentSum({(0, 1): log_tan, (1, 1): log_sin})
    assert (rebuilt - v1).is_zero()


@pytest.mark.parametrize("l", [0, 1, 2, 3, 4, 5, 6])
@pytest.mark.parametrize("energy, A", [(3.7, 1.3), (12.0, -4.0), (0.5, 0.0)])
def test_numeric_contour_matches_residue_rules(l, energy, A):
    expected = float(exponent_integrals(l)[l].evaluate(E=energy, A=A))
    value = numeric_order_integral(l, energy, A)
    assert value.real == pytest.approx(expected, rel=1e-9, abs=1e-8)
    assert abs(value.imag) < 1e-8 * max(1.0, abs(expected))


def test_paths_agree():
    p = PendulumParams(A=2.0, B=50.0)
    semicircle = numeric_contour_integral(p, 20.0, 4)
    assert numeric_contour_integral(p, 20.0, 4, path="rectangle") == pytest.approx(semicircle, abs=1e-8)
    assert numeric_contour_integral(p, 20.0, 4, bend="left") == pytest.approx(semicircle, abs=1e-8)
    assert semicircle.real == pytest.approx(mu_of_energy(p, 20.0, 4).value, abs=1e-8)


def test_path_singularities():
    with pytest.raises(PathSingularity):
        path_integral(lambda z: 1 / z, radius=1e-6)
    with pytest.raises(PathSingularity):
        path_integral(lambda z: 1 / z, radius=3.5)
    with pytest.raises(ParameterDomain):
        path_integral(lambda z: 1 / z, path="spiral")


def test_exact_mu_is_rational():
    value = exact_mu_of_energy(Fraction(7, 2), Fraction(1), Fraction(10), 4)
    assert isinstance(value, Fraction)
    p = PendulumParams(A=1.0, B=100.0)
    assert float(value) == pytest.approx(mu_of_energy(p, 3.5, 4).value, rel=1e-12)


def test_minus_sector_flips_odd_orders():
    p = PendulumParams(A=1.0, B=100.0)
    plus = mu_of_energy(p, 12.0, 3)
    minus = mu_of_energy(p, 12.0, 3, sector="-")
    assert minus.sector == "-"
    for l, value in plus.exponent_series.items():
        assert minus.exponent_series[l] == pytest.approx((-1) ** l * value)
    with pytest.raises(ParameterDomain):
        mu_of_energy(p, 12.0, 3, sector="up")


@pytest.mark.parametrize("mu", [0, 1, 3])
def test_quantized_energy_round_trip(mu):
    p = PendulumParams(A=1.0, B=400.0)
    energy = quantize_energy(p, mu, 5)
    assert mu_of_energy(p, energy, 5).value == pytest.approx(mu, abs=1e-9)


def test_integrand_json_round_trip():
    text = export_integrands(3)
    assert import_integrands(text) == riccati_orders(3)
    table = integrand_table(0)
    assert [entry["l"] for entry in table["orders"]] == [-1, 0]
    assert Poly.from_dict(table["orders"][1]["integral"]).constant_value() == Fraction(-1, 2)


def test_integrands_are_odd():
    phi = np.linspace(0.2, 2.9, 7)
    for v in riccati_orders(4)[1:]:
        assert np.allclose(v.evaluate(-phi, E=1.5, A=0.5), -v.evaluate(phi, E=1.5, A=0.5))
