import math

import numpy as np
import pytest

from errors import EnergyOutOfRange, ParameterDomain
from models import PendulumParams
from oracle import pair_gap
from tunneling import (barrier_ends, frequency_product, furry_factor, mixing_diagnostic, splitting_report,
                       tunneling_action, tunneling_coupling, two_level_solve, wkb_action_numeric,
                       wkb_action_series)


def test_furry_factor():
    assert furry_factor(0) == pytest.approx(1.0750, abs=1e-4)
    assert furry_factor(50) == pytest.approx(1.0, abs=1e-2)
    with pytest.raises(ParameterDomain):
        furry_factor(-1)


def test_action_at_the_bottom_of_a_symmetric_barrier():
    B = 100.0
    p = PendulumParams(A=0.0, B=B)
    assert barrier_ends(p, 0.0) == (0.0, math.pi)
    assert wkb_action_numeric(p, 0.0) == pytest.approx(2.0 * math.sqrt(2.0) * math.sqrt(B), rel=1e-9)
    assert wkb_action_numeric(p, 0.0, scale=1.0) == pytest.approx(2.0 * math.sqrt(B), rel=1e-9)


def test_barrier_ends_bracket_the_summit(biased):
    left, right = barrier_ends(biased, 20.0)
    assert 0.0 < left < math.pi / 2 < right < math.pi
    with pytest.raises(EnergyOutOfRange):
        barrier_ends(biased, 200.0)


def test_action_series_difference(biased):
    s_plus, s_minus = wkb_action_series(biased, 1)
    assert s_plus - s_minus == pytest.approx(3.0 * biased.A / (2.0 * math.sqrt(2.0) * biased.sqrt_b))


def test_frequency_product():
    assert frequency_product(PendulumParams(A=0.0, B=25.0)) == pytest.approx(10.0)
    with pytest.raises(ParameterDomain):
        frequency_product(PendulumParams(A=250.0, B=100.0))


def test_unknown_action_is_rejected(symmetric):
    with pytest.raises(ParameterDomain):
        tunneling_action(symmetric, 0, "instanton")


def test_leading_coupling(symmetric):
    expected = 2.0 * furry_factor(0) * 20.0 * math.exp(-2.0 * math.sqrt(2.0) * 10.0) / math.pi
    assert tunneling_coupling(symmetric, 0, "leading") == pytest.approx(expected)


def test_two_level_degenerate():
    result = two_level_solve(1.0, 1.0, 0.25)
    assert result.theta == pytest.approx(math.pi / 4)
    assert result.Delta == pytest.approx(0.5)
    assert result.E_plus == pytest.approx(1.25)
    assert result.E_minus == pytest.approx(0.75)


def test_two_level_uncoupled():
    result = two_level_solve(2.0, 1.0, 0.0)
    assert result.theta == 0.0
    assert (result.E_minus, result.E_plus) == (1.0, 2.0)


def test_two_level_matches_the_matrix():
    E0, Epi, gamma = 0.3, 1.1, 0.2
    result = two_level_solve(E0, Epi, gamma)
    expected = np.linalg.eigvalsh([[E0, gamma], [gamma, Epi]])
    assert (result.E_minus, result.E_plus) == pytest.approx(tuple(expected))
    assert math.tan(2.0 * result.theta) == pytest.approx(2.0 * gamma / (Epi - E0))
    assert 0.0 <= result.theta <= math.pi / 4
    with pytest.raises(ParameterDomain):
        two_level_solve(E0, Epi, -1.0)


@pytest.mark.parametrize("B", [100.0, 400.0, 900.0])
def test_semiclassical_splitting_tracks_the_oracle(B):
    p = PendulumParams(A=0.0, B=B)
    report = splitting_report(p, 0, "semiclassical")
    assert report.Delta == pytest.approx(2.0 * report.gamma)
    assert report.theta == pytest.approx(math.pi / 4)
    assert 0.5 <= report.Delta / pair_gap(p, 0) <= 2.0


def test_semiclassical_splitting_converges_with_depth():
    deviations = []
    for B in (100.0, 400.0, 900.0):
        p = PendulumParams(A=0.0, B=B)
        deviations.append(abs(math.log(splitting_report(p, 0, "semiclassical").Delta / pair_gap(p, 0))))
    assert all(later <= earlier for earlier, later in zip(deviations, deviations[1:]))


def test_report_carries_the_actions(biased):
    report = splitting_report(biased, 0, "per_well")
    assert report.action == "per_well"
    assert report.S_plus > report.S_minus
    assert splitting_report(biased, 0, "leading").S_plus is None


def test_mixing_falls_with_bias():
    thetas = [splitting_report(PendulumParams(A=A, B=100.0), 0, "leading").theta
              for A in (0.001, 0.01, 0.1, 1.0)]
    assert all(later < earlier for earlier, later in zip(thetas, thetas[1:]))


def test_mixing_grows_with_mu():
    p = PendulumParams(A=0.01, B=100.0)
    thetas = [splitting_report(p, mu, "semiclassical").theta for mu in range(4)]
    assert all(later > earlier for earlier, later in zip(thetas, thetas[1:]))


def test_small_mixing_estimate():
    p = PendulumParams(A=1.0, B=100.0)
    report = splitting_report(p, 0, "leading")
    assert mixing_diagnostic(p, 0, report.gamma) == pytest.approx(math.tan(2.0 * report.theta), rel=1e-3)
    with pytest.raises(ParameterDomain):
        mixing_diagnostic(PendulumParams(A=0.0, B=100.0), 0, report.gamma)
