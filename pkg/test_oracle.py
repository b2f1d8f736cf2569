import math
from concurrent.futures import ThreadPoolExecutor

import mpmath
import numpy as np
import pytest
from scipy.integrate import trapezoid

from errors import ParameterDomain
from models import FourierMatrixSpec, PendulumParams
from oracle import (antiperiodic_edges, band_edges, build_fourier_matrix, characteristic_exponent, count_nodes,
                    eigenfunction_grid, eigenvalues, fourier_matrix_dense, match_well_state, mathieu_check,
                    monodromy_half_trace, oracle_log_derivative, pair_gap, state_function, well_weight)
from series import rotating_energy
from utils import log_derivative


def test_hill_matrix_is_symmetric_pentadiagonal(biased):
    spec = FourierMatrixSpec(biased, "periodic", K=10)
    H = fourier_matrix_dense(spec)
    assert H.shape == (21, 21)
    assert np.allclose(H, H.T)
    assert np.count_nonzero(np.triu(H, 3)) == 0
    assert build_fourier_matrix(spec).shape == (3, 21)


@pytest.mark.parametrize("h", [1.0, 5.0, 25.0])
@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_mathieu_limit_matches_scipy(n, h):
    check = mathieu_check(n, h)
    assert check["oracle_a"] == pytest.approx(check["scipy_a"], abs=1e-7)
    if n > 0:
        assert check["oracle_b"] == pytest.approx(check["scipy_b"], abs=1e-7)


def test_spectrum_invariant_under_bias_reflection(biased):
    plus = eigenvalues(FourierMatrixSpec(biased, "periodic"), levels=10).energies
    minus = eigenvalues(FourierMatrixSpec(biased.mirrored(), "periodic"), levels=10).energies
    assert np.allclose(plus, minus, rtol=0.0, atol=1e-9)


def test_band_edges_alternate():
    edges = band_edges(PendulumParams(A=0.0, B=20.0), 3)
    assert edges[0].b is None
    sequence = [edges[0].a]
    for edge in edges[1:]:
        sequence += [edge.b, edge.a]
    assert all(x < y for x, y in zip(sequence, sequence[1:]))


def test_pairs_coalesce_in_deep_wells(symmetric):
    edges = band_edges(symmetric, 2)
    assert edges[1].b - edges[0].a < 1e-3
    assert edges[1].a - edges[0].a > 5.0


def test_pair_gap_matches_double_precision_edges():
    p = PendulumParams(A=0.0, B=36.0)
    edges = band_edges(p, 1)
    assert pair_gap(p, 0) == pytest.approx(edges[1].b - edges[0].a, rel=1e-6)


def test_pair_gap_follows_the_mathieu_asymptotics():
    B = 400.0
    expected = 16.0 / math.sqrt(math.pi) * B ** 0.75 * math.exp(-2.0 * math.sqrt(B))
    assert pair_gap(PendulumParams(A=0.0, B=B), 0) == pytest.approx(expected, rel=0.1)


def test_pair_gap_is_thread_safe():
    params = [PendulumParams(A=0.0, B=B) for B in (100.0, 1600.0, 2500.0, 4900.0)] * 2
    serial = [pair_gap(p, 0) for p in params]
    dps = mpmath.mp.dps
    for _ in range(3):
        with ThreadPoolExecutor(max_workers=4) as pool:
            assert list(pool.map(lambda p: pair_gap(p, 0), params)) == serial
    assert mpmath.mp.dps == dps


def test_pair_gap_rejects_negative_mu(symmetric):
    with pytest.raises(ParameterDomain):
        pair_gap(symmetric, -1)


@pytest.mark.parametrize("A, mu", [(0.0, 0), (0.0, 1), (0.0, 2), (0.0, 3), (0.0, 4), (0.0, 5), (5.0, 0), (5.0, 2)])
def test_matched_state_has_mu_nodes_in_its_well(A, mu):
    p = PendulumParams(A=A, B=1.0e4)
    _, index, result = match_well_state(p, mu, "0")
    assert count_nodes(state_function(result, index), (-math.pi / 2, math.pi / 2)) == mu


def test_matched_state_is_localized(biased):
    _, index, result = match_well_state(biased, 0, "0")
    assert well_weight(result, index) > 0.9
    _, index, result = match_well_state(biased, 0, "pi")
    assert well_weight(result, index) < 0.1


def test_half_trace_is_one_at_a_periodic_edge():
    p = PendulumParams(A=0.0, B=8.0)
    a0 = band_edges(p, 0)[0].a
    assert monodromy_half_trace(p, a0) == pytest.approx(1.0, abs=1e-6)


def test_oracle_log_derivative_matches_finite_differences(symmetric):
    _, index, result = match_well_state(symmetric, 1, "0")
    psi = state_function(result, index)
    phi = 0.3
    expected = log_derivative(lambda x: float(psi(x)), phi)
    assert float(oracle_log_derivative(result, index, phi)) == pytest.approx(expected, rel=1e-6)


def test_characteristic_exponent_inside_a_band():
    p = PendulumParams(A=1.0, B=8.0)
    energy = eigenvalues(FourierMatrixSpec(p, 0.3), levels=3).energies[1]
    nu = characteristic_exponent(p, energy)
    assert isinstance(nu, float)
    assert math.cos(2.0 * math.pi * nu) == pytest.approx(math.cos(2.0 * math.pi * 0.3), abs=1e-6)


def test_characteristic_exponent_below_the_spectrum_is_complex():
    p = PendulumParams(A=1.0, B=8.0)
    a0 = band_edges(p, 0)[0].a
    nu = characteristic_exponent(p, a0 - 1.0)
    assert isinstance(nu, complex)
    assert abs(nu.imag) > 1e-3


def test_eigenfunction_grid_is_normalized():
    result = eigenvalues(FourierMatrixSpec(PendulumParams(A=0.0, B=20.0)), levels=4)
    grid = np.linspace(0.0, 2.0 * math.pi, 2001)
    psi = eigenfunction_grid(result, 0, grid)
    assert trapezoid(psi ** 2, grid) == pytest.approx(1.0, rel=1e-6)
    assert np.all(psi > 0.0)
    with pytest.raises(IndexError):
        eigenfunction_grid(result, len(result), grid)


def test_free_rotor():
    p = PendulumParams(A=0.0, B=0.0)
    energies = eigenvalues(FourierMatrixSpec(p), levels=5).energies
    assert energies == pytest.approx((0.0, 1.0, 1.0, 4.0, 4.0), abs=1e-12)
    assert characteristic_exponent(p, 2.3 ** 2) == pytest.approx(2.3, abs=1e-8)


def test_rotating_energy_has_its_own_exponent():
    p = PendulumParams(A=1.0, B=1.0)
    nu = characteristic_exponent(p, rotating_energy(p, 10.0).value)
    assert abs(nu - 10.0) < 1e-4


def test_band_edges_have_integer_or_half_integer_exponents():
    p = PendulumParams(A=1.0, B=8.0)
    for edge in band_edges(p, 2):
        for energy in (edge.a, edge.b):
            if energy is None:
                continue
            nu = characteristic_exponent(p, energy)
            assert isinstance(nu, float)
            assert abs(nu - round(nu)) < 1e-8
    for edge in antiperiodic_edges(p, 1):
        for energy in (edge.a, edge.b):
            nu = characteristic_exponent(p, energy)
            assert isinstance(nu, float)
            assert abs(nu - math.floor(nu) - 0.5) < 1e-8


def test_eigenvalues_are_stable_under_a_larger_cutoff(biased):
    result = eigenvalues(FourierMatrixSpec(biased), levels=10)
    assert all(result.converged)
    assert max(result.convergence) < 1e-10


def test_eigenfunction_parity():
    result = eigenvalues(FourierMatrixSpec(PendulumParams(A=1.0, B=20.0)), levels=6)
    phi = np.linspace(0.1, 3.0, 11)
    for index, parity in enumerate(result.parities):
        assert parity in (1, -1)
        assert np.allclose(eigenfunction_grid(result, index, -phi), parity * eigenfunction_grid(result, index, phi),
                           atol=1e-10)


@pytest.mark.parametrize("mu", [0, 1, 2, 3])
def test_matched_state_parity(deep, mu):
    _, index, result = match_well_state(deep, mu, "0")
    assert result.parities[index] == (-1) ** mu
