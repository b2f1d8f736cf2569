import logging
import math
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from contour import SERIES_VARIABLES, invert_to_energy, max_reversion_order
from errors import ParameterDomain, WeakSeriesSingular
from models import HalfPowerSeries, MathieuPair, PendulumParams, SeriesValue
from polynomial import Poly
from potential import mirror

logger = logging.getLogger(__name__)

ROTATING_ORDERS = (0, 2, 4)
ROTATING_NORMALIZATIONS = ("printed", "numeric", "none")


def _printed_oscillatory_coefficients() -> Tuple[Poly, ...]:
    mt = Poly.variable(SERIES_VARIABLES, "mt")
    A = Poly.variable(SERIES_VARIABLES, "A")
    return (
        mt * 2,
        -A - (mt * mt * 4 + 1) / 8,
        -(mt ** 3 * 4 + mt * 3 - A * mt * 16) / 32,
    )


# Printed coefficients of E = sum_k e_k B^((1-k)/2) for the well at 0
PRINTED_OSCILLATORY = _printed_oscillatory_coefficients()


def oscillatory_series(order: int) -> HalfPowerSeries:
    """Printed coefficients, continued by contour reversion beyond them"""
    if order < 0:
        raise ParameterDomain(f"Order must be non-negative, got {order}")
    if order < len(PRINTED_OSCILLATORY):
        return HalfPowerSeries(anchor=1, coefficients=PRINTED_OSCILLATORY[:order + 1])
    generated = invert_to_energy(None, None, order).coefficients
    return HalfPowerSeries(anchor=1, coefficients=PRINTED_OSCILLATORY + tuple(generated[3:]))


def _series_terms(series: HalfPowerSeries, sqrt_b: float, mu: int, A: float) -> List[float]:
    mt = Fraction(2 * mu + 1, 2)
    exact = series.exact_coefficients(mt=mt, A=Fraction(A))
    return [float(c) * sqrt_b ** (series.anchor - k) for k, c in enumerate(exact)]


def _tail_estimate(terms: List[float]) -> float:
    """Heuristic next-term size when no further coefficient is available"""
    if len(terms) >= 2 and terms[-2] != 0.0:
        return abs(terms[-1]) * abs(terms[-1] / terms[-2])
    return abs(terms[-1])


def oscillatory_energy_0(p: PendulumParams, mu: int, order: int = 2) -> SeriesValue:
    """Energy of |mu> in the well at phi = 0 through B^((1-order)/2)"""
    if mu < 0:
        raise ParameterDomain(f"mu must be a natural number, got {mu}")
    if p.B <= 0:
        raise ParameterDomain("Oscillatory series need B > 0")

    top = max_reversion_order()
    if order > top:
        raise ParameterDomain(f"Order {order} above the available {top}")

    series = oscillatory_series(min(order + 1, top))
    terms = _series_terms(series, p.sqrt_b, mu, p.A)
    kept = terms[:order + 1]
    estimate = abs(terms[order + 1]) if len(terms) > order + 1 else _tail_estimate(kept)

    advisory = None
    if not p.is_deep_well(mu):
        advisory = f"shallow well: mu~={mu + 0.5} against sqrt(B)={p.sqrt_b:.4g}"
        logger.warning(f"Oscillatory series outside the deep-well regime: A={p.A}, B={p.B}, mu={mu}")

    return SeriesValue(value=math.fsum(kept), error_estimate=estimate, terms=tuple(kept), advisory=advisory)


def oscillatory_energy_pi(p: PendulumParams, mu: int, order: int = 2) -> SeriesValue:
    """Energy of |mu> in the well at phi = pi, via u(phi + pi; A) = u(phi; -A)"""
    return oscillatory_energy_0(mirror(p), mu, order)


# Rotating states

def rotating_energy(p: PendulumParams, nu: float, order: int = 4,
                    printed_coefficients: bool = False) -> SeriesValue:
    """E(nu) for rotating states, through nu^(-order)"""
    if order not in ROTATING_ORDERS:
        raise ParameterDomain(f"Rotating order must be one of {ROTATING_ORDERS}, got {order}")
    if nu == 0 and order > 0:
        raise ParameterDomain("Rotating series are singular at nu = 0")

    A, B = p.A, p.B
    a_weight = 2.0 if printed_coefficients else 4.0
    terms = [nu ** 2 + B / 2.0]
    if nu != 0:
        terms.append((B ** 2 + a_weight * A ** 2) / (32.0 * nu ** 2))
        terms.append((2.0 * B ** 2 - 3.0 * A ** 2 * B + 2.0 * A ** 2) / (64.0 * nu ** 4))

    count = order // 2 + 1
    kept = terms[:count]
    estimate = abs(terms[count]) if len(terms) > count else _tail_estimate(kept)

    advisory = None
    if nu ** 2 < B:
        advisory = f"rotating series below the barrier: nu^2={nu ** 2:.4g} < B={B:.4g}"
        logger.warning(f"Rotating series evaluated with nu^2 < B: A={A}, B={B}, nu={nu}")

    return SeriesValue(value=math.fsum(kept), error_estimate=estimate, terms=tuple(kept), advisory=advisory)


def rotating_normalization(p: PendulumParams, nu: float) -> float:
    """C = sqrt(2 pi) [1 - B/8nu^2 + (B^2 - 8B + 6A^2)/64nu^4], as printed"""
    A, B = p.A, p.B
    return math.sqrt(2.0 * math.pi) * (1.0 - B / (8.0 * nu ** 2)
                                       + (B ** 2 - 8.0 * B + 6.0 * A ** 2) / (64.0 * nu ** 4))


def _rotating_bracket(p: PendulumParams, nu: float, phi, sign: int, order: int):
    A, B = p.A, p.B
    phi = np.asarray(phi, dtype=float)
    value = np.ones(phi.shape, dtype=complex)
    if order >= 1:
        value = value + sign * 1j / (8.0 * nu) * (B * np.sin(2 * phi) + 4.0 * A * np.sin(phi))
    if order >= 2:
        value = value + (B ** 2 * np.cos(4 * phi) + 8.0 * A * B * np.cos(3 * phi)
                         - 16.0 * (2.0 * B - A ** 2) * np.cos(2 * phi)
                         - 8.0 * A * (B + 8.0) * np.cos(phi)) / (256.0 * nu ** 2)
    return np.exp(sign * 1j * nu * phi) * value


def _numeric_rotating_normalization(p: PendulumParams, nu: float, order: int) -> float:
    grid = np.linspace(0.0, 2.0 * math.pi, 4097)
    values = _rotating_bracket(p, nu, grid, 1, order)
    return 1.0 / math.sqrt(trapezoid(np.abs(values) ** 2, grid))


def rotating_wavefunction(p: PendulumParams, nu: float, phi, sector: int = 1, order: int = 2,
                          normalization: str = "printed"):
    """psi_+ (sector=+1) or psi_- (sector=-1) through nu^(-order)"""
    if sector not in (1, -1):
        raise ParameterDomain(f"Rotating sector must be +1 or -1, got {sector}")
    if order not in (0, 1, 2):
        raise ParameterDomain(f"Rotating wavefunction order must be 0, 1 or 2, got {order}")
    if nu == 0:
        raise ParameterDomain("Rotating series are singular at nu = 0")

    if normalization == "printed":
        C = rotating_normalization(p, nu)
    elif normalization == "numeric":
        C = _numeric_rotating_normalization(p, nu, order)
    elif normalization == "none":
        C = 1.0
    else:
        raise ParameterDomain(f"Normalization must be one of {ROTATING_NORMALIZATIONS}")
    return C * _rotating_bracket(p, nu, phi, sector, order)


def rotating_combination(p: PendulumParams, nu: float, phi, kind: str = "C", order: int = 2,
                         normalization: str = "printed"):
    """psi_C = psi_+ + psi_- (even) or psi_S = psi_+ - psi_- (odd)"""
    plus = rotating_wavefunction(p, nu, phi, 1, order, normalization)
    minus = rotating_wavefunction(p, nu, phi, -1, order, normalization)
    if kind == "C":
        return plus + minus
    if kind == "S":
        return plus - minus
    raise ParameterDomain(f"Combination must be C or S, got {kind!r}")


# Mathieu reference series

def mathieu_weak(n: int, h: float) -> float:
    """n^2 + h^2/(2(n^2-1)) + (5n^2+7) h^4/(32 (n^2-1)^3 (n^2-4))"""
    if n <= 1:
        raise WeakSeriesSingular(f"Weak-coupling series has a pole at n={n}")
    n2 = n * n
    value = n2 + h ** 2 / (2.0 * (n2 - 1))
    if n2 != 4:
        value += (5.0 * n2 + 7.0) * h ** 4 / (32.0 * (n2 - 1) ** 3 * (n2 - 4))
    return value


def mathieu_strong(n: int, h: float, order: int = 1) -> float:
    """-2h + 4(n + 1/2) h^(1/2) - ..., the A = 0 oscillatory series with B = 4h"""
    if n < 0:
        raise ParameterDomain(f"n must be a natural number, got {n}")
    if h <= 0:
        raise ParameterDomain(f"Strong-coupling series need h > 0, got {h}")
    p = PendulumParams(A=0.0, B=4.0 * h)
    return oscillatory_energy_0(p, n, order).value - 2.0 * h


def mathieu_reference(n: int, h: float, regime: str = "strong", order: int = 1) -> MathieuPair:
    """Series approximations to (a_n, b_n)"""
    if regime == "weak":
        value = mathieu_weak(n, h)
        return MathieuPair(n=n, a=value, b=value)
    if regime == "strong":
        a = mathieu_strong(n, h, order)
        # b_{n+1} pairs with a_n in the strong-coupling limit
        b = mathieu_strong(n - 1, h, order) if n > 0 else None
        return MathieuPair(n=n, a=a, b=b)
    raise ParameterDomain(f"Regime must be weak or strong, got {regime!r}")


def mathieu_pair_splitting(n: int, h: float) -> float:
    """Strong-coupling estimate of b_{n+1} - a_n"""
    if n < 0:
        raise ParameterDomain(f"n must be a natural number, got {n}")
    return (2.0 ** (4 * n + 5) / math.factorial(n) * math.sqrt(2.0 / math.pi)
            * h ** (n / 2.0 + 0.75) * math.exp(-4.0 * math.sqrt(h)))
