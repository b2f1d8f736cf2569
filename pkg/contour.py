"""Contour quantization of the well states.

The Riccati integrand v = psi'/psi obeys v' + v^2 = u - E. Expanding
v = sum_l v_l (sqrt B)^(-l) gives orders v_l that are finite sums of
cos^e(phi)/sin^k(phi) with e in {0, 1}, which ``TrigLaurentSum`` holds
exactly with coefficients polynomial in (E, A). The quantum number is
(1/i pi) times the integral of v along a path that crosses the well in the
imaginary direction, and each term integrates to a fixed rational multiple of
i pi. Reverting mu(E) gives the oscillatory eigenvalue series to any order the
recursion is run to.
"""
import json
import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from config import (CONTOUR_R_MIN, CONTOUR_RADIUS, MAX_RICCATI_ORDER, QUAD_EPSABS, QUAD_EPSREL,
                    QUAD_LIMIT, RECTANGLE_HALF_HEIGHT)
from errors import NoConvergence, OrderBeyondTable, ParameterDomain, PathSingularity
from models import HalfPowerSeries, MuResult, PendulumParams
from polynomial import Poly
from utils import double_factorial_ratio

logger = logging.getLogger(__name__)

ENERGY_VARIABLES = ("E", "A")
SERIES_VARIABLES = ("mt", "A")  # mt = mu + 1/2

Term = Tuple[int, int]  # (cosine power e, inverse sine power k)


def _poly(value: Union[Poly, int, Fraction]) -> Poly:
    if isinstance(value, Poly):
        return value
    return Poly.constant(ENERGY_VARIABLES, value)


class TrigLaurentSum:
    """Exact sum of coef * cos^e(phi) / sin^k(phi), e in {0, 1}, coef in Q[E, A]"""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Term, Any]] = None):
        clean: Dict[Term, Poly] = {}
        for (e, k), coef in (terms or {}).items():
            if e not in (0, 1):
                raise ValueError(f"Cosine power must be 0 or 1, got {e}")
            coef = _poly(coef)
            if not coef.is_zero():
                clean[(e, k)] = coef
        self.terms: Dict[Term, Poly] = clean

    @classmethod
    def single(cls, e: int, k: int, coef: Any = 1) -> "TrigLaurentSum":
        return cls({(e, k): coef})

    def _accumulate(self, terms: Dict[Term, Poly], key: Term, coef: Poly):
        terms[key] = terms[key] + coef if key in terms else coef

    def __add__(self, other: "TrigLaurentSum") -> "TrigLaurentSum":
        terms = dict(self.terms)
        for key, coef in other.terms.items():
            self._accumulate(terms, key, coef)
        return TrigLaurentSum(terms)

    def __neg__(self) -> "TrigLaurentSum":
        return TrigLaurentSum({key: -coef for key, coef in self.terms.items()})

    def __sub__(self, other: "TrigLaurentSum") -> "TrigLaurentSum":
        return self + (-other)

    def __mul__(self, other: Any) -> "TrigLaurentSum":
        if not isinstance(other, TrigLaurentSum):
            scalar = _poly(other)
            return TrigLaurentSum({key: coef * scalar for key, coef in self.terms.items()})

        terms: Dict[Term, Poly] = {}
        for (e1, k1), c1 in self.terms.items():
            for (e2, k2), c2 in other.terms.items():
                coef = c1 * c2
                k = k1 + k2
                if e1 + e2 == 2:
                    # cos^2 = 1 - sin^2
                    self._accumulate(terms, (0, k), coef)
                    self._accumulate(terms, (0, k - 2), -coef)
                else:
                    self._accumulate(terms, (e1 + e2, k), coef)
        return TrigLaurentSum(terms)

    __rmul__ = __mul__

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, TrigLaurentSum):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, e: int, k: int) -> Poly:
        return self.terms.get((e, k), Poly.zero(ENERGY_VARIABLES))

    def derivative(self) -> "TrigLaurentSum":
        """d/dphi, staying inside the canonical form"""
        terms: Dict[Term, Poly] = {}
        for (e, k), coef in self.terms.items():
            if e == 0:
                self._accumulate(terms, (1, k + 1), coef * (-k))
            else:
                self._accumulate(terms, (0, k - 1), coef * (k - 1))
                self._accumulate(terms, (0, k + 1), coef * (-k))
        return TrigLaurentSum(terms)

    def over_sin(self, factor: Any = 1) -> "TrigLaurentSum":
        """Divide by factor * sin(phi)"""
        inv = Fraction(1) / Fraction(factor)
        return TrigLaurentSum({(e, k + 1): coef * inv for (e, k), coef in self.terms.items()})

    def residue(self) -> Poly:
        """(1/i pi) times the contour integral, term by term"""
        total = Poly.zero(ENERGY_VARIABLES)
        for (e, k), coef in self.terms.items():
            weight = residue_integral(e, k)
            if weight:
                total = total + coef * weight
        return total

    def antiderivative(self) -> Tuple["TrigLaurentSum", Poly, Poly]:
        """Antiderivative as (single-valued part, coef of ln tan(phi/2), coef of ln sin(phi))"""
        single: Dict[Term, Poly] = {}
        log_tan = Poly.zero(ENERGY_VARIABLES)
        log_sin = Poly.zero(ENERGY_VARIABLES)

        for (e, k), coef in self.terms.items():
            if e == 1:
                if k == 1:
                    log_sin = log_sin + coef
                else:
                    self._accumulate(single, (0, k - 1), coef * Fraction(-1, k - 1))
                continue

            if k == -1:
                self._accumulate(single, (1, 0), -coef)
                continue
            if k <= 0 or k % 2 == 0:
                raise ValueError(f"No closed antiderivative kept for sin^{-k}")
            # reduce csc^k down to csc
            factor = Fraction(1)
            while k > 1:
                self._accumulate(single, (1, k - 1), coef * (factor * Fraction(-1, k - 1)))
                factor *= Fraction(k - 2, k - 1)
                k -= 2
            log_tan = log_tan + coef * factor

        return TrigLaurentSum(single), log_tan, log_sin

    def substitute(self, **values: Any) -> "TrigLaurentSum":
        """Fix some of (E, A) to exact numbers"""
        terms = {}
        for key, coef in self.terms.items():
            for name, value in values.items():
                coef = coef.substitute(name, value)
            terms[key] = coef
        return TrigLaurentSum(terms)

    def numeric_terms(self, **values: Any) -> List[Tuple[int, int, float]]:
        return [(e, k, float(coef.evaluate(**values))) for (e, k), coef in self.sorted_terms()]

    def evaluate(self, phi, **values: Any):
        """Numerical value at (possibly complex) phi for float E and A"""
        return evaluate_terms(self.numeric_terms(**values), phi)

    def sorted_terms(self) -> List[Tuple[Term, Poly]]:
        return sorted(self.terms.items())

    def to_dict(self) -> Dict[str, Any]:
        return {"terms": [{"e": e, "k": k, "coefficient": coef.to_dict()}
                          for (e, k), coef in self.sorted_terms()]}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TrigLaurentSum":
        return cls({(t["e"], t["k"]): Poly.from_dict(t["coefficient"]) for t in data["terms"]})

    def __repr__(self) -> str:
        return f"TrigLaurentSum({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (e, k), coef in self.sorted_terms():
            trig = ("cos" if e else "") + (f"/sin^{k}" if k else "")
            parts.append(f"({coef}){trig}")
        return " + ".join(parts)


def evaluate_terms(terms: List[Tuple[int, int, float]], phi):
    """Sum of w * cos^e(phi) / sin^k(phi) over (e, k, w)"""
    phi = np.asarray(phi)
    s = np.sin(phi)
    c = np.cos(phi)
    total = np.zeros(phi.shape, dtype=complex if np.iscomplexobj(phi) else float)
    for e, k, weight in terms:
        term = s ** (-k) if k else np.ones_like(s)
        if e:
            term = c * term
        total = total + weight * term
    return total


def residue_integral(e: int, k: int) -> Fraction:
    """Rational r with (1/i pi) * integral of cos^e/sin^k along the well contour equal to r"""
    if e == 0 and k > 0 and k % 2 == 1:
        return double_factorial_ratio((k - 1) // 2)
    if e == 1 and k == 1:
        return Fraction(1)
    return Fraction(0)


@lru_cache(maxsize=None)
def _riccati_orders(L: int) -> Tuple[TrigLaurentSum, ...]:
    E = Poly.variable(ENERGY_VARIABLES, "E")
    A = Poly.variable(ENERGY_VARIABLES, "A")

    v_minus = TrigLaurentSum.single(0, -1, -1)
    v0 = TrigLaurentSum.single(1, 1, Fraction(-1, 2))
    orders = [v_minus, v0]
    if L < 1:
        return tuple(orders[:L + 2])

    source = TrigLaurentSum({(1, 0): A, (0, 0): E})
    v1 = (v0.derivative() + v0 * v0 + source).over_sin(2)
    orders.append(v1)

    for n in range(1, L):
        # orders[i + 1] holds v_i
        total = orders[n + 1].derivative()
        for i in range(n + 1):
            total = total + orders[i + 1] * orders[n - i + 1]
        orders.append(total.over_sin(2))
        logger.debug(f"Generated v_{n + 1} with {len(orders[-1].terms)} terms")

    return tuple(orders)


def riccati_orders(L: int = 6) -> List[TrigLaurentSum]:
    """Integrand orders [v_{-1}, v_0, ..., v_L] in exact canonical form"""
    if L < -1:
        raise ParameterDomain(f"Order must be at least -1, got {L}")
    if L > MAX_RICCATI_ORDER:
        raise OrderBeyondTable(f"Integrand order {L} exceeds the configured maximum {MAX_RICCATI_ORDER}")
    return list(_riccati_orders(L))


@lru_cache(maxsize=None)
def _exponent_integrals(L: int) -> Tuple[Poly, ...]:
    return tuple(v.residue() for v in _riccati_orders(L)[1:])


def exponent_integrals(L: int) -> List[Poly]:
    """I_l = (1/i pi) * contour integral of v_l for l = 0..L, as polynomials in (E, A)"""
    riccati_orders(L)
    return list(_exponent_integrals(L))


def sector_sign(sector: str) -> int:
    if sector in ("+", "plus"):
        return 1
    if sector in ("-", "minus"):
        return -1
    raise ParameterDomain(f"Sector must be + or -, got {sector!r}")


def mu_of_energy(p: PendulumParams, energy: float, order: int, sector: str = "+") -> MuResult:
    """Quantum number mu(E) from the residue sum, with per-order contributions"""
    if p.B <= 0:
        raise ParameterDomain("Contour quantization needs B > 0")
    sign = sector_sign(sector)
    t = sign / p.sqrt_b
    integrals = exponent_integrals(order)

    contributions: Dict[int, float] = {}
    for l, integral in enumerate(integrals):
        contributions[l] = float(integral.evaluate(E=energy, A=p.A)) * t ** l
    value = math.fsum(contributions.values())
    return MuResult(value=value, sector="+" if sign > 0 else "-", exponent_series=contributions)


def exact_mu_of_energy(energy: Fraction, A: Fraction, sqrt_b: Fraction, order: int,
                       sector: str = "+") -> Fraction:
    """mu(E) in rational arithmetic (sqrt B supplied as an exact number)"""
    t = Fraction(sector_sign(sector)) / Fraction(sqrt_b)
    return sum((integral.evaluate(E=Fraction(energy), A=Fraction(A)) * t ** l
                for l, integral in enumerate(exponent_integrals(order))), Fraction(0))


# Series reversion

def _series_mul(a: List[Poly], b: List[Poly], n: int) -> List[Poly]:
    zero = Poly.zero(SERIES_VARIABLES)
    out = [zero] * (n + 1)
    for i, ai in enumerate(a[:n + 1]):
        if ai.is_zero():
            continue
        for j, bj in enumerate(b[:n + 1 - i]):
            out[i + j] = out[i + j] + ai * bj
    return out


def _energy_coefficients(integral: Poly) -> List[Poly]:
    """Split I(E, A) into its E-power coefficients as polynomials in (mt, A)"""
    mapping = {"A": Poly.variable(SERIES_VARIABLES, "A")}
    return [integral.coefficient("E", j).compose(SERIES_VARIABLES, mapping)
            for j in range(integral.degree("E") + 1)]


def _mu_tilde_series(e_list: List[Poly], n: int) -> List[Poly]:
    """t-coefficients 0..n of sum_l t^l I_l(F/t) with F = sum_k e_k t^k"""
    zero = Poly.zero(SERIES_VARIABLES)
    F = list(e_list[:n + 1]) + [zero] * max(0, n + 1 - len(e_list))
    integrals = exponent_integrals(2 * n + 1)

    powers = [[Poly.constant(SERIES_VARIABLES, 1)] + [zero] * n]
    out = [zero] * (n + 1)
    for l, integral in enumerate(integrals):
        for j, coef in enumerate(_energy_coefficients(integral)):
            if coef.is_zero():
                continue
            while len(powers) <= j:
                powers.append(_series_mul(powers[-1], F, n))
            shift = l - j  # t^l (F/t)^j = t^(l-j) F^j
            if shift < 0:
                raise ValueError(f"Negative t power in order {l}")
            for m in range(n + 1 - shift):
                if not powers[j][m].is_zero():
                    out[m + shift] = out[m + shift] + coef * powers[j][m]
    return out


@lru_cache(maxsize=None)
def _reverted_coefficients(order: int) -> Tuple[Poly, ...]:
    mt = Poly.variable(SERIES_VARIABLES, "mt")
    coefficients = [mt * 2]
    for k in range(1, order + 1):
        trial = coefficients + [Poly.zero(SERIES_VARIABLES)]
        residual = _mu_tilde_series(trial, k)[k]
        coefficients.append(residual * (-2))
        logger.debug(f"Reverted energy coefficient e_{k} = {coefficients[-1]}")
    return tuple(coefficients)


def max_reversion_order() -> int:
    return (MAX_RICCATI_ORDER - 1) // 2


def invert_to_energy(p: Optional[PendulumParams], mu: Optional[int], order: int) -> HalfPowerSeries:
    """E(mt) = sum_k e_k B^((1 - k)/2) by formal reversion of mu(E).

    The coefficients are exact polynomials in (mt, A); ``p`` and ``mu`` are
    accepted for call symmetry and only checked.
    """
    if order < 0:
        raise ParameterDomain(f"Order must be non-negative, got {order}")
    if order > max_reversion_order():
        raise OrderBeyondTable(f"Reversion order {order} needs integrand order {2 * order + 1}, "
                               f"above the configured maximum {MAX_RICCATI_ORDER}")
    if mu is not None and mu < 0:
        raise ParameterDomain(f"mu must be a natural number, got {mu}")
    return HalfPowerSeries(anchor=1, coefficients=_reverted_coefficients(order), parameter="sqrtB")


def quantize_energy(p: PendulumParams, mu: int, order: int) -> float:
    """Energy at which the truncated residue sum gives exactly mu (plus sector)"""
    if p.B <= 0:
        raise ParameterDomain("Contour quantization needs B > 0")
    if mu < 0:
        raise ParameterDomain(f"mu must be a natural number, got {mu}")

    series = invert_to_energy(p, mu, min(max_reversion_order(), max(order // 2, 0)))
    guess = series.evaluate(p.sqrt_b, mt=mu + 0.5, A=p.A)

    def f(energy: float) -> float:
        return mu_of_energy(p, energy, order).value - mu

    for scale in (1.0, 0.5, 2.0, 4.0):
        lo, hi = guess - scale * p.sqrt_b, guess + scale * p.sqrt_b
        if f(lo) < 0.0 < f(hi):
            return brentq(f, lo, hi, xtol=1e-13 * max(1.0, abs(guess)), rtol=4e-16)
    raise NoConvergence(f"Could not bracket the quantized energy for mu={mu}, A={p.A}, B={p.B}")


# Numerical contour integration

def _integrand(orders: List[TrigLaurentSum], p: PendulumParams, energy: float, sector: str):
    sign = sector_sign(sector)
    t = sign / p.sqrt_b
    terms: List[Tuple[int, int, float]] = []
    for l, v in enumerate(orders, start=-1):
        terms.extend((e, k, w * t ** l) for e, k, w in v.numeric_terms(E=energy, A=p.A))

    def f(phi):
        return complex(evaluate_terms(terms, phi))

    return f


def _complex_quad(g, a: float, b: float) -> complex:
    kwargs = dict(epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT)
    real, _ = quad(lambda x: g(x).real, a, b, **kwargs)
    imag, _ = quad(lambda x: g(x).imag, a, b, **kwargs)
    return complex(real, imag)


def path_integral(f, path: str = "semicircle", radius: float = CONTOUR_RADIUS,
                  bend: str = "right", half_height: float = RECTANGLE_HALF_HEIGHT) -> complex:
    """(1/i pi) times the integral of an odd integrand across the well at phi = 0.

    The straight legs along the imaginary axis cancel for odd integrands, so the
    semicircle alone carries the value; the rectangle deforms the same path.
    """
    if path == "semicircle":
        if radius < CONTOUR_R_MIN:
            raise PathSingularity(f"Semicircle radius {radius} below {CONTOUR_R_MIN}")
        if radius >= math.pi:
            raise PathSingularity(f"Semicircle radius {radius} reaches the pole at pi")

        def along(theta):
            z = radius * np.exp(1j * theta)
            return f(z) * 1j * z

        if bend == "right":
            value = _complex_quad(along, -math.pi / 2.0, math.pi / 2.0)
        elif bend == "left":
            # cut moved to (-pi, 0): arc through -r, traversed from +ir to -ir
            value = _complex_quad(along, math.pi / 2.0, 3.0 * math.pi / 2.0)
        else:
            raise ParameterDomain(f"Bend must be right or left, got {bend!r}")
        return value / (1j * math.pi)

    if path == "rectangle":
        x0 = radius
        if x0 < CONTOUR_R_MIN or x0 >= math.pi:
            raise PathSingularity(f"Rectangle offset {x0} outside ({CONTOUR_R_MIN}, pi)")
        Y = half_height
        bottom = _complex_quad(lambda x: f(x - 1j * Y), 0.0, x0)
        side = _complex_quad(lambda y: f(x0 + 1j * y) * 1j, -Y, Y)
        top = -_complex_quad(lambda x: f(x + 1j * Y), 0.0, x0)
        return (bottom + side + top) / (1j * math.pi)

    raise ParameterDomain(f"Unknown path {path!r}")


def numeric_contour_integral(p: PendulumParams, energy: float, order: int, path: str = "semicircle",
                             radius: float = CONTOUR_RADIUS, bend: str = "right",
                             sector: str = "+") -> complex:
    """Quadrature of sum_{l=-1}^{order} v_l (+/- sqrt B)^(-l) along the well contour"""
    if p.B <= 0:
        raise ParameterDomain("Contour quantization needs B > 0")
    orders = riccati_orders(order)
    return path_integral(_integrand(orders, p, energy, sector), path=path, radius=radius, bend=bend)


def numeric_order_integral(l: int, energy: float, A: float, path: str = "semicircle",
                           radius: float = CONTOUR_RADIUS, bend: str = "right") -> complex:
    """Quadrature of a single integrand order v_l"""
    terms = riccati_orders(l)[l + 1].numeric_terms(E=energy, A=A)
    return path_integral(lambda phi: complex(evaluate_terms(terms, phi)),
                         path=path, radius=radius, bend=bend)


# Serialization

def integrand_table(L: int) -> Dict[str, Any]:
    """JSON-ready table of v_{-1}..v_L and their exponent integrals"""
    orders = riccati_orders(L)
    return {
        "variables": list(ENERGY_VARIABLES),
        "orders": [{"l": l, "integrand": v.to_dict(), "integral": v.residue().to_dict()}
                   for l, v in enumerate(orders, start=-1)],
    }


def export_integrands(L: int) -> str:
    return json.dumps(integrand_table(L), sort_keys=True, indent=2)


def import_integrands(text: str) -> List[TrigLaurentSum]:
    data = json.loads(text)
    return [TrigLaurentSum.from_dict(entry["integrand"]) for entry in data["orders"]]
