"""Piecewise eigenfunctions of the oscillatory states.

Inside a well the state is a Sips-Meixner sum of parabolic cylinder functions
D_{mu+2m}(z), z = sqrt(2) B^(1/4) sin(phi), with coefficients that are exact
polynomials in (mu, A). In the barrier the state is exp(W) with W the
antiderivative of the truncated Riccati integrand. The well at pi is handled
by the reflection chi = pi - phi, A -> -A, which maps u onto itself.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import quad

from config import (BARRIER_ORDER, MAX_RICCATI_ORDER, MONODROMY_STEPS, OVERLAP_FACTOR,
                    PRINTED_CHECK_ORDER, SIPS_MAX_ORDER, WELL_SIPS_ORDER)
from contour import evaluate_terms, max_reversion_order, quantize_energy, riccati_orders, sector_sign
from errors import BranchViolation, GaugeConflict, OrderBeyondTable, ParameterDomain, RegionViolation
from models import PendulumParams
from polynomial import Poly
from potential import normalize_well
from series import oscillatory_energy_0, oscillatory_series

logger = logging.getLogger(__name__)

SIPS_VARIABLES = ("mu", "A")
WELL_KINDS = ("C", "S")
BARRIER_FORMS = ("riccati", "printed")
NORMALIZATIONS = ("printed", "quadrature", "none")

Row = Dict[int, Poly]  # shift 2m -> coefficient of D_{mu+2m}


# Parabolic cylinder functions

def parabolic_cylinder_sequence(n_max: int, z) -> np.ndarray:
    """D_0(z) .. D_n_max(z) stacked along the first axis"""
    if n_max < 0:
        raise ParameterDomain(f"n must be a natural number, got {n_max}")
    z = np.asarray(z)
    dtype = complex if np.iscomplexobj(z) else float
    out = np.empty((n_max + 1,) + z.shape, dtype=dtype)
    out[0] = np.exp(-z * z / 4.0)
    if n_max >= 1:
        out[1] = z * out[0]
    for k in range(1, n_max):
        out[k + 1] = z * out[k] - k * out[k - 1]
    return out


def _check_order(n) -> int:
    if int(n) != n or n < 0:
        raise ParameterDomain(f"Only natural orders are supported, got {n}")
    return int(n)


def parabolic_cylinder(n: int, z):
    """D_n(z) = 2^(-n/2) exp(-z^2/4) H_n(z/sqrt 2)"""
    n = _check_order(n)
    value = parabolic_cylinder_sequence(n, z)[n]
    return value.item() if np.ndim(value) == 0 else value


def parabolic_cylinder_derivative(n: int, z):
    """D_n'(z) = n D_{n-1}(z) - (z/2) D_n(z)"""
    n = _check_order(n)
    seq = parabolic_cylinder_sequence(n, z)
    value = -0.5 * np.asarray(z) * seq[n]
    if n > 0:
        value = value + n * seq[n - 1]
    return value.item() if np.ndim(value) == 0 else value


# Sips-Meixner coefficient tables

@dataclass(frozen=True)
class SipsCoefficientTable:
    """C_{l,2m} and S_{l,2m} rows for l = 0..order, polynomials in (mu, A)"""
    C: Tuple[Row, ...]
    S: Tuple[Row, ...]
    well: str = "0"
    source: str = "stored"

    @property
    def order(self) -> int:
        return len(self.C) - 1

    def rows(self, kind: str) -> Tuple[Row, ...]:
        if kind == "C":
            return self.C
        if kind == "S":
            return self.S
        raise ParameterDomain(f"Kind must be C or S, got {kind!r}")

    def coefficient(self, kind: str, l: int, shift: int) -> Poly:
        return self.rows(kind)[l].get(shift, Poly.zero(SIPS_VARIABLES))

    def truncated(self, L: int) -> "SipsCoefficientTable":
        return SipsCoefficientTable(self.C[:L + 1], self.S[:L + 1], self.well, self.source)

    def values(self, kind: str, mu: int, A) -> List[Dict[int, float]]:
        """Numeric rows at (mu, A); exact Fractions when A is exact"""
        return [{shift: coef.evaluate(mu=mu, A=A) for shift, coef in row.items()}
                for row in self.rows(kind)]

    def substitute(self, mu=None, A=None) -> "SipsCoefficientTable":
        def fix(row: Row) -> Row:
            out = {}
            for shift, coef in row.items():
                if mu is not None:
                    coef = coef.substitute("mu", mu)
                if A is not None:
                    coef = coef.substitute("A", Fraction(A))
                if not coef.is_zero():
                    out[shift] = coef
            return out
        return SipsCoefficientTable(tuple(fix(r) for r in self.C), tuple(fix(r) for r in self.S),
                                    self.well, self.source)


def _falling(j: int) -> Poly:
    """mu!/(mu-j)! as a polynomial, zero at integers mu < j"""
    mu = Poly.variable(SIPS_VARIABLES, "mu")
    out = Poly.constant(SIPS_VARIABLES, 1)
    for i in range(j):
        out = out * (mu - i)
    return out


def _static_rows(printed: bool) -> Tuple[Row, ...]:
    mu = Poly.variable(SIPS_VARIABLES, "mu")
    A = Poly.variable(SIPS_VARIABLES, "A")

    def const(value) -> Poly:
        return Poly.constant(SIPS_VARIABLES, Fraction(value))

    row0 = {0: const(1)}
    row1 = {
        4: const(Fraction(-1, 16)),
        2: const(Fraction(-1, 4)),
        -2: -(mu - 1) / 4 if printed else -_falling(2) / 4,
        -4: _falling(2) / 16 if printed else _falling(4) / 16,
    }
    row2 = {
        8: const(Fraction(1, 512)),
        6: const(Fraction(1, 64)),
        4: -(mu + 2) / 16,
        2: (mu * mu - mu * 25 - 36 - A * 16) / 64,
        -2: -_falling(2) * (mu * mu + mu * 27 - 10 - A * 16) / 64,
        -4: (mu - 1) * _falling(4) / 16,
        -6: -_falling(6) / 64,
        -8: -_falling(8) / 512 if printed else _falling(8) / 512,
    }
    return row0, row1, row2


# C_{l,2m} as printed, including three entries the recursion does not reproduce
PRINTED_SIPS = _static_rows(printed=True)
CORRECTED_SIPS = _static_rows(printed=False)


def printed_discrepancies() -> List[Tuple[int, int]]:
    """(l, 2m) entries where the printed table differs from the corrected one"""
    return [(l, shift) for l, row in enumerate(PRINTED_SIPS)
            for shift, coef in sorted(row.items()) if CORRECTED_SIPS[l][shift] != coef]


def _flip_a(row: Row) -> Row:
    minus_a = -Poly.variable(SIPS_VARIABLES, "A")
    return {shift: coef.substitute("A", minus_a) for shift, coef in row.items()}


def s_rows_from_pattern(rows: Tuple[Row, ...]) -> Tuple[Row, ...]:
    """S_{l,2m}(mu, A) = (-1)^m C_{l,2m}(mu, -A)"""
    return tuple({shift: coef * (1 if (shift // 2) % 2 == 0 else -1) for shift, coef in _flip_a(row).items()}
                 for row in rows)


def sips_coefficients(mu: Optional[int] = None, A=None, L: int = WELL_SIPS_ORDER,
                      recursive: bool = False, printed: bool = False) -> SipsCoefficientTable:
    """Sips coefficient table through order L, optionally fixed at (mu, A)

    ``printed=True`` returns the tabulated entries unchanged, defects included.
    """
    if L < 0:
        raise ParameterDomain(f"Order must be non-negative, got {L}")
    if recursive:
        table = sips_coefficients_recursive(L)
    else:
        if L >= len(CORRECTED_SIPS):
            raise OrderBeyondTable(f"Stored Sips table stops at order {len(CORRECTED_SIPS) - 1}, got {L}")
        rows = (PRINTED_SIPS if printed else CORRECTED_SIPS)[:L + 1]
        table = SipsCoefficientTable(C=rows, S=s_rows_from_pattern(rows), source="printed" if printed else "stored")
    if mu is not None or A is not None:
        table = table.substitute(mu=mu, A=A)
    return table


def _accumulate(row: Row, shift: int, coef: Poly):
    row[shift] = row[shift] + coef if shift in row else coef


def _times_z(row: Row) -> Row:
    """z D_n = n D_{n-1} + D_{n+1}"""
    mu = Poly.variable(SIPS_VARIABLES, "mu")
    out: Row = {}
    for shift, coef in row.items():
        _accumulate(out, shift - 1, coef * (mu + shift))
        _accumulate(out, shift + 1, coef)
    return out


def _d_dz(row: Row) -> Row:
    """D_n' = (n D_{n-1} - D_{n+1}) / 2"""
    mu = Poly.variable(SIPS_VARIABLES, "mu")
    out: Row = {}
    for shift, coef in row.items():
        _accumulate(out, shift - 1, coef * (mu + shift) / 2)
        _accumulate(out, shift + 1, -coef / 2)
    return out


def _scaled(row: Row, factor: Poly) -> Row:
    return {shift: coef * factor for shift, coef in row.items()}


def _add_into(target: Row, row: Row, factor=1):
    for shift, coef in row.items():
        _accumulate(target, shift, coef * factor)


def _sqrt_coefficients(n: int) -> List[Fraction]:
    """c_k in sqrt(1 - x) = sum_k c_k x^k"""
    out = [Fraction(1)]
    for k in range(1, n + 1):
        out.append(out[-1] * (Fraction(k) - Fraction(3, 2)) / k)
    return out


def _shifted_energy_coefficients(L: int) -> List[Poly]:
    """e'_j = 2^(j-1) e_j as polynomials in (mu, A), index 0 unused"""
    series = oscillatory_series(L)
    mu = Poly.variable(SIPS_VARIABLES, "mu")
    mapping = {"mt": mu + Fraction(1, 2), "A": Poly.variable(SIPS_VARIABLES, "A")}
    out = [Poly.zero(SIPS_VARIABLES)]
    for j in range(1, L + 1):
        out.append(series.coefficients[j].compose(SIPS_VARIABLES, mapping) * Fraction(2) ** (j - 1))
    return out


@lru_cache(maxsize=None)
def _recursive_rows(L: int, kind: str) -> Tuple[Row, ...]:
    A = Poly.variable(SIPS_VARIABLES, "A")
    p = 1 if kind == "C" else 3
    e_prime = _shifted_energy_coefficients(L)
    if kind == "S":
        # the cos(phi) prefactor shifts the first energy coefficient by one
        e_prime[1] = e_prime[1] - 1
    sqrt_c = _sqrt_coefficients(L)

    rows: List[Row] = [{0: Poly.constant(SIPS_VARIABLES, 1)}]
    for l in range(1, L + 1):
        prev = rows[l - 1]
        rhs: Row = {}
        first = _d_dz(prev)
        _add_into(rhs, _times_z(_times_z(_d_dz(first))))
        _add_into(rhs, _times_z(first), p)
        for j in range(1, l + 1):
            _add_into(rhs, _scaled(rows[l - j], -e_prime[j]))
        for k in range(l):
            term = rows[l - 1 - k]
            for _ in range(2 * k):
                term = _times_z(term)
            _add_into(rhs, _scaled(term, -A * sqrt_c[k]))

        row: Row = {}
        for shift, coef in sorted(rhs.items()):
            if coef.is_zero():
                continue
            if shift == 0 or shift % 2:
                raise GaugeConflict(f"Order {l} ({kind}) has a nonzero projection on shift {shift}: {coef}")
            # L0 D_{mu+j} = -j D_{mu+j}
            row[shift] = coef / (-shift)
        rows.append(row)
        logger.debug(f"Sips order {l} ({kind}): {len(row)} coefficients")
    return tuple(rows)


def sips_coefficients_recursive(L: int, mu: Optional[int] = None, A=None) -> SipsCoefficientTable:
    """Generate the Sips table by balancing the well equation order by order"""
    if L < 1:
        raise ParameterDomain(f"Recursive order must be at least 1, got {L}")
    top = min(SIPS_MAX_ORDER, max_reversion_order())
    if L > top:
        raise OrderBeyondTable(f"Sips recursion limited to order {top}, got {L}")
    table = SipsCoefficientTable(C=_recursive_rows(L, "C"), S=_recursive_rows(L, "S"), source="recursive")
    if mu is not None or A is not None:
        table = table.substitute(mu=mu, A=A)
    return table


def pi_well_coefficients(table: SipsCoefficientTable) -> SipsCoefficientTable:
    """Coefficients for the well at pi: C_hat(mu, A) = C(mu, -A), S_hat(mu, A) = S(mu, -A)"""
    if table.well != "0":
        raise ParameterDomain("Table is already for the well at pi")
    return SipsCoefficientTable(C=tuple(_flip_a(r) for r in table.C), S=tuple(_flip_a(r) for r in table.S),
                                well="pi", source=table.source)


# Well wavefunctions

def _z(p: PendulumParams, phi):
    return math.sqrt(2.0) * p.B ** 0.25 * np.sin(phi)


def _sips_sum(p: PendulumParams, mu: int, phi, kind: str, table: SipsCoefficientTable):
    """Unnormalized psi_C or psi_S from a table"""
    phi = np.asarray(phi, dtype=float)
    D = parabolic_cylinder_sequence(mu + 4 * table.order, _z(p, phi))
    epsilon = 1.0 / (2.0 * p.sqrt_b)
    total = np.zeros(phi.shape)
    for l, row in enumerate(table.values(kind, mu, p.A)):
        part = np.zeros(phi.shape)
        for shift, coef in row.items():
            index = mu + shift
            if index >= 0 and coef:
                part = part + float(coef) * D[index]
        total = total + epsilon ** l * part
    if kind == "S":
        total = total * np.cos(phi)
    return total


def _well_table(well: str, L: int) -> SipsCoefficientTable:
    table = sips_coefficients(L=L) if L < len(CORRECTED_SIPS) else sips_coefficients_recursive(L)
    return pi_well_coefficients(table) if well == "pi" else table


def normalization_constants(p: PendulumParams, mu: int, well="0", method: str = "printed",
                            L: int = WELL_SIPS_ORDER) -> Tuple[float, float]:
    """(C, S) prefactors of psi_C and psi_S for the given well"""
    if mu < 0:
        raise ParameterDomain(f"mu must be a natural number, got {mu}")
    if p.B <= 0:
        raise ParameterDomain("Well wavefunctions need B > 0")
    well = normalize_well(well)

    if method == "printed":
        s, B = p.sqrt_b, p.B
        prefactor = math.sqrt(B ** 0.25 / (math.sqrt(math.pi) * math.factorial(mu)))
        first = (2 * mu + 1) / (4.0 * s)
        c_second = (mu ** 4 + 2 * mu ** 3 + 263 * mu ** 2 + 262 * mu + 108) / (512.0 * B)
        s_second = (mu ** 4 + 2 * mu ** 3 - 121 * mu ** 2 - 122 * mu - 84) / (512.0 * B)
        return (prefactor / math.sqrt(1.0 + first + c_second),
                prefactor / math.sqrt(1.0 - first + s_second))

    if method == "quadrature":
        table = _well_table(well, L)
        center = 0.0 if well == "0" else math.pi
        bounds = (center - math.pi / 2.0, center + math.pi / 2.0)
        constants = []
        for kind in WELL_KINDS:
            integral, _ = quad(lambda x: float(_sips_sum(p, mu, x, kind, table)) ** 2,
                               *bounds, points=[center], limit=200, epsabs=1e-14, epsrel=1e-12)
            constants.append(1.0 / math.sqrt(integral))
        return constants[0], constants[1]

    raise ParameterDomain(f"Normalization method must be printed or quadrature, got {method!r}")


def well_wavefunction(p: PendulumParams, mu: int, phi, kind: str = "C", well="0",
                      L: int = WELL_SIPS_ORDER, normalization: str = "printed"):
    """psi_C or psi_S of |mu> in the given well, through (2 B^(1/2))^(-L)"""
    if kind not in WELL_KINDS:
        raise ParameterDomain(f"Kind must be C or S, got {kind!r}")
    if mu < 0:
        raise ParameterDomain(f"mu must be a natural number, got {mu}")
    if p.B <= 0:
        raise ParameterDomain("Well wavefunctions need B > 0")
    well = normalize_well(well)

    values = _sips_sum(p, mu, phi, kind, _well_table(well, L))
    if normalization == "none":
        constant = 1.0
    elif normalization in ("printed", "quadrature"):
        constants = normalization_constants(p, mu, well, normalization, L)
        constant = constants[WELL_KINDS.index(kind)]
    else:
        raise ParameterDomain(f"Normalization must be one of {NORMALIZATIONS}")
    values = constant * values
    return values.item() if np.ndim(values) == 0 else values


def well_error_estimate(p: PendulumParams, mu: int, phi, kind: str = "C", well="0",
                        L: int = WELL_SIPS_ORDER):
    """|psi through L+1 - psi through L|, the first omitted Sips order"""
    values = np.abs(np.asarray(well_wavefunction(p, mu, phi, kind, well, L + 1))
                    - np.asarray(well_wavefunction(p, mu, phi, kind, well, L)))
    return values.item() if np.ndim(values) == 0 else values


def region_tag(p: PendulumParams, mu: int, phi, well="0") -> np.ndarray:
    """'well', 'overlap' or 'barrier' by sin^2 against mu~/B^(1/2)"""
    well = normalize_well(well)
    ratio = np.sin(np.asarray(phi, dtype=float)) ** 2 * p.sqrt_b / (mu + 0.5)
    near = np.cos(np.asarray(phi, dtype=float)) > 0 if well == "0" else np.cos(np.asarray(phi, dtype=float)) < 0
    tags = np.where(ratio <= 1.0, "well", np.where(ratio < OVERLAP_FACTOR, "overlap", "barrier"))
    return np.where(near, tags, "barrier")


# Barrier wavefunctions

def _frame(p: PendulumParams, well: str, phi):
    """Parameters and angle seen from the well at 0"""
    phi = np.asarray(phi)
    if well == "0":
        return p, phi, 1.0
    return p.mirrored(), np.pi - phi, -1.0


@lru_cache(maxsize=None)
def _antiderivatives(order: int):
    return tuple(v.antiderivative() for v in riccati_orders(order))


def _log(x):
    x = np.asarray(x)
    if np.iscomplexobj(x) or np.any(x <= 0):
        return np.log(x.astype(complex))
    return np.log(x)


def _derivative_terms(terms):
    out = []
    for e, k, w in terms:
        if e == 0:
            out.append((1, k + 1, -k * w))
        else:
            out.append((0, k - 1, (k - 1) * w))
            out.append((0, k + 1, -k * w))
    return out


@dataclass(frozen=True)
class BarrierExponent:
    """W(chi) = sum_l t^l [single_l + tan_l ln tan(chi/2) + sin_l ln sin(chi)] in the frame of well 0"""
    single: Tuple[Tuple[int, int, float], ...]
    log_tan: float
    log_sin: float
    next_single: Tuple[Tuple[int, int, float], ...]
    next_log_tan: float
    next_log_sin: float
    energy: float
    sign: int
    order: int

    def value(self, chi):
        return (evaluate_terms(list(self.single), chi) + self.log_tan * _log(np.tan(np.asarray(chi) / 2.0))
                + self.log_sin * _log(np.sin(chi)))

    def derivative(self, chi):
        chi = np.asarray(chi)
        return (evaluate_terms(_derivative_terms(self.single), chi) + self.log_tan / np.sin(chi)
                + self.log_sin * np.cos(chi) / np.sin(chi))

    def omitted(self, chi):
        """Contribution of the first omitted order"""
        return (evaluate_terms(list(self.next_single), chi)
                + self.next_log_tan * _log(np.tan(np.asarray(chi) / 2.0))
                + self.next_log_sin * _log(np.sin(chi)))


def barrier_exponent(p: PendulumParams, mu: int, well="0", sector: str = "+", order: int = BARRIER_ORDER,
                     energy: Optional[float] = None) -> BarrierExponent:
    """Truncated exponent for psi_+ or psi_- of |mu>, E taken from the oscillatory series by default"""
    if mu < 0:
        raise ParameterDomain(f"mu must be a natural number, got {mu}")
    if p.B <= 0:
        raise ParameterDomain("Barrier wavefunctions need B > 0")
    if order < 0 or order + 1 > MAX_RICCATI_ORDER:
        raise OrderBeyondTable(f"Barrier order must lie in [0, {MAX_RICCATI_ORDER - 1}], got {order}")
    well = normalize_well(well)
    sign = sector_sign(sector)
    q = p if well == "0" else p.mirrored()
    if energy is None:
        energy = oscillatory_energy_0(q, mu, min(order, max_reversion_order())).value

    t = sign / q.sqrt_b
    parts = []
    for l, (single, log_tan, log_sin) in enumerate(_antiderivatives(order + 1), start=-1):
        weight = t ** l
        parts.append((
            tuple((e, k, w * weight) for e, k, w in single.numeric_terms(E=energy, A=q.A)),
            float(log_tan.evaluate(E=energy, A=q.A)) * weight,
            float(log_sin.evaluate(E=energy, A=q.A)) * weight,
        ))
    kept, omitted = parts[:-1], parts[-1]
    return BarrierExponent(
        single=tuple(term for part in kept for term in part[0]),
        log_tan=math.fsum(part[1] for part in kept),
        log_sin=math.fsum(part[2] for part in kept),
        next_single=omitted[0], next_log_tan=omitted[1], next_log_sin=omitted[2],
        energy=float(energy), sign=sign, order=order,
    )


def _printed_exponent(p: PendulumParams, mu: int, well: str, sign: int, phi, order: int):
    """Printed barrier exponents, verbatim for each well (constants dropped)"""
    s, B, A = p.sqrt_b, p.B, p.A
    mt = mu + 0.5
    phi = np.asarray(phi, dtype=float)
    c, sn = np.cos(phi), np.sin(phi)
    if well == "0":
        W = sign * s * c - 0.5 * _log(sn) + sign * mt * _log(np.tan(phi / 2.0))
        if order >= 1:
            W = W + sign / (16.0 * s) * ((sign * 8.0 * mt - (3.0 + 4.0 * mt ** 2) * c) / sn ** 2
                                         + 8.0 * A * _log(np.cos(phi / 2.0) ** 2))
        if order >= 2:
            W = W + ((12.0 + 32.0 * mt ** 2 - sign * (38.0 * mt + 8.0 * mt ** 3) * c) / sn ** 4
                     - ((3.0 + 4.0 * mt ** 2) * (sign * mt * c + 2.0)
                        + 32.0 * A * (1.0 + sign * mt) * np.sin(phi / 2.0) ** 2) / sn ** 2) / (64.0 * B)
        return W

    W = -sign * s * c - 0.5 * _log(sn) + sign * mt * _log(1.0 / np.tan(phi / 2.0))
    if order >= 1:
        W = W + sign / (16.0 * s) * ((sign * 8.0 * mt + (3.0 + 4.0 * mt ** 2) * c) / sn ** 2
                                     - 8.0 * A * _log(np.sin(phi / 2.0) ** 2))
    if order >= 2:
        # printed with cos^2(phi) and sin^2(phi/2) in the last fraction
        W = W + ((12.0 + 32.0 * mt ** 2 + sign * (38.0 * mt + 8.0 * mt ** 3) * c) / sn ** 4
                 - ((3.0 + 4.0 * mt ** 2) * (-sign * mt * c + 2.0)
                    - 32.0 * A * (1.0 + sign * mt) * np.sin(phi / 2.0) ** 2) / c ** 2) / (64.0 * B)
    return W


def _check_region(p: PendulumParams, mu: int, phi, strict: bool):
    sin2 = np.abs(np.sin(np.asarray(phi))) ** 2
    threshold = (mu + 0.5) / p.sqrt_b
    if np.any(sin2 <= threshold):
        message = f"Barrier form used at sin^2(phi) <= {threshold:.4g} (A={p.A}, B={p.B}, mu={mu})"
        if strict:
            raise RegionViolation(message)
        logger.warning(message)
        return False
    return True


def barrier_wavefunction(p: PendulumParams, mu: int, phi, well="0", sector: str = "+",
                         order: int = BARRIER_ORDER, form: str = "riccati", amplitude: float = 1.0,
                         energy: Optional[float] = None, strict: bool = False):
    """psi_+ or psi_- of |mu> in the barrier next to the given well"""
    well = normalize_well(well)
    _check_region(p, mu, phi, strict)
    if form == "riccati":
        _, chi, _ = _frame(p, well, phi)
        W = barrier_exponent(p, mu, well, sector, order, energy).value(chi)
    elif form == "printed":
        W = _printed_exponent(p, mu, well, sector_sign(sector), phi, min(order, 2))
    else:
        raise ParameterDomain(f"Barrier form must be one of {BARRIER_FORMS}, got {form!r}")
    values = amplitude * np.exp(W)
    return values.item() if np.ndim(values) == 0 else values


def barrier_log_derivative(p: PendulumParams, mu: int, phi, well="0", sector: str = "+",
                           order: int = BARRIER_ORDER, energy: Optional[float] = None):
    """d/dphi of the riccati exponent, from the antiderivative parts"""
    well = normalize_well(well)
    _, chi, dchi = _frame(p, well, phi)
    values = dchi * barrier_exponent(p, mu, well, sector, order, energy).derivative(chi)
    return values.item() if np.ndim(values) == 0 else values


def barrier_error_estimate(p: PendulumParams, mu: int, phi, well="0", sector: str = "+",
                           order: int = BARRIER_ORDER, reference: Optional[float] = None):
    """|first omitted order| of the exponent, measured from a reference angle"""
    well = normalize_well(well)
    exponent = barrier_exponent(p, mu, well, sector, order)
    _, chi, _ = _frame(p, well, phi)
    if reference is None:
        reference = math.pi / 2.0
    _, chi_ref, _ = _frame(p, well, reference)
    return np.abs(exponent.omitted(chi) - exponent.omitted(chi_ref))


@dataclass(frozen=True)
class FormCheck:
    """Printed barrier exponent against the riccati form on a sample of angles"""
    well: str
    sector: str
    discrepancy: float
    tolerance: float
    flagged: bool


def check_printed_form(p: PendulumParams, mu: int, well="0", sector: str = "+",
                       samples: int = 9) -> FormCheck:
    """Compare exponent differences of both forms; constants drop out"""
    well = normalize_well(well)
    sign = sector_sign(sector)
    chi = np.linspace(math.pi / 4.0, math.pi / 2.0 - 0.1, samples)
    phi = chi if well == "0" else math.pi - chi

    riccati = barrier_exponent(p, mu, well, sector, PRINTED_CHECK_ORDER).value(chi)
    printed = _printed_exponent(p, mu, well, sign, phi, 2)
    diff = (printed - printed[0]) - (riccati - riccati[0])
    discrepancy = float(np.max(np.abs(diff)))

    mt = mu + 0.5
    tolerance = 50.0 * (1.0 + mt) ** 3 * (1.0 + abs(p.A) / p.sqrt_b) / p.B ** 1.5
    flagged = discrepancy > tolerance
    if flagged:
        logger.warning(f"Printed barrier form for well {well} ({sector}) departs from the integrands by "
                       f"{discrepancy:.3g} > {tolerance:.3g} at A={p.A}, B={p.B}, mu={mu}")
    return FormCheck(well=well, sector="+" if sign > 0 else "-", discrepancy=discrepancy,
                     tolerance=tolerance, flagged=flagged)


def matching_angle(p: PendulumParams, mu: int, well="0") -> float:
    """Outer edge of the overlap annulus, where the two forms are joined"""
    sin2 = min(OVERLAP_FACTOR * (mu + 0.5) / p.sqrt_b, 0.5)
    chi = math.asin(math.sqrt(sin2))
    return chi if normalize_well(well) == "0" else math.pi - chi


def match_barrier_amplitude(p: PendulumParams, mu: int, well="0", kind: str = "C",
                            order: int = BARRIER_ORDER, L: int = WELL_SIPS_ORDER) -> float:
    """Constant making psi_+ equal to the normalized well function at the outer overlap edge"""
    well = normalize_well(well)
    phi = matching_angle(p, mu, well)
    inside = well_wavefunction(p, mu, phi, kind, well, L)
    outside = barrier_wavefunction(p, mu, phi, well, "+", order)
    return float(np.real(inside / outside))


# Canonical coordinate and monodromy

def to_canonical(phi, allow_complex: bool = False):
    """rho = ln tan(phi/2)"""
    phi = np.asarray(phi)
    if not allow_complex:
        if np.iscomplexobj(phi) or np.any((phi <= 0.0) | (phi >= math.pi)):
            raise BranchViolation("Real canonical coordinate needs phi in (0, pi)")
        values = np.log(np.tan(phi / 2.0))
    else:
        values = np.log(np.tan(phi.astype(complex) / 2.0))
    return values.item() if np.ndim(values) == 0 else values


def from_canonical(rho):
    """phi = 2 arctan(exp(rho))"""
    values = 2.0 * np.arctan(np.exp(np.asarray(rho)))
    return values.item() if np.ndim(values) == 0 else values


def canonical_monodromy(mu: int, sector: str = "+", well="0", sqrt_minus_one: complex = -1j) -> complex:
    """psi(rho + i pi)/psi(rho) = sqrt(-1) exp(+/- i pi mu~); the sign flips for the well at pi"""
    if mu < 0:
        raise ParameterDomain(f"mu must be a natural number, got {mu}")
    sign = sector_sign(sector)
    if normalize_well(well) == "pi":
        sign = -sign
    return sqrt_minus_one * cmath.exp(1j * math.pi * sign * (mu + 0.5))


def monodromy_numeric(p: PendulumParams, mu: int, sector: str = "+", well="0", rho: Optional[float] = None,
                      order: int = BARRIER_ORDER, steps: int = MONODROMY_STEPS) -> complex:
    """Continue the barrier exponent along rho + i pi t, t in [0, 1], tracking both logarithms.

    rho = ln tan(phi/2) in the original angle. The default start sits in the
    barrier next to the chosen well (rho < 0 for 0, rho > 0 for pi); there the
    continuous branch of sqrt(cosh rho) gives -i for the well at 0 and +i for
    the well at pi.
    """
    well = normalize_well(well)
    if rho is None:
        rho = -0.5 if well == "0" else 0.5
    if rho == 0.0:
        raise BranchViolation("The path from rho = 0 runs through a pole of sin(phi)")
    q = p if well == "0" else p.mirrored()
    energy = quantize_energy(q, mu, order)
    exponent = barrier_exponent(p, mu, well, sector, order, energy)

    path = rho + 1j * math.pi * np.linspace(0.0, 1.0, steps)
    # tan(chi/2) = cot(phi/2) in the frame of the well at pi
    rho_w = path if well == "0" else -path
    cosh = np.cosh(rho_w)
    ln_cosh = np.log(np.abs(cosh)) + 1j * np.unwrap(np.angle(cosh))
    ends = np.array([0, -1])
    chi = 2.0 * np.arctan(np.exp(rho_w[ends]))

    single = evaluate_terms(list(exponent.single), chi.astype(complex))
    delta = (single[1] - single[0]
             + exponent.log_tan * (rho_w[-1] - rho_w[0])
             - exponent.log_sin * (ln_cosh[-1] - ln_cosh[0]))
    return complex(np.exp(delta))
