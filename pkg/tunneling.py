"""Two-level model of tunneling between the wells at 0 and pi.

The perturbative states |mu>_0 and |mu>_pi are coupled by gamma, the Furry
corrected WKB amplitude. How the two barriers of the circle enter gamma
depends on the action variant, see tunneling_coupling.
"""
import logging
import math
from typing import Optional, Tuple

from scipy.integrate import quad
from scipy.optimize import brentq

from config import TUNNELING_ACTION, TUNNELING_ACTIONS, TURNING_POINT_XTOL, WKB_EPSABS
from errors import EnergyOutOfRange, ParameterDomain
from models import PendulumParams, TwoLevelResult
from potential import eval_potential, saddle_summit_geometry
from series import oscillatory_energy_0, oscillatory_energy_pi

logger = logging.getLogger(__name__)

# integrand sqrt(KINETIC_SCALE * (u - E)); scale 2 matches the truncated series actions
KINETIC_SCALE = 2.0


def barrier_ends(p: PendulumParams, energy: float) -> Tuple[float, float]:
    """Edges of the forbidden interval in (0, pi) that contains the summit"""
    geometry = saddle_summit_geometry(p)
    if energy >= geometry.summit_height:
        raise EnergyOutOfRange(f"Energy {energy} is not below the summit {geometry.summit_height}")
    phi_s = geometry.summit_angles[0]

    def f(phi: float) -> float:
        return float(eval_potential(p, phi)) - energy

    left = 0.0 if f(0.0) >= 0.0 else brentq(f, 0.0, phi_s, xtol=TURNING_POINT_XTOL)
    right = math.pi if f(math.pi) >= 0.0 else brentq(f, phi_s, math.pi, xtol=TURNING_POINT_XTOL)
    return left, right


def wkb_action_numeric(p: PendulumParams, energy: float, scale: float = KINETIC_SCALE) -> float:
    """S = integral of sqrt(scale (u - E)) across the barrier.

    phi = a + (b - a)(1 - cos t)/2 flattens the square-root zeros at the turning
    points. scale = 2 gives the sqrt(2)-scaled normalization, scale = 1 the one of
    the dimensionless wave equation.
    """
    if scale <= 0:
        raise ParameterDomain(f"Kinetic scale must be positive, got {scale}")
    a, b = barrier_ends(p, energy)
    half = (b - a) / 2.0

    def integrand(t: float) -> float:
        phi = a + half * (1.0 - math.cos(t))
        excess = max(float(eval_potential(p, phi)) - energy, 0.0)
        return math.sqrt(scale * excess) * half * math.sin(t)

    value, error = quad(integrand, 0.0, math.pi, epsabs=WKB_EPSABS, epsrel=1e-12, limit=200)
    logger.debug(f"WKB action {value} (+/- {error}) on [{a}, {b}] for E={energy}")
    return value


def wkb_action_series(p: PendulumParams, mu: int) -> Tuple[float, float]:
    """Truncated (S_+, S_-) series; S_- = S_+ - 3A/(2 sqrt(2) B^(1/2))"""
    if mu < 0:
        raise ParameterDomain(f"mu must be a natural number, got {mu}")
    if p.B <= 0:
        raise ParameterDomain("Tunneling actions need B > 0")
    if not p.is_deep_well(mu):
        logger.warning(f"Action series outside the deep-well regime: A={p.A}, B={p.B}, mu={mu}")

    mt = mu + 0.5
    root2 = math.sqrt(2.0)
    s_plus = 2.0 * root2 * p.sqrt_b - (9.0 * mt - 2.0 * mt * math.log(mt ** 2 / (4.0 * p.B))) / (2.0 * root2)
    s_minus = s_plus - 3.0 * p.A / (2.0 * root2 * p.sqrt_b)
    return s_plus, s_minus


def furry_factor(mu: int) -> float:
    """g_mu = sqrt(2 pi) mu~^mu~ exp(-mu~) / mu!"""
    if mu < 0:
        raise ParameterDomain(f"mu must be a natural number, got {mu}")
    mt = mu + 0.5
    return math.exp(0.5 * math.log(2.0 * math.pi) + mt * math.log(mt) - mt - math.lgamma(mu + 1))


def frequency_product(p: PendulumParams) -> float:
    """sqrt(Omega_0 Omega_pi) = 2 B^(1/2) (1 - A^2/4B^2)^(1/4)"""
    if p.B <= 0 or abs(p.A) >= 2.0 * p.B:
        raise ParameterDomain(f"Frequency product needs |A| < 2B, got A={p.A}, B={p.B}")
    return 2.0 * p.sqrt_b * (1.0 - p.A ** 2 / (4.0 * p.B ** 2)) ** 0.25


def tunneling_action(p: PendulumParams, mu: int, action: str = TUNNELING_ACTION,
                     order: int = 2) -> Tuple[float, Optional[float], Optional[float]]:
    """(S, S_+, S_-) for the selected action variant"""
    if action == "leading":
        return 2.0 * math.sqrt(2.0) * p.sqrt_b, None, None
    if action == "per_well":
        s_plus, s_minus = wkb_action_series(p, mu)
        return 0.5 * (s_plus + s_minus), s_plus, s_minus
    if action == "semiclassical":
        s_0 = wkb_action_numeric(p, oscillatory_energy_0(p, mu, order).value, scale=1.0)
        s_pi = wkb_action_numeric(p, oscillatory_energy_pi(p, mu, order).value, scale=1.0)
        return 0.5 * (s_0 + s_pi), s_0, s_pi
    raise ParameterDomain(f"Tunneling action must be one of {TUNNELING_ACTIONS}, got {action!r}")


def single_barrier_coupling(p: PendulumParams, mu: int, action_value: float) -> float:
    """g_mu sqrt(Omega_0 Omega_pi) exp(-S) / pi"""
    return furry_factor(mu) * frequency_product(p) * math.exp(-action_value) / math.pi


def tunneling_coupling(p: PendulumParams, mu: int, action: str = TUNNELING_ACTION, order: int = 2) -> float:
    """gamma between |mu>_0 and |mu>_pi.

    ``leading`` and ``per_well`` use 2 g_mu sqrt(Omega_0 Omega_pi) exp(-S)/pi
    with sqrt(2)-scaled actions.
    ``semiclassical`` takes S from quadrature of sqrt(u - E) and counts each
    barrier as half the splitting it would produce alone, so that 2 gamma is
    the splitting on the circle.
    """
    if mu < 0:
        raise ParameterDomain(f"mu must be a natural number, got {mu}")
    value, _, _ = tunneling_action(p, mu, action, order)
    single = single_barrier_coupling(p, mu, value)
    if action == "semiclassical":
        # two barriers, each coupling with half of its own splitting
        return single
    return 2.0 * single


def two_level_solve(E0: float, Epi: float, gamma: float) -> TwoLevelResult:
    """Diagonalize [[E0, gamma], [gamma, Epi]] with theta in [0, pi/4]"""
    if gamma < 0:
        raise ParameterDomain(f"gamma must be non-negative, got {gamma}")
    bias = Epi - E0
    delta = math.hypot(bias, 2.0 * gamma)
    theta = math.pi / 4.0 if bias == 0.0 else 0.5 * math.atan2(2.0 * gamma, abs(bias))
    mean = 0.5 * (E0 + Epi)
    return TwoLevelResult(E0=E0, Epi=Epi, gamma=gamma, E_plus=mean + 0.5 * delta,
                          E_minus=mean - 0.5 * delta, Delta=delta, theta=theta)


def splitting_report(p: PendulumParams, mu: int, action: str = TUNNELING_ACTION, order: int = 2) -> TwoLevelResult:
    """Series energies of both wells coupled by gamma"""
    if not p.is_deep_well(mu):
        logger.warning(f"Splitting report outside the deep-well regime: A={p.A}, B={p.B}, mu={mu}")
    E0 = oscillatory_energy_0(p, mu, order).value
    Epi = oscillatory_energy_pi(p, mu, order).value
    _, s_plus, s_minus = tunneling_action(p, mu, action, order)
    result = two_level_solve(E0, Epi, tunneling_coupling(p, mu, action, order))
    return TwoLevelResult(E0=result.E0, Epi=result.Epi, gamma=result.gamma, E_plus=result.E_plus,
                          E_minus=result.E_minus, Delta=result.Delta, theta=result.theta,
                          S_plus=s_plus, S_minus=s_minus, action=action)


def mixing_diagnostic(p: PendulumParams, mu: int, gamma: float) -> float:
    """Small-mixing estimate tan(2 theta) ~ (gamma/A)(1 + mu~/(2 B^(1/2)))"""
    if p.A == 0:
        raise ParameterDomain("The small-mixing estimate needs A != 0")
    return gamma / p.A * (1.0 + (mu + 0.5) / (2.0 * p.sqrt_b))
