import logging
import math
from typing import Tuple, Union

import numpy as np
from scipy.optimize import bisect

from config import DEEP_WELL_EPSILON, TURNING_POINT_XTOL
from errors import EnergyOutOfRange, NotDoubleWell, ParameterDomain
from models import PendulumParams, PhysicalParams, SaddleGeometry, WhittakerHillParams

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def eval_potential(p: PendulumParams, phi: ArrayLike) -> ArrayLike:
    """u(phi) = -A cos(phi) + B sin^2(phi)"""
    return -p.A * np.cos(phi) + p.B * np.sin(phi) ** 2


def mirror(p: PendulumParams) -> PendulumParams:
    """Parameters seen from the saddle at pi: u(phi + pi; A, B) = u(phi; -A, B)"""
    return p.mirrored()


def is_double_well(p: PendulumParams) -> bool:
    return p.is_double_well()


def is_deep_well(p: PendulumParams, mu: int, epsilon: float = DEEP_WELL_EPSILON) -> bool:
    return p.is_deep_well(mu, epsilon)


def normalize_well(well) -> str:
    """Accept 0, '0', pi, 'pi' and return '0' or 'pi'"""
    if well in (0, "0"):
        return "0"
    if well in ("pi", "π") or (isinstance(well, float) and math.isclose(well, math.pi)):
        return "pi"
    raise ParameterDomain(f"Well must be 0 or pi, got {well!r}")


def saddle_summit_geometry(p: PendulumParams) -> SaddleGeometry:
    """Stable saddles, summit angles, exact summit height and well depths"""
    if not p.is_double_well():
        raise NotDoubleWell(f"No barrier for A={p.A}, B={p.B} (need 2B > |A|)")

    cos_s = -p.A / (2.0 * p.B)
    phi_s = math.acos(cos_s)
    height = p.B + p.A ** 2 / (4.0 * p.B)

    return SaddleGeometry(
        stable_saddles=(0.0, math.pi),
        summit_angles=(phi_s, -phi_s),
        cos_summit=cos_s,
        summit_height=height,
        depth_0=(2.0 * p.B + p.A) ** 2 / (4.0 * p.B),
        depth_pi=(2.0 * p.B - p.A) ** 2 / (4.0 * p.B),
    )


def barrier_height(p: PendulumParams, well="0") -> float:
    """Summit height measured from the bottom of the given well"""
    geometry = saddle_summit_geometry(p)
    return geometry.depth_0 if normalize_well(well) == "0" else geometry.depth_pi


def well_frequencies(p: PendulumParams) -> Tuple[float, float]:
    """Small-oscillation frequencies (Omega_0, Omega_pi) of the two wells"""
    if not p.is_double_well():
        raise NotDoubleWell(f"No barrier for A={p.A}, B={p.B}")
    return 2.0 * math.sqrt(p.B + p.A / 2.0), 2.0 * math.sqrt(p.B - p.A / 2.0)


def turning_points(p: PendulumParams, energy: float, well="0") -> Tuple[float, float]:
    """Classical turning points around a well, by bisection on u(phi) - E"""
    well = normalize_well(well)
    geometry = saddle_summit_geometry(p)
    phi_s = geometry.summit_angles[0]
    bottom = eval_potential(p, 0.0 if well == "0" else math.pi)

    if not (bottom < energy < geometry.summit_height):
        raise EnergyOutOfRange(
            f"Energy {energy} outside ({bottom}, {geometry.summit_height}) for well {well}"
        )

    def f(phi: float) -> float:
        return float(eval_potential(p, phi)) - energy

    if well == "0":
        right = bisect(f, 0.0, phi_s, xtol=TURNING_POINT_XTOL)
        return -right, right

    left = bisect(f, phi_s, math.pi, xtol=TURNING_POINT_XTOL)
    return left, 2.0 * math.pi - left


def to_whittaker_hill(p: PendulumParams, energy: float) -> WhittakerHillParams:
    """Map to psi'' + (theta0 + theta1 cos 2x + theta2 cos 4x) psi = 0 with phi = 2x"""
    return WhittakerHillParams(theta0=4.0 * energy - 2.0 * p.B, theta1=4.0 * p.A, theta2=2.0 * p.B)


def from_whittaker_hill(w: WhittakerHillParams) -> Tuple[PendulumParams, float]:
    """Inverse of to_whittaker_hill"""
    params = PendulumParams(A=w.theta1 / 4.0, B=w.theta2 / 2.0)
    return params, (w.theta0 + w.theta2) / 4.0


def from_physical(q: PhysicalParams) -> Tuple[PendulumParams, float]:
    """Dimensionless couplings and the critical drive frequency"""
    A = 2.0 * q.mass ** 2 * q.omega0 ** 2 * q.length ** 4 / q.hbar ** 2
    B = q.mass ** 2 * q.omega ** 2 * q.z0 ** 2 * q.length ** 2 / (2.0 * q.hbar ** 2)
    omega_c = math.sqrt(2.0) * q.length * q.omega0 / q.z0
    return PendulumParams(A=A, B=B), omega_c
