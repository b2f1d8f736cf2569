import datetime
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from sqlalchemy import Column, DateTime, Float, Integer, String, Text
from sqlalchemy.orm import DeclarativeBase

from config import DEEP_WELL_EPSILON, DEFAULT_SAMPLES, DEFAULT_THREADS, TUNNELING_ACTION
from errors import NonPositiveInput, ParameterDomain
from polynomial import Poly

Sector = Union[str, float]


# Domain records

@dataclass(frozen=True)
class PendulumParams:
    """Dimensionless couplings of u(phi) = -A cos(phi) + B sin^2(phi)"""
    A: float
    B: float

    def __post_init__(self):
        if not (math.isfinite(self.A) and math.isfinite(self.B)):
            raise ParameterDomain(f"Couplings must be finite, got A={self.A}, B={self.B}")
        if self.B < 0:
            raise ParameterDomain(f"B must be non-negative, got {self.B}")

    @property
    def sqrt_b(self) -> float:
        return math.sqrt(self.B)

    def is_double_well(self) -> bool:
        return self.B > 0 and 2.0 * self.B > abs(self.A)

    def is_deep_well(self, mu: float, epsilon: float = DEEP_WELL_EPSILON) -> bool:
        return self.B > 0 and (mu + 0.5) <= epsilon * self.sqrt_b

    def mirrored(self) -> "PendulumParams":
        """Couplings seen from the saddle at pi (A -> -A)"""
        return PendulumParams(A=-self.A, B=self.B)


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional pendulum parameters in any consistent unit system"""
    mass: float
    length: float
    omega0: float
    omega: float
    z0: float
    hbar: float

    def __post_init__(self):
        for name in ("mass", "length", "omega0", "omega", "z0", "hbar"):
            value = getattr(self, name)
            if not value > 0:
                raise NonPositiveInput(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class WhittakerHillParams:
    """Coefficients of psi'' + (theta0 + theta1 cos 2x + theta2 cos 4x) psi = 0"""
    theta0: float
    theta1: float
    theta2: float


@dataclass(frozen=True)
class SaddleGeometry:
    stable_saddles: Tuple[float, float]
    summit_angles: Tuple[float, float]
    cos_summit: float
    summit_height: float
    depth_0: float
    depth_pi: float


@dataclass(frozen=True)
class FourierMatrixSpec:
    """Hill matrix request: couplings, Floquet sector and cutoff K"""
    params: PendulumParams
    sector: Sector = "periodic"
    K: Optional[int] = None

    @property
    def nu(self) -> float:
        if self.sector == "periodic":
            return 0.0
        if self.sector == "antiperiodic":
            return 0.5
        return float(self.sector)

    @property
    def is_real_sector(self) -> bool:
        return self.sector in ("periodic", "antiperiodic")


@dataclass(frozen=True)
class SpectralResult:
    """Oracle eigenpairs of one Floquet sector"""
    params: PendulumParams
    sector: Sector
    nu: float
    K: int
    energies: Tuple[float, ...]
    modes: np.ndarray  # exponents q of exp(i q phi)
    coefficients: np.ndarray  # row n holds the expansion of state n
    convergence: Tuple[float, ...]  # |E(K) - E(K+8)|
    converged: Tuple[bool, ...]
    parities: Tuple[int, ...]  # +1 even, -1 odd, 0 undefined
    blocks: Tuple[str, ...]
    labels: Tuple[str, ...]

    def __len__(self) -> int:
        return len(self.energies)


@dataclass(frozen=True)
class BandEdgePair:
    n: int
    a: float
    b: Optional[float]


@dataclass(frozen=True)
class MathieuPair:
    n: int
    a: float
    b: Optional[float]


@dataclass(frozen=True)
class SeriesValue:
    """Truncated series value with its first-omitted-term estimate"""
    value: float
    error_estimate: float
    terms: Tuple[float, ...] = ()
    advisory: Optional[str] = None


@dataclass(frozen=True)
class HalfPowerSeries:
    """Truncated series sum_k c_k x^(anchor - k) with exact polynomial coefficients.

    ``parameter`` names the expansion variable x (``sqrtB``, ``nu`` ...), and
    every coefficient is a Poly over ``variables``.
    """
    anchor: int
    coefficients: Tuple[Poly, ...]
    parameter: str = "sqrtB"

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def exact_coefficients(self, **values: Any) -> List[Any]:
        return [c.evaluate(**values) for c in self.coefficients]

    def term_values(self, x: float, **values: Any) -> List[float]:
        terms = []
        for k, c in enumerate(self.coefficients):
            terms.append(float(c.evaluate(**values)) * x ** (self.anchor - k))
        return terms

    def evaluate(self, x: float, **values: Any) -> float:
        return math.fsum(self.term_values(x, **values))

    def truncated(self, order: int) -> "HalfPowerSeries":
        return HalfPowerSeries(self.anchor, self.coefficients[:order + 1], self.parameter)


@dataclass(frozen=True)
class MuResult:
    """Quantum number from the contour integral, with per-order contributions"""
    value: float
    sector: str
    exponent_series: Dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class TwoLevelResult:
    E0: float
    Epi: float
    gamma: float
    E_plus: float
    E_minus: float
    Delta: float
    theta: float
    S_plus: Optional[float] = None
    S_minus: Optional[float] = None
    action: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "E0": self.E0, "Epi": self.Epi, "gamma": self.gamma,
            "E_plus": self.E_plus, "E_minus": self.E_minus,
            "Delta": self.Delta, "theta": self.theta,
            "S_plus": self.S_plus, "S_minus": self.S_minus,
            "action": self.action,
        }


# Run configuration

COMMANDS = ("chart", "compare", "wavefunction", "tunneling", "mathieu", "integrands")


class RunConfig(BaseModel):
    """Validated command-line run description, echoed into every output"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    command: str
    A: List[float] = Field(default_factory=lambda: [0.0])
    B: List[float] = Field(default_factory=lambda: [100.0])
    mu: List[int] = Field(default_factory=lambda: [0])
    order: int = Field(2, ge=0)
    sector: str = "periodic"
    n_max: int = Field(4, ge=0)
    format: str = "csv"
    out: Optional[str] = None
    strict: bool = False
    seed: int = 0
    samples: int = Field(DEFAULT_SAMPLES, ge=3)
    threads: int = Field(DEFAULT_THREADS, ge=1)
    action: str = TUNNELING_ACTION
    cache: Optional[str] = None

    @field_validator("command")
    @classmethod
    def check_command(cls, value: str) -> str:
        if value not in COMMANDS:
            raise ValueError(f"Unknown command {value!r}")
        return value

    @field_validator("A", "B", "mu")
    @classmethod
    def check_grid(cls, value: List[Any]) -> List[Any]:
        if not value:
            raise ValueError("Parameter grid is empty")
        return value

    @field_validator("B")
    @classmethod
    def check_b(cls, value: List[float]) -> List[float]:
        if any(b < 0 for b in value):
            raise ValueError("B must be non-negative")
        return value

    @field_validator("mu")
    @classmethod
    def check_mu(cls, value: List[int]) -> List[int]:
        if any(m < 0 for m in value):
            raise ValueError("mu must be a natural number")
        return value

    @field_validator("sector")
    @classmethod
    def check_sector(cls, value: str) -> str:
        if value in ("periodic", "antiperiodic"):
            return value
        try:
            float(value)
        except ValueError:
            raise ValueError(f"Sector must be periodic, antiperiodic or a number, got {value!r}")
        return value

    @field_validator("format")
    @classmethod
    def check_format(cls, value: str) -> str:
        if value not in ("csv", "json"):
            raise ValueError(f"Unsupported format {value!r}")
        return value

    @field_validator("action")
    @classmethod
    def check_action(cls, value: str) -> str:
        if value not in ("leading", "per_well", "semiclassical"):
            raise ValueError(f"Unknown tunneling action {value!r}")
        return value

    @model_validator(mode="after")
    def check_order(self) -> "RunConfig":
        if self.command == "integrands" and self.order > 12:
            raise ValueError("Integrand tables are limited to order 12")
        return self

    def echo(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True)


# Persistence

class Base(DeclarativeBase):
    pass


class SpectrumCache(Base):
    __tablename__ = 'spectrum_cache'

    id = Column(Integer, primary_key=True)
    params_hash = Column(String(64), unique=True, nullable=False)
    kind = Column(String(32), nullable=False)  # band_edges, pair_gap
    A = Column(Float, nullable=False)
    B = Column(Float, nullable=False)
    payload = Column(Text, nullable=False)  # JSON
    hits = Column(Integer, default=0)
    created_at = Column(DateTime, default=datetime.datetime.now)
    last_accessed = Column(DateTime, default=datetime.datetime.now)
