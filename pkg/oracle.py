"""Numerical ground truth for the Kapitza spectrum.

Two independent solvers live here. The Fourier (Hill matrix) solver expands
psi in exp(i q phi) and diagonalizes the pentadiagonal Hamiltonian with a
symmetric banded eigensolver; the monodromy solver integrates two fundamental
solutions over one period and reads the characteristic exponent from the half
trace. Everything else (band edges, node counts, well matching, pair gaps)
is bookkeeping on top of these two.

Real sectors are solved in parity blocks because u(phi) is even. At A = 0 the
periodic sector additionally splits by the parity of the Fourier index, which
is what keeps the exponentially close pairs a_n, b_{n+1} apart.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp, trapezoid
from scipy.linalg import eig_banded
from scipy.special import mathieu_a, mathieu_b

from config import (BAND_EDGE_TOL, EIGEN_CONVERGENCE_TOL, EIGENFUNCTION_GRID_MIN,
                    FOURIER_CUTOFF_STEP, HIGH_PRECISION_DPS, MIN_FOURIER_CUTOFF,
                    NODE_AMPLITUDE_FLOOR, NODE_GRID_MAX, NODE_GRID_START, ODE_TOLERANCE,
                    ORACLE_LEVELS)
from errors import AmbiguousNode, IntegratorFailure, NoConvergence, ParameterDomain
from models import BandEdgePair, FourierMatrixSpec, PendulumParams, SpectralResult
from potential import eval_potential, normalize_well

logger = logging.getLogger(__name__)

_CHUNK = 4096  # grid points per evaluation batch

# k-parity blocks of the A = 0 periodic sector: (first mode, phi parity)
_MATHIEU_BLOCKS = {
    "even_k_even": (0, 1),
    "even_k_odd": (2, -1),
    "odd_k_even": (1, 1),
    "odd_k_odd": (1, -1),
}


@dataclass
class _Block:
    name: str
    parity: int  # +1 even, -1 odd, 0 no parity (general sector)
    modes: np.ndarray  # block basis modes q >= 0 (general sector: all modes)
    band: np.ndarray  # upper banded form (3, n)


def default_cutoff(p: PendulumParams) -> int:
    """K = max(ceil(3 sqrt(B)) + 20, 48)"""
    return max(int(math.ceil(3.0 * math.sqrt(p.B))) + 20, MIN_FOURIER_CUTOFF)


def _resolve_cutoff(spec: FourierMatrixSpec) -> int:
    K = spec.K if spec.K is not None else default_cutoff(spec.params)
    if K < 4:
        raise ParameterDomain(f"Fourier cutoff must be at least 4, got {K}")
    return K


def sector_modes(sector, K: int) -> np.ndarray:
    """All exponents q of exp(i q phi) kept at cutoff K"""
    if sector == "periodic":
        return np.arange(-K, K + 1, dtype=float)
    if sector == "antiperiodic":
        return np.arange(-K - 1, K + 1, dtype=float) + 0.5
    return np.arange(-K, K + 1, dtype=float) + float(sector)


def matrix_element(p: PendulumParams, q, qp):
    """<q|H|q'> for H = -d^2/dphi^2 + B/2 - A cos(phi) - (B/2) cos(2 phi)"""
    q = np.asarray(q, dtype=float)
    qp = np.asarray(qp, dtype=float)
    d = np.abs(q - qp)
    return (np.where(d == 0, q ** 2 + p.B / 2.0, 0.0)
            + np.where(d == 1, -p.A / 2.0, 0.0)
            + np.where(d == 2, -p.B / 4.0, 0.0))


def _to_band(H: np.ndarray) -> np.ndarray:
    n = H.shape[0]
    band = np.zeros((3, n))
    band[2] = np.diag(H)
    if n > 1:
        band[1, 1:] = np.diag(H, 1)
    if n > 2:
        band[0, 2:] = np.diag(H, 2)
    return band


def fourier_matrix_dense(spec: FourierMatrixSpec) -> np.ndarray:
    """Dense Hill matrix over sector_modes (for inspection and tests)"""
    K = _resolve_cutoff(spec)
    q = sector_modes(spec.sector, K)
    return matrix_element(spec.params, q[:, None], q[None, :])


def build_fourier_matrix(spec: FourierMatrixSpec) -> np.ndarray:
    """Upper banded (3 x N) form of the pentadiagonal Hill matrix"""
    return _to_band(fourier_matrix_dense(spec))


def _parity_block(p: PendulumParams, modes: np.ndarray, parity: int, name: str) -> _Block:
    Q = modes[:, None]
    Qp = modes[None, :]
    H = matrix_element(p, Q, Qp) + parity * matrix_element(p, Q, -Qp)
    if modes[0] == 0.0:
        # |0> is its own mirror image
        H[0, 1:] /= math.sqrt(2.0)
        H[1:, 0] /= math.sqrt(2.0)
        H[0, 0] /= 2.0
    return _Block(name=name, parity=parity, modes=modes, band=_to_band(H))


def _sector_blocks(p: PendulumParams, sector, K: int) -> List[_Block]:
    if sector == "periodic" and p.A == 0.0:
        blocks = []
        for name, (first, parity) in _MATHIEU_BLOCKS.items():
            modes = np.arange(first, K + 1, 2, dtype=float)
            blocks.append(_parity_block(p, modes, parity, name))
        return blocks
    if sector == "periodic":
        return [_parity_block(p, np.arange(0, K + 1, dtype=float), 1, "even"),
                _parity_block(p, np.arange(1, K + 1, dtype=float), -1, "odd")]
    if sector == "antiperiodic":
        modes = np.arange(0, K + 1, dtype=float) + 0.5
        return [_parity_block(p, modes, 1, "even"), _parity_block(p, modes, -1, "odd")]

    modes = sector_modes(sector, K)
    H = matrix_element(p, modes[:, None], modes[None, :])
    return [_Block(name="full", parity=0, modes=modes, band=_to_band(H))]


def _solve_block(block: _Block, count: int, vectors: bool = True):
    count = min(count, block.band.shape[1])
    if count <= 0:
        return np.zeros(0), np.zeros((block.band.shape[1], 0))
    if vectors:
        return eig_banded(block.band, lower=False, select='i', select_range=(0, count - 1))
    return eig_banded(block.band, lower=False, eigvals_only=True, select='i',
                      select_range=(0, count - 1)), None


def _expand_vector(block: _Block, x: np.ndarray, full_modes: np.ndarray) -> np.ndarray:
    """Block eigenvector -> coefficients over full_modes (exponential basis)"""
    index = {int(round(2 * q)): i for i, q in enumerate(full_modes)}
    c = np.zeros(len(full_modes), dtype=complex)
    if block.parity == 0:
        for q, value in zip(block.modes, x):
            c[index[int(round(2 * q))]] = value
        return c

    root2 = math.sqrt(2.0)
    for q, value in zip(block.modes, x):
        plus = index[int(round(2 * q))]
        if q == 0.0:
            c[plus] = value
            continue
        minus = index[int(round(-2 * q))]
        if block.parity > 0:
            c[plus] = value / root2
            c[minus] = value / root2
        else:
            c[plus] = -1j * value / root2
            c[minus] = 1j * value / root2
    return c


def _mathieu_label(block_name: str, j: int) -> str:
    return {
        "even_k_even": f"a{2 * j}",
        "even_k_odd": f"b{2 * j + 2}",
        "odd_k_even": f"b{2 * j + 1}",
        "odd_k_odd": f"a{2 * j + 1}",
    }[block_name]


def _counting_label(sector, n: int) -> str:
    if sector == "periodic":
        if n == 0:
            return "a0"
        return f"b{(n + 1) // 2}" if n % 2 else f"a{n // 2}"
    if sector == "antiperiodic":
        return f"ap{n}"
    return f"nu{n}"


def eigenvalues(spec: FourierMatrixSpec, levels: Optional[int] = None,
                strict: bool = False) -> SpectralResult:
    """Lowest eigenpairs of one sector with a K -> K+8 convergence estimate"""
    p = spec.params
    K = _resolve_cutoff(spec)
    levels = levels or ORACLE_LEVELS
    full_modes = sector_modes(spec.sector, K)

    blocks = _sector_blocks(p, spec.sector, K)
    refined = _sector_blocks(p, spec.sector, K + FOURIER_CUTOFF_STEP)

    states = []
    for block, finer in zip(blocks, refined):
        w, v = _solve_block(block, levels)
        w_fine, _ = _solve_block(finer, len(w), vectors=False)
        for j, energy in enumerate(w):
            states.append({
                "energy": float(energy),
                "delta": abs(float(energy) - float(w_fine[j])),
                "vector": _expand_vector(block, v[:, j], full_modes),
                "parity": block.parity,
                "block": block.name,
                "block_index": j,
            })

    states.sort(key=lambda s: s["energy"])
    states = states[:levels]

    labels = []
    for n, state in enumerate(states):
        if state["block"] in _MATHIEU_BLOCKS:
            labels.append(_mathieu_label(state["block"], state["block_index"]))
        else:
            labels.append(_counting_label(spec.sector, n))

    convergence = tuple(s["delta"] for s in states)
    converged = tuple(d < EIGEN_CONVERGENCE_TOL for d in convergence)
    if not all(converged):
        worst = max(convergence)
        message = (f"Eigenvalues not converged for A={p.A}, B={p.B}, sector={spec.sector}, "
                   f"K={K}: max change {worst:.3e}")
        if strict:
            raise NoConvergence(message)
        logger.warning(message)

    return SpectralResult(
        params=p,
        sector=spec.sector,
        nu=spec.nu,
        K=K,
        energies=tuple(s["energy"] for s in states),
        modes=full_modes,
        coefficients=np.array([s["vector"] for s in states]),
        convergence=convergence,
        converged=converged,
        parities=tuple(s["parity"] for s in states),
        blocks=tuple(s["block"] for s in states),
        labels=tuple(labels),
    )


def _label_lookup(result: SpectralResult) -> Dict[str, float]:
    return {label: energy for label, energy in zip(result.labels, result.energies)}


def band_edges(p: PendulumParams, n_max: int, K: Optional[int] = None,
               strict: bool = False) -> List[BandEdgePair]:
    """Periodic band edges (a_n, b_n) for n = 0..n_max; b_0 does not exist"""
    if n_max < 0:
        raise ParameterDomain(f"n_max must be non-negative, got {n_max}")
    levels = 2 * n_max + 1
    if p.A == 0.0:
        # each k-parity block holds roughly a quarter of the labels
        levels = 2 * n_max + 8
    result = eigenvalues(FourierMatrixSpec(p, "periodic", K), levels=levels, strict=strict)
    found = _label_lookup(result)

    edges = []
    for n in range(n_max + 1):
        a = found[f"a{n}"]
        b = found[f"b{n}"] if n > 0 else None
        edges.append(BandEdgePair(n=n, a=a, b=b))
    return edges


def antiperiodic_edges(p: PendulumParams, n_max: int, K: Optional[int] = None,
                       strict: bool = False) -> List[BandEdgePair]:
    """Half-integer exponent edges: pair n bounds the gap at nu = n + 1/2"""
    if n_max < 0:
        raise ParameterDomain(f"n_max must be non-negative, got {n_max}")
    result = eigenvalues(FourierMatrixSpec(p, "antiperiodic", K), levels=2 * n_max + 2, strict=strict)
    energies = result.energies
    return [BandEdgePair(n=n, a=energies[2 * n], b=energies[2 * n + 1]) for n in range(n_max + 1)]


def mathieu_check(n: int, h: float, K: Optional[int] = None) -> Dict[str, Optional[float]]:
    """Oracle Mathieu values (E - B/2 at A = 0, B = 4h) next to scipy's"""
    p = PendulumParams(A=0.0, B=4.0 * h)
    edge = band_edges(p, n, K=K)[n]
    return {
        "n": n,
        "h": h,
        "oracle_a": edge.a - p.B / 2.0,
        "oracle_b": None if edge.b is None else edge.b - p.B / 2.0,
        "scipy_a": float(mathieu_a(n, h)),
        "scipy_b": None if n == 0 else float(mathieu_b(n, h)),
    }


# Eigenfunctions

def _evaluate_series(modes: np.ndarray, coefficients: np.ndarray, phi: np.ndarray,
                     derivative: bool = False) -> np.ndarray:
    flat = np.asarray(phi, dtype=float).ravel()
    weights = coefficients * (1j * modes) if derivative else coefficients
    parts = []
    for start in range(0, flat.size, _CHUNK):
        chunk = flat[start:start + _CHUNK]
        parts.append(np.exp(1j * np.outer(chunk, modes)) @ weights)
    values = np.concatenate(parts) if parts else np.zeros(0, dtype=complex)
    return values.reshape(np.shape(phi))


def _is_real_sector(result: SpectralResult) -> bool:
    return result.sector in ("periodic", "antiperiodic")


def _normalization(result: SpectralResult, index: int) -> complex:
    """Scale that makes the trapezoidal norm one and the largest sample positive"""
    n = max(EIGENFUNCTION_GRID_MIN, 4 * len(result.modes) + 8)
    phi = np.linspace(0.0, 2.0 * math.pi, n + 1)
    values = _evaluate_series(result.modes, result.coefficients[index], phi)
    norm = trapezoid(np.abs(values) ** 2, phi)
    peak = values[np.argmax(np.abs(values))]
    if _is_real_sector(result):
        sign = 1.0 if peak.real >= 0 else -1.0
        return sign / math.sqrt(norm)
    return (abs(peak) / peak) / math.sqrt(norm)


def eigenfunction_grid(result: SpectralResult, index: int, grid) -> np.ndarray:
    """Normalized psi_index sampled on grid (real for periodic/antiperiodic sectors)"""
    if not 0 <= index < len(result):
        raise IndexError(f"State {index} not in result with {len(result)} states")
    scale = _normalization(result, index)
    values = scale * _evaluate_series(result.modes, result.coefficients[index], np.asarray(grid))
    return values.real if _is_real_sector(result) else values


def state_function(result: SpectralResult, index: int) -> Callable[[np.ndarray], np.ndarray]:
    """Callable phi -> normalized psi_index, for node counting on refined grids"""
    scale = _normalization(result, index)
    coefficients = result.coefficients[index]

    def evaluate(phi):
        values = scale * _evaluate_series(result.modes, coefficients, np.asarray(phi))
        return values.real if _is_real_sector(result) else values

    return evaluate


def oracle_log_derivative(result: SpectralResult, index: int, phi) -> np.ndarray:
    """psi'/psi from the Fourier series, differentiated term by term"""
    coefficients = result.coefficients[index]
    value = _evaluate_series(result.modes, coefficients, np.asarray(phi))
    slope = _evaluate_series(result.modes, coefficients, np.asarray(phi), derivative=True)
    ratio = slope / value
    return ratio.real if _is_real_sector(result) else ratio


def well_weight(result: SpectralResult, index: int) -> float:
    """Probability of state index in |phi| < pi/2"""
    q = result.modes
    c = result.coefficients[index]
    d = q[:, None] - q[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        W = np.where(d == 0, math.pi, 2.0 * np.sin(d * math.pi / 2.0) / np.where(d == 0, 1.0, d))
    inside = np.real(np.conj(c) @ W @ c)
    return float(inside / (2.0 * math.pi * np.sum(np.abs(c) ** 2)))


def _sign_changes(values: np.ndarray) -> int:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0
    floor = NODE_AMPLITUDE_FLOOR * np.max(np.abs(values))
    kept = values[np.abs(values) > floor]
    if kept.size < 2:
        return 0
    return int(np.count_nonzero(np.signbit(kept[1:]) != np.signbit(kept[:-1])))


def count_nodes(samples, region: Tuple[float, float], grid: Optional[Sequence[float]] = None) -> int:
    """Sign changes of psi on region, ignoring samples below the amplitude floor.

    ``samples`` is either a callable, refined by grid doubling until the count
    is stable, or an array of values taken on ``grid``.
    """
    a, b = region
    if callable(samples):
        n = NODE_GRID_START
        previous = _sign_changes(samples(np.linspace(a, b, n)))
        while n < NODE_GRID_MAX:
            n *= 2
            current = _sign_changes(samples(np.linspace(a, b, n)))
            if current == previous:
                return current
            previous = current
        raise AmbiguousNode(f"Node count on {region} did not settle by {NODE_GRID_MAX} points")

    if grid is None:
        raise ValueError("A grid is required when samples are given as values")
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(samples, dtype=float)
    inside = (grid >= a) & (grid <= b)
    return _sign_changes(values[inside])


def match_well_state(p: PendulumParams, mu: int, well="0",
                     K: Optional[int] = None) -> Tuple[float, int, SpectralResult]:
    """Periodic oracle state playing the role of |mu> in the given well.

    At A = 0 this is a_mu, fixed by block bookkeeping. Otherwise it is the mu-th
    state (ascending energy) whose probability sits mostly in that well.
    """
    well = normalize_well(well)
    if mu < 0:
        raise ParameterDomain(f"mu must be a natural number, got {mu}")

    if p.A == 0.0:
        result = eigenvalues(FourierMatrixSpec(p, "periodic", K), levels=2 * mu + 8)
        index = result.labels.index(f"a{mu}")
        return result.energies[index], index, result

    levels = 2 * mu + 6
    while True:
        result = eigenvalues(FourierMatrixSpec(p, "periodic", K), levels=levels)
        found = 0
        for index in range(len(result)):
            weight = well_weight(result, index)
            in_well = weight > 0.5 if well == "0" else weight < 0.5
            if in_well:
                if found == mu:
                    return result.energies[index], index, result
                found += 1
        if len(result) < levels:
            raise ParameterDomain(f"No state {mu} localized in well {well} for A={p.A}, B={p.B}")
        levels *= 2


# High precision pair gaps

def _mp_block(ctx, B, name: str, size: int):
    first, parity = _MATHIEU_BLOCKS[name]
    quarter = B / 4
    modes = [first + 2 * i for i in range(size)]
    diag = [ctx.mpf(q) ** 2 + B / 2 for q in modes]
    if first == 1:
        # <1|H|-1> folds into the diagonal
        diag[0] += parity * (-quarter)
    off2 = [quarter ** 2] * (size - 1)
    if first == 0 and size > 1:
        off2[0] = 2 * quarter ** 2
    return diag, off2


def _sturm_count(ctx, diag, off2, x) -> int:
    """Eigenvalues below x of a symmetric tridiagonal matrix (LDL^T inertia)"""
    tiny = ctx.mpf(10) ** (-(ctx.dps + 10))
    count = 0
    d = diag[0] - x
    if d < 0:
        count += 1
    for i in range(1, len(diag)):
        if d == 0:
            d = tiny
        d = diag[i] - x - off2[i - 1] / d
        if d < 0:
            count += 1
    return count


def _mp_eigenvalue(ctx, diag, off2, j: int):
    radius = 2 * ctx.sqrt(max(off2)) if off2 else ctx.mpf(0)
    lo = min(diag) - radius - 1
    hi = max(diag) + radius + 1
    tol = ctx.mpf(10) ** (-(ctx.dps - 8)) * max(1, abs(hi))
    for _ in range(20 * ctx.dps):
        if hi - lo <= tol:
            break
        mid = (lo + hi) / 2
        if _sturm_count(ctx, diag, off2, mid) > j:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def pair_gap(p: PendulumParams, mu: int, K: Optional[int] = None) -> float:
    """b_{mu+1} - a_mu; at A = 0 by Sturm bisection in extended precision"""
    if mu < 0:
        raise ParameterDomain(f"mu must be a natural number, got {mu}")
    if p.A != 0.0:
        edges = band_edges(p, mu + 1, K=K)
        return edges[mu + 1].b - edges[mu].a

    K = K if K is not None else default_cutoff(p)
    size = K // 2 + 1
    j = mu // 2
    if mu % 2 == 0:
        a_block, b_block = "even_k_even", "odd_k_even"
    else:
        a_block, b_block = "odd_k_odd", "even_k_odd"

    # private context: the global mp.dps is shared between sweep threads
    ctx = mp.MPContext()
    ctx.dps = max(HIGH_PRECISION_DPS, int(2.0 * math.sqrt(p.B) / math.log(10.0)) + 30)
    B = ctx.mpf(p.B)
    a = _mp_eigenvalue(ctx, *_mp_block(ctx, B, a_block, size), j)
    b = _mp_eigenvalue(ctx, *_mp_block(ctx, B, b_block, size), j)
    gap = b - a
    logger.debug(f"pair_gap mu={mu} B={p.B}: {ctx.nstr(gap, 20)} at {ctx.dps} digits")
    return float(gap)


# Monodromy

def monodromy_half_trace(p: PendulumParams, energy: float) -> float:
    """(y1(2pi) + y2'(2pi))/2 for psi'' = (u - E) psi"""
    def rhs(phi, y):
        factor = float(eval_potential(p, phi)) - energy
        return [y[1], factor * y[0], y[3], factor * y[2]]

    solution = solve_ivp(rhs, (0.0, 2.0 * math.pi), [1.0, 0.0, 0.0, 1.0], method="DOP853",
                         rtol=ODE_TOLERANCE, atol=ODE_TOLERANCE)
    if not solution.success:
        raise IntegratorFailure(f"Monodromy integration failed at E={energy}: {solution.message}")
    y = solution.y[:, -1]
    return 0.5 * (y[0] + y[3])


def characteristic_exponent(p: PendulumParams, energy: float) -> Union[float, complex]:
    """nu with cos(2 pi nu) = half trace, on the branch nearest sqrt(E - B/2)"""
    t = monodromy_half_trace(p, energy)

    if abs(t - 1.0) < BAND_EDGE_TOL:
        base: Union[float, complex] = 0.0
    elif abs(t + 1.0) < BAND_EDGE_TOL:
        base = 0.5
    elif abs(t) <= 1.0:
        base = math.acos(t) / (2.0 * math.pi)
    else:
        base = complex(np.arccos(complex(t, 0.0))) / (2.0 * math.pi)

    target = math.sqrt(max(energy - p.B / 2.0, 0.0))
    candidates = []
    for n in range(int(math.floor(target)) - 1, int(math.ceil(target)) + 2):
        for value in (n + base, n - base):
            if value.real >= -1e-12:
                candidates.append(value)
    nu = min(candidates, key=lambda v: (abs(v.real - target), abs(v.imag) if isinstance(v, complex) else 0.0))

    if isinstance(nu, complex) and nu.imag == 0.0:
        return nu.real
    return nu
