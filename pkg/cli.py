import argparse
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import wraps
from itertools import product
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from cache import SpectrumStore, cached_band_edges, cached_pair_gap, spectrum_store
from config import (API_VERSION, BARRIER_ORDER, DEFAULT_FORMAT, DEFAULT_SAMPLES, DEFAULT_THREADS,
                    OUTPUT_FORMATS, TUNNELING_ACTION, TUNNELING_ACTIONS, WELL_SIPS_ORDER)
from contour import integrand_table
from errors import ConfigError, KapitzaError, NumericalError, RegionViolation, WeakSeriesSingular
from models import COMMANDS, FourierMatrixSpec, PendulumParams, RunConfig
from oracle import antiperiodic_edges, default_cutoff, eigenvalues, match_well_state, mathieu_check
from series import mathieu_reference, oscillatory_energy_0
from tunneling import splitting_report
from utils import parse_grid_spec, render_csv, render_json, write_output
from wavefn import (barrier_error_estimate, barrier_wavefunction, match_barrier_amplitude, matching_angle,
                    region_tag, well_error_estimate, well_wavefunction)

logger = logging.getLogger(__name__)

Rows = List[Dict[str, Any]]


def exit_on_error(f):
    """Decorator mapping library errors to process exit codes"""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ValidationError as e:
            logger.error(f"Invalid configuration: {e}")
            return ConfigError.exit_code
        except KapitzaError as e:
            logger.error(f"{type(e).__name__}: {e}")
            return e.exit_code
        except (ArithmeticError, np.linalg.LinAlgError) as e:
            logger.error(f"Numerical failure: {e}")
            return NumericalError.exit_code

    return decorated_function


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kapitza", description="Spectra of the quantum Kapitza pendulum")
    commands = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub = commands.add_parser(name)
        sub.add_argument("--A", default="0", help="value, comma list or range:start:stop:count")
        sub.add_argument("--B", default="100", help="value, comma list or range:start:stop:count")
        sub.add_argument("--mu", default="0")
        sub.add_argument("--order", type=int, default=2)
        sub.add_argument("--sector", default="periodic", help="periodic, antiperiodic or a Floquet exponent")
        sub.add_argument("--n-max", dest="n_max", type=int, default=4)
        sub.add_argument("--format", default=DEFAULT_FORMAT, choices=OUTPUT_FORMATS)
        sub.add_argument("--out", default=None)
        sub.add_argument("--strict", action="store_true")
        sub.add_argument("--seed", type=int, default=0)
        sub.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
        sub.add_argument("--threads", type=int, default=DEFAULT_THREADS)
        sub.add_argument("--action", default=TUNNELING_ACTION, choices=TUNNELING_ACTIONS)
        sub.add_argument("--cache", default=None, help="SQLAlchemy URL of the oracle result cache")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        A=parse_grid_spec(args.A),
        B=parse_grid_spec(args.B),
        mu=parse_grid_spec(args.mu, integer=True),
        order=args.order,
        sector=args.sector,
        n_max=args.n_max,
        format=args.format,
        out=args.out,
        strict=args.strict,
        seed=args.seed,
        samples=args.samples,
        threads=args.threads,
        action=args.action,
        cache=args.cache,
    )


def _parallel(config: RunConfig, fn: Callable[[Any], Rows], points: Sequence[Any]) -> Rows:
    """Evaluate grid points on a thread pool; rows come back in grid order"""
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        chunks = list(pool.map(fn, points))
    return [row for chunk in chunks for row in chunk]


def _params(A: float, B: float) -> PendulumParams:
    return PendulumParams(A=float(A), B=float(B))


def _store(config: RunConfig) -> SpectrumStore:
    return SpectrumStore(config.cache) if config.cache else spectrum_store


def _metadata(config: RunConfig, orders: Dict[str, Any], K: Sequence[int]) -> Dict[str, Any]:
    return {
        "config": config.echo(),
        "version": API_VERSION,
        "orders": orders,
        "K": sorted(set(K)),
    }


# Commands

def cmd_chart(config: RunConfig) -> Tuple[Dict[str, Any], List[str], Rows]:
    """Band edges, or E at a fixed Floquet exponent, over the (A, B) grid"""
    store = _store(config)
    points = list(product(config.A, config.B))

    def periodic(point) -> Rows:
        p = _params(*point)
        return [{"A": p.A, "B": p.B, "n": e.n, "a": e.a, "b": e.b}
                for e in cached_band_edges(p, config.n_max, store=store)]

    def antiperiodic(point) -> Rows:
        p = _params(*point)
        return [{"A": p.A, "B": p.B, "n": e.n, "a": e.a, "b": e.b}
                for e in antiperiodic_edges(p, config.n_max)]

    def floquet(point) -> Rows:
        p = _params(*point)
        result = eigenvalues(FourierMatrixSpec(p, float(config.sector)), levels=config.n_max + 1)
        return [{"A": p.A, "B": p.B, "nu": result.nu, "level": j, "E": energy,
                 "converged": result.converged[j]} for j, energy in enumerate(result.energies)]

    if config.sector == "periodic":
        rows, columns = _parallel(config, periodic, points), ["A", "B", "n", "a", "b"]
    elif config.sector == "antiperiodic":
        rows, columns = _parallel(config, antiperiodic, points), ["A", "B", "n", "a", "b"]
    else:
        rows, columns = _parallel(config, floquet, points), ["A", "B", "nu", "level", "E", "converged"]

    K = [default_cutoff(_params(A, B)) for A, B in points]
    return _metadata(config, {"n_max": config.n_max}, K), columns, rows


def cmd_compare(config: RunConfig) -> Tuple[Dict[str, Any], List[str], Rows]:
    """Oracle energy of |mu> in the well at 0 against the series at each order"""
    points = list(product(config.A, config.B, config.mu))

    def compare(point) -> Rows:
        A, B, mu = point
        p = _params(A, B)
        if config.strict and not p.is_deep_well(mu):
            raise RegionViolation(f"Shallow well at A={p.A}, B={p.B}, mu={mu}")
        oracle, _, _ = match_well_state(p, mu, "0")
        rows = []
        for order in range(config.order + 1):
            series = oscillatory_energy_0(p, mu, order)
            rows.append({"A": p.A, "B": p.B, "mu": mu, "order": order, "oracle": oracle,
                         "series": series.value, "error": abs(series.value - oracle),
                         "estimate": series.error_estimate, "advisory": series.advisory is not None})
        return rows

    rows = _parallel(config, compare, points)
    columns = ["A", "B", "mu", "order", "oracle", "series", "error", "estimate", "advisory"]
    K = [default_cutoff(_params(A, B)) for A, B, _ in points]
    return _metadata(config, {"series": config.order}, K), columns, rows


def cmd_wavefunction(config: RunConfig) -> Tuple[Dict[str, Any], List[str], Rows]:
    """Piecewise eigenfunction on (0, pi) with region tags, both forms in the overlap"""
    points = list(product(config.A, config.B, config.mu))
    phi = np.linspace(0.0, math.pi, config.samples)

    def dump(point) -> Rows:
        A, B, mu = point
        p = _params(A, B)
        wells = np.where(np.cos(phi) >= 0.0, "0", "pi")
        psi_well = np.full(phi.shape, np.nan)
        psi_barrier = np.full(phi.shape, np.nan)
        estimate = np.zeros(phi.shape)
        tags = np.empty(phi.shape, dtype=object)

        for well in ("0", "pi"):
            side = wells == well
            tags[side] = region_tag(p, mu, phi[side], well)
            inner = side & (tags != "barrier")
            outer = side & (tags != "well") & (np.sin(phi) > 0.0)
            if inner.any():
                psi_well[inner] = well_wavefunction(p, mu, phi[inner], "C", well, WELL_SIPS_ORDER)
                estimate[inner] = well_error_estimate(p, mu, phi[inner], "C", well, WELL_SIPS_ORDER)
            if outer.any():
                amplitude = match_barrier_amplitude(p, mu, well)
                psi_barrier[outer] = np.real(barrier_wavefunction(
                    p, mu, phi[outer], well, "+", BARRIER_ORDER, amplitude=amplitude, strict=config.strict))
                omitted = barrier_error_estimate(p, mu, phi[outer], well, "+", BARRIER_ORDER,
                                                 reference=matching_angle(p, mu, well))
                # overlap points keep the larger of the two estimates
                estimate[outer] = np.maximum(estimate[outer], np.abs(psi_barrier[outer]) * omitted)

        return [{"A": p.A, "B": p.B, "mu": mu, "phi": float(x), "well": w, "region": t,
                 "psi_well": None if math.isnan(a) else float(a),
                 "psi_barrier": None if math.isnan(b) else float(b), "estimate": float(e)}
                for x, w, t, a, b, e in zip(phi, wells, tags, psi_well, psi_barrier, estimate)]

    rows = _parallel(config, dump, points)
    columns = ["A", "B", "mu", "phi", "well", "region", "psi_well", "psi_barrier", "estimate"]
    orders = {"sips": WELL_SIPS_ORDER, "barrier": BARRIER_ORDER}
    return _metadata(config, orders, []), columns, rows


def cmd_tunneling(config: RunConfig) -> Tuple[Dict[str, Any], List[str], Rows]:
    """Two-level reports, with the oracle pair gap where A = 0"""
    store = _store(config)
    points = list(product(config.A, config.B, config.mu))

    def report(point) -> Rows:
        A, B, mu = point
        p = _params(A, B)
        if config.strict and not p.is_deep_well(mu):
            raise RegionViolation(f"Shallow well at A={p.A}, B={p.B}, mu={mu}")
        row = {"A": p.A, "B": p.B, "mu": mu}
        row.update(splitting_report(p, mu, config.action, config.order).to_dict())
        row["oracle_gap"] = cached_pair_gap(p, mu, store=store) if p.A == 0.0 else None
        row["gap_ratio"] = row["oracle_gap"] / row["Delta"] if row["oracle_gap"] is not None else None
        return [row]

    rows = _parallel(config, report, points)
    columns = ["A", "B", "mu", "E0", "Epi", "gamma", "E_plus", "E_minus", "Delta", "theta",
               "S_plus", "S_minus", "action", "oracle_gap", "gap_ratio"]
    K = [default_cutoff(_params(A, B)) for A, B, _ in points]
    return _metadata(config, {"series": config.order, "action": config.action}, K), columns, rows


def cmd_mathieu(config: RunConfig) -> Tuple[Dict[str, Any], List[str], Rows]:
    """A = 0 edges against scipy's Mathieu values and both series, with h = B/4"""
    points = list(product([b / 4.0 for b in config.B], range(config.n_max + 1)))

    def check(point) -> Rows:
        h, n = point
        row = dict(mathieu_check(n, h))
        strong = mathieu_reference(n, h, "strong", min(config.order, 3))
        row["strong_a"], row["strong_b"] = strong.a, strong.b
        try:
            row["weak"] = mathieu_reference(n, h, "weak").a
        except WeakSeriesSingular:
            row["weak"] = None
        return [row]

    rows = _parallel(config, check, points)
    columns = ["n", "h", "oracle_a", "oracle_b", "scipy_a", "scipy_b", "strong_a", "strong_b", "weak"]
    K = [default_cutoff(_params(0.0, b)) for b in config.B]
    return _metadata(config, {"strong": min(config.order, 3)}, K), columns, rows


def cmd_integrands(config: RunConfig) -> Tuple[Dict[str, Any], List[str], Any]:
    """Exact integrand tables v_{-1}..v_order"""
    return _metadata(config, {"integrands": config.order}, []), [], integrand_table(config.order)


HANDLERS = {
    "chart": cmd_chart,
    "compare": cmd_compare,
    "wavefunction": cmd_wavefunction,
    "tunneling": cmd_tunneling,
    "mathieu": cmd_mathieu,
    "integrands": cmd_integrands,
}


@exit_on_error
def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config = config_from_args(args)
    logger.info(f"Running {config.command} over {len(config.A)}x{len(config.B)}x{len(config.mu)} points")

    metadata, columns, results = HANDLERS[config.command](config)
    if config.format == "json" or config.command == "integrands":
        text = render_json(metadata, results)
    else:
        text = render_csv(metadata, columns, results)
    write_output(text, config.out)
    return 0
