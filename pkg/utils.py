import hashlib
import io
import json
import logging
import os
import sys
from fractions import Fraction
from typing import Any, Callable, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from errors import ConfigError

logger = logging.getLogger(__name__)

def parse_grid_spec(spec: str, integer: bool = False) -> List[float]:
    """Parse a grid flag: a value, a comma list, or range:start:stop:count"""
    if spec is None or not str(spec).strip():
        raise ConfigError("Empty grid specification")
    spec = str(spec).strip()
    cast = int if integer else float
    try:
        if spec.startswith("range:"):
            parts = spec.split(":")
            if len(parts) != 4:
                raise ConfigError(f"Range must be range:start:stop:count, got {spec!r}")
            start, stop, count = float(parts[1]), float(parts[2]), int(parts[3])
            if count < 1:
                raise ConfigError(f"Empty grid: {spec!r}")
            values = np.linspace(start, stop, count).tolist()
            if integer:
                values = [int(round(v)) for v in values]
            return values
        return [cast(item) for item in spec.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigError(f"Invalid grid specification {spec!r}: {e}")

def double_factorial_ratio(n: int) -> Fraction:
    """Exact (2n-1)!!/(2n)!!"""
    if n < 0:
        raise ValueError("n must be non-negative")
    ratio = Fraction(1)
    for j in range(1, n + 1):
        ratio *= Fraction(2 * j - 1, 2 * j)
    return ratio


def config_digest(record: Mapping[str, Any]) -> str:
    """Stable sha256 digest of a parameter record"""
    canonical = json.dumps(record, sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()


def ensure_output_dir(path: Optional[str]):
    """Create the parent directory of an output path if needed"""
    if not path:
        return
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.exists(directory):
        os.makedirs(directory)

def format_number(value: Any) -> str:
    """Render a number for CSV output with full precision"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, complex):
        return f"{value.real!r}{value.imag:+.17g}j"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)

def render_csv(metadata: Mapping[str, Any], columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> str:
    """CSV text with '# key: value' metadata lines ahead of the header"""
    buffer = io.StringIO()
    for key in sorted(metadata):
        value = metadata[key]
        if not isinstance(value, str):
            value = json.dumps(value, sort_keys=True)
        buffer.write(f"# {key}: {value}\n")
    buffer.write(",".join(columns) + "\n")
    for row in rows:
        buffer.write(",".join(format_number(row.get(c)) for c in columns) + "\n")
    return buffer.getvalue()

def _json_default(value: Any) -> Any:
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, Fraction):
        return {"num": value.numerator, "den": value.denominator}
    raise TypeError(f"Not JSON serializable: {type(value).__name__}")

def render_json(metadata: Mapping[str, Any], results: Any) -> str:
    """Deterministic JSON document with metadata and results"""
    return json.dumps({"metadata": metadata, "results": results}, sort_keys=True, indent=2,
                      default=_json_default) + "\n"

def write_output(text: str, path: Optional[str]):
    """Write rendered output to a file, or stdout when no path is given"""
    if not path:
        sys.stdout.write(text)
        return
    ensure_output_dir(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info(f"Wrote {len(text)} bytes to {path}")

def log_derivative(func: Callable[[float], Any], x: float, h: float = 1e-5) -> Any:
    """Five-point central difference of log(func) at x"""
    f0 = func(x)
    d = (-func(x + 2 * h) + 8 * func(x + h) - 8 * func(x - h) + func(x - 2 * h)) / (12 * h)
    return d / f0
