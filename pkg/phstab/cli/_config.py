"""JSON run configuration: schema validation, loading and the objects built from it."""

from dataclasses import dataclass, field
from typing import Any, List, Optional
import json
import os

import jsonschema
import numpy as np

from .._settings import (
    CLOSURES,
    CONFIG_SCHEMA_FILE_NAME,
    DEFAULT_CELLS,
    DEFAULT_CFL,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_SAMPLE_GRID,
    DEFAULT_T_HORIZON,
    DEFAULT_TAU_GRID_COUNT,
    ENDPOINTS,
    TRACE_ORDERS,
)
from ..exprlang import ExpressionEvaluationError, ExpressionSyntaxError
from ..model import (
    CoefficientField,
    DeclaredBounds,
    FieldEvaluationError,
    PHSystem,
    SampleGrid,
    build_preset,
    build_system,
)

CONFIG_SCHEMA_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), CONFIG_SCHEMA_FILE_NAME)
BOUND_KEYS = ("m", "M", "M_T", "L_zeta", "K_max")
OUTPUT_FORMATS = ("json", "csv")


class ConfigError(ValueError):
    def __init__(self, location: str, reason: str):
        self.location = location
        super().__init__("%s: %s" % (location, reason))


@dataclass
class Config:
    data: dict
    path: Optional[str] = None
    warnings: List[str] = field(default_factory=list)

    def block(self, name: str) -> dict:
        return self.data.get(name) or {}


@dataclass
class SimSettings:
    t_end: float
    x0: List[Any]
    N: int = DEFAULT_CELLS
    cfl: float = DEFAULT_CFL
    record_stride: int = 1
    closure: str = CLOSURES[0]
    store_states: bool = False
    include_states: bool = False


@dataclass
class CertifySettings:
    tau_grid: Optional[List[float]] = None
    tau_count: int = DEFAULT_TAU_GRID_COUNT
    tau_bounds: Optional[tuple] = None
    endpoint: str = ENDPOINTS[0]
    kappa: Optional[float] = None
    cross_check: bool = False


@dataclass
class CounterexampleSettings:
    alpha: float = 0.5
    periods: int = 30
    cross_check: bool = False


def config_schema() -> dict:
    with open(CONFIG_SCHEMA_PATH, "r") as schema_file:
        return json.load(schema_file)


_VALIDATOR = jsonschema.Draft7Validator(config_schema())


def _location(path) -> str:
    location = "config"
    for i, part in enumerate(path):
        if isinstance(part, int):
            location += "[%d]" % part
        elif i == 0:
            location = part
        else:
            location += ".%s" % part
    return location


def _unknown_keys(error) -> List[str]:
    known = error.schema.get("properties", {})
    return sorted(key for key in error.instance if key not in known)


def parse_config(data: Any, strict: bool = False, path: str = None) -> Config:
    """Checks ``data`` against the shipped schema; unknown keys only warn unless ``strict``."""
    config = Config(data=data, path=path)
    errors = sorted(_VALIDATOR.iter_errors(data), key=lambda e: [str(p) for p in e.absolute_path])
    for error in errors:
        location = _location(error.absolute_path)
        if error.validator != "additionalProperties":
            raise ConfigError(location, error.message)
        for key in _unknown_keys(error):
            if strict:
                raise ConfigError("%s.%s" % (location, key), "unknown key")
            config.warnings.append("unknown key %s.%s ignored" % (location, key))
    return config


def load_config(config_path: str, strict: bool = False) -> Config:
    try:
        with open(config_path, "r") as config_file:
            text = config_file.read()
    except OSError as e:
        raise ConfigError(config_path, "cannot read config (%s)" % e) from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            config_path, "invalid JSON at line %d column %d: %s" % (e.lineno, e.colno, e.msg)
        ) from e
    return parse_config(data, strict, config_path)


def _number(value, location: str, positive: bool = False, minimum: float = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(location, "expected a number, got %r" % (value,))
    value = float(value)
    if not np.isfinite(value):
        raise ConfigError(location, "expected a finite number, got %s" % value)
    if positive and value <= 0:
        raise ConfigError(location, "must be positive, got %s" % value)
    if minimum is not None and value < minimum:
        raise ConfigError(location, "must be >= %s, got %s" % (minimum, value))
    return value


def _integer(value, location: str, minimum: int = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(location, "expected an integer, got %r" % (value,))
    if minimum is not None and value < minimum:
        raise ConfigError(location, "must be >= %d, got %d" % (minimum, value))
    return value


def _matrix(block: dict, key: str, shape) -> np.ndarray:
    location = "system.%s" % key
    if key not in block:
        raise ConfigError(location, "missing")
    try:
        matrix = np.array(block[key], dtype=float)
        imag_key = "%s_imag" % key
        if imag_key in block:
            matrix = matrix + 1j * np.array(block[imag_key], dtype=float)
    except (TypeError, ValueError) as e:
        raise ConfigError(location, "expected a row-major array of numbers (%s)" % e) from e
    if matrix.shape != shape:
        raise ConfigError(location, "expected shape %s, got %s" % (shape, matrix.shape))
    return matrix


def _field(block: dict, key: str, n: int) -> Optional[CoefficientField]:
    if key not in block:
        return None
    location = "system.%s" % key
    rows = block[key]
    imag_rows = block.get("%s_imag" % key)
    for grid, where in ((rows, location), (imag_rows, location + "_imag")):
        if grid is None:
            continue
        if not isinstance(grid, list) or len(grid) != n or any(
            not isinstance(row, list) or len(row) != n for row in grid
        ):
            raise ConfigError(where, "expected a %dx%d grid of expressions" % (n, n))
    try:
        return CoefficientField.from_sources(rows, imag_rows)
    except ExpressionSyntaxError as e:
        raise ConfigError(location, str(e)) from e
    except (TypeError, ValueError) as e:
        raise ConfigError(location, str(e)) from e


def _declared_bounds(block: dict) -> DeclaredBounds:
    bounds = block.get("bounds") or {}
    values = {
        name: _number(bounds[name], "system.bounds.%s" % name, minimum=0.0)
        for name in BOUND_KEYS
        if bounds.get(name) is not None
    }
    try:
        return DeclaredBounds(**values)
    except ValueError as e:
        raise ConfigError("system.bounds", str(e)) from e


def _interval(block: dict):
    interval = block.get("interval", [0.0, 1.0])
    if not isinstance(interval, list) or len(interval) != 2:
        raise ConfigError("system.interval", "expected [a, b]")
    a = _number(interval[0], "system.interval[0]")
    b = _number(interval[1], "system.interval[1]")
    if not a < b:
        raise ConfigError("system.interval", "a < b required, got [%s, %s]" % (a, b))
    return a, b


def sample_grid_from_config(config: Config) -> SampleGrid:
    block = config.block("validation")
    try:
        return SampleGrid(
            _integer(block.get("t_count", DEFAULT_SAMPLE_GRID[0]), "validation.t_count", 2),
            _integer(block.get("zeta_count", DEFAULT_SAMPLE_GRID[1]), "validation.zeta_count", 2),
            _number(block.get("t_horizon", DEFAULT_T_HORIZON), "validation.t_horizon", positive=True),
        )
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError("validation", str(e)) from e


def system_from_config(config: Config) -> PHSystem:
    if "system" not in config.data:
        raise ConfigError("system", "missing")
    block = config.data["system"]
    sample_grid = sample_grid_from_config(config)
    declared = _declared_bounds(block)
    interval = _interval(block)
    try:
        if block.get("preset") is not None:
            return build_preset(
                block["preset"],
                interval=interval,
                declared=declared,
                sample_grid=sample_grid,
                **(block.get("parameters") or {}),
            )
        n = _integer(block.get("n"), "system.n", 1)
        trace_order = block.get("trace_order", TRACE_ORDERS[0])
        if trace_order not in TRACE_ORDERS:
            raise ConfigError(
                "system.trace_order", "must be one of %s, got %s" % (TRACE_ORDERS, trace_order)
            )
        H = _field(block, "H", n)
        if H is None:
            raise ConfigError("system.H", "missing")
        return build_system(
            interval,
            P0=_matrix(block, "P0", (n, n)),
            P1=_matrix(block, "P1", (n, n)),
            W_tilde_B=_matrix(block, "W_tilde_B", (n, 2 * n)),
            H=H,
            K=_field(block, "K", n),
            declared=declared,
            trace_order=trace_order,
            sample_grid=sample_grid,
            name=str(block.get("name", "custom")),
        )
    except ConfigError:
        raise
    except ExpressionSyntaxError as e:
        raise ConfigError("system", str(e)) from e
    except (FieldEvaluationError, ExpressionEvaluationError) as e:
        raise ConfigError("system", "coefficient evaluation failed: %s" % e) from e
    except (TypeError, ValueError, np.linalg.LinAlgError) as e:
        raise ConfigError("system", str(e)) from e


def sim_settings(config: Config) -> SimSettings:
    block = config.block("sim")
    if "t_end" not in block:
        raise ConfigError("sim.t_end", "missing")
    if "x0" not in block:
        raise ConfigError("sim.x0", "missing")
    x0 = block["x0"]
    if not isinstance(x0, list) or not x0:
        raise ConfigError("sim.x0", "expected one expression per state component")
    closure = block.get("closure", CLOSURES[0])
    if closure not in CLOSURES:
        raise ConfigError("sim.closure", "must be one of %s, got %s" % (CLOSURES, closure))
    return SimSettings(
        t_end=_number(block["t_end"], "sim.t_end", minimum=0.0),
        x0=x0,
        N=_integer(block.get("N", DEFAULT_CELLS), "sim.N", 1),
        cfl=_number(block.get("cfl", DEFAULT_CFL), "sim.cfl", positive=True),
        record_stride=_integer(block.get("record_stride", 1), "sim.record_stride", 1),
        closure=closure,
        store_states=bool(block.get("store_states", False)),
        include_states=bool(block.get("include_states", False)),
    )


def certify_settings(config: Config) -> CertifySettings:
    block = config.block("certify")
    settings = CertifySettings()
    tau_grid = block.get("tau_grid")
    if isinstance(tau_grid, list):
        if not tau_grid:
            raise ConfigError("certify.tau_grid", "empty")
        settings.tau_grid = [
            _number(value, "certify.tau_grid[%d]" % i, positive=True)
            for i, value in enumerate(tau_grid)
        ]
    elif isinstance(tau_grid, dict):
        settings.tau_count = _integer(
            tau_grid.get("count", DEFAULT_TAU_GRID_COUNT), "certify.tau_grid.count", 1
        )
        if "lower" in tau_grid or "upper" in tau_grid:
            lower = _number(tau_grid.get("lower"), "certify.tau_grid.lower", positive=True)
            upper = _number(tau_grid.get("upper"), "certify.tau_grid.upper", positive=True)
            if not lower < upper:
                raise ConfigError("certify.tau_grid", "lower must be below upper")
            settings.tau_bounds = (lower, upper)
    elif tau_grid is not None:
        raise ConfigError("certify.tau_grid", "expected a list of windows or an object")
    endpoint = block.get("endpoint", ENDPOINTS[0])
    if endpoint not in ENDPOINTS:
        raise ConfigError("certify.endpoint", "must be one of %s, got %s" % (ENDPOINTS, endpoint))
    settings.endpoint = endpoint
    if block.get("kappa") is not None:
        settings.kappa = _number(block["kappa"], "certify.kappa", minimum=0.0)
    settings.cross_check = bool(block.get("cross_check", False))
    return settings


def counterexample_settings(config: Optional[Config], alpha=None, periods=None) -> CounterexampleSettings:
    block = config.block("counterexample") if config is not None else {}
    settings = CounterexampleSettings()
    if alpha is not None:
        settings.alpha = _number(alpha, "--alpha")
    elif "alpha" in block:
        settings.alpha = _number(block["alpha"], "counterexample.alpha")
    if periods is not None:
        settings.periods = _integer(periods, "--periods", 1)
    elif "periods" in block:
        settings.periods = _integer(block["periods"], "counterexample.periods", 1)
    settings.cross_check = bool(block.get("cross_check", False))
    return settings


def output_dir(config: Optional[Config], out: str = None) -> str:
    if out is not None:
        return out
    if config is not None:
        directory = config.block("output").get("directory")
        if directory is not None:
            if not isinstance(directory, str):
                raise ConfigError("output.directory", "expected a path")
            return directory
    return DEFAULT_OUTPUT_DIR


def output_formats(config: Optional[Config]) -> List[str]:
    if config is None:
        return list(OUTPUT_FORMATS)
    formats = config.block("output").get("formats", list(OUTPUT_FORMATS))
    if not isinstance(formats, list) or any(f not in OUTPUT_FORMATS for f in formats):
        raise ConfigError("output.formats", "expected a subset of %s" % (OUTPUT_FORMATS,))
    return formats
