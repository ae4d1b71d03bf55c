"""Run configuration: command-line flags, dotenv-style config files and resolved defaults.

Precedence is flags, then the config file, then the built-in defaults. Config file
keys are the long flag names upper-cased with dashes turned into underscores, so
``--n-states 5`` and ``N_STATES=5`` mean the same thing.
"""

import argparse
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from dotenv import dotenv_values

from .errors import ConfigError
from .potentials import DEFAULT_DOMAINS, PotentialKind, load_tabulated
from .splitting import SCHEMES

CONFIG_ENV_VAR = "FRACSCHROD_CONFIG"

SUBCOMMANDS = ("solve", "ring-benchmark", "spectrum-sweep", "well-count", "tunneling", "ml-eval")
OUTPUT_FORMATS = ("csv", "json")
COUNT_METHODS = ("auto", "oracle", "solver")
POTENTIAL_ALIASES = {
    "ring": PotentialKind.RING_ZERO.value,
    "finite-well": PotentialKind.FINITE_WELL.value,
    "double-well": PotentialKind.DOUBLE_WELL.value,
}
FILE_PREFIX = "file:"


def float_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid start, start + step, ..., stop, rounded to 10 digits."""
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + step * i, 10) for i in range(count)]


# alpha grids and potentials each sweep runs over unless configured otherwise
SUBCOMMAND_DEFAULTS: dict[str, dict] = {
    "solve": {"potential": "harmonic"},
    "ring-benchmark": {"potential": "ring_zero", "alphas": [1.5, 1.8, 2.0, 2.2]},
    "spectrum-sweep": {"potential": "harmonic", "alphas": float_grid(1.5, 2.4, 0.1)},
    "well-count": {"potential": "finite_well", "alphas": float_grid(1.5, 2.4, 0.1), "grid": 1024},
    "tunneling": {"potential": "double_well", "alphas": float_grid(1.5, 2.0, 0.1)},
    "ml-eval": {"potential": "harmonic"},
}


def get_bool_value(values: dict, key: str, default: bool = False) -> bool:
    """Get a boolean from a string mapping.

    Args:
        values: mapping of config keys to raw strings.
        key: the key to read.
        default: returned when the key is absent or empty.

    Returns:
        The parsed boolean.
    """
    raw = values.get(key)
    if raw is None or not raw.strip():
        return default
    text = raw.strip().lower()
    if text in ("true", "1", "yes"):
        return True
    if text in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key} must be true or false, got {raw!r}")


def get_int_value(values: dict, key: str) -> int | None:
    """Get an integer from a string mapping, None when absent."""
    raw = values.get(key)
    if raw is None or not raw.strip():
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from exc


def get_float_value(values: dict, key: str) -> float | None:
    """Get a float from a string mapping, None when absent."""
    raw = values.get(key)
    if raw is None or not raw.strip():
        return None
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key} must be a number, got {raw!r}") from exc


def get_float_list_value(values: dict, key: str) -> list[float] | None:
    """Get a comma- or space-separated list of floats from a string mapping, None when absent."""
    raw = values.get(key)
    if raw is None or not raw.strip():
        return None
    try:
        return [float(item) for item in raw.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"{key} must be a list of numbers, got {raw!r}") from exc


@dataclass
class RunConfig:
    """
    Fully resolved configuration of one CLI run. Every field is echoed in the manifest.
    """

    subcommand: str
    potential: str = "harmonic"
    alpha: float = 2.0
    alphas: list[float] = field(default_factory=list)
    n_states: int = 5
    grid: int = 0
    domain: list[float] = field(default_factory=list)
    dt: float = 1e-2
    tol: float = 1e-12
    max_iters: int = 1_000_000
    scheme: str = "sixth"
    seed: int = 0
    refine: bool = False
    dt_fine: float = 1e-3
    n_fine_steps: int = 10_000
    v0: float = 100.0
    half_width: float = 1.0
    c2: float = -4.0
    c4: float = 0.5
    c0: float = 8.0
    potential_file: str = ""
    n_max: int = 10
    count_method: str = "auto"
    q_values: list[float] = field(default_factory=lambda: [0.9, 1.0, 1.1])
    ml_x_max: float = 5.0
    ml_points: int = 1001
    trace_alpha: float | None = None
    trace_dt: float = 1e-3
    trace_time: float | None = None
    track_energy: bool = False
    workers: int = 1
    output_dir: str = "."
    format: str = "csv"

    def to_manifest(self) -> dict:
        """The configuration as plain JSON types."""
        return asdict(self)


# how each field is read from a config file
_INT_FIELDS = {"n_states", "grid", "max_iters", "seed", "n_fine_steps", "n_max", "ml_points", "workers"}
_BOOL_FIELDS = {"refine", "track_energy"}
_LIST_FIELDS = {"alphas", "domain", "q_values"}
_STR_FIELDS = {"potential", "scheme", "potential_file", "count_method", "output_dir", "format"}
_CLI_ONLY = {"config", "error_json", "verbose", "quiet"}


def _config_key(name: str) -> str:
    return name.upper()


class _ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises ConfigError instead of exiting."""

    def error(self, message):
        raise ConfigError(message)


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    """Options shared by every subcommand; defaults stay None so files can fill them."""
    parser.add_argument("--config", help="dotenv-style KEY=value config file")
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument("--format", choices=OUTPUT_FORMATS)
    parser.add_argument("--error-json", dest="error_json", action="store_true", default=None)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", "-v", action="store_true", default=None)
    verbosity.add_argument("--quiet", "-q", action="store_true", default=None)

    parser.add_argument("--potential", help="ring|harmonic|finite-well|double-well|file:<path>")
    parser.add_argument("--potential-file", dest="potential_file")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--alphas", type=float, nargs="+")
    parser.add_argument("--n-states", dest="n_states", type=int)
    parser.add_argument("--grid", type=int, help="number of grid points")
    parser.add_argument("--domain", type=float, nargs=2, metavar=("X_MIN", "X_MAX"))
    parser.add_argument("--dt", type=float)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--max-iters", dest="max_iters", type=int)
    parser.add_argument("--scheme")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--refine", action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--dt-fine", dest="dt_fine", type=float)
    parser.add_argument("--n-fine-steps", dest="n_fine_steps", type=int)
    parser.add_argument("--v0", type=float)
    parser.add_argument("--half-width", dest="half_width", type=float)
    parser.add_argument("--c2", type=float)
    parser.add_argument("--c4", type=float)
    parser.add_argument("--c0", type=float)
    parser.add_argument("--n-max", dest="n_max", type=int)
    parser.add_argument("--count-method", dest="count_method", choices=COUNT_METHODS)
    parser.add_argument("--q-values", dest="q_values", type=float, nargs="+")
    parser.add_argument("--ml-x-max", dest="ml_x_max", type=float)
    parser.add_argument("--ml-points", dest="ml_points", type=int)
    parser.add_argument("--trace-alpha", dest="trace_alpha", type=float)
    parser.add_argument("--trace-dt", dest="trace_dt", type=float)
    parser.add_argument("--trace-time", dest="trace_time", type=float)
    parser.add_argument("--track-energy", dest="track_energy", action="store_true", default=None)
    parser.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    """The fracschrod argument parser with one subparser per subcommand."""
    parser = _ArgumentParser(prog="fracschrod", description="Fractional Schrödinger spectral eigensolver")
    subparsers = parser.add_subparsers(dest="subcommand", required=True, parser_class=_ArgumentParser)
    helps = {
        "solve": "solve the lowest eigenstates of one potential",
        "ring-benchmark": "compare ring eigenstates with their closed forms",
        "spectrum-sweep": "harmonic-oscillator energies over an alpha grid",
        "well-count": "finite-well bound-state counts over an alpha grid",
        "tunneling": "double-well splitting and tunneling frequency over an alpha grid",
        "ml-eval": "Mittag-Leffler profiles E_q(-x^2) against the Gaussian",
    }
    for name in SUBCOMMANDS:
        _add_run_options(subparsers.add_parser(name, help=helps[name]))
    return parser


def read_config_file(path: str | Path) -> dict[str, str]:
    """Read a dotenv-style config file, rejecting unknown keys."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    values = {key: (value or "") for key, value in dotenv_values(path).items()}
    known = {_config_key(f.name) for f in fields(RunConfig) if f.name != "subcommand"}
    for key in values:
        if key not in known:
            raise ConfigError(f"unknown config key {key!r} in {path}")
    return values


def _from_file(name: str, values: dict[str, str]):
    key = _config_key(name)
    if name in _INT_FIELDS:
        return get_int_value(values, key)
    if name in _BOOL_FIELDS:
        return get_bool_value(values, key) if values.get(key, "").strip() else None
    if name in _LIST_FIELDS:
        return get_float_list_value(values, key)
    if name in _STR_FIELDS:
        return values.get(key, "").strip() or None
    return get_float_value(values, key)


def _tabulated_domain(potential_file: str) -> tuple[float, float, int]:
    source_x = load_tabulated(potential_file).source_x
    assert source_x is not None
    if source_x.size < 4:
        raise ConfigError(f"{potential_file}: at least four samples are needed to infer a grid")
    dx = float(source_x[1] - source_x[0])
    return float(source_x[0]), float(source_x[0] + dx * source_x.size), int(source_x.size)


def _validate(config: RunConfig) -> None:
    if config.potential not in {kind.value for kind in PotentialKind}:
        raise ConfigError(f"unknown potential {config.potential!r}")
    if config.scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {config.scheme!r}, expected one of {sorted(SCHEMES)}")
    if config.format not in OUTPUT_FORMATS:
        raise ConfigError(f"format must be one of {OUTPUT_FORMATS}, got {config.format!r}")
    if config.count_method not in COUNT_METHODS:
        raise ConfigError(f"count_method must be one of {COUNT_METHODS}, got {config.count_method!r}")
    if len(config.domain) != 2 or not config.domain[0] < config.domain[1]:
        raise ConfigError(f"domain must be two increasing numbers, got {config.domain}")
    for name in ("n_states", "grid", "max_iters", "n_fine_steps", "ml_points", "workers"):
        if getattr(config, name) < 1:
            raise ConfigError(f"{name} must be positive, got {getattr(config, name)}")
    for name in ("dt", "tol", "dt_fine", "trace_dt", "ml_x_max"):
        if not getattr(config, name) > 0.0:
            raise ConfigError(f"{name} must be positive, got {getattr(config, name)}")
    if config.n_max < 0:
        raise ConfigError(f"n_max must be non-negative, got {config.n_max}")
    if not config.alphas or not config.q_values:
        raise ConfigError("alphas and q_values must not be empty")
    if config.potential == PotentialKind.TABULATED.value and not config.potential_file:
        raise ConfigError("the tabulated potential needs POTENTIAL_FILE / --potential-file")


def resolve_config(
    subcommand: str, flags: dict, file_values: dict[str, str] | None = None
) -> RunConfig:
    """Merge flags, config file values and defaults into a validated RunConfig.

    Args:
        subcommand: one of SUBCOMMANDS.
        flags: parsed flag values, None where a flag was not given.
        file_values: raw KEY=value pairs from a config file.

    Returns:
        The resolved RunConfig, potential-dependent defaults filled in.
    """
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    file_values = file_values or {}
    defaults = RunConfig(subcommand)
    resolved: dict = {"subcommand": subcommand}
    for spec_field in fields(RunConfig):
        name = spec_field.name
        if name == "subcommand":
            continue
        value = flags.get(name)
        if value is None:
            value = _from_file(name, file_values)
        if value is None:
            value = SUBCOMMAND_DEFAULTS[subcommand].get(name, getattr(defaults, name))
        resolved[name] = list(value) if isinstance(value, (list, tuple)) else value

    potential = str(resolved["potential"]).strip()
    if potential.lower().startswith(FILE_PREFIX):
        path = potential[len(FILE_PREFIX) :].strip()
        if not path:
            raise ConfigError(f"{potential!r} names no potential file")
        if resolved["potential_file"] and resolved["potential_file"] != path:
            raise ConfigError(f"{potential!r} conflicts with potential_file {resolved['potential_file']!r}")
        resolved["potential_file"] = path
        potential = PotentialKind.TABULATED.value
    potential = potential.lower()
    resolved["potential"] = POTENTIAL_ALIASES.get(potential, potential)
    resolved["scheme"] = str(resolved["scheme"]).strip().lower()
    if not resolved["alphas"]:
        resolved["alphas"] = [resolved["alpha"]]

    try:
        kind = PotentialKind(resolved["potential"])
    except ValueError as exc:
        raise ConfigError(f"unknown potential {resolved['potential']!r}") from exc
    if kind is PotentialKind.TABULATED and resolved["potential_file"]:
        x_min, x_max, n_points = _tabulated_domain(resolved["potential_file"])
    else:
        x_min, x_max, n_points = DEFAULT_DOMAINS.get(kind, (-10.0, 10.0, 2000))
    if not resolved["domain"]:
        resolved["domain"] = [x_min, x_max]
    if not resolved["grid"]:
        resolved["grid"] = n_points
    if flags.get("refine") is None and _config_key("refine") not in file_values:
        resolved["refine"] = kind is PotentialKind.FINITE_WELL

    config = RunConfig(**resolved)
    _validate(config)
    return config


def load_config(argv: list[str] | None = None) -> tuple[RunConfig, dict]:
    """Parse argv and resolve the run configuration.

    The config file is taken from --config, else from the FRACSCHROD_CONFIG
    environment variable, else none is read.

    Returns:
        (config, cli_options) where cli_options holds error_json, verbose and quiet.
    """
    namespace = vars(build_parser().parse_args(argv))
    config_path = namespace.get("config") or os.environ.get(CONFIG_ENV_VAR, "")
    file_values = read_config_file(config_path) if config_path else {}
    cli_options = {name: bool(namespace.get(name)) for name in _CLI_ONLY if name != "config"}
    flags = {name: value for name, value in namespace.items() if name not in _CLI_ONLY}
    subcommand = flags.pop("subcommand")
    return resolve_config(subcommand, flags, file_values), cli_options

