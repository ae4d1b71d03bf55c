"""Fractional Schrödinger spectral eigensolver"""

import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import metadata
from pathlib import Path

import numpy as np

from . import analysis, csv_writer, json_writer
from .config import RunConfig, load_config
from .errors import (
    AccuracyError,
    ConfigError,
    DomainError,
    FractionalSchrodingerError,
    GridError,
    OracleSizeError,
    PotentialError,
    SchemeError,
)
from .grid import Grid, make_grid
from .mittag_leffler import MAX_ARGUMENT, MLParams, mittag_leffler
from .potentials import PotentialKind, PotentialSpec, load_tabulated
from .solver import Refinement, SolveConfig, real_time_trace, solve_spectrum
from .splitting import get_scheme

try:
    __version__ = metadata.version("fracschrod")
except metadata.PackageNotFoundError:
    __version__ = "0.1.0"

logger = logging.getLogger(__name__)

CONFIG_ERROR_EXIT = 2
SOLVER_ERROR_EXIT = 3
TRACE_SAMPLES = 2000

_CONFIG_ERRORS = (ConfigError, PotentialError, SchemeError, OracleSizeError)


def main(argv: list[str] | None = None) -> int:
    """Run the main program"""
    argv = sys.argv[1:] if argv is None else list(argv)
    error_json = "--error-json" in argv

    try:
        config, options = load_config(argv)
    except _CONFIG_ERRORS as exc:
        return _fail(exc, CONFIG_ERROR_EXIT, error_json)
    configure_logging(verbose=options["verbose"], quiet=options["quiet"])
    logger.debug("resolved configuration: %s", config)

    try:
        summary = COMMANDS[config.subcommand](config)
    except _CONFIG_ERRORS as exc:
        return _fail(exc, CONFIG_ERROR_EXIT, error_json)
    except FractionalSchrodingerError as exc:
        return _fail(exc, SOLVER_ERROR_EXIT, error_json)

    json_writer.write_manifest(Path(config.output_dir) / "manifest.json", config, __version__)
    print(json.dumps(json_writer.to_plain(summary), indent=4, sort_keys=True))
    return 0


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Configure the root logger once per CLI run."""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


def _fail(exc: Exception, exit_code: int, error_json: bool) -> int:
    print(f"error: {exc}", file=sys.stderr)
    if error_json:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": exit_code}, sort_keys=True))
    return exit_code


def make_potential(config: RunConfig) -> PotentialSpec:
    """PotentialSpec described by the run configuration."""
    kind = PotentialKind(config.potential)
    if kind is PotentialKind.TABULATED:
        return load_tabulated(config.potential_file)
    return PotentialSpec(
        kind, v0=config.v0, half_width=config.half_width, c2=config.c2, c4=config.c4, c0=config.c0
    )


def make_run_grid(config: RunConfig) -> Grid:
    """Grid described by the run configuration.

    A grid the configuration cannot describe is a configuration error; GridError
    raised later, while solving, is a solver error.
    """
    try:
        return make_grid(config.grid, config.domain[0], config.domain[1])
    except GridError as exc:
        raise ConfigError(f"invalid grid: {exc}") from exc


def make_solve_config(config: RunConfig, alpha: float) -> SolveConfig:
    """SolveConfig for one fractional order."""
    return SolveConfig(
        alpha=alpha,
        dt=config.dt,
        tol=config.tol,
        max_iters=config.max_iters,
        refine=Refinement(config.dt_fine, config.n_fine_steps) if config.refine else None,
        seed=config.seed,
        track_energy=config.track_energy,
    )


def _solve(config: RunConfig, alpha: float, n_states: int):
    return solve_spectrum(
        make_solve_config(config, alpha),
        make_potential(config),
        make_run_grid(config),
        get_scheme(config.scheme),
        n_states,
    )


def _over_alphas(task, config: RunConfig) -> list:
    """Run task(config, alpha) for every configured alpha, in parallel when workers > 1.

    Results come back in alpha order regardless of completion order.
    """
    alphas = list(config.alphas)
    if config.workers > 1 and len(alphas) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(task, [config] * len(alphas), alphas))
    results = []
    for number, alpha in enumerate(alphas, start=1):
        results.append(task(config, alpha))
        logger.info("%s: alpha %.4g done (%d/%d)", config.subcommand, alpha, number, len(alphas))
    return results


def _out(config: RunConfig, name: str) -> Path:
    return Path(config.output_dir) / name


def cmd_solve(config: RunConfig) -> dict:
    """Solve the lowest n_states eigenstates; one table per state and a JSON summary."""
    solutions = _solve(config, config.alpha, config.n_states)
    grid = make_run_grid(config)
    for solution in solutions:
        values = solution.psi.values
        csv_writer.write_table(
            _out(config, f"state_{solution.index}"),
            ["x", "re_psi", "im_psi"],
            zip(grid.x, values.real, values.imag),
            config.format,
        )
    summary = {
        "potential": config.potential,
        "params": make_potential(config).params(),
        "alpha": config.alpha,
        "energies": [solution.energy for solution in solutions],
        "states": [solution.summary() for solution in solutions],
    }
    json_writer.write_to_json(_out(config, "summary.json"), summary)
    return summary


def _ring_rows(config: RunConfig, alpha: float) -> list:
    solutions = _solve(config, alpha, config.n_max + 1)
    rows = []
    for solution in solutions:
        n = solution.index
        reference = analysis.ring_analytic_energy(n, alpha)
        report = analysis.compare_state(
            solution.psi,
            analysis.ring_analytic_state(n, solution.psi.grid),
            solution.energy,
            reference,
            index=n,
            alpha=alpha,
        )
        rows.append([alpha, n, report.max_pointwise, report.energy_error])
    return rows


def cmd_ring_benchmark(config: RunConfig) -> dict:
    """Pointwise and energy errors of ring states against their closed forms."""
    if PotentialKind(config.potential) is not PotentialKind.RING_ZERO:
        raise ConfigError(f"ring-benchmark runs on the ring potential, got {config.potential}")
    if 2 * math.ceil(config.n_max / 2) >= config.grid / 2:
        raise ConfigError(f"n_max {config.n_max} is not representable on {config.grid} points")
    rows = [row for rows in _over_alphas(_ring_rows, config) for row in rows]
    path = csv_writer.write_table(
        _out(config, "ring_benchmark"), ["alpha", "n", "max_pointwise_error", "energy_error"], rows, config.format
    )
    return {
        "table": path.name,
        "max_pointwise_error": max(row[2] for row in rows),
        "max_energy_error": max(row[3] for row in rows),
    }


def _spectrum_rows(config: RunConfig, alpha: float) -> list:
    return [[alpha, solution.index, solution.energy] for solution in _solve(config, alpha, config.n_states)]


def cmd_spectrum_sweep(config: RunConfig) -> dict:
    """Lowest energies over the alpha grid."""
    rows = [row for rows in _over_alphas(_spectrum_rows, config) for row in rows]
    path = csv_writer.write_table(_out(config, "spectrum"), ["alpha", "n", "energy"], rows, config.format)
    return {"table": path.name, "potential": config.potential, "alphas": config.alphas}


def _well_count_row(config: RunConfig, alpha: float) -> list:
    report = analysis.bound_state_report(
        alpha,
        make_potential(config),
        make_run_grid(config),
        config.count_method,
        make_solve_config(config, alpha),
        get_scheme(config.scheme),
    )
    return [alpha, report.count, report.marginal]


def cmd_well_count(config: RunConfig) -> dict:
    """Finite-well bound-state counts over the alpha grid, with the alpha = 2 matching-condition count."""
    spec = make_potential(config)
    if spec.kind is not PotentialKind.FINITE_WELL:
        raise ConfigError(f"well-count runs on the finite well, got {config.potential}")
    rows = _over_alphas(_well_count_row, config)
    path = csv_writer.write_table(_out(config, "well_count"), ["alpha", "bound_count", "marginal"], rows, config.format)
    grid = make_run_grid(config)
    box = 0.5 * grid.span if grid.is_symmetric else None
    summary = {
        "table": path.name,
        "counts": {str(row[0]): row[1] for row in rows},
        "effective_half_width": analysis.effective_half_width(spec, grid),
        "transcendental_count_alpha2": analysis.finite_well_transcendental_count(
            spec.v0, analysis.effective_half_width(spec, grid), box
        ),
    }
    json_writer.write_to_json(_out(config, "summary.json"), summary)
    return summary


def _tunneling_row(config: RunConfig, alpha: float) -> list:
    ground, excited = _solve(config, alpha, 2)
    gap = excited.energy - ground.energy
    return [alpha, ground.energy, excited.energy, gap, analysis.tunneling_frequency(ground.energy, excited.energy)]


def cmd_tunneling(config: RunConfig) -> dict:
    """Double-well splittings over the alpha grid and an optional real-time trace at trace_alpha."""
    rows = _over_alphas(_tunneling_row, config)
    path = csv_writer.write_table(
        _out(config, "tunneling"), ["alpha", "e0", "e1", "gap", "frequency"], rows, config.format
    )
    summary: dict = {"table": path.name, "gaps": {str(row[0]): row[3] for row in rows}}

    if config.trace_alpha is not None:
        ground, excited = _solve(config, config.trace_alpha, 2)
        gap = abs(excited.energy - ground.energy)
        left, right = analysis.left_right_superpositions(ground.psi, excited.psi)
        total_time = config.trace_time or 1.25 * math.pi / gap
        n_steps = max(1, math.ceil(total_time / config.trace_dt))
        trace = real_time_trace(
            left,
            make_potential(config),
            config.trace_alpha,
            config.trace_dt,
            n_steps,
            sample_every=max(1, n_steps // TRACE_SAMPLES),
        )
        trace_path = csv_writer.write_table(
            _out(config, "trace"),
            ["t", "left_mass", "right_mass"],
            zip(trace.times, trace.left_mass, trace.right_mass),
            config.format,
        )
        summary["trace"] = {
            "table": trace_path.name,
            "alpha": config.trace_alpha,
            "expected_transfer_time": math.pi / gap,
            "final_right_overlap": abs(right.inner(trace.final)) ** 2,
        }
        try:
            summary["trace"]["measured_transfer_time"] = analysis.tunneling_period(trace.times, trace.right_mass)
        except ValueError:
            logger.warning("no right-well maximum within the traced time %.6g", total_time)
    json_writer.write_to_json(_out(config, "summary.json"), summary)
    return summary


def cmd_ml_eval(config: RunConfig) -> dict:
    """E_q(-x^2) on [-ml_x_max, ml_x_max] for every configured q next to exp(-x^2), with error estimates.

    Samples outside |x^2| <= 12 or over the accuracy budget are written as nan.
    """
    xs = np.linspace(-config.ml_x_max, config.ml_x_max, config.ml_points)
    header = ["x"]
    columns = []
    skipped = 0
    for q in config.q_values:
        params = MLParams(q)
        values = np.full_like(xs, np.nan)
        errors = np.full_like(xs, np.nan)
        for i, x in enumerate(xs):
            if x * x > MAX_ARGUMENT:
                skipped += 1
                continue
            try:
                values[i], errors[i], _ = mittag_leffler(params, -x * x)
            except (AccuracyError, DomainError) as exc:
                logger.warning("q=%g x=%g: %s", q, x, exc)
                skipped += 1
        header += [f"ml_q{q:g}", f"ml_err_q{q:g}"]
        columns += [values, errors]
    header.append("gaussian")
    rows = [[x, *(column[i] for column in columns), math.exp(-x * x)] for i, x in enumerate(xs)]
    path = csv_writer.write_table(_out(config, "ml_eval"), header, rows, config.format)
    return {"table": path.name, "q_values": config.q_values, "nan_samples": skipped}


COMMANDS = {
    "solve": cmd_solve,
    "ring-benchmark": cmd_ring_benchmark,
    "spectrum-sweep": cmd_spectrum_sweep,
    "well-count": cmd_well_count,
    "tunneling": cmd_tunneling,
    "ml-eval": cmd_ml_eval,
}
