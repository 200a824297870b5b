"""Implementations of the CLI subcommands. Each returns a process exit code."""

import argparse
import sys
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from skdv_cli.golden import format_results, run_golden_suite
from skdv_core.algebra.fields import make_table
from skdv_core.config.loader import config_from_env, load_config, save_yaml
from skdv_core.config.models import AppConfig, SimConfig
from skdv_core.constraints.dirac_bergmann import DBAReport, run_dba
from skdv_core.dsl.parser import parse_super
from skdv_core.dsl.render import render, render_components
from skdv_core.exceptions import ConfigError, ModelError
from skdv_core.models.registry import get_model
from skdv_core.numerics.integrator import integrate
from skdv_core.superspace import to_components
from skdv_core.utils.helpers import dump_json, parse_key_values, write_report
from skdv_core.utils.logging import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def load_app_config(path: Optional[Path]) -> AppConfig:
    if path is not None:
        logger.info("Loading config", path=str(path))
        return load_config(path, AppConfig)
    return config_from_env()


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    write_report(out, text)


def format_report_text(report: DBAReport) -> str:
    lines = ["Momenta:"]
    lines.extend(f"  {name}: {value}" for name, value in report.momenta.items())
    lines.append(f"H_L = {report.canonical_hamiltonian.density}")
    lines.append("Constraints:")
    for record in report.constraints:
        kind = f", {record.constraint_class} class" if record.constraint_class else ""
        lines.append(
            f"  {record.id} = {record.density}  "
            f"(generation {record.generation}, {record.status.value}{kind})"
        )
    if report.multipliers:
        lines.append("Multipliers:")
        lines.extend(f"  {name} = {value}" for name, value in report.multipliers.items())
    lines.append(f"Closed: {'yes' if report.closed else 'no'}")
    if report.undetermined:
        lines.append(f"Undetermined multipliers: {', '.join(report.undetermined)}")
    if report.unsatisfied:
        lines.append(f"Consistency conditions not met: {', '.join(report.unsatisfied)}")
    return "\n".join(lines) + "\n"


def cmd_derive(args: argparse.Namespace) -> int:
    """Run the constraint algorithm on a model's Lagrangian and write the transcript."""
    config = load_app_config(args.config)
    settings = config.derivation
    name = args.model or settings.model
    params = {**settings.params, **parse_key_values(args.param)}
    model = get_model(name, params)
    if model.lagrangian is None:
        raise ModelError(f"Model '{model.name}' has no Lagrangian to analyse")

    report = run_dba(model.lagrangian, settings.max_generations, settings.momentum_prefix)
    if args.format == "text":
        text = format_report_text(report)
    else:
        params = {key: str(value) for key, value in model.params.items()}
        text = dump_json({"model": model.name, "params": params, **report.to_dict()})
    _emit(text, args.out)
    if not report.closed:
        logger.error(
            "Constraint analysis did not close",
            model=model.name,
            undetermined=report.undetermined,
            unsatisfied=report.unsatisfied,
        )
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_verify_paper(args: argparse.Namespace) -> int:
    """Run the golden suite; exit 1 when any check fails."""
    results = run_golden_suite()
    if args.format == "json":
        text = dump_json([result.model_dump() for result in results])
    else:
        text = format_results(results)
    _emit(text, args.out)
    failed = [result.name for result in results if not result.passed]
    if failed:
        logger.error("Golden checks failed", failed=failed)
        return EXIT_MISMATCH
    logger.info("All golden checks passed", count=len(results))
    return EXIT_OK


def cmd_expand_super(args: argparse.Namespace) -> int:
    """Print the theta components of a superspace expression."""
    table = make_table(("u", False), ("xi", True))
    value = parse_super(args.expr, table, parse_key_values(args.param))
    low, high = to_components(value)
    if args.format == "json":
        text = dump_json({"theta0": render(low), "theta1": render(high)})
    else:
        text = render_components(value) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    """Integrate a model and write the monitor time series and final state as CSV."""
    config = load_app_config(args.config)
    updates: dict = {}
    if args.model:
        updates["model"] = args.model
    if args.param:
        updates["params"] = {**config.simulation.params, **parse_key_values(args.param)}
    try:
        simulation = SimConfig.model_validate({**config.simulation.model_dump(), **updates})
    except ValidationError as exc:
        raise ConfigError("Invalid simulation settings", str(exc)) from exc
    output = config.output
    directory = args.out or output.directory

    report = integrate(simulation)
    timeseries = report.write_timeseries_csv(directory / output.timeseries)
    final = report.write_final_state_csv(directory / output.final_state)
    settings = directory / output.settings
    save_yaml({"simulation": simulation.model_dump(mode="json")}, settings)
    drifts = {name: report.drift(name) for name in report.monitors}
    if args.format == "json":
        sys.stdout.write(
            dump_json(
                {
                    "model": report.model,
                    "steps": report.steps,
                    "timeseries": str(timeseries),
                    "final_state": str(final),
                    "settings": str(settings),
                    "drift": drifts,
                }
            )
        )
    elif args.format == "csv":
        sys.stdout.write(f"{timeseries}\n{final}\n")
    else:
        for name, drift in sorted(drifts.items()):
            sys.stdout.write(f"{name}: relative drift {drift:.3e}\n")
    return EXIT_OK


COMMANDS = {
    "derive": cmd_derive,
    "verify-paper": cmd_verify_paper,
    "expand-super": cmd_expand_super,
    "simulate": cmd_simulate,
}
