"""Command-line entry point.

Every registered command becomes a subcommand whose flags are generated from
its pydantic options model. Values are passed through as strings and coerced
by the model, so validation lives in one place.

Precedence: flags > config file (``--config``) > environment > defaults.
Results go to the output directory together with ``manifest.json``; the JSON
summary is printed on stdout and logs go to stderr.

Exit codes: 0 success, 2 parameter errors, 3 insufficient data, 1 otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import structlog
from pydantic.fields import FieldInfo

from hermite_persist import __version__
from hermite_persist.core.base import ExperimentCommand, RunContext
from hermite_persist.core.config import Settings, get_settings, load_config_file
from hermite_persist.core.errors import ConfigurationError, HermiteError, handle_error
from hermite_persist.core.log import configure_logging
from hermite_persist.core.models import RunManifest
from hermite_persist.core.output import to_jsonable
from hermite_persist.core.registry import registry

logger = structlog.get_logger()

MANIFEST_NAME = "manifest.json"

# Run-level flags mapped onto Settings fields.
_SETTINGS_FLAGS = {"workers": "workers", "output": "output_dir", "log_level": "log_level"}


def _field_flags(name: str, info: FieldInfo) -> list[str]:
    """``--alias`` or ``--kebab-name``, plus ``--snake_name`` when different."""
    primary = info.alias or name.replace("_", "-")
    flags = [f"--{primary}"]
    if name != primary:
        flags.append(f"--{name}")
    return flags


def _add_option(parser: argparse.ArgumentParser, name: str, info: FieldInfo) -> None:
    """Add one flag for a model field; defaults stay with the model."""
    help_text = info.description or ""
    if info.default is not None and not info.is_required():
        help_text = f"{help_text} (default: {info.default})".strip()
    if info.annotation is bool:
        parser.add_argument(
            *_field_flags(name, info),
            dest=name,
            action=argparse.BooleanOptionalAction,
            default=argparse.SUPPRESS,
            help=help_text,
        )
        return
    parser.add_argument(
        *_field_flags(name, info),
        dest=name,
        default=argparse.SUPPRESS,
        metavar=name.upper(),
        help=help_text,
    )


def _run_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("run")
    group.add_argument("--config", type=Path, help="Flat key=value or JSON config file.")
    group.add_argument("--output", type=Path, help="Output directory (default: results).")
    group.add_argument("--workers", type=int, help="Worker threads (never changes results).")
    group.add_argument(
        "--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Log level."
    )
    group.add_argument(
        "--log-json", action="store_true", default=None, help="Emit JSON log lines on stderr."
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser from the command registry."""
    import hermite_persist.experiments  # noqa: F401

    parser = argparse.ArgumentParser(
        prog="hermite-persist",
        description=(
            "Hermite process simulation and persistence statistics: Gaussian subordination "
            "paths, persistence exponents, tail decay, decorrelation and Hermite rank checks."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    common = _run_options()

    subparsers.add_parser("list", help="List commands and their option schemas.")
    for command in registry.list_commands():
        sub = subparsers.add_parser(
            command.name,
            help=command.description,
            description=command.description,
            parents=[common],
        )
        for name, info in command.options_model.model_fields.items():
            _add_option(sub, name, info)
    return parser


def _split_config(
    values: dict[str, Any],
    command: ExperimentCommand,
) -> tuple[dict[str, Any], dict[str, Any]]:
    """Separate config-file values into command options and settings."""
    fields = command.options_model.model_fields
    aliases = {info.alias: name for name, info in fields.items() if info.alias}
    options: dict[str, Any] = {}
    settings: dict[str, Any] = {}
    for key, value in values.items():
        name = aliases.get(key, key)
        if name in fields:
            options[name] = value
        elif key in Settings.model_fields:
            settings[key] = value
        elif key == "output":
            settings["output_dir"] = value
        else:
            raise ConfigurationError(
                f"Unknown config key '{key}' for command '{command.name}'", setting=key
            )
    return options, settings


def _resolve(
    args: argparse.Namespace,
    command: ExperimentCommand,
) -> tuple[dict[str, Any], Settings]:
    """Merge flags over the config file over environment defaults."""
    file_options: dict[str, Any] = {}
    overrides: dict[str, Any] = {}
    if args.config is not None:
        file_options, overrides = _split_config(load_config_file(args.config), command)

    for flag, setting in _SETTINGS_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[setting] = value
    if args.log_json is not None:
        overrides["log_json"] = args.log_json

    flag_options = {
        name: getattr(args, name)
        for name in command.options_model.model_fields
        if hasattr(args, name)
    }
    settings = Settings(**overrides) if overrides else get_settings()
    return {**file_options, **flag_options}, settings


def _print_error(error: HermiteError) -> None:
    print(json.dumps(to_jsonable(error.to_dict()), sort_keys=True), file=sys.stderr)


def _list_commands() -> int:
    print(json.dumps(to_jsonable(registry.get_command_schemas()), indent=2, sort_keys=True))
    return 0


def run(argv: Sequence[str] | None = None) -> int:
    """
    Parse ``argv``, execute the subcommand and write its outputs.

    Returns:
        Process exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2

    if args.command == "list":
        return _list_commands()

    command = registry.get_command(args.command)
    if command is None:
        parser.print_usage(sys.stderr)
        return 2

    try:
        raw_options, settings = _resolve(args, command)
    except Exception as e:
        error = handle_error(e, context="Configuration")
        _print_error(error)
        return error.exit_code
    configure_logging(settings.log_level, settings.log_json)

    context = RunContext.create(settings)
    started = time.perf_counter()
    try:
        options = command.parse_options(raw_options)
        result = command.execute(options, context)
    except Exception as e:
        context.writer.discard()
        error = handle_error(e, context=command.name)
        logger.error("Command failed", command=command.name, error=error.message)
        _print_error(error)
        return error.exit_code

    context.merge_timings(result.timings)
    manifest = RunManifest(
        command=command.name,
        config={
            **options.model_dump(mode="json"),
            "default_seed": settings.seed,
            "workers": context.workers,
        },
        version=__version__,
        wall_clock_s=time.perf_counter() - started,
        timings=context.timings,
    )
    manifest.record_files(context.output_dir, result.files)
    manifest.write(context.output_dir / MANIFEST_NAME)
    logger.info(
        "Command finished",
        command=command.name,
        files=[p.name for p in result.files],
        wall_clock_s=round(manifest.wall_clock_s, 3),
    )

    print(json.dumps(to_jsonable(result.summary), indent=2, sort_keys=True))
    return 0


def main() -> None:
    """Console script entry point."""
    sys.exit(run())
