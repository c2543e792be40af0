"""Click helpers shared by the mobile-maps command groups."""

from fractions import Fraction
import functools
import inspect
import json
import logging
from pathlib import Path

import click

from .errors import MobileMapsError
from .io import write_reports
from .laws import solve_constants

_logger = logging.getLogger(__name__)

REPORT_FAILED_EXIT = 3


class AliasedGroup(click.Group):
    """A Click Group that supports command aliases and shows them in help as 'command (alias)'."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._aliases = {}

    def add_command_with_aliases(self, cmd, name, aliases=None):
        """Add a command with aliases."""
        self.add_command(cmd, name)
        if aliases:
            for alias in aliases:
                self._aliases[alias] = name

    def get_command(self, ctx, cmd_name):
        """Get command, resolving aliases to actual command names."""
        if cmd_name in self._aliases:
            cmd_name = self._aliases[cmd_name]
        return super().get_command(ctx, cmd_name)

    def format_commands(self, ctx, formatter):
        """Custom format showing aliases like 'command (alias1, alias2)'."""
        commands = []
        for subcommand in self.list_commands(ctx):
            cmd = self.get_command(ctx, subcommand)
            if cmd is None or cmd.hidden:
                continue

            aliases = [
                alias for alias, target in self._aliases.items() if target == subcommand
            ]
            if aliases:
                name = f"{subcommand} ({', '.join(sorted(aliases))})"
            else:
                name = subcommand
            commands.append((name, cmd.get_short_help_str()))

        if commands:
            with formatter.section("Commands"):
                formatter.write_dl(commands)


def reported(f):
    """Run a command body, rendering library errors as red messages and exit codes.

    A body that takes a leading ``config`` parameter receives the
    ProjectConfig stored on the click context.
    """
    params = list(inspect.signature(f).parameters)
    wants_config = bool(params) and params[0] == "config"

    @click.pass_context
    @functools.wraps(f)
    def new_func(click_ctx, *args, **kwargs):
        try:
            if wants_config:
                return f(click_ctx.obj["config"], *args, **kwargs)
            return f(*args, **kwargs)
        except MobileMapsError as e:
            _logger.debug("command failed", exc_info=True)
            click.secho(f"❌ {type(e).__name__}: {e}", fg="red", err=True)
            click_ctx.exit(e.exit_code)

    return new_func


def parse_weights(text):
    """Parse a weight sequence given as JSON, e.g. '{"5": 1}'."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise click.BadParameter(f"not valid JSON: {e.msg}") from e
    if isinstance(data, dict) and "q" in data:
        data = data["q"]
    if not isinstance(data, dict) or not data:
        raise click.BadParameter('expected an object such as {"5": 1}')
    try:
        return {int(k): v for k, v in data.items()}
    except ValueError as e:
        raise click.BadParameter(f"face degrees must be integers: {e}") from e


def parse_int_list(text):
    """Parse '512,1024,2048' into a list of ints."""
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated integers: {e}") from e


def emit_reports(reports, path=None):
    """Print a line per report, optionally save them, and exit 3 if any failed."""
    for r in reports:
        mark = "✅" if r.passed else "❌"
        click.secho(
            f"{mark} {r.name}: {r.mode} statistic={r.statistic:.6g} "
            f"threshold={r.threshold:.6g}",
            fg=None if r.passed else "red",
        )
    if path is not None:
        write_reports(reports, path)
        click.echo(f"📝 Reports written to {path}")
    if not all(r.passed for r in reports):
        click.get_current_context().exit(REPORT_FAILED_EXIT)


def solve_for(config, weights):
    """Mobile constants for a weight sequence with the configured solver settings."""
    return solve_constants(
        {d: float(Fraction(w)) for d, w in weights.items()},
        tolerance=config.get("solver.tolerance"),
        damping=config.get("solver.damping"),
        max_iterations=config.get("solver.max_iterations"),
        truncation=config.get("truncation"),
    )


def report_target(config, path):
    """Relative report paths land under the configured reports_dir."""
    if path is None or Path(path).is_absolute():
        return path
    return Path(config.get("reports_dir")) / path
