"""CLI interface for mobile-maps using Click."""

import logging
from pathlib import Path

import click

from .commands.encode import encode
from .commands.enumerate import enumerate_group
from .commands.sample import sample
from .commands.scaling import scaling
from .commands.snake import snake
from .commands.verify import verify
from .config import ProjectConfig
from .utils import AliasedGroup

_logger = logging.getLogger(__name__)

_LEVELS = {0: logging.WARNING, 1: logging.INFO}


def get_version():
    """Get version from package metadata or pyproject.toml."""
    try:
        from importlib.metadata import version

        return version("mobile-maps")
    except Exception as e:
        _logger.info("Could not get version from package metadata: %s", e)

    try:
        # Fallback: read from pyproject.toml (for development)
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib

        project_root = Path(__file__).parent.parent.parent
        pyproject_path = project_root / "pyproject.toml"

        if pyproject_path.exists():
            with open(pyproject_path, "rb") as f:
                config = tomllib.load(f)
                return config.get("project", {}).get("version", "unknown")
    except Exception as e:
        _logger.warning("Could not get version from pyproject.toml: %s", e)

    return "unknown"


@click.group(cls=AliasedGroup)
@click.option(
    "-v", "--verbose", count=True, help="Increase log verbosity (-v info, -vv debug)"
)
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Configuration file (default: nearest mobile-maps.yaml)",
)
@click.pass_context
@click.version_option(version=get_version(), prog_name="mobile-maps")
def main(cctx, verbose, config_path):
    """Mobile-maps - Boltzmann planar maps, labeled mobiles and their verification oracles."""
    logging.basicConfig(
        level=_LEVELS.get(verbose, logging.DEBUG),
        format="%(levelname)s %(name)s: %(message)s",
    )
    cctx.ensure_object(dict)
    cctx.obj["config"] = ProjectConfig(config_path)
    if config_path is not None and not config_path.exists():
        _logger.warning("Config file %s not found, using defaults", config_path)


# Add command groups with aliases
main.add_command_with_aliases(sample, name="sample", aliases=["s"])
main.add_command_with_aliases(encode, name="encode", aliases=["e"])
main.add_command_with_aliases(enumerate_group, name="enumerate", aliases=["en"])
main.add_command_with_aliases(verify, name="verify", aliases=["v"])
main.add_command_with_aliases(scaling, name="scaling", aliases=["sc"])
main.add_command_with_aliases(snake, name="snake", aliases=["sn"])


if __name__ == "__main__":
    main()
