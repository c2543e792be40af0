"""Comparisons of rescaled mobiles against the Brownian snake."""

from pathlib import Path

import click
import numpy as np

from mobile_maps.harness import snake_compare
from mobile_maps.utils import (
    AliasedGroup,
    emit_reports,
    parse_weights,
    report_target,
    reported,
)


@click.group(cls=AliasedGroup)
def snake():
    """Brownian snake comparisons."""


@snake.command(name="compare")
@click.option("--q", "q_text", required=True, help="Face weights as JSON")
@click.option(
    "--n", "n_vertices", type=int, required=True, help="Map vertices per sample"
)
@click.option("--samples", type=int, default=2000, help="Mobiles and snakes drawn")
@click.option("--grid", type=int, default=256, help="Snake discretization")
@click.option("--seed", type=int, help="Random seed (default: from config)")
@click.option(
    "--report", "report_path", type=click.Path(dir_okay=False, path_type=Path)
)
@reported
def compare(config, q_text, n_vertices, samples, grid, seed, report_path):
    """KS-compare rescaled contour and label marginals with the snake."""
    if samples < 4:
        raise click.BadParameter("need at least 4 samples", param_hint="--samples")
    seed = config.resolve("seed", seed)
    report = snake_compare(
        parse_weights(q_text),
        n_vertices,
        samples,
        np.random.default_rng(seed),
        grid=grid,
        alpha=config.get("stats.alpha"),
        seed=seed,
    )
    emit_reports([report], report_target(config, report_path))
