"""The scaling command: growth exponents of map functionals."""

from pathlib import Path

import click
import numpy as np

from mobile_maps.harness import scaling_estimate
from mobile_maps.utils import (
    emit_reports,
    parse_int_list,
    parse_weights,
    report_target,
    reported,
)

FUNCTIONALS = ("label_range", "distance_pair", "height")


@click.command()
@click.option(
    "--q",
    "q_text",
    required=True,
    help='Face weights as JSON, e.g. \'{"4": "1/12"}\'',
)
@click.option("--n", "n_text", required=True, help="Sizes, e.g. 512,1024,2048")
@click.option("--reps", type=int, default=100, help="Samples per size")
@click.option("--functional", type=click.Choice(FUNCTIONALS), default="label_range")
@click.option(
    "--tolerance", type=float, default=0.05, help="Allowed gap to the expected exponent"
)
@click.option("--seed", type=int, help="Random seed (default: from config)")
@click.option(
    "--report", "report_path", type=click.Path(dir_okay=False, path_type=Path)
)
@reported
def scaling(config, q_text, n_text, reps, functional, tolerance, seed, report_path):
    """Fit log E[F] against log n and compare the slope with its limit."""
    seed = config.resolve("seed", seed)
    report = scaling_estimate(
        parse_weights(q_text),
        parse_int_list(n_text),
        reps,
        functional,
        np.random.default_rng(seed),
        tolerance=tolerance,
        seed=seed,
    )
    lo, hi = report.details["ci95"]
    slope = report.details["slope"]
    click.echo(f"📐 slope {slope:.4f} (95% CI {lo:.4f} to {hi:.4f})")
    emit_reports([report], report_target(config, report_path))
