"""Sampling commands: Boltzmann maps, labeled trees and Brownian snakes."""

from pathlib import Path

import click
import numpy as np

from mobile_maps.harness import law_corpus
from mobile_maps.io import write_map, write_params, write_snake, write_tree
from mobile_maps.laws import mobile_law, valid_sample
from mobile_maps.maps import boltzmann_sample
from mobile_maps.metrics import brownian_snake_sample
from mobile_maps.symmetry import sample_symmetrization
from mobile_maps.utils import AliasedGroup, parse_weights, reported, solve_for

_SIGNS = {"plus": "+", "null": "0", "minus": "-", "+": "+", "0": "0", "-": "-"}


@click.group(cls=AliasedGroup)
def sample():
    """Draw random maps, trees and snakes."""


@sample.command(name="map")
@click.option(
    "--q", "q_text", required=True, help='Face weights as JSON, e.g. \'{"5": 1}\''
)
@click.option("--n", "n_vertices", type=int, required=True, help="Number of vertices")
@click.option(
    "--sign", type=click.Choice(sorted(_SIGNS)), default="plus", help="Root sign"
)
@click.option("--seed", type=int, help="Random seed (default: from config)")
@click.option("--require-odd", is_flag=True, help="Insist on some odd face degree")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option(
    "--params-out",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Save solved constants",
)
@reported
def sample_map(config, q_text, n_vertices, sign, seed, require_odd, out, params_out):
    """Sample a pointed rooted Boltzmann map through its mobile."""
    weights = parse_weights(q_text)
    params = solve_for(config, weights)
    rng = np.random.default_rng(config.resolve("seed", seed))
    m = boltzmann_sample(weights, n_vertices, _SIGNS[sign], rng, params, require_odd)
    write_map(m, out)
    if params_out is not None:
        write_params(params, params_out)
    click.echo(
        f"🗺️  Map with {m.num_vertices} vertices and {m.num_edges} edges "
        f"written to {out}"
    )


@sample.command(name="tree")
@click.option(
    "--law",
    "law_name",
    type=click.Choice(sorted(law_corpus())),
    help="Built-in valid law",
)
@click.option("--q", "q_text", help="Face weights for a mobile, as JSON")
@click.option("--n", "n_vertices", type=int, help="Map vertices encoded by the mobile")
@click.option("--symmetrize", is_flag=True, help="Reorder children uniformly at random")
@click.option("--seed", type=int, help="Random seed (default: from config)")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@reported
def sample_tree(config, law_name, q_text, n_vertices, symmetrize, seed, out):
    """Sample a labeled tree from a built-in law or a mobile law."""
    if (law_name is None) == (q_text is None):
        raise click.UsageError("give exactly one of --law and --q")
    rng = np.random.default_rng(config.resolve("seed", seed))
    if law_name is not None:
        law = law_corpus()[law_name]
        law.attempt_cap = config.get("attempt_cap")
        law.vertex_cap = config.get("vertex_cap")
    else:
        if n_vertices is None:
            raise click.UsageError("--q needs --n")
        law = mobile_law(solve_for(config, parse_weights(q_text)), n_vertices)
    t = valid_sample(law, rng)
    if symmetrize:
        t = sample_symmetrization(t, rng)
    write_tree(t, out)
    click.echo(f"🌳 Tree with {len(t)} vertices written to {out}")


@sample.command(name="snake")
@click.option("--grid", "grid_size", type=int, default=256, help="Even grid size N")
@click.option("--seed", type=int, help="Random seed (default: from config)")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@reported
def sample_snake(config, grid_size, seed, out):
    """Sample a discrete Brownian snake as an (e, Z) CSV."""
    rng = np.random.default_rng(config.resolve("seed", seed))
    write_snake(brownian_snake_sample(grid_size, rng), out)
    click.echo(f"🐍 Snake on {grid_size + 1} grid points written to {out}")
