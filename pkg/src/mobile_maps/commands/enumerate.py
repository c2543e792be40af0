"""Exact enumeration commands."""

from collections import Counter
from pathlib import Path

import click

from mobile_maps.errors import DomainError
from mobile_maps.harness import law_corpus
from mobile_maps.io import write_distribution
from mobile_maps.laws import exact_law_enumeration
from mobile_maps.maps import enumerate_maps
from mobile_maps.utils import AliasedGroup, parse_int_list, reported


@click.group(cls=AliasedGroup)
def enumerate_group():
    """Enumerate rooted maps and exact tree laws."""


@enumerate_group.command(name="maps")
@click.option("--max-edges", type=int, default=3, help="Largest number of edges")
@click.option("--faces", help="Allowed face degrees, e.g. 4 or 3,5")
@reported
def maps(max_edges, faces):
    """Count rooted planar maps by number of edges."""
    allowed = parse_int_list(faces) if faces else None
    counts = Counter(m.num_edges for m in enumerate_maps(max_edges, allowed))
    for edges in range(max_edges + 1):
        click.echo(f"{edges}\t{counts.get(edges, 0)}")


@enumerate_group.command(name="law")
@click.argument("law_name", type=click.Choice(sorted(law_corpus())))
@click.option("--max-vertices", type=int, help="Truncation (default: from config)")
@click.option("--symmetrized", is_flag=True, help="Use the symmetrized law")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path))
@reported
def law(config, law_name, max_vertices, symmetrized, out):
    """Exact law of a built-in valid law, as canonical tree keys."""
    law = law_corpus()[law_name]
    if symmetrized:
        law = law.symmetrized()
    cap = config.resolve("max_vertices", max_vertices)
    if cap < 1:
        raise DomainError("max-vertices must be positive")
    dist = exact_law_enumeration(law, cap)
    click.echo(f"📊 {len(dist)} labeled trees, total mass {dist.total}")
    if out is not None:
        write_distribution(dist, out)
        click.echo(f"📝 Law written to {out}")
