"""Encoding commands: path functions of trees and mobiles of maps."""

from pathlib import Path

import click

from mobile_maps.io import read_map, read_tree, write_path_function, write_tree
from mobile_maps.maps import bdg_forward
from mobile_maps.tree_core import (
    contour_process,
    height_lex_processes,
    label_process,
    type_count_process,
)
from mobile_maps.utils import AliasedGroup, reported

_tree_in = click.argument(
    "tree_path", type=click.Path(exists=True, dir_okay=False, path_type=Path)
)
_out_file = click.option(
    "--out", type=click.Path(dir_okay=False, path_type=Path), required=True
)


@click.group(cls=AliasedGroup)
def encode():
    """Encode trees as path functions and maps as mobiles."""


def _write(p, out):
    write_path_function(p, out)
    click.echo(f"📈 {p.N + 1} grid values written to {out}")


@encode.command(name="contour")
@_tree_in
@_out_file
@reported
def contour(tree_path, out):
    """Contour process C of a JSON tree."""
    _write(contour_process(read_tree(tree_path)), out)


@encode.command(name="label")
@_tree_in
@_out_file
@reported
def label(tree_path, out):
    """Label process Z along the contour."""
    _write(label_process(read_tree(tree_path)), out)


@encode.command(name="height")
@_tree_in
@_out_file
@reported
def height(tree_path, out):
    """Height process H in lexicographic time."""
    _write(height_lex_processes(read_tree(tree_path))[0], out)


@encode.command(name="lex-label")
@_tree_in
@_out_file
@reported
def lex_label(tree_path, out):
    """Label process S in lexicographic time."""
    _write(height_lex_processes(read_tree(tree_path))[1], out)


@encode.command(name="type-count")
@_tree_in
@click.option("--type", "type_", type=int, required=True, help="Vertex type to count")
@_out_file
@reported
def type_count(tree_path, type_, out):
    """First visits of one vertex type along the contour."""
    _write(type_count_process(read_tree(tree_path), type_), out)


@encode.command(name="mobile")
@click.argument(
    "map_path", type=click.Path(exists=True, dir_okay=False, path_type=Path)
)
@_out_file
@reported
def mobile(map_path, out):
    """Mobile of a positive or null pointed map file."""
    t = bdg_forward(read_map(map_path))
    write_tree(t, out)
    click.echo(f"🌳 Mobile with {len(t)} vertices written to {out}")
