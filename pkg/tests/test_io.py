"""Tests for mobile_maps.io module."""

from fractions import Fraction

import numpy as np
import pytest

from mobile_maps.distribution import FiniteDistribution
from mobile_maps.errors import DomainError, InvalidMapError
from mobile_maps.harness import TestReport
from mobile_maps.io import (
    format_map,
    outcome_key,
    parse_map,
    read_distribution,
    read_map,
    read_matrix,
    read_params,
    read_path_function,
    read_reports,
    read_snake,
    read_tree,
    write_distribution,
    write_map,
    write_matrix,
    write_params,
    write_path_function,
    write_reports,
    write_snake,
    write_tree,
)
from mobile_maps.laws import solve_constants
from mobile_maps.metrics import brownian_snake_sample
from mobile_maps.tree_core import LabeledTypedTree, contour_process


def test_tree_json_keeps_exact_displacements(temp_project_dir):
    """Test that integer and fractional displacements survive a file."""
    t = LabeledTypedTree((1, 2, 1), (2, 0, 0), (0, Fraction(2, 3), -3))
    path = temp_project_dir / "tree.json"
    write_tree(t, path)
    assert '"2/3"' in path.read_text()
    back = read_tree(path)
    assert back == t
    assert back.labels()[1] == Fraction(1, 3)


def test_tree_json_errors(temp_project_dir):
    """Test malformed JSON, a non-object and missing keys."""
    path = temp_project_dir / "bad.json"
    path.write_text('{"types": [1],\n "children": [0,]}')
    with pytest.raises(DomainError, match="line 2"):
        read_tree(path)
    path.write_text("[1, 2]")
    with pytest.raises(DomainError, match="JSON object"):
        read_tree(path)
    path.write_text('{"types": [1]}')
    with pytest.raises(DomainError, match="children"):
        read_tree(path)


def test_path_function_csv(small_tree, temp_project_dir):
    """Test that a contour written to CSV reads back on the same grid."""
    C = contour_process(small_tree)
    path = temp_project_dir / "contour.csv"
    write_path_function(C, path)
    assert path.read_text().splitlines()[0] == "s,value"
    np.testing.assert_array_equal(read_path_function(path).values, C.values)


def test_path_function_csv_errors(temp_project_dir):
    """Test the header check and row-level parse errors."""
    path = temp_project_dir / "p.csv"
    path.write_text("t,value\n0,0\n1,0\n")
    with pytest.raises(DomainError, match="line 1"):
        read_path_function(path)
    path.write_text("s,value\n0,0\n0.5,abc\n1,0\n")
    with pytest.raises(DomainError, match="line 3"):
        read_path_function(path)
    path.write_text("s,value\n0,0\n")
    with pytest.raises(DomainError, match="two rows"):
        read_path_function(path)


def test_snake_csv(rng, temp_project_dir):
    """Test that both snake coordinates are stored."""
    snake = brownian_snake_sample(16, rng)
    path = temp_project_dir / "snake.csv"
    write_snake(snake, path)
    back = read_snake(path)
    np.testing.assert_array_equal(back.e.values, snake.e.values)
    np.testing.assert_array_equal(back.Z.values, snake.Z.values)


def test_map_text_format(single_edge_map, temp_project_dir):
    """Test the line-oriented map format with and without a point."""
    assert format_map(single_edge_map).splitlines() == [
        "E 1",
        "alpha 1 0",
        "rot 0 1",
        "root 0",
        "point -1",
    ]
    pointed = single_edge_map.with_point(1)
    path = temp_project_dir / "map.txt"
    write_map(pointed, path)
    assert read_map(path) == pointed


@pytest.mark.parametrize(
    "text,match",
    [
        ("E 1\nalpha 1 0\nrot 0 1\nroot 0\nlabel 3\n", "line 5"),
        ("E 1\nalpha 1 x\nrot 0 1\nroot 0\npoint -1\n", "line 2"),
        ("E 1\nalpha 1 0\nrot 0 1\nroot 0\n", "point"),
        ("E 2\nalpha 1 0\nrot 0 1\nroot 0\npoint -1\n", "E 2"),
        ("E 1\nalpha 0 1\nrot 0 1\nroot 0\npoint -1\n", "involution"),
    ],
)
def test_map_parse_errors(text, match):
    """Test that parse errors name the offending line or record."""
    with pytest.raises(InvalidMapError, match=match):
        parse_map(text)


def test_distribution_csv(temp_project_dir):
    """Test exact weights in the key,numerator,denominator format."""
    law = FiniteDistribution({(1, 2): "1/3", (0, 0): "2/3"})
    path = temp_project_dir / "law.csv"
    write_distribution(law, path)
    lines = path.read_text().splitlines()
    assert lines == ["key,numerator,denominator", "0 0,2,3", "1 2,1,3"]
    assert read_distribution(path) == law.pushforward(outcome_key)


def test_distribution_csv_errors(temp_project_dir):
    """Test a wrong header and a zero denominator."""
    path = temp_project_dir / "law.csv"
    path.write_text("key,weight\na,1\n")
    with pytest.raises(DomainError, match="expected header"):
        read_distribution(path)
    path.write_text("key,numerator,denominator\na,1,0\n")
    with pytest.raises(DomainError, match="line 2"):
        read_distribution(path)


def test_matrix_csv(temp_project_dir):
    """Test square matrices and the squareness check."""
    path = temp_project_dir / "d.csv"
    d = np.array([[0.0, 1.5], [1.5, 0.0]])
    write_matrix(d, path)
    np.testing.assert_array_equal(read_matrix(path), d)
    path.write_text("0,1\n1,0\n2,2\n")
    with pytest.raises(DomainError, match="square"):
        read_matrix(path)


def test_params_json(temp_project_dir):
    """Test that solved constants are stored and reloaded."""
    params = solve_constants({4: 1})
    path = temp_project_dir / "params.json"
    write_params(params, path)
    back = read_params(path)
    assert back.Zplus == pytest.approx(params.Zplus)
    assert back.alpha == pytest.approx(params.alpha)


def test_reports_json(temp_project_dir):
    """Test report lists, the pass flag on disk and a single-object file."""
    reports = [
        TestReport("a", "exact", 0, 0, sizes={"n": 3}),
        TestReport("b", "KS", 0.0001, 0.001, seed=5),
    ]
    path = temp_project_dir / "out" / "reports.json"
    write_reports(reports, path)
    assert read_reports(path) == reports
    assert '"pass": false' in path.read_text()
    path.write_text(
        '{"name": "c", "mode": "tolerance", "statistic": 0.1, "threshold": 1}'
    )
    assert read_reports(path)[0].passed
