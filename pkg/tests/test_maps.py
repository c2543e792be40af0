"""Tests for mobile_maps.maps module."""

from collections import Counter
import itertools

import numpy as np
import pytest
from scipy import stats

from mobile_maps.errors import (
    DomainError,
    InvalidMapError,
    InvalidMobileError,
    InvalidParamsError,
)
from mobile_maps.laws import solve_constants
from mobile_maps.maps import (
    VERTEX_MAP,
    HalfEdgeMap,
    bdg_forward,
    bdg_inverse,
    bfs_distance,
    boltzmann_law,
    boltzmann_sample,
    boltzmann_weight,
    check_mobile,
    classify_sign,
    distance_from_labels,
    distance_matrix,
    distance_upper_bound,
    enumerate_maps,
    enumerate_mobiles,
    face_degrees,
    mobile_correspondence,
    mobile_face_degrees,
    mobile_vertex_count,
    pointed_maps,
    reverse_root,
)
from mobile_maps.tree_core import LabeledTypedTree


@pytest.fixture(scope="module")
def small_maps():
    """Every rooted planar map with at most three edges."""
    return enumerate_maps(3)


def test_map_counts(small_maps):
    """Test the numbers of rooted planar maps with 0 to 3 edges."""
    counts = Counter(m.num_edges for m in small_maps)
    assert [counts[e] for e in range(4)] == [1, 2, 9, 54]


def test_face_degree_filter():
    """Test that only the rooted paths of length two have a single face of degree 4."""
    maps = enumerate_maps(2, {4})
    assert len(maps) == 2
    assert all(m.num_vertices == 3 and face_degrees(m) == (4,) for m in maps)


def test_enumeration_bounds():
    """Test the argument checks of the enumerator."""
    with pytest.raises(DomainError):
        enumerate_maps(-1)


def test_structure_of_small_maps(single_edge_map, loop_map):
    """Test vertex, face and degree bookkeeping."""
    assert (single_edge_map.num_vertices, single_edge_map.num_faces) == (2, 1)
    assert face_degrees(single_edge_map) == (2,)
    assert (loop_map.num_vertices, loop_map.num_faces) == (1, 2)
    assert face_degrees(loop_map) == (1, 1)
    assert face_degrees(VERTEX_MAP) == (0,)


def test_bfs_distance(single_edge_map, loop_map):
    """Test graph distances from a vertex and the vertex range check."""
    assert sorted(bfs_distance(single_edge_map, 0)) == [0, 1]
    assert list(bfs_distance(loop_map, 0)) == [0]
    with pytest.raises(DomainError):
        bfs_distance(single_edge_map, 2)


@pytest.mark.parametrize(
    "alpha,sigma,root",
    [
        ((0, 1), (0, 1), 0),
        ((1, 0), (0, 0), 0),
        ((1, 0, 3, 2), (2, 3, 1, 0), 0),
        ((1, 0), (0, 1), None),
    ],
)
def test_invalid_rotation_systems(alpha, sigma, root):
    """Test fixed points of alpha, non-permutations, the torus and a missing root."""
    with pytest.raises(InvalidMapError):
        HalfEdgeMap(alpha, sigma, root)


def test_canonical_code_is_root_invariant_under_symmetry(single_edge_map):
    """Test that both rootings of the single edge are isomorphic."""
    assert single_edge_map.canonical_code() == single_edge_map.canonical_code(1)
    pointed_at_root = single_edge_map.with_point(0)
    assert single_edge_map.canonical_code() != pointed_at_root.canonical_code()


def test_signs_and_root_reversal(single_edge_map):
    """Test root signs relative to the pointed vertex."""
    towards_root = single_edge_map.with_point(0)
    away = single_edge_map.with_point(1)
    assert classify_sign(towards_root) == "+"
    assert classify_sign(away) == "-"
    assert classify_sign(reverse_root(away)) == "+"
    with pytest.raises(DomainError):
        classify_sign(single_edge_map)


def test_negative_maps_have_no_mobile(single_edge_map):
    """Test that the forward bijection refuses negative maps."""
    with pytest.raises(InvalidMapError):
        bdg_forward(single_edge_map.with_point(1))


def test_mobile_of_single_edge(single_edge_map):
    """Test the mobile of the single edge: one vertex and its face."""
    t = bdg_forward(single_edge_map.with_point(0))
    assert t.types == (1, 3)
    assert t.children == (1, 0)
    assert mobile_face_degrees(t) == (2,)
    assert mobile_vertex_count(t) == 2


def test_vertex_map_mobile():
    """Test that the vertex map encodes as the single type-1 vertex."""
    t = bdg_forward(VERTEX_MAP.with_point(0))
    assert t == LabeledTypedTree.single(1)
    assert bdg_inverse(t).num_vertices == 1


@pytest.mark.parametrize("sign", ["+", "0"])
def test_round_trip_on_small_maps(small_maps, sign):
    """Test that every positive or null pointed map is rebuilt from its mobile."""
    for m in pointed_maps(small_maps, sign=sign):
        t = bdg_forward(m)
        check_mobile(t, sign)
        assert bdg_inverse(t, sign).canonical_code() == m.canonical_code()


@pytest.mark.parametrize("sign", ["+", "0"])
def test_mobile_cardinality(small_maps, sign):
    """Test that pointed maps and enumerated mobiles are equinumerous."""
    assert len(enumerate_mobiles(3, sign)) == len(pointed_maps(small_maps, sign=sign))


def test_distances_from_labels(small_maps):
    """Test distances to the pointed vertex and the label bound between vertices."""
    for m in pointed_maps(small_maps, sign="+"):
        t, corr = mobile_correspondence(m)
        d = distance_matrix(m)
        for v, i in corr.items():
            assert distance_from_labels(t, i) == d[v, m.point]
        for (u, i), (v, j) in itertools.combinations(corr.items(), 2):
            assert d[u, v] <= distance_upper_bound(t, i, j)


def test_mirror_keeps_distances(small_maps):
    """Test that orientation reversal keeps graph distances."""
    for m in small_maps:
        np.testing.assert_array_equal(distance_matrix(m), distance_matrix(m.mirror()))


def test_check_mobile_clauses():
    """Test that broken mobiles name the violated clause."""
    with pytest.raises(InvalidMobileError) as exc_info:
        check_mobile(LabeledTypedTree((3,), (0,)), "+")
    assert exc_info.value.clause == "root"
    with pytest.raises(InvalidMobileError) as exc_info:
        check_mobile(LabeledTypedTree((1, 1), (1, 0)), "+")
    assert exc_info.value.clause == "(ii)"
    with pytest.raises(DomainError):
        check_mobile(LabeledTypedTree.single(), "-")


def test_boltzmann_weights(loop_map):
    """Test W_q as a product over faces."""
    assert boltzmann_weight(loop_map, {1: 3}) == 9
    assert boltzmann_weight(VERTEX_MAP, {1: 3}) == 1
    law = boltzmann_law({4: 1}, enumerate_maps(2, {4}))
    assert sorted(law.values()) == [0.5, 0.5]


def test_boltzmann_law_needs_exact_weights(small_maps):
    """Test that float weights are refused for exact laws."""
    with pytest.raises(DomainError):
        boltzmann_law({4: 0.5}, small_maps)


def test_boltzmann_sample_signs(rng):
    """Test vertex counts, face degrees and signs of sampled quadrangulations."""
    for sign in ("+", "-"):
        m = boltzmann_sample({4: 1}, 6, sign, rng)
        assert m.num_vertices == 6
        assert set(face_degrees(m)) == {4}
        assert classify_sign(m) == sign


def test_boltzmann_sample_argument_checks(rng):
    """Test the odd-degree requirement and impossible sizes."""
    with pytest.raises(InvalidParamsError):
        boltzmann_sample({4: 1}, 5, "+", rng, require_odd=True)
    with pytest.raises(DomainError):
        boltzmann_sample({4: 1}, 1, "-", rng)
    with pytest.raises(DomainError):
        boltzmann_sample({4: 1}, 5, "?", rng)


@pytest.mark.slow
def test_boltzmann_sample_matches_exact_law(rng):
    """Test sampled triangulations with three vertices against the exact Boltzmann law."""
    maps = pointed_maps(enumerate_maps(3, {3}), sign="+", n_vertices=3)
    law = boltzmann_law({3: 1}, maps)
    codes = sorted(law)
    draws = 2000
    params = solve_constants({3: 1})
    counts = Counter(
        boltzmann_sample({3: 1}, 3, "+", rng, params).canonical_code()
        for _ in range(draws)
    )
    assert set(counts) <= set(codes)
    observed = [counts[c] for c in codes]
    expected = [float(law[c]) * draws for c in codes]
    assert stats.chisquare(observed, expected).pvalue > 0.001
