"""Snake pseudo-metrics, contour distances of maps and exact GH/GHP distances."""

from dataclasses import dataclass
from fractions import Fraction
import itertools
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy import optimize
from scipy.sparse.csgraph import csgraph_from_dense, shortest_path

from .errors import DomainError, SizeCapError
from .maps import HalfEdgeMap, distance_matrix, mobile_correspondence
from .tree_core import (
    LabeledTypedTree,
    PathFunction,
    TreeLikePath,
    check_tree_like,
    contour_indices,
)

_logger = logging.getLogger(__name__)

MAX_EXACT_POINTS = 7


# -- snake pseudo-metrics --------------------------------------------------------------


def d_circ(Z: PathFunction, x: float, y: float) -> float:
    """D°(x, y) = Z(x) + Z(y) - 2 max(min over [x, y], min over the complementary arc)."""
    if x > y:
        x, y = y, x
    inside = Z.interval_min(x, y)
    outside = min(Z.interval_min(y, 1.0), Z.interval_min(0.0, x))
    return Z.at(x) + Z.at(y) - 2.0 * max(inside, outside)


def d_circ_matrix(Z: PathFunction, points: Sequence[float]) -> np.ndarray:
    n = len(points)
    out = np.zeros((n, n))
    for i, j in itertools.combinations(range(n), 2):
        out[i, j] = out[j, i] = d_circ(Z, points[i], points[j])
    return out


def d_star_grid(
    Z: PathFunction, points: Sequence[float], zero_tol: float = 1e-9
) -> np.ndarray:
    """Largest pseudo-metric below D° on the points that vanishes where D° ≤ zero_tol.

    Chains may hop at cost D° or jump for free between identified points, so
    the result is a shortest-path metric.
    """
    base = d_circ_matrix(Z, points)
    weights = np.where(base <= zero_tol, 0.0, base)
    np.fill_diagonal(weights, np.inf)
    graph = csgraph_from_dense(weights, null_value=np.inf)
    return shortest_path(graph, method="D", directed=False)


# -- contour distances of maps -------------------------------------------------------


def _contour_window_min(
    labels: Sequence, theta: Sequence[int], i: int, j: int
) -> Tuple:
    inside = min(labels[theta[k]] for k in range(i, j + 1))
    outside = min(
        min(labels[theta[k]] for k in range(j, len(theta))),
        min(labels[theta[k]] for k in range(0, i + 1)),
    )
    return inside, outside


def delta_circ(t: LabeledTypedTree, i: int, j: int) -> Fraction:
    """δ°(i, j) from labels along the contour, for type-1 corners i and j."""
    theta = [int(v) for v in contour_indices(t)]
    for k in (i, j):
        if not 0 <= k < len(theta) or t.types[theta[k]] != 1:
            raise DomainError(f"contour time {k} does not visit a type-1 vertex")
    if i > j:
        i, j = j, i
    labels = t.labels()
    inside, outside = _contour_window_min(labels, theta, i, j)
    return labels[theta[i]] + labels[theta[j]] - 2 * max(inside, outside) + 2


class ContourDistances:
    """δ and δ° between type-1 corners of the mobile of a pointed map."""

    def __init__(self, m: HalfEdgeMap, t: Optional[LabeledTypedTree] = None):
        if m.num_edges == 0:
            raise DomainError("the vertex map has no type-1 corners")
        tree, correspondence = mobile_correspondence(m)
        if t is not None and t != tree:
            raise DomainError("the tree is not the mobile of the map")
        self.map = m
        self.tree = tree
        self.distances = distance_matrix(m)
        self.map_vertex: Dict[int, int] = {i: v for v, i in correspondence.items()}
        self.theta = [int(v) for v in contour_indices(tree)]
        self.labels = tree.labels()

    @property
    def type1_times(self) -> List[int]:
        return [k for k, v in enumerate(self.theta) if self.tree.types[v] == 1]

    def _check(self, k: int) -> int:
        if not 0 <= k < len(self.theta) or self.tree.types[self.theta[k]] != 1:
            raise DomainError(f"contour time {k} does not visit a type-1 vertex")
        return self.map_vertex[self.theta[k]]

    def delta(self, i: int, j: int) -> int:
        return int(self.distances[self._check(i), self._check(j)])

    def delta_circ(self, i: int, j: int) -> Fraction:
        self._check(i)
        self._check(j)
        if i > j:
            i, j = j, i
        inside, outside = _contour_window_min(self.labels, self.theta, i, j)
        ends = self.labels[self.theta[i]] + self.labels[self.theta[j]]
        return ends - 2 * max(inside, outside) + 2

    def matrices(self) -> Tuple[np.ndarray, np.ndarray]:
        """(δ, δ°) over all pairs of type-1 contour times."""
        times = self.type1_times
        size = len(times)
        d = np.zeros((size, size))
        dc = np.zeros((size, size))
        for a, b in itertools.product(range(size), repeat=2):
            d[a, b] = self.delta(times[a], times[b])
            dc[a, b] = float(self.delta_circ(times[a], times[b]))
        return d, dc


def delta(m: HalfEdgeMap, t: LabeledTypedTree, i: int, j: int) -> int:
    """δ(i, j): graph distance in m between the vertices visited at contour times i and j."""
    return ContourDistances(m, t).delta(i, j)


@dataclass(frozen=True, eq=False)
class RescaledDistances:
    times: np.ndarray
    D: np.ndarray
    D_circ: np.ndarray


def rescaled_map_distance_matrix(
    m: HalfEdgeMap,
    t: Optional[LabeledTypedTree],
    scale: float,
    n: int,
    grid: Optional[int] = None,
) -> RescaledDistances:
    """(b / n^{1/4}) δ and δ° at type-1 contour times, optionally on a uniform grid.

    On a grid each point takes the last type-1 contour time at or before it.
    """
    if scale <= 0 or n <= 0:
        raise DomainError("scale and n must be positive")
    cd = ContourDistances(m, t)
    d, dc = cd.matrices()
    factor = scale / n**0.25
    times = np.asarray(cd.type1_times, dtype=float) / max(1, len(cd.theta) - 1)
    if grid is not None:
        points = np.linspace(0.0, 1.0, grid + 1)
        pick = np.clip(
            np.searchsorted(times, points, side="right") - 1, 0, len(times) - 1
        )
        d, dc, times = d[np.ix_(pick, pick)], dc[np.ix_(pick, pick)], points
    return RescaledDistances(times, factor * d, factor * dc)


# -- Brownian snake --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SnakeSample:
    e: PathFunction
    Z: PathFunction

    def check(self, tolerance: float = 1e-12) -> bool:
        return check_tree_like(TreeLikePath(self.e, self.Z, tolerance))


def excursion_walk(N: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform Dyck path of length N by the cycle lemma, as partial sums."""
    if N < 2 or N % 2:
        raise DomainError("the excursion grid needs an even N >= 2")
    half = N // 2
    steps = np.concatenate(
        (np.ones(half, dtype=np.int64), -np.ones(half + 1, dtype=np.int64))
    )
    steps = rng.permutation(steps)
    partial = np.cumsum(steps)
    # the rotation after the first minimum stays nonnegative until its last step
    start = int(np.argmin(partial)) + 1
    rotated = np.concatenate((steps[start:], steps[:start]))[:-1]
    return np.concatenate(([0], np.cumsum(rotated)))


def brownian_snake_sample(N: int, rng: np.random.Generator) -> SnakeSample:
    """Discrete Brownian snake on a grid of size N.

    Labels are Gaussian along the tree coded by the excursion, with variance
    equal to the rescaled height, so Cov(Z(s), Z(t)) is the minimum of e on
    [s, t] at every grid pair.
    """
    walk = excursion_walk(N, rng)
    unit = N**-0.5
    increments = rng.standard_normal(N // 2) * np.sqrt(unit)
    labels = np.zeros(N + 1)
    stack = [0.0]
    used = 0
    for k in range(1, N + 1):
        if walk[k] > walk[k - 1]:
            stack.append(stack[-1] + increments[used])
            used += 1
        else:
            stack.pop()
        labels[k] = stack[-1]
    return SnakeSample(PathFunction(walk * unit, excursion=True), PathFunction(labels))


# -- finite metric measure spaces ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FiniteMetricMeasureSpace:
    dist: np.ndarray
    weights: Optional[np.ndarray] = None
    tolerance: float = 1e-9

    def __post_init__(self):
        d = np.asarray(self.dist, dtype=float)
        n = d.shape[0]
        if d.ndim != 2 or d.shape != (n, n) or n == 0:
            raise DomainError("a distance matrix must be square and nonempty")
        symmetric = np.allclose(d, d.T, atol=self.tolerance)
        if not symmetric or np.any(np.abs(np.diag(d)) > self.tolerance):
            raise DomainError("distances must be symmetric with zero diagonal")
        if np.any(d[:, :, None] > d[:, None, :] + d.T[None, :, :] + self.tolerance):
            raise DomainError("distances violate the triangle inequality")
        if self.weights is None:
            w = np.full(n, 1.0 / n)
        else:
            w = np.asarray(self.weights, dtype=float)
        if w.shape != (n,) or np.any(w < 0) or abs(w.sum() - 1.0) > self.tolerance:
            raise DomainError("weights must be a probability vector over the points")
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.dist.shape[0]


def _compatibility(
    X: FiniteMetricMeasureSpace, Y: FiniteMetricMeasureSpace
) -> np.ndarray:
    """|dX(x, x') - dY(y, y')| indexed by pairs (x, y) and (x', y')."""
    gap = np.abs(X.dist[:, None, :, None] - Y.dist[None, :, None, :])
    return gap.reshape(len(X) * len(Y), len(X) * len(Y))


def _covering_cliques(
    X, Y, gap: np.ndarray, threshold: float, tol: float
) -> Iterable[List[int]]:
    nx_, ny = len(X), len(Y)
    graph = nx.Graph()
    graph.add_nodes_from(range(nx_ * ny))
    rows, cols = np.nonzero(gap <= threshold + tol)
    graph.add_edges_from((int(a), int(b)) for a, b in zip(rows, cols) if a < b)
    for clique in nx.find_cliques(graph):
        rows_hit = {c // ny for c in clique}
        cols_hit = {c % ny for c in clique}
        if rows_hit == set(range(nx_)) and cols_hit == set(range(ny)):
            yield clique


def _check_sizes(X, Y) -> None:
    if max(len(X), len(Y)) > MAX_EXACT_POINTS:
        raise SizeCapError(
            f"exact GH/GHP is capped at {MAX_EXACT_POINTS} points per space"
        )


def _thresholds(gap: np.ndarray) -> np.ndarray:
    return np.unique(np.round(gap, 12))


def gh_distance_exact(
    X: FiniteMetricMeasureSpace, Y: FiniteMetricMeasureSpace
) -> float:
    """Half the least distortion of a correspondence between X and Y."""
    _check_sizes(X, Y)
    gap = _compatibility(X, Y)
    for c in _thresholds(gap):
        if next(iter(_covering_cliques(X, Y, gap, c, X.tolerance)), None) is not None:
            return float(c) / 2.0
    raise DomainError("no correspondence found")


def _coupling_mass(X, Y, pairs: Sequence[int]) -> float:
    """Largest mass a coupling of the two measures can put on the given pairs."""
    ny = len(Y)
    size = len(X) * ny
    cost = np.zeros(size)
    cost[list(pairs)] = -1.0
    a_eq = np.zeros((len(X) + ny, size))
    for k in range(size):
        a_eq[k // ny, k] = 1.0
        a_eq[len(X) + k % ny, k] = 1.0
    b_eq = np.concatenate((X.weights, Y.weights))
    res = optimize.linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not res.success:
        raise DomainError(f"coupling LP failed: {res.message}")
    return float(-res.fun)


def ghp_distance_exact(
    X: FiniteMetricMeasureSpace, Y: FiniteMetricMeasureSpace
) -> float:
    """inf over common embeddings of max(Hausdorff, Prokhorov).

    A set of pairs can be brought within distance r by one embedding iff its
    distortion is at most 2r, so the value is the least max(c, 1 - mass) over
    thresholds c and maximal covering cliques of pairs compatible at 2c.
    """
    _check_sizes(X, Y)
    gap = _compatibility(X, Y)
    best = np.inf
    for c in _thresholds(gap):
        r = float(c) / 2.0
        if r >= best:
            break
        for clique in _covering_cliques(X, Y, gap, c, X.tolerance):
            best = min(best, max(r, 1.0 - _coupling_mass(X, Y, clique)))
    _logger.debug(
        "GHP distance %s between spaces of sizes %s and %s", best, len(X), len(Y)
    )
    return float(best)


def space_of_map(m: HalfEdgeMap, scale: float = 1.0) -> FiniteMetricMeasureSpace:
    """Vertices of m with graph distances times scale and the uniform measure."""
    return FiniteMetricMeasureSpace(scale * distance_matrix(m).astype(float))
