"""Rooted pointed planar maps, Boltzmann weights and the mobile bijection.

Maps are rotation systems on half-edges. ``alpha`` pairs the two halves of an
edge and ``sigma`` turns counterclockwise around a vertex, so the orbits of
``sigma∘alpha`` walk around each face with the face on the right, that is
clockwise. A half-edge is written ``h: u -> w`` with ``u`` its origin.

The mobile of a pointed map labels every vertex by its distance to the
pointed vertex and links each face to the corners that are followed, in
clockwise order, by a smaller label. Edges between equal labels carry a flag
vertex. Labels in the mobile are doubled so that flags stay integral.
"""

from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property, lru_cache
import itertools
import logging
from typing import (
    Any,
    Callable,
    Collection,
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Tuple,
    Union,
)

import networkx as nx
import numpy as np

from .distribution import FiniteDistribution
from .errors import (
    DomainError,
    InvalidMapError,
    InvalidMobileError,
    InvalidParamsError,
    SizeCapError,
)
from .laws import (
    MobileParams,
    has_odd_face,
    labeling_law,
    mobile_displacements,
    mobile_law,
    solve_constants,
    valid_sample,
)
from .tree_core import LabeledTypedTree, contour_indices, first_visit_indices

_logger = logging.getLogger(__name__)

MAX_ENUMERATION_EDGES = 6
SIGNS = ("+", "0", "-")

_STEP2 = {1: 2, 2: 1}
_LABEL_CLASS = {1: 0, 2: 1, 3: 0, 4: 1}


@dataclass(frozen=True)
class HalfEdgeMap:
    """A rooted planar map, optionally pointed.

    Half-edges are ``0..2E-1``; ``root`` is the root half-edge ``e- -> e+``
    and ``point`` the id of the distinguished vertex. Vertex ids number the
    ``sigma`` orbits by their smallest half-edge. The vertex map has no
    half-edge, one vertex and one face of degree 0.
    """

    alpha: Tuple[int, ...] = ()
    sigma: Tuple[int, ...] = ()
    root: Optional[int] = None
    point: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(int(x) for x in self.alpha))
        object.__setattr__(self, "sigma", tuple(int(x) for x in self.sigma))
        n = len(self.alpha)
        if len(self.sigma) != n or n % 2:
            raise InvalidMapError("alpha and sigma need the same even length")
        if sorted(self.sigma) != list(range(n)):
            raise InvalidMapError("sigma is not a permutation of the half-edges")
        for h, g in enumerate(self.alpha):
            if not 0 <= g < n or g == h or self.alpha[g] != h:
                raise InvalidMapError(
                    f"alpha is not a fixed-point-free involution at {h}"
                )
        if n == 0:
            if self.root is not None:
                raise InvalidMapError("the vertex map has no root edge")
        elif self.root is None or not 0 <= self.root < n:
            raise InvalidMapError(f"root {self.root} is not a half-edge")
        if self.point is not None and not 0 <= self.point < self.num_vertices:
            raise InvalidMapError(f"pointed vertex {self.point} does not exist")
        if n and not self._connected():
            raise InvalidMapError("the map is not connected")
        euler = self.num_vertices - self.num_edges + self.num_faces
        if euler != 2:
            raise InvalidMapError(
                f"V - E + F = {euler}, the rotation system is not planar"
            )

    def _connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            h = stack.pop()
            for g in (self.alpha[h], self.sigma[h]):
                if g not in seen:
                    seen.add(g)
                    stack.append(g)
        return len(seen) == len(self.alpha)

    # -- structure ---------------------------------------------------------------

    @property
    def num_edges(self) -> int:
        return len(self.alpha) // 2

    @property
    def half_edges(self) -> range:
        return range(len(self.alpha))

    @cached_property
    def sigma_inv(self) -> Tuple[int, ...]:
        inv = [0] * len(self.sigma)
        for h, g in enumerate(self.sigma):
            inv[g] = h
        return tuple(inv)

    def phi(self, h: int) -> int:
        """Next half-edge along the face on the right of h."""
        return self.sigma[self.alpha[h]]

    @staticmethod
    def _orbits(
        step: Callable[[int], int], n: int
    ) -> Tuple[List[Tuple[int, ...]], Tuple[int, ...]]:
        owner = [-1] * n
        orbits = []
        for h in range(n):
            if owner[h] >= 0:
                continue
            orbit = []
            g = h
            while owner[g] < 0:
                owner[g] = len(orbits)
                orbit.append(g)
                g = step(g)
            orbits.append(tuple(orbit))
        return orbits, tuple(owner)

    @cached_property
    def _vertex_orbits(self):
        return self._orbits(lambda h: self.sigma[h], len(self.sigma))

    @cached_property
    def _face_orbits(self):
        return self._orbits(self.phi, len(self.alpha))

    @property
    def rotations(self) -> List[Tuple[int, ...]]:
        """Half-edges around each vertex in counterclockwise order."""
        return self._vertex_orbits[0]

    @property
    def vertex_of(self) -> Tuple[int, ...]:
        return self._vertex_orbits[1]

    @property
    def faces(self) -> List[Tuple[int, ...]]:
        """Half-edges of each face in clockwise order."""
        return self._face_orbits[0]

    @property
    def face_of(self) -> Tuple[int, ...]:
        return self._face_orbits[1]

    @property
    def num_vertices(self) -> int:
        return max(1, len(self.rotations))

    @property
    def num_faces(self) -> int:
        return max(1, len(self.faces))

    def origin(self, h: int) -> int:
        return self.vertex_of[h]

    def target(self, h: int) -> int:
        return self.vertex_of[self.alpha[h]]

    def edges(self) -> List[Tuple[int, int]]:
        return [
            (self.origin(h), self.target(h))
            for h in self.half_edges
            if h < self.alpha[h]
        ]

    def to_graph(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        graph.add_nodes_from(range(self.num_vertices))
        graph.add_edges_from(self.edges())
        return graph

    # -- variants ------------------------------------------------------------------

    def with_root(self, h: Optional[int]) -> "HalfEdgeMap":
        return replace(self, root=h)

    def with_point(self, v: Optional[int]) -> "HalfEdgeMap":
        return replace(self, point=v)

    def mirror(self) -> "HalfEdgeMap":
        """Orientation reversal: the same map seen from the other side of the sphere."""
        return HalfEdgeMap(self.alpha, self.sigma_inv, self.root, self.point)

    def _discovery_order(self, root: int) -> List[int]:
        order = [root]
        seen = {root}
        i = 0
        while i < len(order):
            h = order[i]
            i += 1
            for g in (self.alpha[h], self.sigma[h]):
                if g not in seen:
                    seen.add(g)
                    order.append(g)
        return order

    def canonical_code(self, root: Optional[int] = None) -> Tuple[int, ...]:
        """Equal for two maps iff they are isomorphic as rooted (pointed) maps.

        ``root`` computes the code of the same map rerooted at that half-edge.
        """
        point = -1 if self.point is None else self.point
        if not self.alpha:
            return (point,)
        order = self._discovery_order(self.root if root is None else root)
        num = {h: i for i, h in enumerate(order)}
        code = []
        for h in order:
            code.append(num[self.alpha[h]])
            code.append(num[self.sigma[h]])
        if self.point is not None:
            point = min(num[h] for h in self.rotations[self.point])
        code.append(point)
        return tuple(code)

    def canonical_form(self) -> "HalfEdgeMap":
        """The same map with half-edges renumbered in root-first discovery order."""
        if not self.alpha:
            return self
        order = self._discovery_order(self.root)
        num = {h: i for i, h in enumerate(order)}
        alpha = [0] * len(order)
        sigma = [0] * len(order)
        for h, i in num.items():
            alpha[i] = num[self.alpha[h]]
            sigma[i] = num[self.sigma[h]]
        out = HalfEdgeMap(alpha, sigma, 0)
        if self.point is not None:
            out = out.with_point(out.vertex_of[num[self.rotations[self.point][0]]])
        return out


VERTEX_MAP = HalfEdgeMap()


# -- weights ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightSeq:
    """Face weights q_j with finite support; integer and Fraction weights stay exact."""

    q: Tuple[Tuple[int, Any], ...]

    @classmethod
    def of(cls, q: Union["WeightSeq", Mapping]) -> "WeightSeq":
        if isinstance(q, WeightSeq):
            return q
        out = {}
        for d, w in q.items():
            d = int(d)
            if isinstance(w, str):
                w = Fraction(w)
            if d < 1:
                raise InvalidParamsError(f"face degree {d} must be positive")
            if w < 0:
                raise InvalidParamsError(f"weight q_{d} is negative")
            if w != 0:
                out[d] = w
        return cls(tuple(sorted(out.items())))

    def weight(self, degree: int):
        return dict(self.q).get(degree, 0)

    @property
    def support(self) -> frozenset:
        return frozenset(d for d, _ in self.q)

    @property
    def exact(self) -> bool:
        return all(not isinstance(w, float) for _, w in self.q)

    def as_dict(self) -> Dict[int, Any]:
        return dict(self.q)

    def has_odd_face(self) -> bool:
        return bool(self.q) and has_odd_face(self.as_dict())


def face_degrees(m: HalfEdgeMap) -> Tuple[int, ...]:
    """Sorted face degrees; the vertex map has a single face of degree 0."""
    if not m.alpha:
        return (0,)
    return tuple(sorted(len(f) for f in m.faces))


def boltzmann_weight(m: HalfEdgeMap, q) -> Any:
    """W_q(m), the product of q over face degrees, with W_q(†) = 1."""
    if not m.alpha:
        return 1
    weights = WeightSeq.of(q)
    out = 1
    for d in face_degrees(m):
        out *= weights.weight(d)
    return out


def partition_function(q, maps: Iterable[HalfEdgeMap]) -> Any:
    return sum((boltzmann_weight(m, q) for m in maps), 0)


def boltzmann_law(q, maps: Iterable[HalfEdgeMap]) -> FiniteDistribution:
    """Exact law W_q(m)/Z over the given maps, keyed by canonical code."""
    weights = WeightSeq.of(q)
    if not weights.exact:
        raise DomainError("exact Boltzmann laws need integer or Fraction weights")
    law = FiniteDistribution(
        (m.canonical_code(), boltzmann_weight(m, weights)) for m in maps
    )
    if not law:
        raise DomainError("every map has zero Boltzmann weight")
    return law.normalized()


# -- distances and signs ---------------------------------------------------------------


def bfs_distance(m: HalfEdgeMap, v: int) -> np.ndarray:
    """Graph distances from vertex v to every vertex."""
    if not 0 <= v < m.num_vertices:
        raise DomainError(f"vertex {v} does not exist")
    lengths = nx.single_source_shortest_path_length(m.to_graph(), v)
    out = np.zeros(m.num_vertices, dtype=np.int64)
    for w, d in lengths.items():
        out[w] = d
    return out


def distance_matrix(m: HalfEdgeMap) -> np.ndarray:
    out = np.zeros((m.num_vertices, m.num_vertices), dtype=np.int64)
    for v, lengths in nx.all_pairs_shortest_path_length(m.to_graph()):
        for w, d in lengths.items():
            out[v, w] = d
    return out


def _require_point(m: HalfEdgeMap) -> int:
    if m.point is None:
        raise DomainError("the map has no pointed vertex")
    return m.point


def classify_sign(m: HalfEdgeMap) -> str:
    """'+', '0' or '-' as the root edge moves away from, along or towards the pointed vertex."""
    point = _require_point(m)
    if not m.alpha:
        return "+"
    d = bfs_distance(m, point)
    step = int(d[m.target(m.root)] - d[m.origin(m.root)])
    return {1: "+", 0: "0", -1: "-"}[step]


def reverse_root(m: HalfEdgeMap) -> HalfEdgeMap:
    if not m.alpha:
        raise DomainError("the vertex map has no root edge to reverse")
    return m.with_root(m.alpha[m.root])


# -- mobiles ---------------------------------------------------------------------------


def check_mobile(t: LabeledTypedTree, sign: str = "+") -> None:
    """Raise InvalidMobileError naming the first violated clause of the mobile definition."""
    if sign not in ("+", "0"):
        raise DomainError(f"mobiles exist for signs + and 0, not {sign!r}")
    types = t.types
    if any(s not in (1, 2, 3, 4) for s in types):
        raise InvalidMobileError("types", "vertex types must lie in 1..4")
    if sign == "+" and types[0] != 1:
        raise InvalidMobileError(
            "root", "a positive mobile is rooted at a type-1 vertex"
        )
    if sign == "0" and (types[0] != 2 or t.ctype(0) != (4, 4)):
        raise InvalidMobileError(
            "(iii)", "a null mobile has a type-2 root with two type-4 children"
        )
    for v in range(len(t)):
        even = int(t.depth[v]) % 2 == 0
        if even != (types[v] in (1, 2)):
            raise InvalidMobileError(
                "(i)", f"vertex {v} of type {types[v]} at depth {t.depth[v]}"
            )
        if types[v] == 1 and any(s != 3 for s in t.ctype(v)):
            raise InvalidMobileError(
                "(ii)", f"type-1 vertex {v} has a child not of type 3"
            )
        if types[v] == 2 and v != 0 and t.ctype(v) != (4,):
            raise InvalidMobileError(
                "(iii)", f"type-2 vertex {v} needs exactly one type-4 child"
            )
    labels = []
    for v, x in enumerate(t.label2):
        x = Fraction(x)
        if x.denominator != 1:
            raise InvalidMobileError(
                "(1)", f"vertex {v} has a label off the half-integer grid"
            )
        labels.append(int(x))
    shift = _LABEL_CLASS[types[0]]
    clause = "(1)" if types[0] == 1 else "(2)"
    for v, x in enumerate(labels):
        if (x - _LABEL_CLASS[types[v]] + shift) % 2:
            raise InvalidMobileError(
                clause, f"vertex {v} of type {types[v]} has the wrong label parity"
            )
    for u in range(len(t)):
        if types[u] not in (3, 4):
            continue
        if t.disp2[u] != 0:
            raise InvalidMobileError(
                "(4)", f"face vertex {u} differs in label from its parent"
            )
        ring = [t.parent[u], *t.kids[u], t.parent[u]]
        for prev, nxt in zip(ring, ring[1:]):
            if labels[nxt] < labels[prev] - _STEP2[types[nxt]]:
                raise InvalidMobileError(
                    "(3)", f"labels drop too fast around face vertex {u}"
                )


def _mobile_of(m: HalfEdgeMap) -> Tuple[LabeledTypedTree, Dict[int, int]]:
    point = _require_point(m)
    if not m.alpha:
        return LabeledTypedTree.single(1), {}
    sign = classify_sign(m)
    if sign == "-":
        raise InvalidMapError("negative maps have no mobile; reverse the root first")
    ell = bfs_distance(m, point)
    step = [int(ell[m.target(h)] - ell[m.origin(h)]) for h in m.half_edges]

    # cyclic lists of the half-edges carrying mobile edges, in clockwise order
    ring: Dict[Tuple[str, int], List[int]] = {}
    for f, face in enumerate(m.faces):
        ring[("f", f)] = [h for h in face if step[h] <= 0]
    for v, rot in enumerate(m.rotations):
        if v != point:
            ring[("v", v)] = [h for h in reversed(rot) if step[h] == -1]
    for h in m.half_edges:
        if step[h] == 0 and h < m.alpha[h]:
            ring[("e", h)] = [h, m.alpha[h]]

    def across(node, h):
        face = ("f", m.face_of[h])
        if node != face:
            return face
        if step[h] == -1:
            return ("v", m.origin(h))
        return ("e", min(h, m.alpha[h]))

    def own_label(node) -> int:
        kind, x = node
        if kind == "v":
            return 2 * int(ell[x]) - base
        return 2 * int(ell[m.origin(x)]) + 1 - base

    r = m.root
    if sign == "+":
        root = ("v", m.target(r))
        keys = ring[root]
        i = keys.index(m.alpha[r])
        first = keys[i:] + keys[:i]
        base = 2 * int(ell[m.target(r)])
        types = {root: 1}
    else:
        root = ("e", min(r, m.alpha[r]))
        first = [m.alpha[r], r]
        base = 2 * int(ell[m.origin(r)]) + 1
        types = {root: 2}
    label2 = {root: 0}
    disp2 = {}
    children = {}
    stack = [(root, first)]
    while stack:
        node, keys = stack.pop()
        children[node] = []
        for h in keys:
            child = across(node, h)
            if child in types:
                raise InvalidMapError(f"mobile construction revisited {child}")
            if child[0] == "f":
                types[child] = 3 if types[node] == 1 else 4
                label2[child] = label2[node]
            else:
                types[child] = 1 if child[0] == "v" else 2
                label2[child] = own_label(child)
            disp2[child] = label2[child] - label2[node]
            children[node].append(child)
            around = ring[child]
            j = around.index(h)
            stack.append((child, around[j + 1 :] + around[:j]))
    if len(types) != len(ring):
        raise InvalidMapError(f"mobile spans {len(types)} of {len(ring)} vertices")
    tree, order = LabeledTypedTree.from_adjacency(root, children, types, disp2)
    index = {node: i for i, node in enumerate(order)}
    return tree, {v: index[("v", v)] for v in range(m.num_vertices) if v != point}


def bdg_forward(m: HalfEdgeMap) -> LabeledTypedTree:
    """The mobile of a positive or null pointed rooted map."""
    return _mobile_of(m)[0]


def mobile_correspondence(m: HalfEdgeMap) -> Tuple[LabeledTypedTree, Dict[int, int]]:
    """The mobile of m and the tree index of every non-pointed vertex of m."""
    return _mobile_of(m)


def _map_of(t: LabeledTypedTree, sign: str) -> Tuple[HalfEdgeMap, Dict[int, int]]:
    check_mobile(t, sign)
    if len(t) == 1:
        return VERTEX_MAP.with_point(0), {}
    theta = [int(v) for v in contour_indices(t)[:-1]]
    size = len(theta)
    types = t.types
    labels = [int(x) for x in t.label2]
    slots: Dict[int, List[int]] = defaultdict(list)
    for pos, v in enumerate(theta):
        if types[v] == 1:
            slots[labels[v]].append(pos)
    floors = []
    if slots:
        floors.append(min(slots) - 2)
    flag_labels = [labels[v] for v in range(len(t)) if types[v] == 2]
    if flag_labels:
        floors.append(min(flag_labels) - 1)
    point_label = min(floors)

    # successor of each labeled corner; -1 stands for the pointed vertex
    succ: Dict[int, int] = {}
    for pos, v in enumerate(theta):
        if types[v] not in (1, 2):
            continue
        want = labels[v] - _STEP2[types[v]]
        candidates = slots.get(want)
        if candidates:
            succ[pos] = candidates[bisect_right(candidates, pos) % len(candidates)]
        elif want == point_label:
            succ[pos] = -1
        else:
            raise InvalidMobileError(
                "successor", f"no corner labeled {Fraction(want, 2)}"
            )

    alpha: List[int] = []
    down: Dict[int, int] = {}
    arriving: Dict[int, int] = {}
    flag_corners: Dict[int, List[int]] = defaultdict(list)
    for pos in sorted(succ):
        if types[theta[pos]] == 1:
            down[pos], arriving[pos] = len(alpha), len(alpha) + 1
            alpha.extend((len(alpha) + 1, len(alpha)))
        else:
            flag_corners[theta[pos]].append(pos)
    for corners in flag_corners.values():
        p, q = corners
        arriving[p], arriving[q] = len(alpha), len(alpha) + 1
        alpha.extend((len(alpha) + 1, len(alpha)))

    preds: Dict[int, List[int]] = defaultdict(list)
    for p, s in succ.items():
        preds[s].append(p)
    corners_of: Dict[int, List[int]] = defaultdict(list)
    for pos in down:
        corners_of[theta[pos]].append(pos)

    rings = []
    for v, own in corners_of.items():
        around = []
        for s in sorted(own, reverse=True):
            around.append(down[s])
            around.extend(
                arriving[p] for p in sorted(preds[s], key=lambda p: (p - s) % size)
            )
        rings.append((v, around))
    point_ring = [arriving[p] for p in sorted(preds[-1])]
    if not point_ring:
        raise InvalidMobileError("successor", "no corner reaches the pointed vertex")
    sigma = [0] * len(alpha)
    for around in [a for _, a in rings] + [point_ring]:
        for i, h in enumerate(around):
            sigma[h] = around[(i + 1) % len(around)]
    try:
        m = HalfEdgeMap(alpha, sigma, arriving[0])
    except InvalidMapError as e:
        raise InvalidMobileError("bijection", str(e)) from e
    m = m.with_point(m.vertex_of[point_ring[0]])
    return m, {v: m.vertex_of[around[0]] for v, around in rings}


def bdg_inverse(t: LabeledTypedTree, sign: str = "+") -> HalfEdgeMap:
    """Rebuild the pointed rooted map of a mobile by successor chaining around its contour."""
    return _map_of(t, sign)[0]


def inverse_correspondence(
    t: LabeledTypedTree, sign: str = "+"
) -> Tuple[HalfEdgeMap, Dict[int, int]]:
    """bdg_inverse plus the map vertex of every type-1 tree vertex."""
    return _map_of(t, sign)


def l_check(t: LabeledTypedTree, u: int, v: int):
    """Minimal label on the contour from the first visit of u to the first visit of v."""
    theta = contour_indices(t)
    first = first_visit_indices(t)
    labels = t.labels()
    iu, iv = int(first[u]), int(first[v])
    if iu <= iv:
        window = theta[iu : iv + 1]
    else:
        window = np.concatenate((theta[iu:], theta[: iv + 1]))
    return min(labels[int(w)] for w in window)


def distance_upper_bound(t: LabeledTypedTree, u: int, v: int):
    """ℓ(u) + ℓ(v) - 2 max(ℓ̌(u, v), ℓ̌(v, u)) + 2 for type-1 vertices u, v."""
    labels = t.labels()
    return labels[u] + labels[v] - 2 * max(l_check(t, u, v), l_check(t, v, u)) + 2


def distance_from_labels(t: LabeledTypedTree, v: int):
    """Distance to the pointed vertex read off the labels: ℓ(v) - min ℓ + 1 over type-1 vertices."""
    labels = t.labels()
    low = min(labels[w] for w in range(len(t)) if t.types[w] == 1)
    return labels[v] - low + 1


# -- enumeration -----------------------------------------------------------------------


def _insertions(m: HalfEdgeMap) -> Iterator[HalfEdgeMap]:
    """Every map obtained by adding a pendant edge or a chord inside one face."""
    n = len(m.alpha)
    a, b = n, n + 1
    if n == 0:
        yield HalfEdgeMap((1, 0), (0, 1), 0)
        yield HalfEdgeMap((1, 0), (1, 0), 0)
        return
    alpha = list(m.alpha) + [b, a]

    def inserted(after: Dict[int, List[int]]) -> List[int]:
        sigma = list(m.sigma) + [a, b]
        for h, new in after.items():
            chain = [h, *new, m.sigma[h]]
            for x, y in zip(chain, chain[1:]):
                sigma[x] = y
        return sigma

    for h in m.half_edges:
        sigma = inserted({h: [a]})
        sigma[b] = b
        yield HalfEdgeMap(alpha, sigma, m.root)
    by_face: Dict[int, List[int]] = defaultdict(list)
    for h in m.half_edges:
        by_face[m.face_of[m.sigma[h]]].append(h)
    for corners in by_face.values():
        for h in corners:
            yield HalfEdgeMap(alpha, inserted({h: [a, b]}), m.root)
        for h, g in itertools.combinations(corners, 2):
            yield HalfEdgeMap(alpha, inserted({h: [a], g: [b]}), m.root)


def _degree_filter(face_degree_filter) -> Callable[[Tuple[int, ...]], bool]:
    if face_degree_filter is None:
        return lambda degrees: True
    if callable(face_degree_filter):
        return face_degree_filter
    allowed = frozenset(int(d) for d in face_degree_filter)
    return lambda degrees: all(d in allowed for d in degrees)


def enumerate_maps(max_edges: int, face_degree_filter=None) -> List[HalfEdgeMap]:
    """All rooted planar maps with at most max_edges edges, one per isomorphism class.

    ``face_degree_filter`` is a collection of allowed degrees or a predicate
    on the sorted face degrees. Maps come back in canonical numbering.
    """
    if max_edges > MAX_ENUMERATION_EDGES:
        raise SizeCapError(
            f"map enumeration is capped at {MAX_ENUMERATION_EDGES} edges"
        )
    if max_edges < 0:
        raise DomainError("max_edges must be nonnegative")
    keep = _degree_filter(face_degree_filter)
    out = [VERTEX_MAP] if keep(face_degrees(VERTEX_MAP)) else []
    level = [VERTEX_MAP]
    for edges in range(1, max_edges + 1):
        unrooted: Dict[Tuple, HalfEdgeMap] = {}
        for m in level:
            for child in _insertions(m):
                key = min(child.canonical_code(h) for h in child.half_edges)
                unrooted.setdefault(key, child)
        level = list(unrooted.values())
        rooted: Dict[Tuple, HalfEdgeMap] = {}
        for m in level:
            for h in m.half_edges:
                rooted.setdefault(m.canonical_code(h), (m, h))
        found = [m.with_root(h).canonical_form() for m, h in rooted.values()]
        _logger.debug("%s rooted maps with %s edges", len(found), edges)
        out.extend(r for r in found if keep(face_degrees(r)))
    return out


def pointed_maps(
    maps: Iterable[HalfEdgeMap],
    sign: Optional[str] = None,
    n_vertices: Optional[int] = None,
) -> List[HalfEdgeMap]:
    """Every pointing of every map, optionally restricted by sign and vertex count."""
    out = []
    for m in maps:
        if n_vertices is not None and m.num_vertices != n_vertices:
            continue
        for v in range(m.num_vertices):
            pm = m.with_point(v)
            if sign is None or classify_sign(pm) == sign:
                out.append(pm)
    return out


def mobile_face_degrees(t: LabeledTypedTree) -> Tuple[int, ...]:
    """Degree of the face behind each face vertex: twice its type-1 neighbours plus its flags."""
    out = []
    for u in range(len(t)):
        if t.types[u] not in (3, 4):
            continue
        neighbours = [t.types[w] for w in t.neighbours(u)]
        out.append(2 * neighbours.count(1) + neighbours.count(2))
    return tuple(sorted(out))


def mobile_vertex_count(t: LabeledTypedTree) -> int:
    """Vertices of the encoded map: type-1 vertices plus the pointed one."""
    if len(t) == 1:
        return 1
    return sum(1 for s in t.types if s == 1) + 1


def _nested_tree(node) -> LabeledTypedTree:
    types, children = [], []
    stack = [node]
    while stack:
        type_, kids = stack.pop()
        types.append(type_)
        children.append(len(kids))
        stack.extend(reversed(kids))
    return LabeledTypedTree(types, children)


def _mobile_shapes(max_edges: int, sign: str, allowed: Optional[Collection[int]]):
    def degree_ok(d: int) -> bool:
        return allowed is None or d in allowed

    @lru_cache(maxsize=None)
    def subtrees(type_: int, budget: int) -> Tuple:
        out = []
        if type_ == 1:
            for k in range(budget // 2 + 1):
                out.extend(
                    ((1, kids), used) for kids, used in forests((3,) * k, budget)
                )
        elif type_ == 2:
            out.extend(((2, kids), used) for kids, used in forests((4,), budget))
        else:
            base = 2 if type_ == 3 else 1
            for d in range(base, budget + 1):
                if not degree_ok(d):
                    continue
                for width in range(d - base + 1):
                    for ctype in itertools.product((1, 2), repeat=width):
                        if 2 * ctype.count(1) + ctype.count(2) + base != d:
                            continue
                        for kids, used in forests(ctype, budget - d):
                            out.append(((type_, kids), used + d))
        return tuple(out)

    @lru_cache(maxsize=None)
    def forests(types: Tuple[int, ...], budget: int) -> Tuple:
        if not types:
            return (((), 0),)
        out = []
        for first, used in subtrees(types[0], budget):
            for rest, more in forests(types[1:], budget - used):
                out.append(((first, *rest), used + more))
        return tuple(out)

    budget = 2 * max_edges
    if sign == "+":
        roots = subtrees(1, budget)
    else:
        roots = tuple(((2, kids), used) for kids, used in forests((4, 4), budget))
    for node, _ in roots:
        yield _nested_tree(node)


def enumerate_mobiles(
    max_edges: int,
    sign: str = "+",
    q_support: Optional[Collection[int]] = None,
    max_type1: Optional[int] = None,
) -> List[LabeledTypedTree]:
    """Every mobile encoding a map with at most max_edges edges, labelings included.

    Shapes are generated by face degree; each shape then carries all of its
    admissible labelings.
    """
    if sign not in ("+", "0"):
        raise DomainError(f"mobiles exist for signs + and 0, not {sign!r}")
    allowed = None if q_support is None else frozenset(int(d) for d in q_support)
    family = mobile_displacements()
    out = []
    for shape in _mobile_shapes(max_edges, sign, allowed):
        if max_type1 is not None and sum(1 for s in shape.types if s == 1) > max_type1:
            continue
        out.extend(labeling_law(shape, family))
    return out


# -- sampling --------------------------------------------------------------------------


def boltzmann_sample(
    q,
    n_vertices: int,
    sign: str,
    rng: np.random.Generator,
    params: Optional[MobileParams] = None,
    require_odd: bool = False,
) -> HalfEdgeMap:
    """A pointed rooted map with n_vertices vertices and law proportional to W_q.

    The mobile is drawn from its conditioned Galton-Watson law with uniform
    admissible labels and turned into a map; negative maps reverse the root
    of a positive one.
    """
    weights = WeightSeq.of(q)
    if require_odd and not weights.has_odd_face():
        raise InvalidParamsError("q needs some odd face degree p >= 3 with q_p > 0")
    if sign not in SIGNS:
        raise DomainError(f"sign must be one of {SIGNS}, not {sign!r}")
    if n_vertices < 1:
        raise DomainError("a map has at least one vertex")
    if sign == "-" and n_vertices == 1:
        raise DomainError("no negative map has a single vertex")
    if params is None:
        params = solve_constants({d: float(w) for d, w in weights.q})
    mobile_sign = "0" if sign == "0" else "+"
    t = valid_sample(mobile_law(params, n_vertices, mobile_sign), rng)
    m = bdg_inverse(t, mobile_sign)
    if sign == "-":
        m = reverse_root(m)
    if m.num_vertices != n_vertices:
        raise InvalidMobileError(
            "size", f"sampled map has {m.num_vertices} vertices, expected {n_vertices}"
        )
    return m
