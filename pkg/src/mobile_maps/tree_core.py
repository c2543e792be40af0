"""Plane trees with vertex types and edge displacements, and their path encodings.

Vertices are stored in lexicographic Ulam-Harris order, which is the
depth-first preorder of the plane tree, so vertex ``i`` is ``v_i``. Edge
displacements and labels are kept doubled (``disp2``/``label2``) so that the
half-integer labels of mobiles stay exact integers.
"""

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
import logging
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, UnknownAddressError

_logger = logging.getLogger(__name__)

Address = Tuple[int, ...]
ROOT: Address = ()


def _half(x):
    if isinstance(x, (int, np.integer, Fraction)):
        return Fraction(int(x) if isinstance(x, np.integer) else x) / 2
    return x / 2


@dataclass(frozen=True)
class LabeledTypedTree:
    """A finite rooted plane tree with types and doubled edge displacements.

    ``types[i]`` and ``children[i]`` describe vertex ``v_i``; ``disp2[i]`` is
    twice the displacement of the edge from the parent of ``v_i`` to ``v_i``
    (0 at the root).
    """

    types: Tuple[int, ...]
    children: Tuple[int, ...]
    disp2: Tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(int(s) for s in self.types))
        object.__setattr__(self, "children", tuple(int(k) for k in self.children))
        n = len(self.children)
        disp2 = (
            tuple(int(x) if isinstance(x, np.integer) else x for x in self.disp2)
            if len(self.disp2)
            else (0,) * n
        )
        if len(disp2) == n - 1:
            disp2 = (0, *disp2)
        object.__setattr__(self, "disp2", disp2)
        if n == 0:
            raise DomainError("a tree has at least one vertex")
        if len(self.types) != n or len(self.disp2) != n:
            raise DomainError(
                f"types/children/disp2 lengths differ: "
                f"{len(self.types)}/{n}/{len(self.disp2)}"
            )
        if self.disp2[0] != 0:
            raise DomainError("the root carries no displacement")
        pending = 1
        for i, k in enumerate(self.children):
            if k < 0:
                raise DomainError(f"negative child count at vertex {i}")
            if pending <= 0:
                raise DomainError(f"vertex {i} lies outside the tree")
            pending += k - 1
        if pending != 0:
            raise DomainError("child counts do not close the tree")

    # -- structure ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self.children)

    @property
    def size(self) -> int:
        return len(self.children)

    @cached_property
    def _links(self) -> Tuple[Tuple[int, ...], Tuple[Tuple[int, ...], ...]]:
        n = len(self)
        parent = [-1] * n
        kids: List[List[int]] = [[] for _ in range(n)]
        stack = []
        for i, k in enumerate(self.children):
            if stack:
                p = stack[-1]
                parent[i] = p
                kids[p].append(i)
                if len(kids[p]) == self.children[p]:
                    stack.pop()
            if k > 0:
                stack.append(i)
        return tuple(parent), tuple(tuple(c) for c in kids)

    @property
    def parent(self) -> Tuple[int, ...]:
        return self._links[0]

    @property
    def kids(self) -> Tuple[Tuple[int, ...], ...]:
        return self._links[1]

    @cached_property
    def depth(self) -> np.ndarray:
        depth = np.zeros(len(self), dtype=np.int64)
        for i in range(1, len(self)):
            depth[i] = depth[self.parent[i]] + 1
        return depth

    @cached_property
    def addresses(self) -> Tuple[Address, ...]:
        out: List[Address] = [ROOT] * len(self)
        for v, cs in enumerate(self.kids):
            for j, c in enumerate(cs, start=1):
                out[c] = (*out[v], j)
        return tuple(out)

    @cached_property
    def index_of(self) -> Dict[Address, int]:
        return {a: i for i, a in enumerate(self.addresses)}

    def address(self, i: int) -> Address:
        return self.addresses[i]

    def vertex(self, address: Sequence[int]) -> int:
        """Vertex index of an Ulam-Harris address."""
        try:
            return self.index_of[tuple(address)]
        except KeyError as e:
            raise UnknownAddressError(tuple(address)) from e

    def ctype(self, i: int) -> Tuple[int, ...]:
        return tuple(self.types[c] for c in self.kids[i])

    @property
    def height(self) -> int:
        return int(self.depth.max())

    @cached_property
    def label2(self) -> Tuple:
        lab = [0] * len(self)
        for i in range(1, len(self)):
            lab[i] = lab[self.parent[i]] + self.disp2[i]
        return tuple(lab)

    def labels(self) -> Tuple:
        """Labels ℓ(v) in real units (exact for integer or rational storage)."""
        return tuple(_half(x) for x in self.label2)

    def displacements(self) -> Tuple:
        return tuple(_half(x) for x in self.disp2)

    def max_abs_displacement(self):
        """Largest absolute edge displacement, doubled."""
        if len(self) == 1:
            return 0
        return max(abs(x) for x in self.disp2[1:])

    def with_disp2(self, disp2: Sequence) -> "LabeledTypedTree":
        return LabeledTypedTree(self.types, self.children, tuple(disp2))

    def shape(self) -> "LabeledTypedTree":
        """The same tree with all displacements zero."""
        return LabeledTypedTree(self.types, self.children)

    def canonical_key(self) -> str:
        """Preorder serialization of (type, k, doubled displacement) triples."""
        return ";".join(
            f"{s},{k},{d}" for s, k, d in zip(self.types, self.children, self.disp2)
        )

    # -- distances -----------------------------------------------------------

    def lca(self, u: int, v: int) -> int:
        depth, parent = self.depth, self.parent
        while depth[u] > depth[v]:
            u = parent[u]
        while depth[v] > depth[u]:
            v = parent[v]
        while u != v:
            u, v = parent[u], parent[v]
        return u

    def tree_distance(self, u: int, v: int) -> int:
        w = self.lca(u, v)
        return int(self.depth[u] + self.depth[v] - 2 * self.depth[w])

    def tree_path(self, u: int, v: int) -> List[int]:
        """Vertices of the path from u to v, both ends included."""
        w = self.lca(u, v)
        up = [u]
        while up[-1] != w:
            up.append(self.parent[up[-1]])
        down = [v]
        while down[-1] != w:
            down.append(self.parent[down[-1]])
        return up + down[-2::-1]

    def path_displacements(self, u: int, v: int) -> List:
        """Doubled displacements of the edges of ⟦u,v⟧ in visiting order."""
        path = self.tree_path(u, v)
        out = []
        for a, b in zip(path, path[1:]):
            child = a if self.parent[a] == b else b
            out.append(self.disp2[child])
        return out

    def neighbours(self, v: int) -> List[int]:
        out = list(self.kids[v])
        if self.parent[v] >= 0:
            out.append(self.parent[v])
        return out

    def bfs_distances(
        self, source: int, radius: Optional[int] = None
    ) -> Dict[int, int]:
        dist = {source: 0}
        queue = deque([source])
        while queue:
            x = queue.popleft()
            if radius is not None and dist[x] >= radius:
                continue
            for y in self.neighbours(x):
                if y not in dist:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        return dist

    # -- constructors ----------------------------------------------------------

    @classmethod
    def from_adjacency(
        cls,
        root: Hashable,
        children: Mapping[Hashable, Sequence[Hashable]],
        types: Mapping[Hashable, int],
        disp2: Optional[Mapping[Hashable, object]] = None,
    ) -> Tuple["LabeledTypedTree", List[Hashable]]:
        """Build a tree from ordered child lists keyed by arbitrary node ids.

        Returns the tree and the node ids in vertex order.
        """
        order: List[Hashable] = []
        stack = [root]
        while stack:
            node = stack.pop()
            order.append(node)
            stack.extend(reversed(list(children.get(node, ()))))
        tree = cls(
            types=[types[x] for x in order],
            children=[len(children.get(x, ())) for x in order],
            disp2=[0] + [(disp2 or {}).get(x, 0) for x in order[1:]],
        )
        return tree, order

    @classmethod
    def single(cls, type_: int = 1) -> "LabeledTypedTree":
        return cls(types=(type_,), children=(0,))


def format_tree(t: LabeledTypedTree) -> str:
    """Multi-line rendering used in log messages and CLI output."""
    lines = []
    labels = t.labels()
    for i in range(len(t)):
        lab = labels[i]
        lines.append(f"{'  ' * int(t.depth[i])}[{t.types[i]}] ℓ={lab}")
    return "\n".join(lines)


# -- path functions ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PathFunction:
    """Piecewise-linear function on [0, 1] stored on a uniform grid of size N."""

    values: np.ndarray
    excursion: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise DomainError("a path function needs at least two grid values")
        object.__setattr__(self, "values", values)
        if self.excursion and (
            values[0] != 0 or values[-1] != 0 or bool(np.any(values < 0))
        ):
            raise DomainError("excursion must start and end at 0 and stay nonnegative")

    @property
    def N(self) -> int:
        return self.values.size - 1

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.N + 1)

    def __call__(self, x):
        return np.interp(x, self.grid, self.values)

    def at(self, x: float) -> float:
        _check_unit(x)
        return float(np.interp(x, self.grid, self.values))

    def interval_min(self, x: float, y: float) -> float:
        """Exact minimum over [x, y]: endpoint values and interior grid points."""
        if x > y:
            x, y = y, x
        lo = int(np.floor(x * self.N)) + 1
        hi = int(np.ceil(y * self.N)) - 1
        m = min(self.at(x), self.at(y))
        if lo <= hi:
            m = min(m, float(self.values[lo : hi + 1].min()))
        return m

    def sup_abs(self) -> float:
        return float(np.abs(self.values).max())

    def scaled(self, factor: float) -> "PathFunction":
        return PathFunction(self.values * factor, self.excursion and factor >= 0)


def _check_unit(x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"argument {x} outside [0, 1]")


@dataclass(frozen=True, eq=False)
class TreeLikePath:
    zeta: PathFunction
    f: PathFunction
    tolerance: float = 0.0


# -- contour exploration --------------------------------------------------------


def contour_indices(t: LabeledTypedTree) -> np.ndarray:
    """θ(0..2|t|-2) as vertex indices."""
    seq = [0]
    stack = [(0, iter(t.kids[0]))]
    while stack:
        v, it = stack[-1]
        c = next(it, None)
        if c is None:
            stack.pop()
            if stack:
                seq.append(stack[-1][0])
        else:
            seq.append(c)
            stack.append((c, iter(t.kids[c])))
    return np.asarray(seq, dtype=np.int64)


def contour_exploration(t: LabeledTypedTree) -> List[Address]:
    return [t.addresses[i] for i in contour_indices(t)]


def first_visit_indices(t: LabeledTypedTree) -> np.ndarray:
    """Contour time of the first visit of each vertex."""
    theta = contour_indices(t)
    first = np.full(len(t), -1, dtype=np.int64)
    for i, v in enumerate(theta):
        if first[v] < 0:
            first[v] = i
    return first


def _along_contour(t: LabeledTypedTree, per_vertex) -> PathFunction:
    if len(t) == 1:
        return PathFunction(np.zeros(2))
    theta = contour_indices(t)
    return PathFunction(np.asarray(per_vertex, dtype=float)[theta])


def contour_process(t: LabeledTypedTree) -> PathFunction:
    if len(t) == 1:
        return PathFunction(np.zeros(2), excursion=True)
    return PathFunction(t.depth[contour_indices(t)].astype(float), excursion=True)


def label_process(t: LabeledTypedTree) -> PathFunction:
    return _along_contour(t, [float(x) for x in t.labels()])


def height_lex_processes(t: LabeledTypedTree) -> Tuple[PathFunction, PathFunction]:
    """(H, S) on the grid of size |t|, wrapping back to the root at 1."""
    h = np.append(t.depth.astype(float), 0.0)
    s = np.append(np.asarray([float(x) for x in t.labels()]), 0.0)
    return PathFunction(h, excursion=True), PathFunction(s)


def type_count_process(t: LabeledTypedTree, q: int) -> PathFunction:
    """Λ^(q): number of first visits of type-q vertices strictly before each time."""
    if len(t) == 1:
        return PathFunction(np.zeros(2))
    theta = contour_indices(t)
    seen = np.zeros(len(t), dtype=bool)
    hits = np.zeros(theta.size, dtype=float)
    for i, v in enumerate(theta):
        if not seen[v]:
            seen[v] = True
            hits[i] = 1.0 if t.types[v] == q else 0.0
    return PathFunction(np.concatenate(([0.0], np.cumsum(hits)[:-1])))


def dist_on_contour(C: PathFunction, x: float, y: float) -> float:
    _check_unit(x)
    _check_unit(y)
    return C.at(x) + C.at(y) - 2.0 * C.interval_min(x, y)


def vertex_at(t: LabeledTypedTree, y: float) -> Address:
    """v(t, y): the deeper of θ(⌊Ny⌋) and θ(⌊Ny⌋+1)."""
    return t.addresses[vertex_index_at(t, y)]


def vertex_index_at(t: LabeledTypedTree, y: float) -> int:
    if len(t) < 2:
        raise DomainError("vertex_at needs a tree with a non-root vertex")
    if not 0.0 <= y < 1.0:
        raise DomainError(f"argument {y} outside [0, 1)")
    theta = contour_indices(t)
    n = theta.size - 1
    i = min(int(np.floor(n * y)), n - 1)
    a, b = int(theta[i]), int(theta[i + 1])
    return a if t.depth[a] > t.depth[b] else b


# -- height to contour time change ------------------------------------------------


def lex_time_change(t: LabeledTypedTree) -> Tuple[np.ndarray, PathFunction]:
    """j(i) = 2i - h(v_i), j(|t|) = 2|t|-2, and φ sampled on the contour grid."""
    n = len(t)
    if n < 2:
        raise DomainError("time change needs at least two vertices")
    j = np.append(2 * np.arange(n) - t.depth, 2 * n - 2).astype(np.int64)
    big_n = 2 * n - 2
    phi = (np.searchsorted(j, np.arange(big_n + 1), side="right") - 1) / n
    return j, PathFunction(phi)


@dataclass(frozen=True)
class TimeChangeDeviation:
    contour: float
    label: float
    drift: float
    contour_bound: float
    drift_bound: float
    alpha: int


def consecutive_lex_distances(t: LabeledTypedTree) -> np.ndarray:
    """dist_t(v_i, v_{i+1}) for 0 <= i < |t|, with v_{|t|} = v_0."""
    n = len(t)
    depth = t.depth
    out = np.empty(n, dtype=np.int64)
    # the parent of v_{i+1} is an ancestor of v_i
    out[: n - 1] = depth[: n - 1] - depth[1:] + 2
    out[n - 1] = depth[n - 1]
    return out


def time_change_deviation(t: LabeledTypedTree) -> TimeChangeDeviation:
    """Exact sup deviations between contour-time and lexicographic-time encodings.

    On each cell [k/N, (k+1)/N) the time change is constant, so the suprema are
    attained at the cell endpoints.
    """
    n = len(t)
    j, phi = lex_time_change(t)
    big_n = 2 * n - 2
    idx = np.rint(phi.values * n).astype(np.int64)
    H, S = height_lex_processes(t)
    C = contour_process(t).values
    Z = label_process(t).values
    h_at, s_at = H.values[idx], S.values[idx]

    def cellwise(process, target):
        left = np.abs(process[:-1] - target[:-1])
        right = np.abs(process[1:] - target[:-1])
        return float(max(left.max(), right.max(), abs(process[-1] - target[-1])))

    grid = np.arange(big_n + 1) / big_n
    drift = max(
        float(np.abs(phi.values[:-1] - grid[:-1]).max()),
        float(np.abs(phi.values[:-1] - grid[1:]).max()),
    )
    alpha = 2 + int(consecutive_lex_distances(t).max())
    return TimeChangeDeviation(
        contour=cellwise(C, h_at),
        label=cellwise(Z, s_at),
        drift=big_n * drift,
        contour_bound=float(alpha),
        drift_bound=float(4 + t.height),
        alpha=alpha,
    )


def label_oscillation(t: LabeledTypedTree, radius: int) -> float:
    """max |ℓ(u) - ℓ(v)| over pairs at tree distance at most radius."""
    labels = np.asarray([float(x) for x in t.labels()])
    best = 0.0
    for u in range(len(t)):
        ball = list(t.bfs_distances(u, radius))
        best = max(best, float(np.abs(labels[ball] - labels[u]).max()))
    return best


def check_tree_like(p: TreeLikePath) -> bool:
    """Endpoint conditions plus Dist_ζ ≤ tol ⇒ |f(x)-f(y)| ≤ tol on the ζ grid."""
    tol = p.tolerance
    z = p.zeta.values
    f = p.f(p.zeta.grid)
    if max(abs(z[0]), abs(z[-1]), abs(f[0]), abs(f[-1])) > tol:
        return False
    for i in range(z.size):
        running_min = np.minimum.accumulate(z[i:])
        dist = z[i] + z[i:] - 2.0 * running_min
        close = dist <= tol
        if bool(np.any(np.abs(f[i:][close] - f[i]) > tol)):
            _logger.debug("tree-like check failed at grid index %s", i)
            return False
    return True


def tree_grid_distance_matrix(t: LabeledTypedTree) -> np.ndarray:
    """dist_t(θ(i), θ(j)) by breadth-first search, for cross-checking Dist_C."""
    theta = contour_indices(t)
    per_vertex = np.zeros((len(t), len(t)), dtype=np.int64)
    for v in range(len(t)):
        for w, d in t.bfs_distances(v).items():
            per_vertex[v, w] = d
    return per_vertex[np.ix_(theta, theta)]
