"""Valid laws, multitype Galton-Watson trees and the mobile offspring laws.

Displacement vectors are expressed in real units (tuples of Fractions);
trees store them doubled.
"""

from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import itertools
import logging
import math
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .distribution import FiniteDistribution, as_fraction
from .errors import (
    ConvergenceError,
    DomainError,
    EnumerationOverflowError,
    ExhaustionError,
    InvalidParamsError,
    MissingEntryError,
    OverflowSignal,
)
from .symmetry import apply_permutation, iter_restricted_perms
from .tree_core import LabeledTypedTree

_logger = logging.getLogger(__name__)

Key = Tuple[int, Tuple[int, ...]]


def _check_probability(
    law: FiniteDistribution, what: str, tolerance: float = 0.0
) -> None:
    if tolerance:
        off = abs(float(law.total - 1)) > tolerance
    else:
        off = law.total != 1
    if off:
        raise DomainError(f"{what}: weights sum to {float(law.total)}, not 1")


# -- displacement families -------------------------------------------------------


class DisplacementFamily(Mapping):
    """(parent type r, child types s) -> law of the displacement vector.

    A ``factory`` supplies entries on demand for infinite key sets (mobiles).
    """

    def __init__(
        self,
        entries: Optional[Mapping[Key, FiniteDistribution]] = None,
        factory: Optional[Callable[[int, Tuple[int, ...]], FiniteDistribution]] = None,
    ):
        self._entries: Dict[Key, FiniteDistribution] = {}
        self._factory = factory
        for (r, s), law in (entries or {}).items():
            self._store((int(r), tuple(s)), law)

    def _store(self, key: Key, law: FiniteDistribution) -> FiniteDistribution:
        _, s = key
        law = FiniteDistribution(
            {tuple(as_fraction(x) for x in point): w for point, w in law.items()}
        )
        for point in law:
            if len(point) != len(s):
                raise DomainError(f"vector {point} does not match child types {s}")
        _check_probability(law, f"displacement law {key}")
        self._entries[key] = law
        return law

    def __getitem__(self, key: Key) -> FiniteDistribution:
        key = (int(key[0]), tuple(key[1]))
        if key in self._entries:
            return self._entries[key]
        if self._factory is not None:
            return self._store(key, self._factory(*key))
        raise MissingEntryError(key)

    def __contains__(self, key) -> bool:
        key = (int(key[0]), tuple(key[1]))
        return key in self._entries or self._factory is not None

    def __iter__(self):
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def law_for(self, parent_type: int, ctype: Tuple[int, ...]) -> FiniteDistribution:
        if not ctype:
            return FiniteDistribution.point(())
        return self[(parent_type, ctype)]


def _apply_order(p: Sequence[int], seq: Sequence) -> tuple:
    """σ(seq) with σ(i) = p[i]: position p[i] receives seq[i]."""
    out = [None] * len(seq)
    for i, x in enumerate(seq):
        out[p[i]] = x
    return tuple(out)


def _symmetrized_entry(
    fam: DisplacementFamily, r: int, s: Tuple[int, ...]
) -> FiniteDistribution:
    k = len(s)
    perms = list(itertools.permutations(range(k)))
    parts = []
    for p in perms:
        permuted = _apply_order(p, s)
        if (r, permuted) not in fam:
            raise MissingEntryError((r, permuted))
        law = fam[(r, permuted)]
        parts.append(
            (
                Fraction(1, len(perms)),
                law.pushforward(lambda y, p=p: tuple(y[p[i]] for i in range(k))),
            )
        )
    return FiniteDistribution.mix(parts)


def symmetrize_family(fam: DisplacementFamily) -> DisplacementFamily:
    """π^sym_s(x) = (1/k!) Σ_σ π_{σ(s)}(σ(x)), exactly."""
    out = {(r, s): _symmetrized_entry(fam, r, s) for r, s in list(fam)}
    factory = None
    if fam._factory is not None:
        factory = lambda r, s: _symmetrized_entry(fam, r, s)  # noqa: E731
    return DisplacementFamily(out, factory=factory)


def centering_check(fam: DisplacementFamily, mode: str = "local") -> bool:
    """Locally centered: every coordinate mean vanishes.

    Centered: for each parent type and child-type count class, the coordinate
    means summed over the class vanish.
    """
    if mode == "local":
        return all(all(m == 0 for m in fam[key].mean()) for key in fam if key[1])
    if mode == "centered":
        return all(v == 0 for v in class_sums(fam).values())
    raise DomainError(f"unknown centering mode {mode!r}")


def count_class(s: Sequence[int]) -> Tuple[Tuple[int, int], ...]:
    return tuple(sorted(Counter(s).items()))


def class_sums(fam: DisplacementFamily) -> Dict[Tuple, Fraction]:
    sums: Dict[Tuple, Fraction] = {}
    for r, s in fam:
        if not s:
            continue
        cls = (r, count_class(s))
        sums[cls] = sums.get(cls, Fraction(0)) + sum(fam[(r, s)].mean(), Fraction(0))
    return sums


# -- offspring families ------------------------------------------------------------


class OffspringFamily:
    """p^s: law of the ordered child-type vector of a type-s vertex."""

    def __init__(self, laws: Mapping[int, FiniteDistribution], tolerance: float = 0.0):
        self.laws: Dict[int, FiniteDistribution] = {
            int(s): FiniteDistribution({tuple(v): w for v, w in law.items()})
            for s, law in laws.items()
        }
        for s, law in self.laws.items():
            _check_probability(law, f"offspring law of type {s}", tolerance)
        self.check_permutation_invariance()

    def check_permutation_invariance(self) -> None:
        """Every reordering of a supported vector must carry the same weight."""
        for s, law in self.laws.items():
            orbits: Dict[Tuple[int, ...], List[Fraction]] = {}
            for v, w in law.items():
                orbits.setdefault(tuple(sorted(v)), []).append(w)
            for key, weights in orbits.items():
                size = _multinomial(*Counter(key).values())
                if len(weights) != size or len(set(weights)) > 1:
                    raise DomainError(
                        f"offspring law of type {s} "
                        f"is not permutation invariant at {key}"
                    )

    @property
    def types(self) -> Tuple[int, ...]:
        return tuple(sorted(self.laws))

    def sample(self, type_: int, rng: np.random.Generator) -> Tuple[int, ...]:
        return self.laws[type_].sample(rng)

    def table(self, type_: int) -> FiniteDistribution:
        return self.laws[type_]


def gw_sample(
    off: OffspringFamily,
    root_type: int,
    rng: np.random.Generator,
    vertex_cap: int,
    root_law: Optional[FiniteDistribution] = None,
    stop_type: Optional[Tuple[int, int]] = None,
) -> LabeledTypedTree:
    """Breadth-first Galton-Watson generation.

    Raises OverflowSignal when the population passes vertex_cap, or when the
    count of type ``stop_type[0]`` passes ``stop_type[1]``.
    """
    if vertex_cap < 1:
        raise DomainError("vertex_cap must be at least 1")
    types = [root_type]
    children: Dict[int, List[int]] = {}
    queue = deque([0])
    watched = 1 if stop_type is not None and root_type == stop_type[0] else 0
    while queue:
        v = queue.popleft()
        if v == 0 and root_law is not None:
            ctype = root_law.sample(rng)
        else:
            ctype = off.sample(types[v], rng)
        if len(types) + len(ctype) > vertex_cap:
            raise OverflowSignal(len(types) + len(ctype))
        ids = []
        for c in ctype:
            ids.append(len(types))
            types.append(c)
            if stop_type is not None and c == stop_type[0]:
                watched += 1
        if stop_type is not None and watched > stop_type[1]:
            raise OverflowSignal(len(types))
        children[v] = ids
        queue.extend(ids)
    tree, _ = LabeledTypedTree.from_adjacency(0, children, dict(enumerate(types)))
    return tree


def gw_sample_conditioned(
    off: OffspringFamily,
    root_type: int,
    target: Tuple[int, int],
    rng: np.random.Generator,
    attempt_cap: int,
    vertex_cap: int = 100_000,
    root_law: Optional[FiniteDistribution] = None,
) -> LabeledTypedTree:
    """Rejection sampling until exactly target[1] vertices have type target[0]."""
    q, m = target
    if m < 0 or attempt_cap < 1:
        raise DomainError("need m >= 0 and attempt_cap >= 1")
    for attempt in range(1, attempt_cap + 1):
        try:
            tree = gw_sample(
                off, root_type, rng, vertex_cap, root_law, stop_type=(q, m)
            )
        except OverflowSignal:
            continue
        if sum(1 for s in tree.types if s == q) == m:
            _logger.debug("conditioned GW accepted after %s attempts", attempt)
            return tree
    raise ExhaustionError(
        f"no tree with {m} vertices of type {q} in {attempt_cap} attempts", attempt_cap
    )


def gw_sample_sized(
    off: OffspringFamily,
    root_type: int,
    size: int,
    rng: np.random.Generator,
    attempt_cap: int,
) -> LabeledTypedTree:
    """Rejection sampling conditioned on the total number of vertices."""
    for attempt in range(1, attempt_cap + 1):
        try:
            tree = gw_sample(off, root_type, rng, size)
        except OverflowSignal:
            continue
        if len(tree) == size:
            _logger.debug("sized GW accepted after %s attempts", attempt)
            return tree
    raise ExhaustionError(
        f"no tree of size {size} in {attempt_cap} attempts", attempt_cap
    )


# -- valid laws ------------------------------------------------------------------------


@dataclass
class ValidLaw:
    """Symmetric shape law plus a displacement family.

    The shape law is either explicit (``shapes``: FiniteDistribution over
    zero-displacement trees) or Galton-Watson (``offspring`` + ``root_type``),
    optionally conditioned on the size or on a type count.
    """

    displacements: DisplacementFamily
    shapes: Optional[FiniteDistribution] = None
    offspring: Optional[OffspringFamily] = None
    root_type: int = 1
    root_law: Optional[FiniteDistribution] = None
    size: Optional[int] = None
    type_count: Optional[Tuple[int, int]] = None
    name: str = "law"
    attempt_cap: int = 100_000
    vertex_cap: int = 100_000
    shape_sampler: Optional[Callable[[np.random.Generator], LabeledTypedTree]] = field(
        default=None, repr=False
    )

    def __post_init__(self):
        if (self.shapes is None) == (self.offspring is None):
            raise DomainError("a valid law needs exactly one of shapes or offspring")
        if self.shapes is not None:
            _check_probability(self.shapes, f"shape law of {self.name}")

    def check_symmetric(self) -> bool:
        """Every σ-reordering of a shape carries the same probability."""
        if self.shapes is None:
            return True
        for shape, w in self.shapes.items():
            for sigma in iter_restricted_perms(shape):
                if self.shapes.prob(apply_permutation(shape, sigma)) != w:
                    return False
        return True

    def check_coverage(self) -> bool:
        """Every realizable (type, ctype) with children has a displacement law."""
        if self.shapes is None:
            return True
        for shape in self.shapes:
            for v in range(len(shape)):
                ctype = shape.ctype(v)
                if ctype and (shape.types[v], ctype) not in self.displacements:
                    return False
        return True

    def sample_shape(self, rng: np.random.Generator) -> LabeledTypedTree:
        if self.shape_sampler is not None:
            return self.shape_sampler(rng)
        if self.shapes is not None:
            return self.shapes.sample(rng)
        if self.type_count is not None:
            return gw_sample_conditioned(
                self.offspring,
                self.root_type,
                self.type_count,
                rng,
                self.attempt_cap,
                self.vertex_cap,
                self.root_law,
            )
        if self.size is not None:
            return gw_sample_sized(
                self.offspring, self.root_type, self.size, rng, self.attempt_cap
            )
        return gw_sample(
            self.offspring, self.root_type, rng, self.vertex_cap, self.root_law
        )

    def symmetrized(self) -> "ValidLaw":
        """ν^sym: same shape law, displacements replaced by π^sym."""
        return ValidLaw(
            displacements=symmetrize_family(self.displacements),
            shapes=self.shapes,
            offspring=self.offspring,
            root_type=self.root_type,
            root_law=self.root_law,
            size=self.size,
            type_count=self.type_count,
            name=f"{self.name}^sym",
            attempt_cap=self.attempt_cap,
            vertex_cap=self.vertex_cap,
            shape_sampler=self.shape_sampler,
        )


def label_tree(
    shape: LabeledTypedTree, fam: DisplacementFamily, rng: np.random.Generator
) -> LabeledTypedTree:
    """Draw D_v from π^{s(v)}_{ctype(v)} independently at every vertex."""
    disp2 = [0] * len(shape)
    for v in range(len(shape)):
        kids = shape.kids[v]
        if not kids:
            continue
        vec = fam.law_for(shape.types[v], shape.ctype(v)).sample(rng)
        for c, x in zip(kids, vec):
            disp2[c] = _double(x)
    return shape.with_disp2(disp2)


def _double(x):
    x = 2 * as_fraction(x)
    return int(x) if x.denominator == 1 else x


def valid_sample(law: ValidLaw, rng: np.random.Generator) -> LabeledTypedTree:
    return label_tree(law.sample_shape(rng), law.displacements, rng)


# -- exact enumeration -----------------------------------------------------------------


def enumerate_gw_shapes(
    off: OffspringFamily,
    root_type: int,
    max_vertices: int,
    root_law: Optional[FiniteDistribution] = None,
) -> FiniteDistribution:
    """Exact probabilities of every Galton-Watson shape with at most max_vertices."""

    @lru_cache(maxsize=None)
    def subtrees(type_: int, budget: int, law_override=None) -> Tuple:
        law = law_override if law_override is not None else off.table(type_)
        out = []
        for ctype, p in law.items():
            if 1 + len(ctype) > budget:
                continue
            for kids, pk, size in forests(ctype, budget - 1):
                out.append(((type_, kids), p * pk, 1 + size))
        return tuple(out)

    @lru_cache(maxsize=None)
    def forests(types: Tuple[int, ...], budget: int) -> Tuple:
        if not types:
            return (((), Fraction(1), 0),)
        out = []
        for first, p1, s1 in subtrees(types[0], budget - (len(types) - 1)):
            for rest, p2, s2 in forests(types[1:], budget - s1):
                out.append(((first, *rest), p1 * p2, s1 + s2))
        return tuple(out)

    roots = subtrees(root_type, max_vertices, root_law)
    return FiniteDistribution((_nested_to_tree(node), p) for node, p, _ in roots)


def _nested_to_tree(node) -> LabeledTypedTree:
    types, children = [], []
    stack = [node]
    while stack:
        type_, kids = stack.pop()
        types.append(type_)
        children.append(len(kids))
        stack.extend(reversed(kids))
    return LabeledTypedTree(types, children)


def labeling_law(
    shape: LabeledTypedTree, fam: DisplacementFamily, max_outcomes: int = 100_000
) -> FiniteDistribution:
    """Exact law of the labeled tree given its shape."""
    factors = []
    count = 1
    for v in range(len(shape)):
        if shape.children[v]:
            law = fam.law_for(shape.types[v], shape.ctype(v))
            factors.append((v, law))
            count *= len(law)
            if count > max_outcomes:
                raise EnumerationOverflowError(
                    f"labelings of one shape exceed {max_outcomes}", count
                )
    out = {}
    for combo in itertools.product(*(law.items() for _, law in factors)):
        disp2 = [0] * len(shape)
        weight = Fraction(1)
        for (v, _), (vec, w) in zip(factors, combo):
            weight *= w
            for c, x in zip(shape.kids[v], vec):
                disp2[c] = _double(x)
        tree = shape.with_disp2(disp2)
        out[tree] = out.get(tree, Fraction(0)) + weight
    return FiniteDistribution(out)


def shape_law(law: ValidLaw, max_vertices: int) -> FiniteDistribution:
    """Exact (conditioned, renormalized) shape law truncated at max_vertices."""
    if law.shapes is not None:
        shapes = law.shapes.filter(lambda t: len(t) <= max_vertices)
    else:
        shapes = enumerate_gw_shapes(
            law.offspring, law.root_type, max_vertices, law.root_law
        )
    conditioned = False
    if law.size is not None:
        shapes = shapes.filter(lambda t: len(t) == law.size)
        conditioned = True
    if law.type_count is not None:
        q, m = law.type_count
        shapes = shapes.filter(lambda t: sum(1 for s in t.types if s == q) == m)
        conditioned = True
    if conditioned:
        if not shapes:
            raise DomainError(f"{law.name}: conditioning event is empty below the cap")
        shapes = shapes.normalized()
    return shapes


def exact_law_enumeration(
    law: ValidLaw, max_vertices: int, max_outcomes: int = 100_000
) -> FiniteDistribution:
    """Exact law of the labeled tree, keyed by LabeledTypedTree (canonical by value)."""
    shapes = shape_law(law, max_vertices)
    parts = []
    total = 0
    for shape, p in shapes.items():
        labeled = labeling_law(shape, law.displacements, max_outcomes)
        total += len(labeled)
        if total > max_outcomes:
            raise EnumerationOverflowError(
                f"{law.name}: more than {max_outcomes} labeled outcomes", total
            )
        parts.append((p, labeled))
    return FiniteDistribution.mix(parts)


# -- mobiles ---------------------------------------------------------------------------


def _multinomial(*parts: int) -> int:
    return math.factorial(sum(parts)) // math.prod(math.factorial(p) for p in parts)


def face_count_classes(
    q: Mapping[int, float], parent_type: int
) -> Iterator[Tuple[int, int, int, float]]:
    """(k, k', N, q_d) for type-3 (parent_type 3) or type-4 face vertices with q_d > 0.

    N counts the (arrangement, labeling) configurations of the class.
    """
    for d, qd in sorted(q.items()):
        if qd <= 0:
            continue
        if parent_type == 3:
            rest = d - 2
            for k in range(rest // 2 + 1):
                kp = rest - 2 * k
                yield k, kp, _multinomial(k + 1, k, kp), qd
        else:
            rest = d - 1
            for k in range(rest // 2 + 1):
                kp = rest - 2 * k
                yield k, kp, _multinomial(k, k, kp), qd


def f_bullet(q: Mapping[int, float], x: float, y: float) -> float:
    return sum(x**k * y**kp * n * qd for k, kp, n, qd in face_count_classes(q, 3))


def f_diamond(q: Mapping[int, float], x: float, y: float) -> float:
    return sum(x**k * y**kp * n * qd for k, kp, n, qd in face_count_classes(q, 4))


def normalize_weights(q: Mapping) -> Dict[int, float]:
    out = {}
    for d, w in q.items():
        d, w = int(d), float(w)
        if d < 1:
            raise InvalidParamsError(f"face degree {d} must be positive")
        if w < 0:
            raise InvalidParamsError(f"weight q_{d} is negative")
        if w > 0:
            out[d] = w
    return out


def has_odd_face(q: Mapping) -> bool:
    """Finite support and some odd p >= 3 with q_p > 0."""
    q = normalize_weights(q)
    return any(d >= 3 and d % 2 == 1 for d in q)


@dataclass(frozen=True)
class MobileParams:
    """Constants of the mobile offspring laws for a weight sequence."""

    q: Tuple[Tuple[int, float], ...]
    Zplus: float
    Zzero: float
    alpha: float
    beta: float
    truncation: int = 64
    scale: float = 1.0

    def __post_init__(self):
        if self.Zplus <= 1 or self.Zzero < 0 or self.alpha <= 0:
            raise InvalidParamsError(
                f"constants out of range: Z+={self.Zplus}, Z0={self.Zzero}, "
                f"alpha={self.alpha}"
            )

    @property
    def weights(self) -> Dict[int, float]:
        return dict(self.q)

    def to_dict(self) -> Dict:
        return {
            "q": {str(d): w for d, w in self.q},
            "Zplus": self.Zplus,
            "Zzero": self.Zzero,
            "alpha": self.alpha,
            "beta": self.beta,
            "truncation": self.truncation,
            "scale": self.scale,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "MobileParams":
        return cls(
            q=tuple(sorted(normalize_weights(data["q"]).items())),
            Zplus=float(data["Zplus"]),
            Zzero=float(data["Zzero"]),
            alpha=float(data["alpha"]),
            beta=float(data["beta"]),
            truncation=int(data.get("truncation", 64)),
            scale=float(data.get("scale", 1.0)),
        )


def solve_constants(
    q: Mapping,
    tolerance: float = 1e-12,
    critical: bool = True,
    damping: float = 0.5,
    max_iterations: int = 10_000,
    truncation: int = 64,
) -> MobileParams:
    """Z+, Z0, alpha, beta for q.

    With y = sqrt(Z0) the constants solve f•(Z+, y) = 1 - 1/Z+ and
    f⋄(Z+, y) = y, and alpha = 1/f•, beta = 1/f⋄. In critical mode q is first
    rescaled to q_k c^(k/2-1) with the largest c for which a solution exists;
    this leaves every law conditioned on the number of vertices unchanged.
    """
    weights = normalize_weights(q)
    if not weights or set(weights) <= {1}:
        raise InvalidParamsError("weight sequence needs some q_j > 0 with j >= 2")

    def minimal_root(u: float) -> Optional[float]:
        v = 0.0
        for _ in range(max_iterations):
            nxt = f_diamond(weights, u, v)
            if not math.isfinite(nxt) or nxt > 1e6:
                return None
            if abs(nxt - v) <= tolerance * max(1.0, v):
                return nxt
            v = nxt
        return None

    def c_of(u: float) -> float:
        v = minimal_root(u)
        if v is None:
            return -math.inf
        return u * (1.0 - f_bullet(weights, u, v))

    if critical:
        upper = 1.0
        while minimal_root(upper) is not None and c_of(upper) > 0 and upper < 1e12:
            upper *= 2.0
        if minimal_root(upper) is None:
            # f⋄(u, v) = v has a root exactly on an interval [0, u_max]
            lo, hi = 0.0, upper
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if minimal_root(mid) is None:
                    hi = mid
                else:
                    lo = mid
            upper = lo
        if not upper > 0:
            raise ConvergenceError("no critical rescaling found", math.inf)

        def objective(u: float) -> float:
            c = c_of(u)
            return -c if math.isfinite(c) else 1e300

        res = optimize.minimize_scalar(
            objective,
            bounds=(0.0, upper),
            method="bounded",
            options={"xatol": 1e-13 * upper, "maxiter": 2000},
        )
        u = float(res.x)
        scale = c_of(u)
        v = minimal_root(u)
        if v is None or not scale > 0:
            raise ConvergenceError("no critical rescaling found", math.inf)
        rescaled = {d: w * scale ** (d / 2 - 1) for d, w in weights.items()}
        x, y = u / scale, v / math.sqrt(scale)
    else:
        scale = 1.0
        rescaled = weights
        x, y = 1.0, 0.0
        for _ in range(max_iterations):
            fb = f_bullet(rescaled, x, y)
            if fb >= 1:
                raise ConvergenceError("f• reached 1; q is supercritical", fb - 1)
            nx = (1 - damping) * x + damping / (1 - fb)
            ny = (1 - damping) * y + damping * f_diamond(rescaled, x, y)
            if abs(nx - x) + abs(ny - y) < tolerance:
                x, y = nx, ny
                break
            x, y = nx, ny

    fb, fd = f_bullet(rescaled, x, y), f_diamond(rescaled, x, y)
    residual = abs(fb - (1 - 1 / x)) + abs(fd - y)
    if residual > max(tolerance, 1e-9) * 10:
        raise ConvergenceError(
            "constants do not solve the consistency system", residual
        )
    _logger.info("solved mobile constants: Z+=%s Z0=%s scale=%s", x, y * y, scale)
    # no odd face degree: flags never occur and beta is unused
    beta = 1.0 / fd if fd > 0 else 0.0
    return MobileParams(
        q=tuple(sorted(rescaled.items())),
        Zplus=x,
        Zzero=y * y,
        alpha=1.0 / fb,
        beta=beta,
        truncation=truncation,
        scale=scale,
    )


def _arrangements(k: int, kp: int) -> List[Tuple[int, ...]]:
    out = []
    for pos in itertools.combinations(range(k + kp), k):
        vec = [2] * (k + kp)
        for i in pos:
            vec[i] = 1
        out.append(tuple(vec))
    return out


def face_class_law(
    params: MobileParams, parent_type: int
) -> Dict[Tuple[int, int], float]:
    """ζ^(3) or ζ^(4) as probabilities of count classes (k, k')."""
    const = params.alpha if parent_type == 3 else params.beta
    if const == 0:
        return {}
    y = math.sqrt(params.Zzero)
    return {
        (k, kp): const * params.Zplus**k * y**kp * n * qd
        for k, kp, n, qd in face_count_classes(params.weights, parent_type)
    }


class MobileOffspring(OffspringFamily):
    """ζ^(1..4); type-1 counts are drawn exactly from the geometric law."""

    def __init__(self, params: MobileParams, tolerance: float = 1e-10):
        self.params = params
        self._classes = {t: face_class_law(params, t) for t in (3, 4)}
        for t, law in self._classes.items():
            total = sum(law.values())
            if law and abs(total - 1) > tolerance:
                raise InvalidParamsError(
                    f"ζ^({t}) sums to {total}; alpha/beta inconsistent with q"
                )
        self._class_tables = {
            t: (list(law), np.cumsum(list(law.values())))
            for t, law in self._classes.items()
            if law
        }
        p = 1.0 / params.Zplus
        geometric = {
            (3,) * k: p * (1 - p) ** k for k in range(params.truncation + 1)
        }
        laws = {1: FiniteDistribution(geometric), 2: FiniteDistribution.point((4,))}
        for t in (3, 4):
            table = {}
            for (k, kp), w in self._classes[t].items():
                arr = _arrangements(k, kp)
                for vec in arr:
                    table[vec] = w / len(arr)
            laws[t] = (
                FiniteDistribution(table) if table else FiniteDistribution.point(())
            )
        # the geometric table is truncated, so only its shape is checked
        self.laws = laws
        self.check_permutation_invariance()

    def sample(self, type_: int, rng: np.random.Generator) -> Tuple[int, ...]:
        if type_ == 1:
            return (3,) * (int(rng.geometric(1.0 / self.params.Zplus)) - 1)
        if type_ == 2:
            return (4,)
        if type_ not in self._class_tables:
            return ()
        classes, cumulative = self._class_tables[type_]
        i = int(
            np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right")
        )
        k, kp = classes[min(i, len(classes) - 1)]
        vec = np.full(k + kp, 2, dtype=np.int64)
        vec[rng.permutation(k + kp)[:k]] = 1
        return tuple(int(x) for x in vec)


def mobile_offspring(params: MobileParams) -> MobileOffspring:
    return MobileOffspring(params)


_C2 = {1: 2, 2: 1}
_LABEL_CLASS = {1: 0, 2: 1, 3: 0, 4: 1}


@lru_cache(maxsize=4096)
def _admissible_vectors(
    parent_type: int, ctype: Tuple[int, ...], grandparent_type: int
):
    k = len(ctype)
    c2 = [_C2[c] for c in ctype]
    cap = _C2[grandparent_type]
    parity = [(_LABEL_CLASS[c] - _LABEL_CLASS[parent_type]) % 2 for c in ctype]
    suffix = [0] * (k + 1)
    for i in range(k - 1, -1, -1):
        suffix[i] = suffix[i + 1] + c2[i]
    out = []

    def extend(prefix, prev):
        i = len(prefix)
        if i == k:
            if prev <= cap:
                out.append(tuple(prefix))
            return
        lo = prev - c2[i]
        hi = cap + suffix[i + 1]
        if (lo - parity[i]) % 2:
            lo += 1
        for y in range(lo, hi + 1, 2):
            prefix.append(y)
            extend(prefix, y)
            prefix.pop()

    extend([], 0)
    return tuple(out)


def admissible_labelings(
    parent_type: int,
    ctype: Sequence[int],
    parent_label=None,
    bounds: Optional[Tuple] = None,
    max_outcomes: int = 1_000_000,
) -> FiniteDistribution:
    """Uniform law over admissible displacement vectors around a vertex.

    Types 3 and 4 obey the cyclic constraints with their own parent, whose
    type is 1 or 2 respectively. Children of types 1 and 2 never move.

    The constraints only involve label differences, so ``parent_label`` (an
    integer for types 1 and 3, a half-integer for types 2 and 4) just anchors
    ``bounds``: with ``bounds=(lo, hi)`` the law is conditioned on every child
    label lying in [lo, hi].
    """
    ctype = tuple(int(c) for c in ctype)
    if parent_type not in _LABEL_CLASS:
        raise DomainError(f"unknown mobile type {parent_type}")
    if parent_label is None:
        parent_label = Fraction(_LABEL_CLASS[parent_type], 2)
    label2 = 2 * as_fraction(parent_label)
    if label2.denominator != 1 or label2 % 2 != _LABEL_CLASS[parent_type]:
        raise DomainError(
            f"label {parent_label} does not fit a type-{parent_type} vertex"
        )
    if parent_type in (1, 2):
        vectors: Tuple[Tuple[int, ...], ...] = ((0,) * len(ctype),)
    else:
        if any(c not in (1, 2) for c in ctype):
            raise DomainError(
                f"type-{parent_type} vertices have children of types 1 and 2 only"
            )
        vectors = _admissible_vectors(parent_type, ctype, 1 if parent_type == 3 else 2)
        if len(vectors) > max_outcomes:
            raise EnumerationOverflowError(
                "too many admissible labelings", len(vectors)
            )
    if bounds is not None:
        lo, hi = (2 * as_fraction(b) for b in bounds)
        vectors = tuple(
            vec for vec in vectors if all(lo <= label2 + y <= hi for y in vec)
        )
        if not vectors:
            raise DomainError(f"no admissible labeling keeps the children in {bounds}")
    return FiniteDistribution.uniform(
        tuple(Fraction(y, 2) for y in vec) for vec in vectors
    )


def mobile_displacements() -> DisplacementFamily:
    return DisplacementFamily(factory=lambda r, s: admissible_labelings(r, s))


def mobile_law(params: MobileParams, n: int, sign: str = "+") -> ValidLaw:
    """Law of the mobile of a Boltzmann map with n vertices and root sign + or 0."""
    if n < 1:
        raise DomainError("a map has at least one vertex")
    off = mobile_offspring(params)
    if sign == "+":
        root_type, root_law = 1, None
    elif sign == "0":
        root_type, root_law = 2, FiniteDistribution.point((4, 4))
    else:
        raise DomainError(f"mobile laws exist for signs + and 0, not {sign!r}")
    law = ValidLaw(
        displacements=mobile_displacements(),
        offspring=off,
        root_type=root_type,
        root_law=root_law,
        type_count=(1, n - 1),
        name=f"mobile{sign}(n={n})",
    )
    law.shape_sampler = lambda rng: sample_conditioned_mobile(off, n, sign, rng)
    return law


# -- conditioned mobile sampler -------------------------------------------------------


@dataclass
class _Block:
    types: List[int]
    children: List[List[int]]
    hits: List[int]


def _sample_block(
    off: OffspringFamily,
    root_type: int,
    rng: np.random.Generator,
    vertex_cap: int,
    root_ctype: Optional[Tuple[int, ...]] = None,
) -> _Block:
    """Expand from a root until every frontier vertex has type 1; those are the hits."""
    types = [root_type]
    children: List[List[int]] = [[]]
    stack = [0]
    while stack:
        v = stack.pop()
        if v != 0 and types[v] == 1:
            continue
        if v == 0 and root_ctype is not None:
            ctype = root_ctype
        else:
            ctype = off.sample(types[v], rng)
        for c in ctype:
            children[v].append(len(types))
            types.append(c)
            children.append([])
        if len(types) > vertex_cap:
            raise OverflowSignal(len(types))
        stack.extend(children[v])
    hits = []
    order = [0]
    while order:
        v = order.pop()
        if v != 0 and types[v] == 1:
            hits.append(v)
            continue
        order.extend(reversed(children[v]))
    return _Block(types, children, hits)


def _valid_rotations(steps: np.ndarray, roots: int) -> List[int]:
    """Cyclic shifts of steps (sum -roots) that encode a forest of `roots` trees."""
    m = steps.size
    partial = np.concatenate(([0], np.cumsum(np.concatenate((steps, steps)))))
    starts = []
    # window minimum of partial over (j, j+m) must stay above partial[j] - roots
    window = deque()
    for idx in range(1, 2 * m + 1):
        while window and partial[window[-1]] >= partial[idx]:
            window.pop()
        window.append(idx)
        j = idx - m + 1
        if j >= 1:
            while window and window[0] <= j:
                window.popleft()
            if j <= m and (not window or partial[window[0]] > partial[j] - roots):
                starts.append(j % m)
    return starts


def sample_conditioned_mobile(
    off: OffspringFamily,
    n: int,
    sign: str,
    rng: np.random.Generator,
    attempt_cap: int = 1_000_000,
    vertex_cap: int = 10_000_000,
) -> LabeledTypedTree:
    """Mobile shape conditioned on n-1 type-1 vertices, exactly.

    The tree is cut into blocks hanging below each type-1 vertex down to the
    next type-1 vertices; the reduced tree of type-1 vertices is then a
    Galton-Watson tree, conditioned on its size by the cycle lemma.
    """
    m = n - 1
    if sign == "+" and m == 0:
        return LabeledTypedTree.single(1)
    for attempt in range(1, attempt_cap + 1):
        try:
            if sign == "+":
                root_block, roots = None, 1
            else:
                root_block = _sample_block(off, 2, rng, vertex_cap, root_ctype=(4, 4))
                roots = len(root_block.hits)
                if roots > m or (roots == 0) != (m == 0):
                    continue
                if m == 0:
                    return _assemble(root_block, [])
            blocks, total = [], 0
            for _ in range(m):
                b = _sample_block(off, 1, rng, vertex_cap)
                blocks.append(b)
                total += len(b.hits)
                if total > m - roots:
                    break
            if len(blocks) < m or total != m - roots:
                continue
        except OverflowSignal:
            continue
        steps = np.asarray([len(b.hits) - 1 for b in blocks])
        starts = _valid_rotations(steps, roots)
        if not starts:
            continue
        if root_block is not None and rng.random() >= roots / m:
            continue
        start = starts[int(rng.integers(len(starts)))]
        rotated = blocks[start:] + blocks[:start]
        _logger.debug("conditioned mobile accepted after %s attempts", attempt)
        return _assemble(root_block, rotated)
    raise ExhaustionError(
        f"no mobile with {m} type-1 vertices in {attempt_cap} attempts", attempt_cap
    )


def _assemble(root_block: Optional[_Block], blocks: List[_Block]) -> LabeledTypedTree:
    all_blocks = ([root_block] if root_block is not None else []) + blocks
    alias: Dict[Tuple[int, int], Tuple[int, int]] = {}
    pointer = 1
    stack = [(0, iter(all_blocks[0].hits))]
    while stack:
        i, hits = stack[-1]
        h = next(hits, None)
        if h is None:
            stack.pop()
            continue
        alias[(i, h)] = (pointer, 0)
        stack.append((pointer, iter(all_blocks[pointer].hits)))
        pointer += 1
    children = {}
    types = {}
    for i, b in enumerate(all_blocks):
        for v, t in enumerate(b.types):
            node = (i, v)
            if node in alias:
                continue
            types[node] = t
            children[node] = [alias.get((i, c), (i, c)) for c in b.children[v]]
    tree, _ = LabeledTypedTree.from_adjacency((0, 0), children, types)
    return tree
