"""Verification suites: exact distributional oracles, Monte Carlo comparisons and reports."""

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
import itertools
import logging
import math
from typing import (
    Any,
    Callable,
    Dict,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np
from scipy import stats
from scipy.sparse.csgraph import shortest_path
from scipy.spatial.distance import cdist

from .distribution import FiniteDistribution
from .errors import (
    DomainError,
    ExhaustionError,
    InvalidMobileError,
    MobileMapsError,
    OverflowSignal,
)
from .laws import (
    DisplacementFamily,
    OffspringFamily,
    ValidLaw,
    admissible_labelings,
    centering_check,
    class_sums,
    exact_law_enumeration,
    gw_sample,
    label_tree,
    mobile_law,
    solve_constants,
    symmetrize_family,
    valid_sample,
)
from .maps import (
    WeightSeq,
    bdg_forward,
    bdg_inverse,
    bfs_distance,
    boltzmann_law,
    check_mobile,
    distance_from_labels,
    distance_matrix,
    distance_upper_bound,
    enumerate_maps,
    enumerate_mobiles,
    mobile_correspondence,
    mobile_face_degrees,
    mobile_vertex_count,
    pointed_maps,
)
from .metrics import (
    FiniteMetricMeasureSpace,
    brownian_snake_sample,
    excursion_walk,
    gh_distance_exact,
    ghp_distance_exact,
)
from .symmetry import (
    apply_permutation,
    sample_symmetrization,
    sampled_structure,
    uniform_perm,
)
from .tree_core import (
    LabeledTypedTree,
    contour_process,
    dist_on_contour,
    label_oscillation,
    label_process,
    time_change_deviation,
    tree_grid_distance_matrix,
    type_count_process,
    vertex_index_at,
)

_logger = logging.getLogger(__name__)

P_VALUE_MODES = frozenset({"chi-square", "KS", "energy"})
MODES = P_VALUE_MODES | {"exact", "regression", "tolerance"}


@dataclass
class TestReport:
    """Outcome of one verification.

    For p-value modes the test passes when ``statistic > threshold``; for the
    other modes when ``statistic <= threshold``. ``checks`` itemizes extra
    boolean conditions that must all hold.
    """

    __test__ = False

    name: str
    mode: str
    statistic: float
    threshold: float
    seed: Optional[int] = None
    sizes: Dict[str, Any] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown report mode {self.mode!r}")
        self.statistic = float(self.statistic)
        self.threshold = float(self.threshold)

    @property
    def passed(self) -> bool:
        if self.mode in P_VALUE_MODES:
            ok = self.statistic > self.threshold
        else:
            ok = self.statistic <= self.threshold
        return ok and all(self.checks.values())

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["pass"] = self.passed
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TestReport":
        fields = (
            "name",
            "mode",
            "statistic",
            "threshold",
            "seed",
            "sizes",
            "checks",
            "details",
        )
        return cls(**{k: data[k] for k in fields if k in data})


def merge_reports(reports: Iterable[TestReport]) -> List[TestReport]:
    """Reports ordered by name, so parallel runs merge deterministically."""
    return sorted(reports, key=lambda r: r.name)


def run_parallel(
    tasks: Mapping[str, Callable[[np.random.Generator, int], TestReport]],
    seed: int,
    workers: int = 1,
) -> List[TestReport]:
    """Run independent suites on spawned seeds; each task gets (rng, seed)."""
    children = np.random.SeedSequence(seed).spawn(len(tasks))
    seeds = {
        name: int(child.generate_state(1)[0])
        for name, child in zip(sorted(tasks), children)
    }

    def run(name: str) -> TestReport:
        return tasks[name](np.random.default_rng(seeds[name]), seeds[name])

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        reports = list(pool.map(run, sorted(tasks)))
    return merge_reports(reports)


# -- law corpus ------------------------------------------------------------------------


def _law(table: Mapping) -> FiniteDistribution:
    return FiniteDistribution({tuple(k): Fraction(w) for k, w in table.items()})


def _family(entries: Mapping) -> DisplacementFamily:
    return DisplacementFamily({key: _law(table) for key, table in entries.items()})


def _offspring(laws: Mapping) -> OffspringFamily:
    return OffspringFamily({s: _law(table) for s, table in laws.items()})


def _shape(types: Sequence[int], children: Sequence[int]) -> LabeledTypedTree:
    return LabeledTypedTree(types, children)


_BINARY = {1: {(): "1/2", (1, 1): "1/2"}}
_TWO_TYPE = {1: {(): "1/3", (1, 2): "1/3", (2, 1): "1/3"}, 2: {(): "1/2", (2,): "1/2"}}
_TWO_TYPE_DISP = {
    (1, (1, 2)): {(1, 0): "1/2", (0, -1): "1/2"},
    (1, (2, 1)): {(2, 2): 1},
    (2, (2,)): {(1,): "1/3", (-1,): "2/3"},
}
_SHIFTED = {(1, (1, 1)): {(1, -1): "1/3", (0, 2): "2/3"}}


def law_corpus() -> Dict[str, ValidLaw]:
    """Small valid laws covering several types, repeated child types and conditioning."""
    laws = [
        ValidLaw(
            _family({(1, (1, 1)): {(1, 2): 1}}),
            shapes=FiniteDistribution.point(_shape((1, 1, 1), (2, 0, 0))),
            name="star-two-leaves",
        ),
        ValidLaw(
            _family({(1, (1, 1)): {(0, 0): 1}}),
            offspring=_offspring(_BINARY),
            name="zero-displacement",
        ),
        ValidLaw(
            _family(_SHIFTED), offspring=_offspring(_BINARY), name="binary-shifted"
        ),
        ValidLaw(
            _family(
                {
                    (1, (1,)): {(1,): "1/2", (-1,): "1/2"},
                    (1, (1, 1)): {(0, 1): 1},
                    (1, (1, 1, 1)): {(1, 0, -1): "1/2", (2, 2, 2): "1/2"},
                }
            ),
            offspring=_offspring(
                {1: {(): "1/2", (1,): "1/4", (1, 1): "1/8", (1, 1, 1): "1/8"}}
            ),
            name="geometric-like",
        ),
        ValidLaw(
            _family(_TWO_TYPE_DISP),
            offspring=_offspring(_TWO_TYPE),
            name="two-type",
        ),
        ValidLaw(
            _family(
                {
                    (1, (2, 2)): {(1, -1): "1/2", (3, 0): "1/2"},
                    (1, (1, 2, 2)): {(0, 1, 1): 1},
                    (1, (2, 1, 2)): {(1, 0, -1): 1},
                    (1, (2, 2, 1)): {(-1, -1, 2): "1/2", (0, 0, 0): "1/2"},
                }
            ),
            offspring=_offspring(
                {
                    1: {
                        (): "1/2",
                        (2, 2): "1/4",
                        (1, 2, 2): "1/12",
                        (2, 1, 2): "1/12",
                        (2, 2, 1): "1/12",
                    },
                    2: {(): 1},
                }
            ),
            name="repeated-child-types",
        ),
        ValidLaw(
            _family(
                {
                    (1, (1, 2)): {("1/2", "-1/2"): 1},
                    (1, (2, 1)): {("3/2", 0): "1/2", (0, "1/2"): "1/2"},
                }
            ),
            shapes=FiniteDistribution(
                {
                    _shape((1, 1, 2), (2, 0, 0)): "1/2",
                    _shape((1, 2, 1), (2, 0, 0)): "1/2",
                }
            ),
            name="half-integer",
        ),
        ValidLaw(
            _family(
                {
                    (1, (2, 3)): {(1, 2): 1},
                    (1, (3, 2)): {(0, 0): "1/2", (1, 1): "1/2"},
                    (2, (3,)): {(1,): "1/2", (-2,): "1/2"},
                }
            ),
            offspring=_offspring(
                {
                    1: {(2, 3): "1/2", (3, 2): "1/2"},
                    2: {(): "1/2", (3,): "1/2"},
                    3: {(): 1},
                }
            ),
            name="three-type-chain",
        ),
        ValidLaw(
            _family(_SHIFTED),
            offspring=_offspring(_BINARY),
            size=5,
            name="size-conditioned",
        ),
        ValidLaw(
            _family(_TWO_TYPE_DISP),
            offspring=_offspring(_TWO_TYPE),
            type_count=(2, 2),
            name="type-count-conditioned",
        ),
        ValidLaw(
            _family(
                {
                    (1, (1, 1, 1)): {(0, 1, 2): "1/2", (2, 0, 0): "1/2"},
                    (1, (1,)): {(5,): 1},
                }
            ),
            shapes=FiniteDistribution(
                {
                    _shape((1, 1, 1, 1), (3, 0, 0, 0)): "1/2",
                    _shape((1, 1, 1), (1, 1, 0)): "1/2",
                }
            ),
            name="wide-root",
        ),
    ]
    return {law.name: law for law in laws}


def tree_from_walk(walk: Sequence[int]) -> LabeledTypedTree:
    """Single-type plane tree whose contour is the given Dyck path."""
    children: Dict[int, List[int]] = defaultdict(list)
    stack = [0]
    count = 1
    for a, b in zip(walk, walk[1:]):
        if b > a:
            children[stack[-1]].append(count)
            stack.append(count)
            count += 1
        else:
            stack.pop()
    tree, _ = LabeledTypedTree.from_adjacency(
        0, children, {v: 1 for v in range(count)}
    )
    return tree


@dataclass
class SiblingDependentLaw:
    """Uniform plane trees whose first child is pushed up by the size of its siblings' subtrees.

    Displacements depend on sibling subtrees and on position, so this is not
    a valid law; it serves as the negative control of the fdd comparison.
    """

    edges: int = 50
    name: str = "sibling-dependent"

    def sample(self, rng: np.random.Generator) -> LabeledTypedTree:
        shape = tree_from_walk(excursion_walk(2 * self.edges, rng))
        sizes = [1] * len(shape)
        for v in range(len(shape) - 1, 0, -1):
            sizes[shape.parent[v]] += sizes[v]
        disp2 = [0] * len(shape)
        for kids in shape.kids:
            if len(kids) >= 2:
                disp2[kids[0]] = 2 * sum(sizes[c] for c in kids[1:])
        return shape.with_disp2(disp2)


def sibling_dependent_law(edges: int = 50) -> SiblingDependentLaw:
    return SiblingDependentLaw(edges)


def _sampler(law) -> Callable[[np.random.Generator], LabeledTypedTree]:
    """Draw function for a law; Galton-Watson draws past the vertex cap are redrawn."""
    if not isinstance(law, ValidLaw):
        return law.sample

    def draw(rng: np.random.Generator) -> LabeledTypedTree:
        while True:
            try:
                return valid_sample(law, rng)
            except OverflowSignal:
                continue

    return draw


# -- exact oracles ---------------------------------------------------------------------


def sample_uniform_times(
    t: LabeledTypedTree,
    k: int,
    rng: np.random.Generator,
    exclude_root: bool = True,
    attempt_cap: int = 10_000,
) -> Tuple[np.ndarray, List[Tuple[int, ...]]]:
    """Sorted uniform times X↑ and the vertices v(t, X_i↑), conditioned on missing the root."""
    for _ in range(attempt_cap):
        times = np.sort(rng.random(k))
        idx = [vertex_index_at(t, float(x)) for x in times]
        if not exclude_root or 0 not in idx:
            return times, [t.addresses[i] for i in idx]
    raise ExhaustionError("every draw hit the root", attempt_cap)


def sampled_structure_law(
    law: ValidLaw, k: int, max_vertices: int, exclude_root: bool = False
) -> FiniteDistribution:
    """Exact law of (t(R), d⟨R⟩, U(R)) with R uniform on V(T)^k, T truncated at max_vertices.

    With ``exclude_root`` the law is conditioned on no R_i being the root.
    """
    first = 1 if exclude_root else 0
    parts = []
    for tree, p in exact_law_enumeration(law, max_vertices).items():
        n = len(tree)
        if n <= first:
            continue
        acc: Dict[str, Fraction] = defaultdict(Fraction)
        weight = Fraction(1, n**k)
        for idx in itertools.product(range(first, n), repeat=k):
            structure = sampled_structure(tree, [tree.addresses[i] for i in idx])
            acc[structure.key()] += weight
        parts.append((p, FiniteDistribution(acc)))
    mixed = FiniteDistribution.mix(parts)
    if not exclude_root:
        return mixed
    if not mixed:
        raise DomainError(f"{law.name}: every tree below the cap is a single vertex")
    return mixed.normalized()


def eqdist_check(
    law: ValidLaw, k: int, max_vertices: int, exclude_root: bool = False
) -> TestReport:
    """Sampled structures under ν and ν^sym must agree exactly."""
    if k < 1:
        raise DomainError("k must be at least 1")
    original = sampled_structure_law(law, k, max_vertices, exclude_root)
    symmetrized = sampled_structure_law(
        law.symmetrized(), k, max_vertices, exclude_root
    )
    gap = original.max_abs_difference(symmetrized)
    _logger.debug(
        "eqdist %s k=%s: %s outcomes, gap %s", law.name, k, len(original), gap
    )
    suffix = "/no-root" if exclude_root else ""
    return TestReport(
        name=f"eqdist/{law.name}/k={k}{suffix}",
        mode="exact",
        statistic=float(gap),
        threshold=0.0,
        sizes={
            "k": k,
            "max_vertices": max_vertices,
            "outcomes": len(original),
            "exclude_root": exclude_root,
        },
        checks={"equal": original == symmetrized},
    )


def mobile_centering_family(max_children: int) -> DisplacementFamily:
    """Admissible mobile labelings around face vertices with up to max_children children."""
    entries = {}
    for parent in (3, 4):
        for k in range(1, max_children + 1):
            for ctype in itertools.product((1, 2), repeat=k):
                entries[(parent, ctype)] = admissible_labelings(parent, ctype)
    return DisplacementFamily(entries)


def centering_audit(max_children: int = 3) -> TestReport:
    """Mobile displacements are centered, not locally centered, and symmetrize to locally centered."""
    fam = mobile_centering_family(max_children)
    sym = symmetrize_family(fam)
    witness = next(
        (key for key in fam if any(m != 0 for m in fam[key].mean())),
        None,
    )
    checks = {
        "centered": centering_check(fam, "centered"),
        "not_locally_centered": witness is not None,
        "symmetrized_locally_centered": centering_check(sym, "local"),
    }
    details: Dict[str, Any] = {}
    if witness is not None:
        details["witness"] = {
            "parent_type": witness[0],
            "ctype": list(witness[1]),
            "means": [str(m) for m in fam[witness].mean()],
        }
    nonzero = {str(k): str(v) for k, v in class_sums(fam).items() if v != 0}
    details["nonzero_class_sums"] = nonzero
    return TestReport(
        name="centering",
        mode="exact",
        statistic=len(nonzero),
        threshold=0,
        sizes={"max_children": max_children, "entries": len(fam)},
        checks=checks,
        details=details,
    )


def _chirality_flipped_inverse(t: LabeledTypedTree):
    return bdg_inverse(t).mirror()


def bijection_audit(
    max_edges: int = 4, q_support: Optional[Iterable[int]] = None
) -> TestReport:
    """Exhaustive checks of the mobile bijection on small maps.

    Covers the round trip, the set of mobiles against an independent
    enumeration (hence cardinalities), distances read off labels, the label
    upper bound on distances, and the Boltzmann pushforward.
    """
    if max_edges > 5:
        raise DomainError("the bijection audit runs up to 5 edges")
    support = None if q_support is None else frozenset(int(d) for d in q_support)
    maps = enumerate_maps(max_edges, support)
    failures: List[str] = []
    counts: Dict[str, int] = defaultdict(int)
    for sign in ("+", "0"):
        forward: Dict[str, LabeledTypedTree] = {}
        for m in pointed_maps(maps, sign=sign):
            code = m.canonical_code()
            try:
                t, corr = mobile_correspondence(m)
                check_mobile(t, sign)
                if bdg_inverse(t, sign).canonical_code() != code:
                    failures.append(f"round trip {code}")
            except MobileMapsError as e:
                failures.append(f"{type(e).__name__} {code}: {e}")
                continue
            forward[t.canonical_key()] = t
            counts[f"maps{sign}"] += 1
            if sign == "+":
                _check_distances(m, t, corr, code, failures, counts)
        mobiles = {
            t.canonical_key() for t in enumerate_mobiles(max_edges, sign, support)
        }
        counts[f"mobiles{sign}"] = len(mobiles)
        if mobiles != set(forward):
            failures.append(
                f"sign {sign}: {len(forward)} mobiles from maps, "
                f"{len(mobiles)} enumerated"
            )
    _check_pushforward(maps, support, max_edges, failures)
    for line in failures[:20]:
        _logger.warning("bijection audit: %s", line)
    return TestReport(
        name=f"bijection/E<={max_edges}/q={sorted(support) if support else 'all'}",
        mode="exact",
        statistic=len(failures),
        threshold=0,
        sizes={"max_edges": max_edges, "rooted_maps": len(maps), **counts},
        details={"failures": failures},
    )


def _check_distances(m, t, corr, code, failures: List[str], counts) -> None:
    d = distance_matrix(m)
    point = m.point
    for v, i in corr.items():
        counts["distance_checks"] += 1
        if distance_from_labels(t, i) != d[v, point]:
            failures.append(f"label distance at {v} {code}")
    for (u, i), (v, j) in itertools.combinations(corr.items(), 2):
        if d[u, v] > distance_upper_bound(t, i, j):
            failures.append(f"label bound {u},{v} {code}")


def _check_pushforward(maps, support, max_edges: int, failures: List[str]) -> None:
    degrees = support if support is not None else range(1, 2 * max_edges + 1)
    q = {d: Fraction(1, d) for d in degrees}
    weights = WeightSeq.of(q)
    by_size = defaultdict(list)
    for m in pointed_maps(maps, sign="+"):
        by_size[m.num_vertices].append(m)
    candidates = [n for n in sorted(by_size) if n >= 2]
    if not candidates:
        return
    n = candidates[0]
    law = boltzmann_law(q, by_size[n])
    codes = {m.canonical_code(): bdg_forward(m).canonical_key() for m in by_size[n]}
    pushed = law.pushforward(lambda code: codes[code])
    direct = FiniteDistribution(
        (
            t.canonical_key(),
            math.prod(weights.weight(d) for d in mobile_face_degrees(t)),
        )
        for t in enumerate_mobiles(max_edges, "+", support)
        if mobile_vertex_count(t) == n
    )
    if not direct or pushed != direct.normalized():
        failures.append(f"Boltzmann pushforward differs at n={n}")


def chirality_control(
    max_edges: int = 4, q_support: Optional[Iterable[int]] = None
) -> TestReport:
    """Negative control: rebuilding maps with the rotation reversed must break the round trip.

    Reversal keeps graph distances, so the label identities still hold; the
    control is detected through rooted-map identity instead.
    """
    support = None if q_support is None else frozenset(int(d) for d in q_support)
    maps = pointed_maps(enumerate_maps(max_edges, support), sign="+")
    broken = 0
    for m in maps:
        t = bdg_forward(m)
        try:
            if _chirality_flipped_inverse(t).canonical_code() != m.canonical_code():
                broken += 1
        except InvalidMobileError:
            broken += 1
    return TestReport(
        name=f"chirality-control/E<={max_edges}",
        mode="exact",
        statistic=broken,
        threshold=0,
        sizes={"max_edges": max_edges, "pointed_maps": len(maps)},
        details={"expected": "fail"},
    )


# -- deterministic identities ----------------------------------------------------------


def identities_check(
    rng: np.random.Generator,
    trees: int = 200,
    small_vertices: int = 12,
    max_vertices: int = 2000,
    perms: int = 20,
    seed: Optional[int] = None,
) -> TestReport:
    """Grid identity for contour distances, time-change bounds and max-displacement invariance."""
    law = law_corpus()["binary-shifted"]
    failures: Dict[str, int] = defaultdict(int)
    checked = 0
    while checked < trees:
        try:
            shape = gw_sample(law.offspring, 1, rng, max_vertices)
        except MobileMapsError:
            continue
        t = label_tree(shape, law.displacements, rng)
        checked += 1
        if len(t) < 2:
            continue
        if len(t) <= small_vertices:
            C = contour_process(t)
            big_n = C.N
            expected = tree_grid_distance_matrix(t)
            for i, j in itertools.product(range(big_n + 1), repeat=2):
                gap = dist_on_contour(C, i / big_n, j / big_n) - expected[i, j]
                if abs(gap) > 1e-9:
                    failures["contour_grid"] += 1
                    break
        dev = time_change_deviation(t)
        if dev.contour > dev.contour_bound + 1e-9:
            failures["contour_bound"] += 1
        if dev.label > label_oscillation(t, dev.alpha) + 1e-9:
            failures["label_bound"] += 1
        if dev.drift > dev.drift_bound + 1e-9:
            failures["drift_bound"] += 1
        for _ in range(perms):
            permuted = apply_permutation(t, uniform_perm(t, rng))
            if permuted.max_abs_displacement() != t.max_abs_displacement():
                failures["max_displacement"] += 1
                break
    return TestReport(
        name="identities",
        mode="exact",
        statistic=sum(failures.values()),
        threshold=0,
        seed=seed,
        sizes={"trees": trees, "max_vertices": max_vertices, "perms": perms},
        details={"failures": dict(failures)},
    )


# -- Monte Carlo comparisons -----------------------------------------------------------


def energy_permutation_test(
    x: np.ndarray, y: np.ndarray, rng: np.random.Generator, permutations: int = 1999
) -> Tuple[float, float]:
    """Energy distance between two multivariate samples and its permutation p-value.

    The smallest attainable p-value is 1 / (permutations + 1).
    """
    pooled = np.vstack((x, y))
    spread = pooled.std(axis=0)
    spread[spread == 0] = 1.0
    d = cdist(pooled / spread, pooled / spread)
    n = len(x)

    def energy(mask: np.ndarray) -> float:
        a = mask.astype(float)
        b = 1.0 - a
        na, nb = a.sum(), b.sum()
        da, db = d @ a, d @ b
        return float(2 * (b @ da) / (na * nb) - (a @ da) / na**2 - (b @ db) / nb**2)

    mask = np.zeros(len(pooled), dtype=bool)
    mask[:n] = True
    observed = energy(mask)
    hits = sum(energy(rng.permutation(mask)) >= observed for _ in range(permutations))
    return observed, (1 + hits) / (1 + permutations)


def _fdd_features(t: LabeledTypedTree, times: np.ndarray) -> np.ndarray:
    if len(t) < 2:
        return np.zeros(2 * len(times))
    C, Z = contour_process(t), label_process(t)
    n = len(t)
    return np.concatenate(
        (
            [C.at(float(x)) / math.sqrt(n) for x in times],
            [Z.at(float(x)) / n**0.25 for x in times],
        )
    )


def _conditioned_times(
    t: LabeledTypedTree, k: int, rng: np.random.Generator
) -> np.ndarray:
    if len(t) < 2:
        return np.sort(rng.random(k))
    return sample_uniform_times(t, k, rng)[0]


def fdd_compare(
    law,
    k: int,
    samples: int,
    rng: np.random.Generator,
    alpha: float = 0.001,
    permutations: int = 1999,
    seed: Optional[int] = None,
) -> TestReport:
    """Energy test of (C, Z) at root-avoiding uniform times, trees against symmetrizations."""
    draw = _sampler(law)
    plain, symmetric = [], []
    for _ in range(samples):
        t = draw(rng)
        plain.append(_fdd_features(t, _conditioned_times(t, k, rng)))
        s = sample_symmetrization(draw(rng), rng)
        symmetric.append(_fdd_features(s, _conditioned_times(s, k, rng)))
    statistic, p = energy_permutation_test(
        np.asarray(plain), np.asarray(symmetric), rng, permutations
    )
    return TestReport(
        name=f"fdd/{getattr(law, 'name', 'law')}/k={k}",
        mode="energy",
        statistic=p,
        threshold=alpha,
        seed=seed,
        sizes={"k": k, "samples": samples, "permutations": permutations},
        details={"energy": statistic},
    )


def _label_range(t: LabeledTypedTree) -> float:
    labels = [float(x) for v, x in enumerate(t.labels()) if t.types[v] == 1]
    return max(labels) - min(labels)


def scaling_estimate(
    q,
    n_list: Sequence[int],
    reps: int,
    functional: str,
    rng: np.random.Generator,
    tolerance: float = 0.05,
    seed: Optional[int] = None,
) -> TestReport:
    """Fit the growth exponent of a map functional in the number of vertices."""
    expected = {"label_range": 0.25, "distance_pair": 0.25, "height": 0.5}
    if functional not in expected:
        raise DomainError(f"unknown functional {functional!r}")
    ns = sorted(set(int(n) for n in n_list))
    if len(ns) < 2:
        raise DomainError("a scaling fit needs at least two distinct sizes")
    weights = WeightSeq.of(q)
    params = solve_constants({d: float(w) for d, w in weights.q})
    means = []
    for n in ns:
        law = mobile_law(params, n, "+")
        values = []
        for _ in range(reps):
            t = valid_sample(law, rng)
            if functional == "label_range":
                values.append(_label_range(t))
            elif functional == "height":
                values.append(float(t.height))
            else:
                m = bdg_inverse(t)
                u, v = rng.integers(m.num_vertices, size=2)
                values.append(float(bfs_distance(m, int(u))[int(v)]))
        means.append(float(np.mean(values)))
        _logger.info("scaling %s n=%s mean=%s", functional, n, means[-1])
    fit = stats.linregress(np.log(ns), np.log(np.maximum(means, 1e-12)))
    slope = float(fit.slope)
    return TestReport(
        name=f"scaling/{functional}",
        mode="regression",
        statistic=abs(slope - expected[functional]),
        threshold=tolerance,
        seed=seed,
        sizes={"n": ns, "reps": reps},
        details={
            "slope": slope,
            "ci95": [slope - 1.96 * fit.stderr, slope + 1.96 * fit.stderr],
            "means": means,
            "expected": expected[functional],
        },
    )


def snake_compare(
    q,
    n: int,
    samples: int,
    rng: np.random.Generator,
    grid: int = 256,
    alpha: float = 0.001,
    residual_tolerance: float = 0.05,
    seed: Optional[int] = None,
) -> TestReport:
    """Contour and label marginals at s = 1/2 against the Brownian snake, plus type-count linearity.

    Scale constants are fitted on one half of each sample and the KS tests
    run on the other half.
    """
    weights = WeightSeq.of(q)
    params = solve_constants({d: float(w) for d, w in weights.q})
    law = mobile_law(params, n, "+")
    c_half, z_half, residuals = [], [], defaultdict(list)
    for _ in range(samples):
        t = valid_sample(law, rng)
        size = len(t)
        c_half.append(contour_process(t).at(0.5) / math.sqrt(size))
        z_half.append(label_process(t).at(0.5) / size**0.25)
        for type_ in sorted(set(t.types)):
            lam = type_count_process(t, type_)
            grid_s = lam.grid
            gamma = lam.values[-1] / size
            residual = np.abs(lam.values / size - gamma * grid_s).max()
            residuals[type_].append(float(residual))
    ref_e, ref_z = [], []
    for _ in range(samples):
        snake = brownian_snake_sample(grid, rng)
        ref_e.append(snake.e.at(0.5))
        ref_z.append(snake.Z.at(0.5))
    half = samples // 2
    c_obs, c_ref = np.asarray(c_half), np.asarray(ref_e)
    z_obs, z_ref = np.asarray(z_half), np.asarray(ref_z)
    a = c_ref[:half].mean() / c_obs[:half].mean()
    b = z_ref[:half].std() / z_obs[:half].std() if z_obs[:half].std() > 0 else 1.0
    p_c = float(stats.ks_2samp(a * c_obs[half:], c_ref[half:]).pvalue)
    p_z = float(stats.ks_2samp(b * z_obs[half:], z_ref[half:]).pvalue)
    mean_residual = {str(s): float(np.mean(r)) for s, r in residuals.items()}
    return TestReport(
        name=f"snake-compare/n={n}",
        mode="KS",
        statistic=min(p_c, p_z),
        threshold=alpha,
        seed=seed,
        sizes={"n": n, "samples": samples, "grid": grid},
        checks={
            "type_count_linear": all(
                r <= residual_tolerance for r in mean_residual.values()
            )
        },
        details={
            "p_contour": p_c,
            "p_label": p_z,
            "contour_scale": float(a),
            "label_scale": float(b),
            "type_count_residual": mean_residual,
        },
    )


def snake_covariance_check(
    rng: np.random.Generator,
    samples: int = 10_000,
    grid: int = 256,
    points: Sequence[float] = (0.25, 0.5, 0.75),
    rel_tol: float = 0.05,
    seed: Optional[int] = None,
) -> TestReport:
    """Empirical Cov(Z(s), Z(t)) against the mean of min e over [s, t]."""
    idx = [int(round(s * grid)) for s in points]
    zs = np.empty((samples, len(idx)))
    mins = np.zeros((len(idx), len(idx)))
    for r in range(samples):
        snake = brownian_snake_sample(grid, rng)
        e = snake.e.values
        zs[r] = snake.Z.values[idx]
        for a, b in itertools.product(range(len(idx)), repeat=2):
            lo, hi = sorted((idx[a], idx[b]))
            mins[a, b] += e[lo : hi + 1].min()
    mins /= samples
    cov = zs.T @ zs / samples
    rel = float(np.max(np.abs(cov - mins) / mins))
    return TestReport(
        name="snake-covariance",
        mode="tolerance",
        statistic=rel,
        threshold=rel_tol,
        seed=seed,
        sizes={"samples": samples, "grid": grid},
        details={"covariance": cov.tolist(), "expected": mins.tolist()},
    )


# -- Gromov-Hausdorff cross-checks -----------------------------------------------------


def brute_force_gh(X: FiniteMetricMeasureSpace, Y: FiniteMetricMeasureSpace) -> float:
    """Half the least distortion over correspondences built from maps X→Y and Y→X."""
    nx_, ny = len(X), len(Y)
    gs = np.asarray(list(itertools.product(range(nx_), repeat=ny)), dtype=np.int64)
    dis_g = np.abs(X.dist[gs[:, :, None], gs[:, None, :]] - Y.dist[None, :, :])
    dis_g = dis_g.max(axis=(1, 2))
    best = math.inf
    for f in itertools.product(range(ny), repeat=nx_):
        f = np.asarray(f)
        dis_f = np.abs(X.dist - Y.dist[np.ix_(f, f)]).max()
        cross = np.abs(X.dist[:, gs] - Y.dist[f][:, None, :]).max(axis=(0, 2))
        best = min(best, float(np.maximum(np.maximum(dis_g, cross), dis_f).min()))
    return best / 2.0


def random_metric_space(
    points: int, rng: np.random.Generator, max_weight: int = 5
) -> FiniteMetricMeasureSpace:
    """Shortest-path metric of a complete graph with integer weights, uniform measure."""
    w = rng.integers(1, max_weight + 1, size=(points, points)).astype(float)
    w = np.triu(w, 1)
    w = w + w.T
    return FiniteMetricMeasureSpace(shortest_path(w, directed=False))


def gh_check(
    rng: np.random.Generator,
    instances: int = 50,
    points: int = 4,
    seed: Optional[int] = None,
) -> TestReport:
    """Exact GH solver against brute force, GHP >= GH, and the two-point formula."""
    mismatches = 0
    ghp_below = 0
    for _ in range(instances):
        X, Y = random_metric_space(points, rng), random_metric_space(points, rng)
        gh = gh_distance_exact(X, Y)
        if gh != brute_force_gh(X, Y):
            mismatches += 1
        if ghp_distance_exact(X, Y) < gh - 1e-12:
            ghp_below += 1
    a, b = 1.0 + float(rng.integers(0, 5)), 1.0 + float(rng.integers(0, 5))
    two = gh_distance_exact(
        FiniteMetricMeasureSpace(np.array([[0.0, a], [a, 0.0]])),
        FiniteMetricMeasureSpace(np.array([[0.0, b], [b, 0.0]])),
    )
    return TestReport(
        name="gh",
        mode="exact",
        statistic=mismatches + ghp_below,
        threshold=0,
        seed=seed,
        sizes={"instances": instances, "points": points},
        checks={"two_point": two == abs(a - b) / 2},
        details={"mismatches": mismatches, "ghp_below_gh": ghp_below},
    )
