"""Child-order permutations, symmetrization and subtrees spanned by sampled vertices."""

from dataclasses import dataclass, field
import itertools
import logging
import math
from typing import FrozenSet, Iterator, List, Sequence, Tuple

import numpy as np

from .errors import ShapeMismatchError
from .tree_core import Address, LabeledTypedTree

_logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PermVector:
    """σ = (σ_v) with σ_v a permutation of 1..k_t(v), listed in vertex order.

    ``perms[v][i-1] = σ_v(i)``; ``children`` records the shape it is bound to.
    """

    perms: Tuple[Tuple[int, ...], ...]
    children: Tuple[int, ...]

    def __post_init__(self):
        if len(self.perms) != len(self.children):
            raise ShapeMismatchError("permutation vector and shape differ in size")
        for v, (p, k) in enumerate(zip(self.perms, self.children)):
            if sorted(p) != list(range(1, k + 1)):
                raise ShapeMismatchError(
                    f"σ at vertex {v} is not a permutation of 1..{k}"
                )

    @classmethod
    def identity(cls, t: LabeledTypedTree) -> "PermVector":
        return cls(tuple(tuple(range(1, k + 1)) for k in t.children), t.children)

    def is_identity(self) -> bool:
        return all(p == tuple(range(1, len(p) + 1)) for p in self.perms)

    def bound_to(self, t: LabeledTypedTree) -> None:
        if self.children != t.children:
            raise ShapeMismatchError("permutation vector is bound to another shape")


def _permute(
    t: LabeledTypedTree, sigma: PermVector
) -> Tuple[LabeledTypedTree, List[int]]:
    sigma.bound_to(t)
    new_kids = []
    for v, cs in enumerate(t.kids):
        slots = [0] * len(cs)
        for i, c in enumerate(cs):
            slots[sigma.perms[v][i] - 1] = c
        new_kids.append(slots)
    order = []
    stack = [0]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(new_kids[v]))
    new_index = [0] * len(t)
    for new, old in enumerate(order):
        new_index[old] = new
    permuted = LabeledTypedTree(
        types=[t.types[v] for v in order],
        children=[t.children[v] for v in order],
        disp2=[t.disp2[v] for v in order],
    )
    return permuted, new_index


def apply_permutation(t: LabeledTypedTree, sigma: PermVector) -> LabeledTypedTree:
    """σ(t): reorder children at every vertex, displacements following their edges."""
    return _permute(t, sigma)[0]


def permute_addresses(
    t: LabeledTypedTree, sigma: PermVector, addresses: Sequence[Address]
) -> List[Address]:
    """Images σ(v) of vertex addresses of t, as addresses of σ(t)."""
    permuted, new_index = _permute(t, sigma)
    return [permuted.addresses[new_index[t.vertex(a)]] for a in addresses]


def invert_perm(t: LabeledTypedTree, sigma: PermVector) -> PermVector:
    """τ* bound to σ(t), with τ*_{σ(v)} = σ_v^{-1}."""
    permuted, new_index = _permute(t, sigma)
    perms: List[Tuple[int, ...]] = [()] * len(t)
    for v, p in enumerate(sigma.perms):
        inverse = [0] * len(p)
        for i, image in enumerate(p, start=1):
            inverse[image - 1] = i
        perms[new_index[v]] = tuple(inverse)
    return PermVector(tuple(perms), permuted.children)


def uniform_perm(
    t: LabeledTypedTree, rng: np.random.Generator, fixed=frozenset()
) -> PermVector:
    """Independent uniform σ_v at each vertex, identity on the vertex indices in fixed."""
    perms = []
    for v, k in enumerate(t.children):
        if k < 2 or v in fixed:
            perms.append(tuple(range(1, k + 1)))
        else:
            perms.append(tuple(int(x) + 1 for x in rng.permutation(k)))
    return PermVector(tuple(perms), t.children)


def sample_symmetrization(
    t: LabeledTypedTree, rng: np.random.Generator
) -> LabeledTypedTree:
    return apply_permutation(t, uniform_perm(t, rng))


def iter_restricted_perms(
    t: LabeledTypedTree, fixed=frozenset()
) -> Iterator[PermVector]:
    """Every σ in P_t that is the identity on the vertex indices in fixed."""
    choices = []
    for v, k in enumerate(t.children):
        if v in fixed:
            choices.append([tuple(range(1, k + 1))])
        else:
            choices.append([tuple(x) for x in itertools.permutations(range(1, k + 1))])
    for combo in itertools.product(*choices):
        yield PermVector(tuple(combo), t.children)


def count_restricted_perms(t: LabeledTypedTree, fixed=frozenset()) -> int:
    return math.prod(
        math.factorial(k) for v, k in enumerate(t.children) if v not in fixed
    )


# -- spanned subtrees ---------------------------------------------------------------


@dataclass(frozen=True)
class SpannedSubtree:
    """t(v) with U(v) and the branchpoints of v in the original tree.

    Equality compares the subtree and U(v) only; branchpoints are addresses of
    the tree the vertices were sampled from.
    """

    subtree: LabeledTypedTree
    correspondence: Tuple[Address, ...]
    branchpoints: FrozenSet[Address] = field(compare=False)

    def key(self) -> str:
        us = "|".join(".".join(map(str, a)) for a in self.correspondence)
        return f"{self.subtree.canonical_key()}#{us}"


def _ancestors_closure(t: LabeledTypedTree, vertices: Sequence[int]) -> List[bool]:
    keep = [False] * len(t)
    for v in vertices:
        while v >= 0 and not keep[v]:
            keep[v] = True
            v = t.parent[v]
    return keep


def branchpoints(t: LabeledTypedTree, v: Sequence[Address]) -> FrozenSet[Address]:
    """Vertices with at least two children carrying sampled descendants."""
    idx = [t.vertex(a) for a in v]
    return frozenset(t.addresses[u] for u in _branch_indices(t, idx))


def _branch_indices(t: LabeledTypedTree, idx: Sequence[int]) -> FrozenSet[int]:
    keep = _ancestors_closure(t, idx)
    return frozenset(
        u for u in range(len(t)) if sum(1 for c in t.kids[u] if keep[c]) >= 2
    )


def spanning_subtree(t: LabeledTypedTree, v: Sequence[Address]) -> SpannedSubtree:
    idx = [t.vertex(a) for a in v]
    keep = _ancestors_closure(t, idx)
    children = {u: [c for c in t.kids[u] if keep[c]] for u in range(len(t)) if keep[u]}
    sub, order = LabeledTypedTree.from_adjacency(
        0,
        children,
        {u: t.types[u] for u in children},
        {u: t.disp2[u] for u in children},
    )
    position = {old: new for new, old in enumerate(order)}
    correspondence = tuple(sub.addresses[position[i]] for i in idx)
    branch = frozenset(t.addresses[u] for u in _branch_indices(t, idx))
    return SpannedSubtree(sub, correspondence, branch)


def zero_branch_displacements(sub: SpannedSubtree) -> SpannedSubtree:
    """d⟨v⟩: zero every edge leaving a subtree vertex whose out-degree is not 1."""
    s = sub.subtree
    disp2 = list(s.disp2)
    for u, k in enumerate(s.children):
        if k != 1:
            for c in s.kids[u]:
                disp2[c] = 0
    return SpannedSubtree(s.with_disp2(disp2), sub.correspondence, sub.branchpoints)


def branch_restricted_symmetrize(
    t: LabeledTypedTree, v: Sequence[Address], rng: np.random.Generator
) -> Tuple[LabeledTypedTree, List[Address]]:
    """(T̂, v̂): σ uniform on P_(t,v), branchpoint child edges zeroed, v mapped by σ."""
    idx = [t.vertex(a) for a in v]
    branch = _branch_indices(t, idx)
    sigma = uniform_perm(t, rng, fixed=branch)
    return _restricted_image(t, idx, branch, sigma)


def _restricted_image(t, idx, branch, sigma):
    disp2 = list(t.disp2)
    for u in branch:
        for c in t.kids[u]:
            disp2[c] = 0
    zeroed = t.with_disp2(disp2)
    permuted, new_index = _permute(zeroed, sigma)
    return permuted, [permuted.addresses[new_index[i]] for i in idx]


def iter_branch_restricted_images(
    t: LabeledTypedTree, v: Sequence[Address]
) -> Iterator[Tuple[LabeledTypedTree, List[Address]]]:
    """All (T̂, v̂) over σ in P_(t,v), each equally likely under the uniform draw."""
    idx = [t.vertex(a) for a in v]
    branch = _branch_indices(t, idx)
    for sigma in iter_restricted_perms(t, fixed=branch):
        yield _restricted_image(t, idx, branch, sigma)


def sampled_structure(t: LabeledTypedTree, v: Sequence[Address]) -> SpannedSubtree:
    """(t(v), d⟨v⟩, U(v)) in one value."""
    return zero_branch_displacements(spanning_subtree(t, v))

