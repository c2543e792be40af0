"""Tests for mobile_maps.laws module."""

from fractions import Fraction
import math

import pytest

from mobile_maps.distribution import FiniteDistribution
from mobile_maps.errors import (
    DomainError,
    InvalidParamsError,
    MissingEntryError,
    OverflowSignal,
)
from mobile_maps.laws import (
    DisplacementFamily,
    MobileParams,
    OffspringFamily,
    ValidLaw,
    admissible_labelings,
    centering_check,
    class_sums,
    enumerate_gw_shapes,
    exact_law_enumeration,
    f_bullet,
    f_diamond,
    gw_sample,
    gw_sample_conditioned,
    gw_sample_sized,
    has_odd_face,
    label_tree,
    mobile_law,
    mobile_offspring,
    normalize_weights,
    shape_law,
    solve_constants,
    symmetrize_family,
    valid_sample,
)
from mobile_maps.harness import law_corpus
from mobile_maps.maps import check_mobile, mobile_vertex_count
from mobile_maps.symmetry import apply_permutation, iter_restricted_perms
from mobile_maps.tree_core import LabeledTypedTree


@pytest.fixture
def binary():
    """Critical binary offspring law."""
    return OffspringFamily({1: FiniteDistribution({(): "1/2", (1, 1): "1/2"})})


@pytest.fixture
def shifted():
    """Displacements of a binary vertex, not centered coordinatewise."""
    return DisplacementFamily(
        {(1, (1, 1)): FiniteDistribution({(1, -1): "1/3", (0, 2): "2/3"})}
    )


@pytest.fixture(scope="module")
def quadrangulation_params():
    """Mobile constants for quadrangulations."""
    return solve_constants({4: 1})


def test_displacement_family_lookup(shifted):
    """Test stored entries, empty child types and missing keys."""
    assert shifted[(1, (1, 1))].prob((Fraction(1), Fraction(-1))) == Fraction(1, 3)
    assert shifted.law_for(1, ()) == FiniteDistribution.point(())
    with pytest.raises(MissingEntryError):
        shifted[(1, (1,))]


@pytest.mark.parametrize(
    "entries",
    [
        {(1, (1, 1)): FiniteDistribution({(1,): 1})},
        {(1, (1,)): FiniteDistribution({(1,): "1/2"})},
    ],
)
def test_displacement_family_validation(entries):
    """Test that vector lengths and total mass are checked."""
    with pytest.raises(DomainError):
        DisplacementFamily(entries)


def test_symmetrize_family_averages_orders(shifted):
    """Test π^sym as the average over reorderings of the children."""
    sym = symmetrize_family(shifted)[(1, (1, 1))]
    assert sym.prob((Fraction(1), Fraction(-1))) == Fraction(1, 6)
    assert sym.prob((Fraction(-1), Fraction(1))) == Fraction(1, 6)
    assert sym.prob((Fraction(2), Fraction(0))) == Fraction(1, 3)
    assert sym.mean() == (Fraction(2, 3), Fraction(2, 3))


def test_symmetrize_family_is_idempotent(shifted):
    """Test that symmetrizing twice changes nothing."""
    mixed = DisplacementFamily(
        {
            (1, (1, 2)): FiniteDistribution({(1, 0): "1/2", (-1, 2): "1/2"}),
            (1, (2, 1)): FiniteDistribution({(0, 0): 1}),
        }
    )
    families = [shifted, mixed] + [law.displacements for law in law_corpus().values()]
    for fam in families:
        once = symmetrize_family(fam)
        assert symmetrize_family(once) == once


def test_centering_modes(shifted):
    """Test local and class-summed centering."""
    centered = DisplacementFamily(
        {(1, (1, 1)): FiniteDistribution({(1, -1): "1/2", (-1, 1): "1/2"})}
    )
    assert centering_check(centered, "local")
    assert not centering_check(shifted, "local")
    assert not centering_check(shifted, "centered")
    assert class_sums(shifted) == {(1, ((1, 2),)): Fraction(4, 3)}
    with pytest.raises(DomainError):
        centering_check(shifted, "sideways")


def test_offspring_must_be_permutation_invariant():
    """Test that reordered child-type vectors need equal probability."""
    with pytest.raises(DomainError):
        OffspringFamily(
            {
                1: FiniteDistribution({(1, 2): "1/2", (): "1/2"}),
                2: FiniteDistribution({(): 1}),
            }
        )


def test_offspring_invariance_on_long_constant_vectors():
    """Test that long vectors of one type pass without listing their orderings."""
    law = {(3,) * k: Fraction(1, 2 ** (k + 1)) for k in range(80)}
    law[(3,) * 80] = Fraction(1, 2**80)
    off = OffspringFamily({1: FiniteDistribution(law)})
    assert off.table(1).prob((3,) * 79) == Fraction(1, 2**80)


def test_offspring_invariance_needs_whole_orbit():
    """Test that a missing ordering or an unequal weight is refused."""
    with pytest.raises(DomainError):
        OffspringFamily({1: FiniteDistribution({(1, 1, 2): "1/2", (): "1/2"})})
    with pytest.raises(DomainError):
        OffspringFamily(
            {
                1: FiniteDistribution(
                    {(1, 1, 2): "1/6", (1, 2, 1): "1/12", (2, 1, 1): "1/4", (): "1/2"}
                )
            }
        )
    ok = OffspringFamily(
        {
            1: FiniteDistribution(
                {(1, 1, 2): "1/6", (1, 2, 1): "1/6", (2, 1, 1): "1/6", (): "1/2"}
            )
        }
    )
    assert ok.types == (1,)


def test_gw_sample_leaf_law(rng):
    """Test that a law with no children yields the single vertex."""
    off = OffspringFamily({1: FiniteDistribution({(): 1})})
    assert gw_sample(off, 1, rng, 10) == LabeledTypedTree.single()


def test_gw_sample_overflow(rng):
    """Test that an ever-growing population hits the vertex cap."""
    off = OffspringFamily({1: FiniteDistribution({(1, 1): 1})})
    with pytest.raises(OverflowSignal):
        gw_sample(off, 1, rng, 10)


def test_gw_sample_sized(binary, rng):
    """Test size-conditioned rejection sampling."""
    t = gw_sample_sized(binary, 1, 5, rng, attempt_cap=10_000)
    assert len(t) == 5


def test_gw_sample_conditioned(binary, rng):
    """Test conditioning on the number of vertices of one type."""
    t = gw_sample_conditioned(binary, 1, (1, 7), rng, attempt_cap=10_000)
    assert len(t) == 7
    with pytest.raises(DomainError):
        gw_sample_conditioned(binary, 1, (1, 7), rng, attempt_cap=0)


def test_enumerate_gw_shapes(binary):
    """Test exact shape probabilities below a vertex cap."""
    shapes = enumerate_gw_shapes(binary, 1, 3)
    assert shapes.prob(LabeledTypedTree.single()) == Fraction(1, 2)
    assert shapes.prob(LabeledTypedTree((1, 1, 1), (2, 0, 0))) == Fraction(1, 8)
    assert shapes.total == Fraction(5, 8)


def test_exact_law_enumeration_point_law():
    """Test the exact law of a deterministic labeled tree."""
    shape = LabeledTypedTree((1, 1, 1), (2, 0, 0))
    law = ValidLaw(
        DisplacementFamily({(1, (1, 1)): FiniteDistribution({(1, 2): 1})}),
        shapes=FiniteDistribution.point(shape),
    )
    (tree,) = exact_law_enumeration(law, 3)
    assert tree.canonical_key() == "1,2,0;1,0,2;1,0,4"


def test_conditioned_shape_law(binary, shifted):
    """Test renormalization on the size and an empty conditioning event."""
    law = ValidLaw(shifted, offspring=binary, size=3)
    shapes = shape_law(law, 5)
    assert shapes == FiniteDistribution.point(LabeledTypedTree((1, 1, 1), (2, 0, 0)))
    with pytest.raises(DomainError):
        shape_law(ValidLaw(shifted, offspring=binary, size=5), 3)


def test_valid_law_needs_one_shape_source(shifted, binary):
    """Test that exactly one of shapes and offspring is given."""
    with pytest.raises(DomainError):
        ValidLaw(shifted)
    with pytest.raises(DomainError):
        ValidLaw(
            shifted,
            shapes=FiniteDistribution.point(LabeledTypedTree.single()),
            offspring=binary,
        )


def test_symmetry_and_coverage_checks():
    """Test the symmetric-shape and displacement-coverage checks."""
    a = LabeledTypedTree((1, 1, 2), (2, 0, 0))
    b = LabeledTypedTree((1, 2, 1), (2, 0, 0))
    fam = DisplacementFamily(
        {
            (1, (1, 2)): FiniteDistribution({(0, 0): 1}),
            (1, (2, 1)): FiniteDistribution({(0, 0): 1}),
        }
    )
    both = ValidLaw(fam, shapes=FiniteDistribution({a: "1/2", b: "1/2"}))
    assert both.check_symmetric()
    one_sided = ValidLaw(fam, shapes=FiniteDistribution.point(a))
    assert not one_sided.check_symmetric()
    assert one_sided.check_coverage()
    bare = ValidLaw(DisplacementFamily({}), shapes=FiniteDistribution.point(a))
    assert not bare.check_coverage()


def test_conditioned_gw_law_is_symmetric():
    """Test that reorderings of an enumerated conditioned GW tree are equally likely."""
    off = OffspringFamily(
        {
            1: FiniteDistribution({(): "1/2", (1, 2): "1/4", (2, 1): "1/4"}),
            2: FiniteDistribution({(): 1}),
        }
    )
    fam = DisplacementFamily(
        {
            (1, (1, 2)): FiniteDistribution({(1, 0): "1/2", (-1, 2): "1/2"}),
            (1, (2, 1)): FiniteDistribution({(0, 0): 1}),
        }
    )
    law = ValidLaw(fam, offspring=off, size=5).symmetrized()
    enumerated = exact_law_enumeration(law, 5)
    assert enumerated.total == 1
    assert len({t.shape() for t in enumerated}) == 4
    for tree, w in enumerated.items():
        for sigma in iter_restricted_perms(tree):
            assert enumerated.prob(apply_permutation(tree, sigma)) == w


def test_label_tree_draws_displacements(binary, shifted, rng):
    """Test that label_tree stores doubled displacements from the family."""
    shape = LabeledTypedTree((1, 1, 1), (2, 0, 0))
    t = label_tree(shape, shifted, rng)
    assert t.disp2[1:] in ((2, -2), (0, 4))
    fixed = ValidLaw(shifted, shapes=FiniteDistribution.point(shape))
    assert valid_sample(fixed, rng).shape() == shape


def test_admissible_labelings_face_vertex():
    """Test a face vertex with one type-1 child: uniform on -1, 0, 1."""
    law = admissible_labelings(3, (1,))
    assert law == FiniteDistribution.uniform(
        [(Fraction(-1),), (Fraction(0),), (Fraction(1),)]
    )


def test_admissible_labelings_vertex_types():
    """Test that type-1 and type-2 vertices never move their children."""
    assert admissible_labelings(1, (3, 3)) == FiniteDistribution.point(
        (Fraction(0), Fraction(0))
    )
    with pytest.raises(DomainError):
        admissible_labelings(5, (1,))
    with pytest.raises(DomainError):
        admissible_labelings(3, (3,))


def test_admissible_labelings_anchor_and_bounds():
    """Test that the parent label anchors bounds without changing the free law."""
    assert admissible_labelings(3, (1,), parent_label=5) == admissible_labelings(
        3, (1,)
    )
    assert admissible_labelings(
        3, (1,), parent_label=5, bounds=(5, 6)
    ) == FiniteDistribution.uniform([(Fraction(0),), (Fraction(1),)])
    assert admissible_labelings(4, (1,), parent_label="1/2") == (
        FiniteDistribution.uniform([(Fraction(-1, 2),), (Fraction(1, 2),)])
    )
    assert admissible_labelings(
        4, (1,), parent_label="1/2", bounds=(0, 0)
    ) == FiniteDistribution.point((Fraction(-1, 2),))


@pytest.mark.parametrize(
    "parent_type,ctype,label,bounds",
    [
        (3, (1,), "1/2", None),
        (4, (1,), 0, None),
        (3, (1,), 0, (3, 4)),
        (1, (3, 3), 2, (0, 1)),
    ],
)
def test_admissible_labelings_rejects_bad_anchors(parent_type, ctype, label, bounds):
    """Test labels of the wrong parity and bounds no labeling can meet."""
    with pytest.raises(DomainError):
        admissible_labelings(parent_type, ctype, parent_label=label, bounds=bounds)


def test_weights_validation():
    """Test weight normalization and the odd-degree assumption."""
    assert normalize_weights({"4": "0.5", 6: 0}) == {4: 0.5}
    with pytest.raises(InvalidParamsError):
        normalize_weights({4: -1})
    assert has_odd_face({3: 1})
    assert not has_odd_face({4: 1, 6: 1})


def test_solve_constants_quadrangulations(quadrangulation_params):
    """Test the critical constants of quadrangulations."""
    p = quadrangulation_params
    assert p.Zplus == pytest.approx(2.0, rel=1e-5)
    assert p.weights[4] == pytest.approx(1 / 12, rel=1e-5)
    assert p.Zzero == 0
    assert p.alpha == pytest.approx(2.0, rel=1e-5)
    assert f_bullet(p.weights, p.Zplus, 0.0) == pytest.approx(1 - 1 / p.Zplus, abs=1e-9)


def test_solve_constants_triangulations():
    """Test the closed-form critical constants of triangulations."""
    p = solve_constants({3: 1})
    assert p.scale == pytest.approx(1 / (12 * math.sqrt(3)), rel=1e-7)
    assert p.Zplus == pytest.approx(math.sqrt(3), rel=1e-4)
    assert p.Zzero > 0


@pytest.mark.parametrize("q", [{3: 1}, {5: 1}, {3: 1, 4: 0.5}, {4: 1, 7: 2}])
def test_solve_constants_odd_faces(q):
    """Test that odd face degrees give constants solving both equations."""
    p = solve_constants(q)
    assert has_odd_face(p.weights)
    y = math.sqrt(p.Zzero)
    assert p.Zplus > 1
    assert y > 0
    assert f_bullet(p.weights, p.Zplus, y) == pytest.approx(1 - 1 / p.Zplus, abs=1e-8)
    assert f_diamond(p.weights, p.Zplus, y) == pytest.approx(y, abs=1e-8)
    assert p.beta == pytest.approx(1 / y, rel=1e-6)


def test_mobile_offspring_odd_faces(rng):
    """Test the child types of a triangulation mobile."""
    off = mobile_offspring(solve_constants({3: 1}))
    assert off.types == (1, 2, 3, 4)
    for _ in range(20):
        assert set(off.sample(1, rng)) <= {3}
        assert off.sample(2, rng) == (4,)
        assert off.sample(3, rng) == (2,)
        assert off.sample(4, rng) in ((1,), (2, 2))


def test_solve_constants_rejects_degenerate_weights():
    """Test that weights without a usable face degree are refused."""
    with pytest.raises(InvalidParamsError):
        solve_constants({1: 1})
    with pytest.raises(InvalidParamsError):
        solve_constants({})


def test_mobile_params_dict_form(quadrangulation_params):
    """Test that constants survive their dict form."""
    again = MobileParams.from_dict(quadrangulation_params.to_dict())
    assert again == quadrangulation_params


def test_mobile_offspring_types(quadrangulation_params, rng):
    """Test the child types each vertex type may produce for quadrangulations."""
    off = mobile_offspring(quadrangulation_params)
    for _ in range(20):
        assert set(off.sample(1, rng)) <= {3}
        assert off.sample(2, rng) == (4,)
        assert off.sample(3, rng) == (1,)


def test_mobile_law_samples_valid_mobiles(quadrangulation_params, rng):
    """Test that conditioned mobiles are valid and encode n-vertex maps."""
    law = mobile_law(quadrangulation_params, 6, "+")
    for _ in range(10):
        t = valid_sample(law, rng)
        check_mobile(t, "+")
        assert mobile_vertex_count(t) == 6


def test_mobile_law_sign_validation(quadrangulation_params):
    """Test that negative mobile laws do not exist."""
    with pytest.raises(DomainError):
        mobile_law(quadrangulation_params, 4, "-")
    with pytest.raises(DomainError):
        mobile_law(quadrangulation_params, 0, "+")
