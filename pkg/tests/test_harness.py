"""Tests for mobile_maps.harness module."""

from fractions import Fraction

import pytest

from mobile_maps import harness
from mobile_maps.errors import DomainError
from mobile_maps.harness import (
    TestReport,
    bijection_audit,
    centering_audit,
    chirality_control,
    energy_permutation_test,
    eqdist_check,
    fdd_compare,
    gh_check,
    identities_check,
    law_corpus,
    merge_reports,
    run_parallel,
    sample_uniform_times,
    sampled_structure_law,
    scaling_estimate,
    sibling_dependent_law,
    snake_covariance_check,
    tree_from_walk,
)


class TestReportOutcome:
    """Test pass/fail rules of TestReport."""

    def test_p_value_modes_pass_above_threshold(self):
        """Test that a p-value report passes only above alpha."""
        assert TestReport("a", "KS", 0.2, 0.001).passed
        assert not TestReport("a", "chi-square", 0.0001, 0.001).passed

    def test_other_modes_pass_at_or_below_threshold(self):
        """Test exact and tolerance reports against their thresholds."""
        assert TestReport("a", "exact", 0, 0).passed
        assert not TestReport("a", "exact", 1, 0).passed
        assert TestReport("a", "tolerance", 0.05, 0.05).passed

    def test_failed_check_fails_report(self):
        """Test that any false entry in checks fails the report."""
        report = TestReport("a", "exact", 0, 0, checks={"ok": True, "bad": False})
        assert not report.passed

    def test_dict_round_trip_keeps_pass_flag(self):
        """Test to_dict adds the pass flag and from_dict ignores it."""
        report = TestReport("a", "energy", 0.5, 0.001, seed=3, sizes={"k": 2})
        data = report.to_dict()
        assert data["pass"] is True
        assert TestReport.from_dict(data) == report

    def test_unknown_mode_rejected(self):
        """Test that an unknown mode raises DomainError."""
        with pytest.raises(DomainError):
            TestReport("a", "vibes", 0, 0)


def test_merge_reports_orders_by_name():
    """Test that merged reports come back sorted by name."""
    reports = [TestReport(n, "exact", 0, 0) for n in ("b", "c", "a")]
    assert [r.name for r in merge_reports(reports)] == ["a", "b", "c"]


def test_run_parallel_is_deterministic():
    """Test that spawned seeds do not depend on the number of workers."""

    def task(rng, seed):
        return TestReport(f"t{seed % 7}", "tolerance", rng.random(), 1.0, seed=seed)

    tasks = {"x": task, "y": task, "z": task}
    one = run_parallel(tasks, 11, workers=1)
    three = run_parallel(tasks, 11, workers=3)
    assert [r.to_dict() for r in one] == [r.to_dict() for r in three]
    assert len({r.seed for r in one}) == 3


def test_tree_from_walk(small_tree):
    """Test that a Dyck path is decoded to the tree it is the contour of."""
    assert tree_from_walk([0, 1, 2, 1, 0, 1, 0]) == small_tree.shape()


def test_sample_uniform_times_avoids_root(small_tree, rng):
    """Test sorted times and addresses that never land on the root."""
    for _ in range(50):
        times, addresses = sample_uniform_times(small_tree, 3, rng)
        assert list(times) == sorted(times)
        assert () not in addresses
        assert len(addresses) == 3


def test_sibling_dependent_law_size(rng):
    """Test that the control law draws trees with edges + 1 vertices."""
    t = sibling_dependent_law(7).sample(rng)
    assert len(t) == 8
    assert t.disp2[0] == 0


@pytest.mark.parametrize("name", sorted(law_corpus()))
def test_eqdist_holds_for_corpus(name):
    """Test exact equality of sampled structures for one sampled vertex."""
    report = eqdist_check(law_corpus()[name], 1, 5)
    assert report.passed, report.details
    assert report.statistic == 0.0


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(law_corpus()))
def test_eqdist_holds_for_pairs(name):
    """Test exact equality of sampled structures for two sampled vertices."""
    assert eqdist_check(law_corpus()[name], 2, 5).passed


def test_sampled_structure_law_without_the_root():
    """Test that conditioning on missing the root drops root draws and renormalizes."""
    law = law_corpus()["star-two-leaves"]
    plain = sampled_structure_law(law, 1, 5)
    conditioned = sampled_structure_law(law, 1, 5, exclude_root=True)
    assert len(plain) == 3
    assert len(conditioned) == 2
    assert conditioned.total == 1
    assert all(p == Fraction(1, 2) for p in conditioned.values())
    assert not any(key.endswith("#") for key in conditioned)


@pytest.mark.parametrize("name", sorted(law_corpus()))
def test_eqdist_holds_without_the_root(name):
    """Test exact equality of sampled structures conditioned on missing the root."""
    report = eqdist_check(law_corpus()[name], 1, 5, exclude_root=True)
    assert report.passed, report.details
    assert report.name.endswith("/no-root")
    assert report.sizes["exclude_root"]


def test_fdd_compare_draws_times_per_tree(monkeypatch, rng):
    """Test that fdd times come from the root-avoiding sampler of each drawn tree."""
    sizes = []

    def recording(t, k, rng, **kwargs):
        sizes.append(len(t))
        return sample_uniform_times(t, k, rng, **kwargs)

    monkeypatch.setattr(harness, "sample_uniform_times", recording)
    report = fdd_compare(law_corpus()["star-two-leaves"], 2, 20, rng, permutations=19)
    assert sizes == [3] * 40
    assert report.sizes["samples"] == 20


def test_eqdist_needs_a_vertex():
    """Test that k = 0 is rejected."""
    with pytest.raises(DomainError):
        eqdist_check(law_corpus()["binary-shifted"], 0, 5)


def test_centering_audit():
    """Test that mobile labelings are centered but not locally centered."""
    report = centering_audit(2)
    assert report.passed
    assert report.checks["not_locally_centered"]
    witness = report.details["witness"]
    assert witness["parent_type"] == 3
    assert witness["ctype"] == [1, 2]


def test_bijection_audit_small_maps():
    """Test the mobile bijection on every map with at most three edges."""
    report = bijection_audit(3)
    assert report.passed, report.details["failures"][:5]
    assert report.sizes["maps+"] == report.sizes["mobiles+"]


def test_bijection_audit_caps_size():
    """Test that the exhaustive audit refuses large maps."""
    with pytest.raises(DomainError):
        bijection_audit(6)


@pytest.mark.slow
def test_chirality_control_is_detected():
    """Test that reversing the rotation breaks the rooted round trip."""
    report = chirality_control(4)
    assert not report.passed
    assert report.statistic > 0


def test_identities_check(rng):
    """Test deterministic identities on a batch of small random trees."""
    report = identities_check(
        rng, trees=20, small_vertices=8, max_vertices=200, perms=3
    )
    assert report.passed, report.details


def test_energy_test_separates_shifted_samples(rng):
    """Test that a three-sigma shift gives a small permutation p-value."""
    x = rng.normal(0.0, 1.0, size=(50, 1))
    y = rng.normal(3.0, 1.0, size=(50, 1))
    statistic, p = energy_permutation_test(x, y, rng)
    assert statistic > 0
    assert p < 0.01


def test_scaling_needs_two_sizes(rng):
    """Test that a slope fit needs two distinct sizes."""
    with pytest.raises(DomainError):
        scaling_estimate({4: "1/12"}, [64, 64], 2, "label_range", rng)
    with pytest.raises(DomainError):
        scaling_estimate({4: "1/12"}, [32, 64], 2, "area", rng)


def test_gh_check(rng):
    """Test the exact GH solver against brute force on random spaces."""
    report = gh_check(rng, instances=5, points=3)
    assert report.passed
    assert report.checks["two_point"]


@pytest.mark.slow
def test_snake_covariance(rng):
    """Test snake label covariances against mean excursion minima."""
    report = snake_covariance_check(rng, samples=4000, rel_tol=0.15)
    assert report.passed, report.details


@pytest.mark.slow
def test_fdd_detects_sibling_dependence(rng):
    """Test that the energy comparison rejects the sibling-dependent law."""
    report = fdd_compare(sibling_dependent_law(), 2, 500, rng)
    assert not report.passed


@pytest.mark.slow
def test_fdd_accepts_valid_law(rng):
    """Test that a valid law and its symmetrization are not told apart."""
    law = law_corpus()["two-type"]
    law.vertex_cap = 5000
    report = fdd_compare(law, 2, 300, rng)
    assert report.passed
