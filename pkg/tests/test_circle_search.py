from fractions import Fraction

import numpy as np
import pytest

from services.circle_search import (
    STRATEGIES,
    Budget,
    Target,
    certify_circle_lower_bound,
    heuristic_circle_system,
    prefix_forces_target,
    restrict_to_circle,
    theorem32_bound,
    union_heuristic_system,
    _image_greedy_plan,
    _peel_plan,
)
from services.errors import SearchError
from services.retractions import build_system, lip_constants, random_system, validate_system
from services.spaces import build_circle, build_circle_union


@pytest.mark.parametrize("n, value", [(10, 1.0), (12, 1.1061), (16, 1.2947)])
def test_bound_values(n, value):
    bound = theorem32_bound(n)
    assert bound.value == pytest.approx(value, abs=1e-4)
    assert bound.radicand == 8 * n + 1
    assert bound.hypothesis_met


def test_bound_below_hypothesis():
    assert not theorem32_bound(9).hypothesis_met


def test_target_comparisons_are_exact():
    auto = Target.auto(10)
    assert auto.reached_by(1)
    assert not auto.reached_by(Fraction(99, 100))
    assert auto.ratio_reached(3, 3)
    assert not auto.ratio_reached(2, 3)
    twelve = Target.auto(12)
    assert twelve.reached_by(Fraction(111, 100))
    assert not twelve.reached_by(Fraction(110, 100))
    assert Target.parse("3/2", 10).reached_by(Fraction(3, 2))
    assert Target.parse("auto", 16).describe() == "(sqrt(129)-1)/8"


@pytest.mark.parametrize("text", ["0", "-1", "abc", "1/0x"])
def test_target_rejects_bad_text(text):
    with pytest.raises(SearchError):
        Target.parse(text, 10)


def test_budget_must_be_positive():
    with pytest.raises(SearchError):
        Budget(nodes=0)
    with pytest.raises(SearchError):
        Budget(seconds=-1)


@pytest.mark.parametrize("strategy", STRATEGIES)
@pytest.mark.parametrize("n", [3, 4, 7, 10, 12])
def test_heuristics_build_valid_systems(n, strategy):
    result = heuristic_circle_system(n, strategy)
    assert validate_system(result.system).valid
    assert result.achieved == max(lip_constants(result.system))
    assert result.achieved >= 1


def test_heuristic_reference_values():
    assert heuristic_circle_system(4, "peel-one-arc").achieved == 2
    with pytest.raises(SearchError):
        heuristic_circle_system(8, "spiral")
    with pytest.raises(SearchError):
        heuristic_circle_system(2)


def test_greedy_beats_the_antipodal_value():
    result = heuristic_circle_system(12, "greedy-min-lip")
    assert validate_system(result.system).valid
    assert result.achieved < 5
    assert result.achieved < 12 // 2


@pytest.mark.parametrize("n", [5, 8, 12, 17])
def test_image_plans_track_the_exact_lip(n):
    plans = [_peel_plan(n, "peel-one-arc"), _peel_plan(n, "peel-balanced"), _image_greedy_plan(n)]
    for plan in plans:
        assert sorted(plan.order) == list(range(n + 1))
        system = build_system(build_circle(n), plan.order, plan.parent)
        assert validate_system(system).valid
        assert plan.worst == max(lip_constants(system))


def test_large_circles_use_the_image_greedy():
    result = heuristic_circle_system(32, "greedy-min-lip")
    assert validate_system(result.system).valid
    assert result.achieved == _image_greedy_plan(32).worst


def test_unit_target_is_certified_at_the_root():
    cert = certify_circle_lower_bound(10, Target(rational=Fraction(1)))
    assert cert.outcome == "certified"
    assert cert.nodes_explored == 0


def test_heuristics_refute_large_target():
    cert = certify_circle_lower_bound(12, Target.parse("5", 12))
    assert cert.outcome == "counterexample"
    assert cert.nodes_explored == 0
    assert cert.achieved < 5
    assert validate_system(cert.system).valid


def test_tiny_budget_is_indeterminate():
    cert = certify_circle_lower_bound(12, Target.auto(12), Budget(nodes=1))
    assert cert.outcome == "indeterminate"
    assert cert.frontier
    assert set(cert.heuristics) == set(STRATEGIES)


def test_circle_search_rejects_small_n():
    with pytest.raises(SearchError):
        certify_circle_lower_bound(2, Target(rational=Fraction(2)))


TARGETS = [Fraction(1), Fraction(11, 10), Fraction(5, 4), Fraction(3, 2), Fraction(2), Fraction(100)]


@pytest.fixture(scope="module")
def c6_outcomes():
    return {
        t: certify_circle_lower_bound(6, Target(rational=t), try_heuristics=False) for t in TARGETS
    }


def test_outcomes_are_monotone_in_target(c6_outcomes):
    outcomes = [c6_outcomes[t].outcome for t in TARGETS]
    assert outcomes[0] == "certified"
    assert outcomes[-1] == "counterexample"
    assert "indeterminate" not in outcomes
    first = outcomes.index("counterexample")
    assert all(o == "counterexample" for o in outcomes[first:])


def test_counterexamples_stay_below_target(c6_outcomes):
    for t, cert in c6_outcomes.items():
        if cert.outcome == "counterexample":
            assert validate_system(cert.system).valid
            assert cert.achieved < t
            assert cert.achieved == max(lip_constants(cert.system))


def test_pruned_branches_force_target(c6_outcomes):
    for t, cert in c6_outcomes.items():
        for order, parent in cert.pruned_samples:
            assert prefix_forces_target(6, Target(rational=t), order, parent)


def test_heuristic_agrees_with_search(c6_outcomes):
    best = min(heuristic_circle_system(6, s).achieved for s in STRATEGIES)
    for t, cert in c6_outcomes.items():
        if cert.outcome == "certified":
            assert best >= t


@pytest.mark.parametrize("t", [Fraction(11, 10), Fraction(3, 2)])
def test_parallel_matches_serial(c6_outcomes, t):
    cert = certify_circle_lower_bound(6, Target(rational=t), threads=2, try_heuristics=False)
    assert cert.outcome == c6_outcomes[t].outcome


@pytest.mark.parametrize("t", [Fraction(11, 10), Fraction(3, 2)])
def test_resume_from_frontier(c6_outcomes, t):
    target = Target(rational=t)
    partial = certify_circle_lower_bound(6, target, Budget(nodes=1), try_heuristics=False)
    if partial.outcome != "indeterminate":
        assert partial.outcome == c6_outcomes[t].outcome
        return
    resumed = certify_circle_lower_bound(6, target, resume=partial.frontier, try_heuristics=False)
    assert resumed.outcome == c6_outcomes[t].outcome


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_union_heuristics_restrict_to_circles(strategy):
    system = union_heuristic_system(2, strategy)
    assert validate_system(system).valid
    for level in (1, 2):
        report = restrict_to_circle(system, level)
        assert not report.escaped
        assert report.holds
        assert validate_system(report.restricted).valid
        assert report.restricted.space.size == 4 ** level + 1


def test_random_union_systems_satisfy_restriction():
    space = build_circle_union(2)
    rng = np.random.default_rng(11)
    for _ in range(5):
        system = random_system(space, rng)
        for level in (1, 2):
            report = restrict_to_circle(system, level)
            assert report.holds
            if report.escaped:
                assert report.lip >= report.circle_size


def test_restriction_needs_union():
    system = heuristic_circle_system(6).system
    with pytest.raises(SearchError):
        restrict_to_circle(system, 1)
    with pytest.raises(SearchError):
        restrict_to_circle(union_heuristic_system(1), 2)


@pytest.mark.slow
def test_twelve_point_circle_is_certified():
    cert = certify_circle_lower_bound(12, Target.auto(12), Budget(nodes=10**9, seconds=3600))
    assert cert.outcome == "certified"


def test_parallel_search_respects_the_node_budget():
    cert = certify_circle_lower_bound(6, Target(rational=Fraction(3, 2)), Budget(nodes=40), threads=2,
                                      try_heuristics=False)
    assert cert.nodes_explored <= 40 + 1
