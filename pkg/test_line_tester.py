# Tests for triple tests, hub localization and both line testers
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from convexity_testing.core import DiscreteDistribution, GridFunction, Rng, make_oracle, point_mass
from convexity_testing.geometry import distance_to_convex_line, is_convex_on_sorted, triple_is_convex
from convexity_testing.hard_instances import (
    LbAssignment, lb1d_g_function, random_convex_line, sample_lb1d_level,
)
from convexity_testing.line_tester import (
    TripleTest, Verdict, common_hub, convexity_test_1d, convexity_test_1d_distribution_free,
    default_rounds_1d, default_rounds_sampled, enumerate_triple_tests, greedy_failing_roots,
    locate_failing_root, passing_set, run_triple_tests,
)


def test_enumeration_on_two_points():
    tests = enumerate_triple_tests(0, 2)
    assert tests == []


def test_enumeration_is_deduplicated_and_in_range():
    n = 32
    for a in range(n):
        tests = enumerate_triple_tests(a, n)
        assert len(tests) == len(set(tests))
        for test in tests:
            points = test.points()
            assert len(set(points)) == 3
            assert all(0 <= p < n for p in points)
            assert test.height < n
            assert test.hub % test.height == 0


def test_enumeration_respects_max_height():
    tests = enumerate_triple_tests(10, 64, max_height=4)
    assert {t.height for t in tests} <= {1, 2, 4}


def test_enumeration_rejects_out_of_range_root():
    with pytest.raises(ValueError):
        enumerate_triple_tests(5, 5)


def test_convex_function_passes_every_root(parabola_line):
    for a in range(10):
        assert run_triple_tests(parabola_line, a).passed


def test_corrupted_point_fails_height_one_test(corrupted_line):
    outcome = run_triple_tests(corrupted_line, 7)
    assert not outcome.passed
    assert outcome.witness.violates()
    assert outcome.witness.replay(corrupted_line)
    assert 7 in outcome.witness.points


def test_common_hub_examples():
    assert common_hub(0, 4) == (2, 2)
    hub, height = common_hub(1, 3)
    assert hub == 2 and height <= 4
    with pytest.raises(ValueError):
        common_hub(3, 4)


@given(st.integers(min_value=0, max_value=500), st.integers(min_value=2, max_value=500))
def test_common_hub_is_unique_multiple(x, gap):
    y = x + gap
    hub, height = common_hub(x, y)
    assert x < hub < y
    assert hub % height == 0
    assert height <= 2 * (y - x)
    assert [m for m in range(x + 1, y) if m % height == 0] == [hub]


def test_locate_on_consecutive_triple():
    f = GridFunction.line([0, 5, 0, 0])
    root, test = locate_failing_root(f, 0, 1, 2)
    assert root == 0
    assert test == TripleTest(0, 1, 2, 1)


def test_locate_rejects_convex_triple(parabola_line):
    with pytest.raises(ValueError):
        locate_failing_root(parabola_line, 1, 4, 8)


def _non_convex_triples(values):
    n = len(values)
    for x in range(n):
        for y in range(x + 1, n):
            for z in range(y + 1, n):
                if not triple_is_convex(x, y, z, values[x], values[y], values[z]):
                    yield x, y, z


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=3), min_size=3, max_size=14))
def test_locate_returns_a_failing_enumerated_test(values):
    f = GridFunction.line(values)
    n = len(values)
    for x, y, z in _non_convex_triples(values):
        root, test = locate_failing_root(f, x, y, z)
        assert root in (x, y, z)
        assert test.root == root
        p, q, r = test.points()
        assert not triple_is_convex(p, q, r, values[p], values[q], values[r])
        assert test in enumerate_triple_tests(root, n)
        assert test.height <= 2 * max(y - x, z - y)


def test_passing_set_of_convex_function_is_everything(parabola_line):
    assert passing_set(parabola_line) == list(range(10))


def test_passing_set_is_convex_after_corruption(corrupted_line):
    survivors = passing_set(corrupted_line)
    assert 7 not in survivors
    assert is_convex_on_sorted(survivors, [corrupted_line.value(x) for x in survivors])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=3), min_size=4, max_size=16))
def test_passing_set_restriction_is_convex(values):
    f = GridFunction.line(values)
    survivors = passing_set(f)
    assert is_convex_on_sorted(survivors, [values[x] for x in survivors])


def test_greedy_roots_on_far_function():
    rng = Rng(11)
    a = LbAssignment.random(3, rng)
    f = lb1d_g_function(a, 0)
    eps = distance_to_convex_line(f)
    assert eps >= Fraction(1, 9)
    removed = greedy_failing_roots(f, eps)
    n = f.domain.dims[0]
    roots = [root for root, _ in removed]
    assert len(roots) >= eps * n
    assert len(set(roots)) == len(roots)
    for root, test in removed:
        p, q, r = test.points()
        assert not triple_is_convex(p, q, r, f.value(p), f.value(q), f.value(r))
        assert test.height <= 2 * eps * n + 2


def test_default_round_counts():
    assert default_rounds_1d(243, Fraction(1, 9), 40) == 2432
    assert default_rounds_sampled(Fraction(1, 9), 40) == 360
    assert default_rounds_sampled(Fraction(1, 10), 3) == 30


def test_uniform_tester_accepts_convex_functions():
    for seed in range(10):
        f = random_convex_line(64, Rng(seed))
        report = convexity_test_1d(make_oracle(f), 64, Fraction(1, 8), Rng(seed).split("test"), rounds=200)
        assert report.verdict is Verdict.ACCEPT
        assert report.rounds_used == 200
        assert report.query_total <= 3 * 200


def test_uniform_tester_rejects_with_witness():
    f = GridFunction.line([0, 1] * 16)
    report = convexity_test_1d(make_oracle(f), 32, Fraction(1, 4), Rng(3))
    assert report.rejected
    assert report.witness.replay(f)


def test_uniform_tester_validates_eps(parabola_line):
    with pytest.raises(ValueError):
        convexity_test_1d(make_oracle(parabola_line), 10, Fraction(1, 20), Rng(0))
    with pytest.raises(ValueError):
        convexity_test_1d(make_oracle(parabola_line), 10, 1, Rng(0))
    with pytest.raises(ValueError):
        convexity_test_1d(make_oracle(parabola_line), 12, Fraction(1, 2), Rng(0))


def test_distribution_free_tester_accepts_convex_under_any_distribution(parabola_line):
    dist = DiscreteDistribution(((0,), (4,), (9,)), (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
    report = convexity_test_1d_distribution_free(make_oracle(parabola_line, dist), Fraction(1, 4), Rng(1))
    assert report.verdict is Verdict.ACCEPT
    assert report.samples_used == default_rounds_sampled(Fraction(1, 4))


def test_distribution_free_tester_rejects_on_point_mass(corrupted_line):
    oracle = make_oracle(corrupted_line, point_mass(corrupted_line.domain, 7))
    report = convexity_test_1d_distribution_free(oracle, Fraction(1, 10), Rng(2))
    assert report.rejected
    assert report.rounds_used == 1
    assert report.samples_used == 1
    assert report.query_distinct <= report.query_total


def test_uniform_tester_rejects_ternary_instance_often():
    rng = Rng(99)
    a = LbAssignment.random(4, rng.split("assignment"))
    j = sample_lb1d_level(4, rng.split("level"))
    f = lb1d_g_function(a, j)
    rejects = sum(
        convexity_test_1d(make_oracle(f), f.domain.dims[0], Fraction(1, 9), rng.split(f"trial-{t}")).rejected
        for t in range(10)
    )
    assert rejects >= 9


@pytest.mark.slow
def test_uniform_tester_soundness_at_k5():
    rng = Rng(2024)
    for instance in range(5):
        a = LbAssignment.random(5, rng.split(f"a-{instance}"))
        f = lb1d_g_function(a, 2)
        rejects = sum(
            convexity_test_1d(make_oracle(f), 243, Fraction(1, 9), rng.split(f"{instance}-{t}")).rejected
            for t in range(100)
        )
        assert rejects >= 90


@pytest.mark.parametrize("n", [2, 5, 8, 100, 257])
def test_triple_tests_at_one_root_stay_within_query_budget(n):
    f = random_convex_line(n, Rng(n))
    budget = 12 * (n - 1).bit_length()
    for a in range(n):
        oracle = make_oracle(f)
        assert run_triple_tests(oracle, a).passed
        assert oracle.query_total <= budget


def test_distribution_free_queries_per_sample():
    n = 256
    f = random_convex_line(n, Rng(12))
    report = convexity_test_1d_distribution_free(make_oracle(f), Fraction(1, 8), Rng(13), rounds=50)
    assert report.verdict is Verdict.ACCEPT
    assert report.samples_used == 50
    assert report.query_total <= 12 * 8 * report.samples_used


def test_witness_replays_on_fresh_oracle():
    f = GridFunction.line([0, 1] * 16)
    oracle = make_oracle(f, record_trace=True)
    report = convexity_test_1d(oracle, 32, Fraction(1, 4), Rng(3))
    assert report.rejected
    seen = dict(oracle.trace)
    assert [seen[p] for p in report.witness.grid_points()] == list(report.witness.values)

    fresh = make_oracle(f, record_trace=True)
    assert report.witness.replay(fresh)
    assert fresh.query_total == 3
    assert [v for _, v in fresh.trace] == list(report.witness.values)


@pytest.mark.slow
def test_line_testers_never_reject_convex_at_n4096():
    n = 4096
    sources = [GridFunction.line([x * x for x in range(n)])]
    sources += [random_convex_line(n, Rng(700 + s)) for s in range(3)]
    for s, f in enumerate(sources):
        for t in range(5):
            uniform = convexity_test_1d(make_oracle(f), n, Fraction(1, 9), Rng(s).split(f"uniform-{t}"))
            assert uniform.verdict is Verdict.ACCEPT
            free = convexity_test_1d_distribution_free(make_oracle(f), Fraction(1, 9), Rng(s).split(f"free-{t}"))
            assert free.verdict is Verdict.ACCEPT
            assert free.query_total <= 12 * 12 * free.samples_used
