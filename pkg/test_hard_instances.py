# Tests for the hidden-direction and ternary-digit instance families
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest

from convexity_testing.core import GridDomain, Rng
from convexity_testing.geometry import (
    distance_to_convex_line, invert_exact, is_convex_grid, is_convex_line, is_line_convex_grid, triple_is_convex,
)
from convexity_testing.hard_instances import (
    GeneralEpsAssignment, LbAssignment, SignField, appendix_counterexample, basis_completion, canonical_g,
    dn_bound, from_digits, lb1d_f_function, lb1d_g, lb1d_g_function, lb1d_general, lb1d_general_function,
    lb1d_value, lb1d_value_closed, lb1d_witness_pairs, lb1d_witness_points, random_convex_line,
    random_convex_stripe, sample_direction, sample_dn, sample_dn_stripe, sample_dy, sample_lb1d_level,
    sample_stripe_direction, ternary_digits, verify_dn_far,
)


def test_sample_direction_range_and_coprimality():
    rng = Rng(1)
    seen = set()
    for _ in range(200):
        a = sample_direction(2, 16, rng)
        assert all(0 <= c <= 2 for c in a)
        assert a[0] != a[1] or a == (1, 1)
        seen.add(a)
    assert seen <= {(0, 1), (1, 0), (1, 1), (1, 2), (2, 1)}


def test_sample_direction_errors(rng):
    with pytest.raises(ValueError):
        sample_direction(2, 7, rng)
    with pytest.raises(ValueError):
        sample_direction(1, 16, rng)


def test_stripe_direction_shape(rng):
    for _ in range(50):
        a = sample_stripe_direction(1024, rng)
        assert a[0] == 1 and 0 <= a[1] <= 10


def test_basis_completion_of_unit_vector():
    basis = basis_completion((1, 0, 0))
    assert (basis.c1, basis.c2) == (1, 0)
    assert abs(basis.determinant()) == 1


def test_basis_completion_hand_example():
    basis = basis_completion((2, 3))
    assert (basis.c1, basis.c2) == (2, 1)
    assert 2 * basis.c1 - 3 * basis.c2 == 1
    assert abs(basis.determinant()) == 1
    product = [[sum(basis.B[i][k] * basis.B_inv[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    assert product == [[1, 0], [0, 1]]
    assert [list(map(int, row)) for row in invert_exact(basis.B)] == [list(row) for row in basis.B_inv]


def test_basis_completion_higher_dimension():
    basis = basis_completion((2, 1, 2, 0))
    assert abs(basis.determinant()) == 1
    assert basis.coordinates((2, 1, 2, 0)) == (1, 0, 0, 0)
    assert basis.point(basis.coordinates((3, 1, 4, 1))) == (3, 1, 4, 1)


def test_basis_completion_rejects_non_coprime():
    with pytest.raises(ValueError):
        basis_completion((2, 4))


def test_canonical_g_values():
    basis = basis_completion((2, 3))
    assert canonical_g(basis, (2, 3)) == 1
    assert canonical_g(basis, (0, 0)) == 0


def test_sign_field_is_memoized_and_seeded():
    signs = SignField(5)
    values = [signs.sign((k,)) for k in range(64)]
    assert set(values) <= {-1, 1}
    assert values == [SignField(5).sign((k,)) for k in range(64)]
    assert values != [SignField(6).sign((k,)) for k in range(64)]
    assert SignField(5, constant=1).sign((3,)) == 1


def test_yes_instances_are_convex():
    for seed in range(3):
        h = sample_dy(2, 8, Rng(seed))
        assert is_convex_grid(h.function().materialize())


def test_forced_positive_signs_shift_by_one():
    h = sample_dy(2, 8, Rng(3), signs=SignField(0, constant=1))
    for x in h.domain.points():
        assert h.value(x) == canonical_g(h.basis, x) + 1
    assert is_convex_grid(h.function().materialize())


def test_same_seed_gives_same_instance():
    first = sample_dn(2, 8, Rng(42)).function().materialize()
    second = sample_dn(2, 8, Rng(42)).function().materialize()
    assert first == second


def test_no_instance_alternation_pattern():
    h = sample_dn(2, 16, Rng(9))
    a = h.basis.a
    for x in h.domain.points():
        y = tuple(c + s for c, s in zip(x, a))
        z = tuple(c + 2 * s for c, s in zip(x, a))
        if not (h.domain.contains(y) and h.domain.contains(z)):
            continue
        coords = h.basis.coordinates(x)
        sign = h.signs.sign(coords[1:]) * (-1) ** coords[0]
        convex = triple_is_convex(0, 1, 2, h.value(x), h.value(y), h.value(z))
        assert convex == (sign == 1)


def test_no_instances_certified_far():
    bound = dn_bound(2)
    assert bound == Fraction(1, 28)
    for seed in range(5):
        h = sample_dn(2, 16, Rng(seed))
        certificate = verify_dn_far(h, h.basis)
        assert certificate.bound >= bound
        points = [p for w in certificate.witnesses for p in w]
        assert len(points) == len(set(points))
        for w in certificate.witnesses:
            assert not triple_is_convex(0, 1, 2, *(h.value(p) for p in w))


def test_stripe_no_instances_have_many_witnesses():
    for seed in range(5):
        h = sample_dn_stripe(300, Rng(seed))
        certificate = verify_dn_far(h, h.basis)
        assert certificate.bound >= Fraction(1, 10)


def test_ternary_digits_round_trip():
    assert ternary_digits(5, 3) == (0, 1, 2)
    assert from_digits((0, 1, 2)) == 5
    assert all(from_digits(ternary_digits(x, 4)) == x for x in range(81))


def test_random_assignment_shape():
    a = LbAssignment.random(3, Rng(0))
    assert len(a.values) == 1 + 3 + 9
    assert all(0 <= v <= 3 ** 3 - 2 for v in a.values.values())
    assert a.m == 81 and a.n == 27
    with pytest.raises(ValueError):
        LbAssignment.random(1, Rng(0))


@pytest.mark.parametrize("k", [3, 4])
def test_base_functions_are_convex(k):
    for seed in range(5):
        a = LbAssignment.random(k, Rng(seed))
        assert is_convex_line(lb1d_f_function(a))


@pytest.mark.parametrize("k", [3, 4, 5])
def test_closed_form_matches_recursion(k):
    for seed in range(3):
        a = LbAssignment.random(k, Rng(seed))
        assert lb1d_value_closed(a, 0) == 0
        assert all(lb1d_value(a, x) == lb1d_value_closed(a, x) for x in range(a.n))


def test_value_range_errors():
    a = LbAssignment.random(3, Rng(0))
    with pytest.raises(ValueError):
        lb1d_value(a, 27)
    with pytest.raises(ValueError):
        lb1d_value_closed(a, -1)
    with pytest.raises(ValueError):
        lb1d_g(a, 3, 0)


def test_perturbation_shifts_one_level():
    a = LbAssignment.random(3, Rng(2))
    shifted = a.perturbed(1, 1)
    for s, v in a.values.items():
        assert shifted.values[s] == (v + 1 if len(s) == 1 else v)
    assert a.perturbed(1, 1) is shifted


def test_far_levels_are_one_ninth_far():
    for seed in range(5):
        a = LbAssignment.random(3, Rng(seed))
        for j in range(a.k - 1):
            assert distance_to_convex_line(lb1d_g_function(a, j)) >= Fraction(1, 9)


def test_last_level_stays_convex():
    for seed in range(3):
        a = LbAssignment.random(3, Rng(seed))
        assert is_convex_line(lb1d_g_function(a, a.k - 1))


def test_g_agrees_with_f_where_digit_is_two():
    a = LbAssignment.random(3, Rng(4))
    for x in range(a.n):
        if ternary_digits(x, 3)[1] == 2:
            assert lb1d_g(a, 1, x) == lb1d_value(a, x)


def test_witness_pairs_drop_slope():
    a = LbAssignment.random(4, Rng(6))
    for j in range(a.k - 1):
        pairs = lb1d_witness_pairs(a, j)
        assert len(pairs) == 3 ** (a.k - 2)
        for x, y in pairs:
            slope_x = lb1d_g(a, j, x + 1) - lb1d_g(a, j, x)
            slope_y = lb1d_g(a, j, y + 1) - lb1d_g(a, j, y)
            assert x < y and slope_x > slope_y
        points = lb1d_witness_points(a, j)
        assert len(points) == 4 * len(pairs)
    with pytest.raises(ValueError):
        lb1d_witness_pairs(a, a.k - 1)


def test_sample_level_range(rng):
    assert {sample_lb1d_level(4, rng) for _ in range(200)} == {0, 1, 2}


def test_general_parameters():
    assert GeneralEpsAssignment.parameters(243, Fraction(1, 27)) == (3, 4)
    assign = GeneralEpsAssignment.from_eps(243, Fraction(1, 27), Rng(0))
    assert (assign.l, assign.k, assign.n) == (3, 4, 243)
    with pytest.raises(ValueError):
        GeneralEpsAssignment.from_eps(4, Fraction(1, 27), Rng(0))


def test_general_family_convex_and_far():
    assign = GeneralEpsAssignment([LbAssignment.random(3, Rng(10 + t)) for t in range(3)])
    f = lb1d_general_function(assign)
    assert is_convex_line(f)
    for t in range(assign.l):
        g = lb1d_general_function(assign, (t, 0))
        assert distance_to_convex_line(g) >= Fraction(1, 27)
        for x in range(assign.n):
            if x // assign.block_size != t:
                assert g.value(x) == f.value(x)
    with pytest.raises(ValueError):
        lb1d_general(assign, None, assign.n)


def test_hidden_direction_value_is_canonical_g_plus_sign():
    for alternating, sampler in ((False, sample_dy), (True, sample_dn)):
        h = sampler(2, 16, Rng(3))
        for x in [(0, 0), (3, 5), (7, 2), (15, 15), (9, 12)]:
            coords = h.basis.coordinates(x)
            sigma = h.signs.sign(coords[1:])
            if alternating and coords[0] % 2:
                sigma = -sigma
            assert h.value(x) == canonical_g(h.basis, x) + sigma


def test_perturbed_assignment_is_shared_across_threads():
    a = LbAssignment.random(4, Rng(8))
    with ThreadPoolExecutor(max_workers=8) as pool:
        copies = list(pool.map(lambda _: a.perturbed(1, 1), range(32)))
        sums = list(pool.map(lambda _: a.prefix_sums(), range(32)))
    assert all(c is copies[0] for c in copies)
    assert all(s is sums[0] for s in sums)


def test_general_family_values_agree_under_threads():
    def build():
        return GeneralEpsAssignment([LbAssignment.random(3, Rng(20 + t)) for t in range(3)])

    modes = [None, (0, 0), (1, 1), (2, 0)]
    jobs = [(mode, x) for mode in modes for x in range(81)]
    sequential = build()
    expected = [lb1d_general(sequential, mode, x) for mode, x in jobs]
    shared = build()
    with ThreadPoolExecutor(max_workers=6) as pool:
        observed = list(pool.map(lambda job: lb1d_general(shared, *job), jobs))
    assert observed == expected
    assert None in shared._cache
    assert all(key is None or (len(key) == 3 and key[2] in (1, -1)) for key in shared._cache)


def test_general_perturbation_keys():
    assert GeneralEpsAssignment.perturbation(None, 0, 0) is None
    assert GeneralEpsAssignment.perturbation((1, 2), 0, 0) is None
    assert GeneralEpsAssignment.perturbation((1, 2), 1, 2) is None
    assert GeneralEpsAssignment.perturbation((1, 2), 1, 0) == (1, 2, 1)
    assert GeneralEpsAssignment.perturbation((1, 2), 1, 1) == (1, 2, -1)


def test_counterexample_values_and_separation():
    f = appendix_counterexample()
    assert f.value((1, 1)) == 2
    assert f.value((2, 0)) == 1 and f.value((0, 1)) == 1 and f.value((1, 2)) == 1
    assert is_line_convex_grid(f)
    assert not is_convex_grid(f)


def test_random_convex_generators():
    for seed in range(5):
        assert is_convex_line(random_convex_line(30, Rng(seed)))
        stripe = random_convex_stripe(6, Rng(seed))
        assert stripe.domain == GridDomain((3, 6))
        assert is_convex_grid(stripe.materialize())


@pytest.mark.slow
def test_yes_instances_are_convex_at_n16():
    for seed in range(5):
        h = sample_dy(2, 16, Rng(seed))
        assert is_convex_grid(h.function().materialize())
