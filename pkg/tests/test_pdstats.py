import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsrpd.pdstats import (
    FinitePermDist,
    SimplexPoint,
    dickman_rho,
    gem_sample,
    ks_statistic,
    metric_d,
    metric_l1,
    pd_density,
    pd_sample,
    rank,
    sample_counts,
    schedule_distance,
    tv_distance,
)
from fsrpd.rng import make_rng


class ForcedHalf:
    def random(self):
        return 0.5


def simpson(f, a, b, steps):
    xs = np.linspace(a, b, 2 * steps + 1)
    ys = np.array([f(x) for x in xs])
    h = (b - a) / (2 * steps)
    return h / 3 * (ys[0] + ys[-1] + 4 * ys[1:-1:2].sum() + 2 * ys[2:-1:2].sum())


class TestGem:
    def test_forced_half_gives_geometric_stick(self):
        point = gem_sample(ForcedHalf(), 1e-3)
        assert point.coords[:4] == (0.5, 0.25, 0.125, 0.0625)
        assert point.tail < 1e-3

    def test_coords_in_unit_interval_and_sum(self):
        rng = make_rng(1)
        for _ in range(200):
            p = gem_sample(rng)
            assert all(0 <= c < 1 for c in p.coords)
            assert abs(math.fsum(p.coords) + p.tail - 1) < 1e-12

    def test_first_coordinate_mean(self):
        rng = make_rng(2)
        mean = np.mean([gem_sample(rng).coords[0] for _ in range(100_000)])
        assert abs(mean - 0.5) < 0.01

    def test_invalid_tol(self):
        with pytest.raises(ValueError):
            gem_sample(make_rng(0), 2.0)


class TestPd:
    def test_sorted_nonincreasing(self):
        rng = make_rng(3)
        for _ in range(100):
            p = pd_sample(rng)
            assert list(p.coords) == sorted(p.coords, reverse=True)

    def test_equals_ranked_gem_on_shared_stream(self):
        a = pd_sample(make_rng(4))
        b = rank(gem_sample(make_rng(4)))
        assert a == b

    def test_largest_coordinate_mean_is_golomb_dickman(self):
        # cross-check the sampler against the integral E X1 = 1 - int_1^inf
        # rho(u)/u^2 du
        rng = make_rng(5)
        mean = np.mean([pd_sample(rng).coords[0] for _ in range(100_000)])
        integral = simpson(lambda u: dickman_rho(u) / u**2, 1.0, 60.0, 40_000)
        assert abs((1.0 - integral) - 0.62432998854) < 1e-6
        assert abs(mean - 0.6243) < 0.01

    def test_p_largest_below_half(self):
        rng = make_rng(6)
        p = np.mean([pd_sample(rng).coords[0] <= 0.5 for _ in range(100_000)])
        assert abs(p - (1 - math.log(2))) < 0.01


class TestRank:
    def test_sorts_descending(self):
        assert rank([0.2, 0.5, 0.3]) == [0.5, 0.3, 0.2]

    def test_idempotent(self):
        x = rank([0.1, 0.7, 0.2])
        assert rank(x) == x

    def test_simplex_point_keeps_tail(self):
        p = SimplexPoint((0.2, 0.5, 0.25), 0.05)
        assert rank(p) == SimplexPoint((0.5, 0.25, 0.2), 0.05)

    @given(
        st.lists(st.floats(0, 1, width=32), min_size=1, max_size=8),
        st.lists(st.floats(0, 1, width=32), min_size=1, max_size=8),
    )
    def test_l1_contraction(self, xs, ys):
        size = max(len(xs), len(ys))
        xs = xs + [0.0] * (size - len(xs))
        ys = ys + [0.0] * (size - len(ys))
        assert metric_l1(rank(xs), rank(ys)) <= metric_l1(xs, ys) + 1e-9


class TestDickman:
    def test_flat_below_one(self):
        assert dickman_rho(0.5) == 1.0
        assert dickman_rho(0.0) == 1.0
        assert dickman_rho(-2.0) == 0.0

    def test_closed_form_on_1_2(self):
        for u in (1.25, 1.5, 1.75, 2.0):
            assert abs(dickman_rho(u) - (1 - math.log(u))) < 1e-8

    def test_rho_3(self):
        assert abs(dickman_rho(3.0) - 0.04860838829) < 1e-8

    def test_delay_identity_residual(self):
        for u in np.linspace(1.0, 10.0, 31):
            integral = simpson(dickman_rho, u - 1, u, 4_000)
            assert abs(u * dickman_rho(u) - integral) < 1e-7

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            dickman_rho(float("nan"))


class TestPdDensity:
    def test_zero_outside_region(self):
        assert pd_density([0.3, 0.4]) == 0.0
        assert pd_density([0.7, 0.5]) == 0.0  # sum above 1
        assert pd_density([0.5, -0.1]) == 0.0

    def test_k1_value(self):
        assert abs(pd_density([0.6]) - 1 / 0.6) < 1e-12

    def test_k1_normalization(self):
        # substitute u = 1/x: integral becomes int_1^inf rho(u-1)/u du
        integral = simpson(lambda u: dickman_rho(u - 1) / u, 1.0, 61.0, 60_000)
        assert abs(integral - 1.0) < 1e-6


class TestMetrics:
    def test_zero_on_equal(self):
        assert metric_d([0.5, 0.5], [0.5, 0.5]) == 0.0

    def test_direct_sums(self):
        x, y = [1.0, 0.0], [0.0, 1.0]
        assert metric_l1(x, y) == 2.0
        assert metric_d(x, y) == 0.75

    @given(
        st.lists(st.floats(0, 1, width=32), min_size=1, max_size=10),
        st.lists(st.floats(0, 1, width=32), min_size=1, max_size=10),
    )
    def test_d_dominated_by_l1(self, xs, ys):
        assert metric_d(xs, ys) <= metric_l1(xs, ys) + 1e-12


class TestScheduleDistance:
    def test_single_letter_k2_uniform(self):
        assert schedule_distance([(1, 2)], 2) == 0

    def test_empty_schedule(self):
        assert schedule_distance([], 3) == 1 - Fraction(1, 6)
        assert schedule_distance([], 2) == Fraction(1, 2)

    def test_shuffle_word_k3(self):
        w = [(1, 2), (1, 3), (2, 3)]
        value = schedule_distance(w, 3)
        assert value == Fraction(1, 6)
        assert value <= 1 - Fraction(1, 8)

    def test_submultiplicative_on_repeats(self):
        w = [(1, 2), (1, 3), (2, 3)]
        for power in (1, 2, 3):
            assert schedule_distance(w * power, 3) <= (1 - Fraction(1, 8)) ** power

    def test_length_cap(self):
        with pytest.raises(ValueError):
            schedule_distance([(1, 2)] * 25, 2)

    def test_letter_validation(self):
        with pytest.raises(ValueError):
            schedule_distance([(2, 1)], 3)


class TestSampleCounts:
    def test_worked_example(self):
        sc = sample_counts([3, 2], sample=[4, 1, 4])
        assert sc.C == (2, 1)
        assert sc.D == (1, 2)
        assert sc.M == (3, 2)

    def test_single_block(self):
        sc = sample_counts([4], sample=[2, 2, 1])
        assert sc.C == (3,)

    @given(
        st.lists(st.integers(1, 6), min_size=1, max_size=5),
        st.integers(0, 10_000),
        st.integers(1, 8),
    )
    @settings(max_examples=100)
    def test_rank_equality_random(self, sizes, seed, k):
        sc = sample_counts(sizes, rng=make_rng(seed), k=k)
        ranked_c = sorted(sc.C, reverse=True)
        ranked_d = [d for d in sorted(sc.D, reverse=True) if d > 0]
        assert ranked_c == ranked_d
        assert sum(sc.C) == k

    def test_element_out_of_range(self):
        with pytest.raises(ValueError):
            sample_counts([2], sample=[3])


class TestKs:
    def test_single_sample(self):
        assert ks_statistic([0.5], lambda x: x) == 0.5

    def test_evenly_spread_samples(self):
        n = 9
        samples = [i / (n + 1) for i in range(1, n + 1)]
        assert ks_statistic(samples, lambda x: x) <= 1 / (n + 1) + 1e-12

    def test_uniform_run(self):
        rng = make_rng(12)
        samples = rng.random(10_000)
        assert ks_statistic(samples, lambda x: x) <= 0.02


class TestTvDistance:
    def test_uniform_is_zero(self):
        dist = FinitePermDist(2, (Fraction(1, 2), Fraction(1, 2)))
        assert tv_distance(dist) == 0

    def test_point_mass(self):
        dist = FinitePermDist(3, (Fraction(1),) + (Fraction(0),) * 5)
        assert tv_distance(dist) == 1 - Fraction(1, 6)

    def test_k2_example(self):
        assert abs(tv_distance(FinitePermDist(2, (0.6, 0.4))) - 0.1) < 1e-12

    def test_validation(self):
        with pytest.raises(ValueError):
            FinitePermDist(2, (0.4, 0.4))
