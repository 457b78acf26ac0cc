import math

import numpy as np
import pytest
from scipy import stats

from dki_sim import bounds, montecarlo, packing
from dki_sim.bounds import ChannelParams, CodeParams
from dki_sim.channel import transmit
from dki_sim.decoder import TargetSet, k_identify
from dki_sim.errors import InvalidParameter


@pytest.fixture(scope="module")
def small_book():
    # neighbours near 2 r0 = 1 so that type II errors actually happen
    ch = ChannelParams(A=4.0, sigma2=1.0, gamma=1.0, g_max=1.5)
    cb = packing.build_codebook(CodeParams(4), ch, seed=3, theta=0.25)
    return cb, ch


class TestGrid:
    def test_contains_gamma(self):
        grid = montecarlo.make_ggrid(0.7, 2.0, 5)
        assert grid[0] == 0.7 and len(grid) == 5 and grid[-1] == 2.0
        assert list(grid) == sorted(grid)

    def test_single_point(self):
        assert montecarlo.make_ggrid(1.0) == (1.0,)

    def test_invalid(self):
        with pytest.raises(InvalidParameter):
            montecarlo.make_ggrid(0.0, 1.0)
        with pytest.raises(InvalidParameter):
            montecarlo.estimate_type1(np.zeros((1, 3)), 0, (0,), ChannelParams(), (2.0, 1.0), 10)


def test_half_width():
    assert montecarlo.half_width(0.5, 100) == pytest.approx(0.15)
    assert montecarlo.half_width(0.0, 100) == 0.0


class TestAgreesWithDecoder:
    def test_per_trial_decisions(self, small_book):
        cb, ch = small_book
        tau = ch.gamma ** 2 * cb.theta / 3
        target = montecarlo.choose_target(cb, 0, 3, include=False)
        grid = (1.0, 1.25)
        acc = montecarlo.accept_decisions(cb, 0, target, grid, ch.sigma2, tau, 300, seed=5,
                                          stream=2)
        for t in range(300):
            for k, g in enumerate(grid):
                y = transmit(cb.codewords[0], g, ch, seed=5, stream=2, trial=t).y
                assert acc[t, k] == k_identify(y, cb, target, g, ch.sigma2, tau)

    def test_batching_does_not_matter(self, small_book, monkeypatch):
        cb, ch = small_book
        target = TargetSet((1, 2))
        a = montecarlo.accept_decisions(cb, 0, target, (1.0,), 1.0, 0.1, 500, 1, 2)
        monkeypatch.setattr(montecarlo, "_BATCH_FLOATS", 4 * 7)
        b = montecarlo.accept_decisions(cb, 0, target, (1.0,), 1.0, 0.1, 500, 1, 2, threads=3)
        assert np.array_equal(a, b)


class TestType1:
    def test_noiseless(self, small_book):
        cb, _ = small_book
        ch = ChannelParams(A=4.0, sigma2=0.0, gamma=1.0, g_max=2.0)
        est = montecarlo.estimate_type1(cb, 0, (0, 1), ch, montecarlo.make_ggrid(1, 2, 3), 200)
        assert est.p_hat == 0.0 and est.half_width == 0.0

    def test_requires_membership(self, small_book):
        cb, ch = small_book
        with pytest.raises(InvalidParameter):
            montecarlo.estimate_type1(cb, 0, (1, 2), ch, (1.0,), 10)

    def test_matches_chi_square_tail(self):
        # K = 1: rejection iff ||Z||^2 > sigma2 + tau, exactly chi-square
        n = 64
        code = CodeParams(n, 0.0, 0.5)
        ch = ChannelParams(A=1.0, sigma2=1.0, gamma=1.0)
        cb = packing.build_codebook(code, ch, seed=0, max_codewords=1)
        tau = bounds.tau(code, ch)
        exact = stats.chi2.sf(n * (1 + tau), n)
        trials = 20_000
        est = montecarlo.estimate_type1(cb, 0, (0,), ch, (1.0,), trials, seed=4)
        sd = math.sqrt(exact * (1 - exact) / trials)
        assert abs(est.p_hat - exact) < 4 * sd
        assert est.p_hat <= bounds.type1_error_bound(code, ch) + est.half_width

    def test_flat_over_grid(self, small_book):
        cb, ch = small_book
        grid = montecarlo.make_ggrid(1.0, 1.5, 5)
        est = montecarlo.estimate_type1(cb, 0, (0,), ch, grid, 2000, seed=2)
        # a lone target: residual is ||Z||^2 whatever g is
        assert max(est.per_g) == min(est.per_g)

    def test_deterministic(self, small_book):
        cb, ch = small_book
        grid = montecarlo.make_ggrid(1.0, 1.5, 3)
        a = montecarlo.estimate_type1(cb, 0, (0, 1), ch, grid, 500, seed=9)
        b = montecarlo.estimate_type1(cb, 0, (0, 1), ch, grid, 500, seed=9)
        assert a == b


class TestType2:
    def test_requires_exclusion(self, small_book):
        cb, ch = small_book
        with pytest.raises(InvalidParameter):
            montecarlo.estimate_type2(cb, 0, (0, 1), ch, (1.0,), 10)

    def test_noiseless_far(self):
        ch = ChannelParams(A=1.0, sigma2=0.0, gamma=1.0)
        cw = montecarlo.two_codeword_book(8, 1.0)
        est = montecarlo.estimate_type2(cw, 1, (0,), ch, (1.0,), 100, tau=0.1)
        assert est.p_hat == 0.0

    def test_nested_targets_monotone(self, small_book):
        cb, ch = small_book
        tau = ch.gamma ** 2 * cb.theta / 3
        grid = montecarlo.make_ggrid(1.0, 1.5, 3)
        sets = [montecarlo.choose_target(cb, 0, k, include=False) for k in (1, 2, 4)]
        assert set(sets[0]) <= set(sets[1]) <= set(sets[2])
        accs = [montecarlo.accept_decisions(cb, 0, t, grid, ch.sigma2, tau, 3000, 1, 2)
                for t in sets]
        for small, big in zip(accs, accs[1:]):
            assert np.all(small <= big)
        assert accs[-1].mean() > 0

    def test_random_policy(self, small_book):
        cb, _ = small_book
        t = montecarlo.choose_target(cb, 2, 3, policy="random", seed=4)
        assert t.K == 3 and 2 not in t
        assert t == montecarlo.choose_target(cb, 2, 3, policy="random", seed=4)
        t = montecarlo.choose_target(cb, 2, 3, policy="random", include=True, seed=4)
        assert 2 in t and t.K == 3

    def test_nearest_policy_is_nearest(self, small_book):
        cb, _ = small_book
        t = montecarlo.choose_target(cb, 0, 2, include=False)
        d = np.linalg.norm(cb.codewords - cb.codewords[0], axis=1)
        d[0] = np.inf
        assert set(t) == set(np.argsort(d)[:2].tolist())

    def test_estimate_bounds(self, small_book):
        cb, ch = small_book
        est = montecarlo.estimate_type2(cb, 0, (1, 2, 3), ch, montecarlo.make_ggrid(1, 1.5, 4), 1000)
        assert 0 <= est.p_hat <= 1 and est.half_width >= 0
        assert est.g_worst in est.g_grid
        assert est.p_hat == max(est.per_g)
        assert est.half_width == pytest.approx(montecarlo.half_width(est.p_hat, 1000))


class TestDegenerate:
    def test_shared_sum_is_one(self, small_book):
        cb, ch = small_book
        res = montecarlo.degenerate_fading_experiment(cb, 0, 1, (0, 2), ch, 3000, seed=1)
        assert res.total == 1.0

    def test_noiseless(self, small_book):
        cb, _ = small_book
        ch = ChannelParams(A=4.0, sigma2=0.0)
        res = montecarlo.degenerate_fading_experiment(cb, 0, 1, (0,), ch, 100, seed=1)
        assert (res.p1, res.p2) == (0.0, 1.0)

    def test_independent_streams(self, small_book):
        cb, ch = small_book
        res = montecarlo.degenerate_fading_experiment(cb, 0, 1, (0,), ch, 10_000, seed=1,
                                                      shared=False)
        assert abs(res.total - 1) <= 3 * math.sqrt(0.5 / 10_000) * 2

    def test_membership_checked(self, small_book):
        cb, ch = small_book
        with pytest.raises(InvalidParameter):
            montecarlo.degenerate_fading_experiment(cb, 0, 1, (1,), ch, 10)


class TestConverseDistance:
    CH = ChannelParams(A=1.0, sigma2=0.25, gamma=1.0)
    CODE = CodeParams(256, 0.0, 0.1)

    def test_zero_distance(self):
        pts = montecarlo.converse_distance_experiment(256, self.CH, self.CODE, [0.0], 2000, seed=3)
        assert pts[0].total == 1.0

    def test_far_is_small(self):
        t = bounds.tau(self.CODE, self.CH)
        d = 1.3
        assert d > 2 * math.sqrt(self.CH.sigma2 + t) / self.CH.gamma
        pts = montecarlo.converse_distance_experiment(256, self.CH, self.CODE, [d], 2000, seed=3)
        assert pts[0].p2 == 0.0
        assert pts[0].total < 0.5

    def test_too_far(self):
        with pytest.raises(InvalidParameter):
            montecarlo.converse_distance_experiment(256, self.CH, self.CODE, [5.0], 10)

    def test_two_codewords_satisfy_power(self):
        cw = montecarlo.two_codeword_book(5, 0.8)
        assert np.linalg.norm(cw[0] - cw[1]) == pytest.approx(0.8)
        assert np.all(np.linalg.norm(cw, axis=1) == pytest.approx(0.4))


class TestSweep:
    def test_degenerate_point(self):
        rows = montecarlo.scaling_sweep([2], 0.5, 0.5, ChannelParams(), seed=0)
        assert rows[0].M == 1 and rows[0].rate_ratio == 0.0

    def test_rows_within_bound(self):
        rows = montecarlo.scaling_sweep([4, 6, 8], 0.0, 0.5, ChannelParams(), seed=1)
        assert all(r.within_bound for r in rows)
        assert [r.n for r in rows] == [4, 6, 8]
