"""Tail bound vs exact tails on finite spaces."""

import math
from fractions import Fraction

import pytest

from trigcert import PreconditionError, ResourceError
from trigcert.concentration import (
    DiscreteProbSpace,
    bernstein_battery,
    bernstein_bound,
    check_almost_multiplicative,
    tail_probability,
)


class TestBound:
    def test_oracle(self):
        assert bernstein_bound(16, 0.25, 0.0) == pytest.approx(math.exp(-0.125), abs=1e-15)
        assert bernstein_bound(16, 0.25, 0.0) == pytest.approx(0.88250, abs=5e-6)

    def test_alpha_zero(self):
        assert bernstein_bound(16, 0.0, 0.0) == 1.0

    def test_with_eps(self):
        got = bernstein_bound(16, 0.25, math.exp(-16.0))
        assert got == pytest.approx(math.exp(-0.125) + math.exp(-12.0), abs=1e-15)

    def test_monotone(self):
        bounds = [bernstein_bound(10, a, 0.0) for a in (0.1, 0.2, 0.4, 0.8)]
        assert all(b < a for a, b in zip(bounds, bounds[1:]))
        assert bernstein_bound(10, 0.3, 1e-4) > bernstein_bound(10, 0.3, 1e-6)

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            bernstein_bound(0, 0.1, 0.0)
        with pytest.raises(PreconditionError):
            bernstein_bound(4, 0.1, 1.0)


class TestSpace:
    def test_weight_validation(self):
        with pytest.raises(PreconditionError):
            DiscreteProbSpace([1, 2], [0.6, 0.6])
        with pytest.raises(PreconditionError):
            DiscreteProbSpace([1, 2], [-0.5, 1.5])

    def test_exact_expectation(self):
        space = DiscreteProbSpace([0, 1], [Fraction(3, 4), Fraction(1, 4)])
        assert space.expectation([1, -1]) == Fraction(1, 2)

    def test_coin_product_weights(self):
        space, xs = DiscreteProbSpace.coin_product(Fraction(3, 4), 3)
        assert sum(space.weights) == 1
        assert len(space) == 8
        assert space.expectation(xs[0]) == Fraction(1, 2)


class TestMultiplicative:
    def test_independent_coins_zero_deviation(self):
        space, xs = DiscreteProbSpace.coin_product(Fraction(3, 4), 3)
        rep = check_almost_multiplicative(space, xs, eps=1e-12)
        assert rep.mu == pytest.approx(0.5)
        assert rep.max_deviation <= 1e-12
        assert rep.verdict == "pass"
        assert rep.exhaustive and rep.subsets_checked == 7

    def test_fully_dependent_pair(self):
        # X1 = X2 = +-1 coin with mean 1/2: E[X1 X2] = 1 against mu^2 = 1/4
        space = DiscreteProbSpace([0, 1], [Fraction(3, 4), Fraction(1, 4)])
        x = [1.0, -1.0]
        rep = check_almost_multiplicative(space, [x, x], eps=0.5)
        assert rep.max_deviation == pytest.approx(3.0, abs=1e-12)
        assert rep.verdict == "fail"

    def test_cap_enforced(self):
        space = DiscreteProbSpace([0, 1], [0.5, 0.5])
        xs = [[1.0, 0.5]] * 21
        with pytest.raises(ResourceError, match="sampled"):
            check_almost_multiplicative(space, xs, eps=0.1)
        rep = check_almost_multiplicative(space, xs, eps=2.0, sampled=True)
        assert not rep.exhaustive
        assert "sampled" in rep.verdict

    def test_bound_precondition(self):
        space = DiscreteProbSpace([0, 1], [0.5, 0.5])
        with pytest.raises(PreconditionError):
            check_almost_multiplicative(space, [[1.5, 0.5]], eps=0.1)

    def test_unequal_means_rejected(self):
        space = DiscreteProbSpace([0, 1], [0.5, 0.5])
        with pytest.raises(PreconditionError):
            check_almost_multiplicative(space, [[1.0, 0.0], [1.0, 0.5]], eps=0.1)


class TestTail:
    def test_biased_coin_binomial_oracle(self):
        # P(mean < 1/4) for 16 coins at p = 3/4 equals the exact binomial
        # tail P(H <= 9); both sides computed independently
        space, xs = DiscreteProbSpace.coin_product(Fraction(3, 4), 16)
        got = tail_probability(space, xs, Fraction(1, 4))
        p, q = Fraction(3, 4), Fraction(1, 4)
        want = sum(
            math.comb(16, h) * p**h * q ** (16 - h) for h in range(0, 10)
        )
        assert got == want
        assert float(got) == pytest.approx(0.075, abs=5e-3)
        assert float(got) <= bernstein_bound(16, 0.25, 0.0)

    def test_alpha_past_support(self):
        space, xs = DiscreteProbSpace.coin_product(Fraction(3, 4), 4)
        assert tail_probability(space, xs, Fraction(8, 5)) == 0

    def test_single_variable(self):
        space = DiscreteProbSpace([0, 1], [Fraction(3, 5), Fraction(2, 5)])
        got = tail_probability(space, [[1, -1]], Fraction(1, 2))
        assert got == Fraction(2, 5)

    def test_monotone_in_alpha(self):
        space, xs = DiscreteProbSpace.coin_product(Fraction(3, 4), 8)
        tails = [float(tail_probability(space, xs, a)) for a in (0.05, 0.3, 0.6, 1.0)]
        assert all(b <= a for a, b in zip(tails, tails[1:]))


class TestBattery:
    def test_bound_dominates_exact_tail(self):
        space, xs = DiscreteProbSpace.coin_product(Fraction(3, 4), 12)
        out = bernstein_battery(space, xs)
        assert out["exhaustive"]
        assert out["deviation"] <= 1e-10
        for row in out["rows"]:
            assert row["tail"] <= row["bound"] + 1e-15
