import logging

import numpy as np
import pytest
from conftest import cobb_douglas_pair, stochastic_economy, symmetric_economy

from walras_equilibrium.hedging import HedgingOptions, MaxIterExceeded
from walras_equilibrium.models import CES, Agent, CobbDouglas, Economy, ModelClass, PriceSystem
from walras_equilibrium.walrasian import (
    AugmentingKind,
    ExcessSupply,
    augmented_walrasian,
    evaluate_market,
    excess_supply,
    residual,
    walrasian_value,
)

STOCHASTIC_PRICES = PriceSystem([0.5, 0.5], {"good": [0.5, 0.5], "bad": [0.5, 0.5]})


class TestExcessSupply:
    def test_symmetric_equilibrium(self):
        economy = symmetric_economy()
        s = excess_supply(economy, PriceSystem.centroid(economy))
        np.testing.assert_allclose(s.s0, np.zeros(3), atol=1e-12)
        assert residual(s) <= 1e-12

    def test_disequilibrium_start(self):
        s = excess_supply(symmetric_economy(), PriceSystem([0.12, 0.56, 0.32]))
        assert s.s0.min() < 0.0

    def test_autarky(self):
        economy = Economy(
            ModelClass.EXCHANGE, ("x", "y"), (Agent("solo", CobbDouglas([0.5, 0.5]), [1.0, 1.0], [0.0, 0.0]),)
        )
        s = excess_supply(economy, PriceSystem([0.5, 0.5]))
        np.testing.assert_allclose(s.s0, [0.0, 0.0], atol=1e-15)

    def test_walras_law_at_interior_demand(self):
        p = PriceSystem([0.3, 0.7])
        s = excess_supply(cobb_douglas_pair(), p)
        assert not s.cap_binds
        assert walrasian_value(s, p) == pytest.approx(0.0, abs=1e-9)

    def test_stochastic_blocks(self, stochastic):
        evaluation = evaluate_market(stochastic, STOCHASTIC_PRICES, HedgingOptions(tol=1e-8, max_iter=2000))
        s = evaluation.excess
        assert list(s.s1) == ["good", "bad"]
        assert s.flat.shape == (6,)
        for pb, sb in zip(STOCHASTIC_PRICES.blocks(), s.blocks()):
            assert float(pb @ sb) == pytest.approx(0.0, abs=1e-9)
        assert set(evaluation.ph_residuals) == {"a", "b"}
        for plan in evaluation.plans:
            assert plan.y.shape == (1,)
            assert set(plan.x1) == {"good", "bad"}

    def test_inexact_hedging_is_accepted_with_warning(self, stochastic, caplog):
        with caplog.at_level(logging.WARNING):
            evaluation = evaluate_market(stochastic, STOCHASTIC_PRICES, HedgingOptions(max_iter=1))
        assert evaluation.plans[0].ph_residual == pytest.approx(0.1)
        assert "Progressive hedging" in caplog.text

    def test_inexact_hedging_can_raise(self, stochastic):
        with pytest.raises(MaxIterExceeded):
            evaluate_market(stochastic, STOCHASTIC_PRICES, HedgingOptions(max_iter=1), accept_inexact=False)

    def test_price_blocks_must_match(self, stochastic):
        with pytest.raises(ValueError):
            evaluate_market(stochastic, PriceSystem([0.5, 0.5], {"good": [0.5, 0.5]}))
        with pytest.raises(ValueError):
            excess_supply(symmetric_economy(), PriceSystem([0.5, 0.5]))


class TestWalrasianValue:
    def test_arithmetic(self):
        assert walrasian_value(ExcessSupply([1.0, -1.0]), PriceSystem([0.0, 1.0])) == -1.0

    def test_zero_excess(self, rng):
        q = PriceSystem(rng.dirichlet(np.ones(3)))
        assert walrasian_value(ExcessSupply(np.zeros(3)), q) == 0.0

    def test_blocks_are_summed(self):
        s = ExcessSupply([1.0, -1.0], {"up": [2.0, 0.0]})
        q = PriceSystem([0.5, 0.5], {"up": [0.25, 0.75]})
        assert walrasian_value(s, q) == pytest.approx(0.5)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            walrasian_value(ExcessSupply([1.0, -1.0]), PriceSystem([0.2, 0.3, 0.5]))


class TestAugmentedWalrasian:
    def test_zero_excess_keeps_dual_point(self):
        q = PriceSystem([0.2, 0.3, 0.5])
        result = augmented_walrasian(ExcessSupply(np.zeros(3)), q, 0.7)
        assert result.value == 0.0
        np.testing.assert_array_equal(result.z_star.p0, q.p0)

    def test_interior_projection(self):
        result = augmented_walrasian(ExcessSupply([1.0, -1.0]), PriceSystem([0.5, 0.5]), 0.1)
        np.testing.assert_allclose(result.z_star.p0, [0.4, 0.6])
        assert result.value == pytest.approx(-0.1)

    def test_matches_grid_minimum(self):
        s, q, r = np.array([0.3, -0.4]), np.array([0.7, 0.3]), 0.5
        grid = min(
            z * s[0] + (1.0 - z) * s[1] + ((z - q[0]) ** 2 + (q[0] - z) ** 2) / (2.0 * r)
            for z in np.linspace(0.0, 1.0, 100001)
        )
        value = augmented_walrasian(ExcessSupply(s), PriceSystem(q), r).value
        assert value == pytest.approx(grid, abs=1e-8)
        assert value <= grid + 1e-12

    def test_large_r_approaches_worst_excess(self):
        s = ExcessSupply([0.3, -0.2, 0.5])
        result = augmented_walrasian(s, PriceSystem(np.full(3, 1.0 / 3.0)), 1e6)
        assert result.value == pytest.approx(-0.2, abs=1e-5)
        np.testing.assert_array_equal(result.z_star.p0, [0.0, 1.0, 0.0])

    def test_linf_ball(self):
        result = augmented_walrasian(
            ExcessSupply([1.0, -1.0]), PriceSystem([0.5, 0.5]), 0.1, AugmentingKind.LINF_BALL
        )
        np.testing.assert_allclose(result.z_star.p0, [0.4, 0.6], atol=1e-12)
        assert result.value == pytest.approx(-0.2)

    def test_parameter_must_be_positive(self):
        with pytest.raises(ValueError):
            augmented_walrasian(ExcessSupply([0.0, 0.0]), PriceSystem([0.5, 0.5]), 0.0)


@pytest.mark.parametrize(
    "s, expected",
    [([0.2, 0.1], 0.0), ([0.5, -0.3], 0.3), ([0.0, 0.0], 0.0)],
)
def test_residual(s, expected):
    assert residual(ExcessSupply(s)) == pytest.approx(expected)


def test_residual_spans_every_block():
    assert residual(ExcessSupply([0.1, 0.2], {"up": [0.0, -0.4]})) == pytest.approx(0.4)


def random_exchange_economy(rng) -> Economy:
    n = int(rng.integers(2, 5))
    agents = []
    for k in range(int(rng.integers(2, 5))):
        if rng.random() < 0.5:
            utility = CobbDouglas(rng.dirichlet(np.ones(n)))
        else:
            utility = CES(rng.uniform(0.1, 1.0, size=n), float(rng.choice([0.3, 0.6, 1.5, 2.5])))
        agents.append(Agent(f"agent{k}", utility, rng.uniform(0.5, 2.0, size=n), np.zeros(n)))
    return Economy(ModelClass.EXCHANGE, tuple(f"g{j}" for j in range(n)), tuple(agents))


def simplex_grid(step: float) -> np.ndarray:
    ticks = np.arange(0.0, 1.0 + step / 2, step)
    a, b = np.meshgrid(ticks, ticks, indexing="ij")
    keep = a + b <= 1.0 + 1e-12
    a, b = a[keep], b[keep]
    return np.column_stack([a, b, np.maximum(1.0 - a - b, 0.0)])


def test_walras_law_on_random_economies(rng):
    checked = 0
    for _ in range(20):
        economy = random_exchange_economy(rng)
        for _ in range(100):
            p = PriceSystem(rng.dirichlet(np.full(economy.n_goods, 5.0)))
            s = excess_supply(economy, p)
            value = walrasian_value(s, p)
            # unspent wealth under a binding cap can only make the value positive
            assert value >= -1e-9
            if not s.cap_binds:
                assert value == pytest.approx(0.0, abs=1e-9)
                checked += 1
    assert checked > 1000


class TestAugmentedWalrasianProperties:
    @pytest.fixture(scope="class")
    def grid(self):
        return simplex_grid(1e-3)

    def test_matches_simplex_grid(self, rng, grid):
        for _ in range(50):
            s = rng.normal(size=3)
            q = rng.dirichlet(np.ones(3))
            r = float(rng.uniform(0.1, 10.0))
            values = grid @ s + np.sum((grid - q) ** 2, axis=1) / (2.0 * r)
            best = float(values.min())
            value = augmented_walrasian(ExcessSupply(s), PriceSystem(q), r).value
            assert value <= best + 1e-12
            assert value >= best - 2e-3 * (float(np.abs(s).max()) + 2.0 / r)

    def test_monotone_in_r_and_sandwiched(self, rng):
        for _ in range(50):
            s = ExcessSupply(rng.normal(size=4))
            q = PriceSystem(rng.dirichlet(np.ones(4)))
            values = [augmented_walrasian(s, q, r).value for r in np.geomspace(1e-3, 1e4, 15)]
            assert all(later <= earlier + 1e-12 for earlier, later in zip(values, values[1:]))
            for value in values:
                assert float(s.s0.min()) - 1e-12 <= value <= walrasian_value(s, q) + 1e-12


def test_equilibrium_is_the_maxinf_point_of_a_two_good_economy(pair):
    def excess_grain(t):
        return float(excess_supply(pair, PriceSystem([t, 1.0 - t])).s0[0])

    lo, hi = 0.01, 0.99
    assert excess_grain(lo) < 0.0 < excess_grain(hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if excess_grain(mid) < 0.0 else (lo, mid)
    root = 0.5 * (lo + hi)
    assert root == pytest.approx(1.5 / 3.4, abs=1e-9)

    # inf over q of W(p, q) is the smallest excess supply
    ticks = np.linspace(0.001, 0.999, 999)
    worst = np.array([float(excess_supply(pair, PriceSystem([t, 1.0 - t])).s0.min()) for t in ticks])
    assert worst.max() <= 1e-12
    assert abs(ticks[int(np.argmax(worst))] - root) <= 1e-3
    assert float(excess_supply(pair, PriceSystem([root, 1.0 - root])).s0.min()) >= -1e-9
