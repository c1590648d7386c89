"""
Fitness model tests.

This module tests:
- Pool construction from executed and submitted shares
- Share conservation in simulated networks
- Replica ensembles and their failure accounting
- The model-versus-real exponent comparison
"""
from datetime import date

import pytest

from lobnet.common.core.exceptions import SimulationError
from lobnet.common.models.schemas import DegreeTypeStats, Discreteness, EnsembleReport
from lobnet.common.utils.rng import STREAM_TEST, derive_rng
from lobnet.fitnessmodel import FitnessAgent, build_pools, compare_exponents, run_ensemble, simulate_day
from lobnet.matchengine import run_day
from lobnet.plfit import rand_powerlaw


def sellers_and_buyers(n: int, shares: int = 100) -> tuple[list[FitnessAgent], list[FitnessAgent]]:
    sellers = [FitnessAgent(f"s{i}", "seller", shares * (i + 1)) for i in range(n)]
    buyers = [FitnessAgent(f"b{i}", "buyer", shares * (n - i)) for i in range(n)]
    return sellers, buyers


def report(day: int, gamma_real: float | None, gamma_model: float | None, real_passes: bool = True) -> EnsembleReport:
    total = DegreeTypeStats(gamma_real=gamma_real, gamma_model_mean=gamma_model, gamma_model_std=0.1,
                            real_passes=real_passes, p_model=0.5)
    return EnsembleReport(date=date(2003, 1, day), replicas=10, seed=0, pool_mode="executed",
                          ask=DegreeTypeStats(), bid=DegreeTypeStats(), total=total)


# ============================================
# Pool Tests
# ============================================

@pytest.mark.unit
def test_executed_pools_balance(star_day):
    """Test that executed pools hold what each trader sold or bought"""
    sellers, buyers = build_pools(star_day, run_day(star_day).trades)

    assert [(a.trader_id, a.remaining) for a in sellers] == [("h", 200), ("i", 100), ("j", 200)]
    assert [(a.trader_id, a.remaining) for a in buyers] == [("x", 500)]


@pytest.mark.unit
def test_submitted_pools(star_day):
    """Test that submitted pools hold every submitted share"""
    sellers, buyers = build_pools(star_day, (), mode="submitted")

    assert sum(a.remaining for a in sellers) == 900
    assert [a.trader_id for a in sellers] == ["h", "i", "j", "l", "m"]
    assert buyers == [FitnessAgent("x", "buyer", 500)]


@pytest.mark.unit
def test_pool_mode_errors(star_day):
    """Test that submitted pools need order flow and unknown modes are refused"""
    with pytest.raises(SimulationError):
        build_pools(None, (), mode="submitted")
    with pytest.raises(SimulationError):
        build_pools(star_day, (), mode="quoted")


# ============================================
# Simulation Tests
# ============================================

@pytest.mark.unit
def test_simulation_conserves_shares():
    """Test that traded volume equals the smaller pool and no agent exceeds its fitness"""
    sellers, buyers = sellers_and_buyers(20)
    sellers.append(FitnessAgent("extra", "seller", 700))
    net = simulate_day(sellers, buyers, derive_rng(1, STREAM_TEST))

    assert net.total_weight() == sum(a.remaining for a in buyers)
    for agent in sellers:
        assert sum(w for s, _, w in net.edges() if s == agent.trader_id) <= agent.remaining
    for agent in buyers:
        assert sum(w for _, b, w in net.edges() if b == agent.trader_id) == agent.remaining


@pytest.mark.unit
def test_single_buyer_reproduces_the_star(star_day):
    """Test that one buyer against three sellers gives the real star network"""
    sellers, buyers = build_pools(star_day, run_day(star_day).trades)
    net = simulate_day(sellers, buyers, derive_rng(0, STREAM_TEST))
    assert net.edges() == [("h", "x", 200), ("i", "x", 100), ("j", "x", 200)]


@pytest.mark.unit
def test_simulation_is_seeded():
    """Test that equal seeds give equal networks"""
    sellers, buyers = sellers_and_buyers(15)
    first = simulate_day(sellers, buyers, derive_rng(9, STREAM_TEST))
    second = simulate_day(sellers, buyers, derive_rng(9, STREAM_TEST))
    assert first.edges() == second.edges()


@pytest.mark.unit
def test_empty_or_zero_pools_refused():
    """Test that a missing side or a zero fitness cannot be simulated"""
    sellers, buyers = sellers_and_buyers(3)
    with pytest.raises(SimulationError):
        simulate_day([], buyers, derive_rng(0, STREAM_TEST))
    with pytest.raises(SimulationError):
        simulate_day(sellers + [FitnessAgent("z", "seller", 0)], buyers, derive_rng(0, STREAM_TEST))


# ============================================
# Ensemble Tests
# ============================================

@pytest.mark.unit
def test_small_ensemble_counts_failed_fits_as_not_passing(fast_fit_config):
    """Test that replicas too small to fit lower p_model instead of vanishing"""
    sellers, buyers = sellers_and_buyers(8)
    result = run_ensemble(sellers, buyers, replicas=3, config=fast_fit_config, rng_seed=5, day=date(2003, 1, 3))

    for stats in (result.ask, result.bid, result.total):
        assert stats.p_model == 0.0
        assert stats.failed_replicas == 3
        assert stats.gamma_model_mean is None
        assert stats.gamma_real is None
    assert result.replicas == 3
    assert result.seed == 5


@pytest.mark.unit
def test_ensemble_is_deterministic(fast_fit_config):
    """Test that an ensemble rerun with the same seed gives the same report"""
    sellers, buyers = sellers_and_buyers(8)
    first = run_ensemble(sellers, buyers, replicas=2, config=fast_fit_config, rng_seed=1)
    second = run_ensemble(sellers, buyers, replicas=2, config=fast_fit_config, rng_seed=1)
    assert first == second


@pytest.mark.unit
def test_ensemble_needs_replicas():
    """Test that zero replicas are refused"""
    sellers, buyers = sellers_and_buyers(2)
    with pytest.raises(SimulationError):
        run_ensemble(sellers, buyers, replicas=0)


@pytest.mark.slow
def test_large_pools_give_fitted_replicas(fast_fit_config):
    """Test that heavy-tailed pools of many traders produce degree fits"""
    rng = derive_rng(2, STREAM_TEST)
    sizes = (rng.pareto(1.2, size=2 * 600) + 1.0) * 100
    sellers = [FitnessAgent(f"s{i}", "seller", int(v)) for i, v in enumerate(sizes[:600])]
    buyers = [FitnessAgent(f"b{i}", "buyer", int(v)) for i, v in enumerate(sizes[600:])]
    result = run_ensemble(sellers, buyers, replicas=4, config=fast_fit_config, rng_seed=3)

    assert result.total.fitted_replicas > 0
    assert result.total.gamma_model_mean > 0
    assert 0.0 <= result.total.p_model <= 1.0


@pytest.mark.slow
def test_power_law_pools_give_scale_free_degrees(fast_fit_config):
    """Test that pools with pdf exponent 2.5 in lots of 100 give total degrees passing the KS test"""
    rng = derive_rng(6, STREAM_TEST)
    lots = rand_powerlaw(2.5, 1, 2 * 2000, Discreteness.DISCRETE, rng).astype(int)
    sellers = [FitnessAgent(f"s{i:04d}", "seller", 100 * int(v)) for i, v in enumerate(lots[:2000])]
    buyers = [FitnessAgent(f"b{i:04d}", "buyer", 100 * int(v)) for i, v in enumerate(lots[2000:])]
    result = run_ensemble(sellers, buyers, replicas=20, config=fast_fit_config, rng_seed=4, jobs=2)

    assert result.total.fitted_replicas == 20
    assert result.total.p_model >= 0.9
    assert result.total.gamma_model_mean > 1.0


# ============================================
# Exponent Comparison Tests
# ============================================

@pytest.mark.unit
def test_compare_exponents_counts_ties_as_half():
    """Test the share of days with a steeper model, ties at two decimals counting one half"""
    reports = [
        report(2, 1.50, 1.80),
        report(3, 1.50, 1.501),
        report(6, 1.50, 1.20),
        report(7, 1.50, 1.90, real_passes=False),
        report(8, None, 1.90),
        report(9, 1.50, None),
    ]
    comparison = compare_exponents(reports)

    assert len(comparison.rows) == 3
    assert comparison.bias_fraction == pytest.approx(0.5)
    assert comparison.as_dict()["days"] == 3


@pytest.mark.unit
def test_compare_exponents_without_usable_days():
    """Test that no usable day leaves the bias undefined"""
    comparison = compare_exponents([report(2, 1.5, 1.8, real_passes=False)])
    assert comparison.rows == []
    assert comparison.bias_fraction is None
