import math

import numpy as np
import pytest

from app.core.exceptions import ParameterValidationError, TrialFailedError
from app.models.analytics import RegimeKind
from app.models.complexes import ComplexKind
from app.models.experiment import ExperimentConfig, RhoRule, RhoRuleKind
from app.models.pointprocess import Window
from app.services import analytics, montecarlo
from app.services.montecarlo import ExperimentService


def make_config(t_values, rho, trials, d=1, kind="vr", seed=17, **extra):
    rule = RhoRule(kind=RhoRuleKind.constant, c=rho) if isinstance(rho, (int, float)) else rho
    window = Window.interval() if d == 1 else Window.cube(d)
    return ExperimentConfig(window=window, complex=ComplexKind.parse(kind), t_values=t_values, rho_rule=rule,
                            trials=trials, master_seed=seed, **extra)


# ---------------------------------------------------------------------------
# Experiment harness
# ---------------------------------------------------------------------------

def test_rho_rules():
    assert RhoRule(kind=RhoRuleKind.power, c=2.0, alpha=0.5)(100.0) == pytest.approx(0.2)
    assert RhoRule(kind=RhoRuleKind.log, c=1.0)(math.e ** 3) == pytest.approx(3.0)
    assert RhoRule(kind=RhoRuleKind.log_power, gamma=2.0)(math.e ** 3) == pytest.approx(9.0)
    assert RhoRule(kind=RhoRuleKind.table, table={10.0: 0.5})(10.0) == 0.5
    with pytest.raises(ValueError):
        RhoRule(kind=RhoRuleKind.log_power, gamma=1.0)


def test_config_rejects_radius_of_one():
    with pytest.raises(ValueError):
        make_config([5.0], 10.0, 3)


def test_summary_is_consistent():
    config = make_config([300.0], 3.0, 40, target_k=6)
    (summary,) = montecarlo.run_dimension_experiment(config)
    assert sum(summary.counts.values()) == 40
    assert sum(summary.pmf.values()) == pytest.approx(1.0)
    assert summary.r_t == pytest.approx(0.01)
    assert summary.moments[0].m == 1
    assert summary.two_point_mass == pytest.approx((summary.counts.get(5, 0) + summary.counts.get(6, 0)) / 40)
    # the points of a fixed ball of radius r/2 always form a face
    assert summary.max_dimension >= summary.max_fixed_ball_count - 1


def test_results_do_not_depend_on_worker_count():
    config = make_config([150.0, 300.0], 4.0, 24, d=2)
    serial = montecarlo.run_dimension_experiment(config, workers=1)
    parallel = montecarlo.run_dimension_experiment(config, workers=3)
    assert [s.model_dump() for s in serial] == [s.model_dump() for s in parallel]


def test_trial_chunks_cover_every_index():
    service = ExperimentService(workers=3)
    chunks = service._chunks(50)
    assert [i for chunk in chunks for i in chunk] == list(range(50))


def test_trial_failure_names_the_trial():
    with pytest.raises(TrialFailedError) as excinfo:
        montecarlo.run_trial(Window.interval(), ComplexKind.vietoris_rips, 10.0, -1.0, seed=0, trial_index=4)
    assert excinfo.value.trial_index == 4
    assert isinstance(excinfo.value.cause, ParameterValidationError)


def test_power_sparse_two_point_concentration():
    # t * rho = 1 gives E f_1 = 1: D in {0, 1} and P(D = 0) close to 1/e
    config = make_config([1e4], 1e-4, 2000)
    (summary,) = montecarlo.run_dimension_experiment(config)
    assert summary.pmf.get(0, 0) + summary.pmf.get(1, 0) >= 0.95
    assert abs(summary.pmf.get(0, 0) - math.exp(-1)) < 0.05
    (estimate,) = montecarlo.estimate_two_point(config)
    assert estimate.k == 1
    assert estimate.mass >= 0.95


def test_two_point_with_explicit_rule():
    config = make_config([1e4], 1e-4, 200)
    (estimate,) = montecarlo.estimate_two_point(config, k_rule=lambda t: 3)
    assert estimate.k == 3
    assert estimate.mass <= 0.05
    assert estimate.radius == pytest.approx(3 * estimate.stderr)


def test_two_point_estimate_depends_only_on_the_seed():
    config = make_config([300.0, 600.0], 3.0, 30, seed=5)
    serial = montecarlo.estimate_two_point(config, workers=1)
    parallel = montecarlo.estimate_two_point(config, workers=3)
    again = montecarlo.estimate_two_point(make_config([300.0, 600.0], 3.0, 30, seed=5), workers=2)
    assert [e.model_dump() for e in serial] == [e.model_dump() for e in parallel] == [e.model_dump() for e in again]


def test_ldp_estimate_floors_unreached_levels():
    config = make_config([500.0], 10.0, 30, regime=RegimeKind.dense)
    (floored,) = montecarlo.estimate_ldp_rate(config, a=100.0)
    assert floored.floored
    assert floored.estimate == pytest.approx(math.log(30) / 10.0)
    (reached,) = montecarlo.estimate_ldp_rate(config, a=0.5)
    assert not reached.floored
    assert reached.probability == 1.0
    assert reached.estimate == 0.0


def test_ldp_estimate_needs_a_regime():
    with pytest.raises(ParameterValidationError):
        montecarlo.estimate_ldp_rate(make_config([500.0], 10.0, 3), a=2.0)


def test_participation_bounds_hold_on_samples():
    config = make_config([100.0], 2.0, 30)
    (stats,) = montecarlo.participation_statistics(config, 1)
    # every trial with D >= 1 has at least one pair in a 1-face
    assert stats.p_at_least <= stats.markov_upper_tail
    assert stats.mean_N >= 2 * stats.p_at_least
    assert stats.p_below + stats.p_at_least == pytest.approx(1.0)


def test_second_moment_bound_on_the_lower_tail():
    # E f_2 = 1 at t = 200, rho = 0.1: N_2 is zero with probability close to 1/e
    config = make_config([200.0], 0.1, 400, seed=23)
    (stats,) = montecarlo.participation_statistics(config, 2)
    assert stats.markov_lower_tail is not None
    assert 0.1 < stats.p_below < 0.9
    assert stats.p_below <= stats.markov_lower_tail + 3 * stats.stderr_below


def test_tail_bounds_dominate_empirical_frequencies():
    t, rho, trials = 200.0, 5.0, 200
    config = make_config([t], rho, trials)
    (summary,) = montecarlo.run_dimension_experiment(config)

    def frequency(predicate):
        return sum(c for dim, c in summary.counts.items() if predicate(dim)) / trials

    for k in (3, 4):
        f = frequency(lambda dim: dim < k)
        bound = math.exp(analytics.lower_tail_log_bound(t, rho, 1, k))
        assert f <= bound + 3 * math.sqrt(f * (1 - f) / trials)
    log_C = analytics.lattice_scan_log_constant(1, 0.1)
    for k in (20, 25):
        f = frequency(lambda dim: dim >= k)
        bound = math.exp(analytics.upper_tail_log_bound(t, rho, 1, k, 0.1, log_C))
        assert f <= bound + 3 * math.sqrt(f * (1 - f) / trials)


# ---------------------------------------------------------------------------
# Vectorised scan simulations
# ---------------------------------------------------------------------------

def test_total_variation_to_poisson():
    tv, err = montecarlo.total_variation_to_poisson([0, 0, 1, 1], 1.0)
    assert tv == pytest.approx(1 - 2 / math.e)
    assert err > 0
    assert montecarlo.total_variation_to_poisson([0, 0, 0], 0.0) == (0.0, 0.0)


def test_mc_pq_is_reproducible():
    a = montecarlo.mc_pq(3.0, 4, 5000, master_seed=9)
    b = montecarlo.mc_pq(3.0, 4, 5000, master_seed=9)
    assert a == b
    assert montecarlo.mc_pq(3.0, 0, 100, master_seed=9).p_hat == 1.0


@pytest.mark.parametrize("k", [2, 3, 4, 6])
def test_mc_pq_matches_exact_probabilities(k):
    rho = 2.0
    est = montecarlo.mc_pq(rho, k, 40_000, master_seed=k)
    pair = analytics.scan_pair(rho, k)
    assert abs(est.p_hat - pair.p) < 4 * est.p_stderr
    assert est.q_hat <= pair.q_upper + 3 * est.q_stderr
    assert est.q_hat <= est.p_hat


def test_scaled_scan_follows_the_limit_law():
    samples = montecarlo.simulate_scaled_scan(400.0, 5000, master_seed=4)
    assert samples.shape == (5000,)
    for x in (-1.0, 0.0, 1.0):
        assert abs(montecarlo.empirical_cdf(samples, x) - analytics.corollary_cdf(x)) < 0.05


def test_X_k_total_variation_within_chen_stein_bound():
    t = 1e4
    rho = math.log(t) ** 2
    k = round(analytics.k_t(t, rho, 0.0))
    sim = montecarlo.simulate_X_k(t, rho, k, 200, master_seed=1)
    assert sim.N == math.floor(t / rho)
    assert len(sim.samples) == 200
    assert 0 <= min(sim.samples) and max(sim.samples) <= sim.N
    pair = analytics.scan_pair(rho, k)
    assert sim.tv <= analytics.chen_stein_bound(sim.N, pair.p, pair.q_upper) + 3 * sim.tv_error


def test_X_k_needs_small_radius():
    with pytest.raises(ParameterValidationError):
        montecarlo.simulate_X_k(10.0, 6.0, 3, 10, master_seed=0)


def test_standardized_dimension_against_the_gumbel_limit():
    t = 1e4
    rho = math.log(t) ** 2
    xs = [-3.0, 0.0, 4.0]
    sim = montecarlo.simulate_standardized_dimension(t, rho, xs, 300, master_seed=5)
    assert sim == montecarlo.simulate_standardized_dimension(t, rho, xs, 300, master_seed=5)
    constants = analytics.gumbel_constants(t, rho)
    assert (sim.a, sim.b) == (constants.a, constants.b)
    assert [p.limit for p in sim.points] == [analytics.gumbel_cdf(x) for x in xs]
    values = [p.empirical for p in sim.points]
    assert values == sorted(values)
    assert values[0] <= 0.25
    assert values[-1] >= 0.75
    assert sim.points[1].stderr == pytest.approx(math.sqrt(values[1] * (1 - values[1]) / 300))


def test_one_dimensional_dimension_samples():
    samples = montecarlo.simulate_dimension_1d(500.0, 5.0, 200, master_seed=2)
    assert samples.shape == (200,)
    assert samples.dtype.kind == "i"
    # D + 1 >= the count of any fixed window of length r, which has mean rho
    assert samples.mean() + 1 > 5.0
    with pytest.raises(ParameterValidationError):
        montecarlo.simulate_dimension_1d(5.0, 5.0, 10, master_seed=0)


# ---------------------------------------------------------------------------
# Full-size checks
# ---------------------------------------------------------------------------

@pytest.mark.slow
@pytest.mark.parametrize("rho", [2.0, 5.0, 10.0])
def test_mc_pq_full_size(rho):
    start = math.ceil(rho)
    for k in range(start, start + 9):
        est = montecarlo.mc_pq(rho, k, 1_000_000, master_seed=k)
        pair = analytics.scan_pair(rho, k)
        assert abs(est.p_hat - pair.p) < 4 * est.p_stderr + 1e-12
        assert est.q_hat <= pair.q_upper + 3 * est.q_stderr


@pytest.mark.slow
def test_scaled_scan_full_size():
    samples = montecarlo.simulate_scaled_scan(400.0, 100_000, master_seed=11)
    for x in (-1.0, 0.0, 1.0):
        assert abs(montecarlo.empirical_cdf(samples, x) - analytics.corollary_cdf(x)) < 0.02


@pytest.mark.slow
def test_power_sparse_full_size():
    (summary,) = montecarlo.run_dimension_experiment(make_config([1e4], 1e-4, 10_000))
    assert summary.pmf.get(0, 0) + summary.pmf.get(1, 0) >= 0.95
    assert abs(summary.pmf.get(0, 0) - math.exp(-1)) < 0.05


@pytest.mark.slow
def test_dense_ratio_decreases_toward_one():
    rule = RhoRule(kind=RhoRuleKind.log_power, c=1.0, gamma=2.0)
    config = make_config([1e3, 1e4, 1e5], rule, 300)
    ratios = [s.moments[0].value / (analytics.scan_mean_factor(1) * s.rho)
              for s in montecarlo.run_dimension_experiment(config)]
    assert ratios[0] > ratios[1] > ratios[2]
    assert 1.0 <= ratios[-1] <= 1.5


@pytest.mark.slow
@pytest.mark.parametrize("x", [-1.0, 0.0, 1.0])
def test_X_k_mean_and_total_variation_across_t(x):
    for t, trials in ((1e4, 300), (1e5, 200), (1e6, 100)):
        rho = math.log(t) ** 2
        k = round(analytics.k_t(t, rho, x))
        sim = montecarlo.simulate_X_k(t, rho, k, trials, master_seed=int(t) + k)
        pair = analytics.scan_pair(rho, k)
        # the two right-most unions are clipped at 1, so E X^(k) lies in [(N - 2) p, N p]
        assert (sim.N - 2) * pair.p - 4 * sim.stderr <= sim.mean <= sim.N * pair.p + 4 * sim.stderr
        assert sim.tv <= analytics.chen_stein_bound(sim.N, pair.p, pair.q_upper) + 3 * sim.tv_error


@pytest.mark.slow
def test_dense_rate_estimates_rise_toward_the_rate_function():
    # r_t = 0.05 fixed, so P(D >= 1.2 rho) decays like exp(-rho I(1.2)) up to the 20 windows
    rule = RhoRule(kind=RhoRuleKind.table, table={1000.0: 50.0, 4000.0: 200.0, 8000.0: 400.0})
    config = make_config([1000.0, 4000.0, 8000.0], rule, 1000, regime=RegimeKind.dense)
    estimates = montecarlo.estimate_ldp_rate(config, a=1.2)
    rate = analytics.ldp_rate(RegimeKind.dense, 1.2)
    assert rate == pytest.approx(0.01879, abs=1e-5)
    values = [est.estimate for est in estimates]
    assert not any(est.floored for est in estimates)
    assert values[0] < values[1] < values[2] < rate
    assert values[2] > 0.005
