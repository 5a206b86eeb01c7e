"""Walk-forward forecasts, portfolio strategies and the backtest ledger."""

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from backtest import (BacktestConfig, BacktestLedger, Forecast, MeanVariancePolicy, PredictorModel, WalkForward, as_action,
                      decision_rows, filter_covariance, forecast_path, hit_ratio_by_kin, long_only, long_short,
                      predict, replay, run_equal_weight, run_mean_variance, solve_mean_variance, summarize,
                      write_ledger, write_summary)
from errors import DomainError
from market import LeadLagSpec, ReturnsPanel, generate_lead_lag
from networks import DirectedNetwork, NetworkKind
from utils.seeding import rng

LASSO = dict(method="lasso_path", n_runs=1)


def calendar(n):
    return pd.bdate_range("2020-01-01", periods=n)


def exact_lead_lag_panel(n_periods=140, seed=0):
    """'F' is the sum of the previous returns of 'L1' and 'L2'; the rest is noise."""
    gen = rng(seed)
    noise = 0.01 * gen.standard_normal((n_periods, 5))
    follower = np.zeros(n_periods)
    follower[0] = 0.003
    follower[1:] = noise[:-1, 0] + noise[:-1, 1]
    values = np.column_stack([noise, follower])
    return ReturnsPanel(calendar(n_periods), ("L1", "L2", "N1", "N2", "N3", "F"), values)


def manual_forecasts(panel, rows, predictions, k_in=None):
    out = []
    assets = tuple(predictions)
    for t in rows:
        out.append(Forecast(date=panel.dates[t], row=t, fitted_at=t, assets=assets,
                            k_in=np.array(k_in or [1] * len(assets)),
                            predicted=np.array([predictions[a] for a in assets], dtype=float)))
    return out


def steady_panel(n_periods=30, seed=1):
    gen = rng(seed)
    values = np.column_stack([np.full(n_periods, 0.01), 0.02 * gen.standard_normal((n_periods, 2))])
    return ReturnsPanel(calendar(n_periods), ("UP", "X", "Y"), values)


# --- configuration ---

@pytest.mark.parametrize("kwargs", [dict(t_in=9), dict(horizon=0), dict(refit_every=6, horizon=5),
                                    dict(q=1.0), dict(method="boosting")])
def test_invalid_config(kwargs):
    with pytest.raises((DomainError, ValueError)):
        BacktestConfig(**kwargs)


def test_decision_rows_leave_room_for_the_horizon():
    config = BacktestConfig(t_in=10, horizon=3)
    assert list(decision_rows(steady_panel(15), config)) == [9, 10, 11]
    with pytest.raises(DomainError):
        decision_rows(steady_panel(12), config)


# --- mean-variance ---

def test_symmetric_two_assets():
    solution = solve_mean_variance(np.array([0.005, 0.005]), np.eye(2), 0.005, 1.0)
    assert_allclose(solution.weights, [0.5, 0.5], atol=1e-12)
    assert not solution.fallback
    assert_allclose(solution.residuals(np.array([0.005, 0.005]), 0.005, 1.0), 0.0, atol=1e-12)


def test_constant_mean_matching_the_target_is_not_a_fallback():
    sigma = np.array([[0.04, 0.01, 0.0], [0.01, 0.09, 0.02], [0.0, 0.02, 0.01]])
    mu = np.full(3, 0.005)
    solution = solve_mean_variance(mu, sigma, 0.005, 1.0)
    assert not solution.fallback
    inverse = np.linalg.solve(sigma, np.ones(3))
    assert_allclose(solution.weights, inverse / inverse.sum())


def test_single_asset_on_target_is_not_a_fallback():
    assert not solve_mean_variance(np.array([0.005]), np.array([[0.2]]), 0.005, 1.0).fallback


def test_single_asset_takes_the_whole_leverage():
    solution = solve_mean_variance(np.array([0.03]), np.array([[0.2]]), 0.005, 1.0)
    assert_allclose(solution.weights, [1.0])
    assert solution.fallback


def test_constant_mean_falls_back_to_minimum_variance():
    sigma = np.array([[1.0, 0.2], [0.2, 2.0]])
    solution = solve_mean_variance(np.array([0.01, 0.01]), sigma, 0.005, 1.0)
    assert solution.fallback
    inverse = np.linalg.solve(sigma, np.ones(2))
    assert_allclose(solution.weights, inverse / inverse.sum())


def kkt_oracle(mu, sigma, target, leverage):
    n = len(mu)
    system = np.zeros((n + 2, n + 2))
    system[:n, :n] = 2 * sigma
    system[:n, n] = system[n, :n] = 1.0
    system[:n, n + 1] = system[n + 1, :n] = mu
    rhs = np.concatenate([np.zeros(n), [leverage, target]])
    return np.linalg.solve(system, rhs)[:n]


@pytest.mark.parametrize("identity", [True, False])
def test_mean_variance_matches_quadratic_program(identity):
    gen = rng(2)
    for _ in range(100):
        n = int(gen.integers(2, 7))
        if identity:
            sigma = np.eye(n)
        else:
            a = gen.standard_normal((n, n))
            sigma = a @ a.T / n + 0.5 * np.eye(n)
        mu = 0.01 * gen.standard_normal(n)
        solution = solve_mean_variance(mu, sigma, 0.005, 1.0)
        assert not solution.fallback
        ret_residual, lev_residual = solution.residuals(mu, 0.005, 1.0)
        assert abs(ret_residual) <= 1e-8
        assert abs(lev_residual) <= 1e-8
        assert_allclose(solution.weights, kkt_oracle(mu, sigma, 0.005, 1.0), atol=1e-8)


def test_non_positive_definite_covariance():
    with pytest.raises(DomainError):
        solve_mean_variance(np.array([0.01, 0.02]), np.array([[1.0, 2.0], [2.0, 1.0]]))


@pytest.mark.parametrize("kind", ["diagonal_shrinkage", "ledoit_wolf"])
def test_covariance_filters(kind):
    returns = 0.01 * rng(3).standard_normal((50, 4))
    covariance = filter_covariance(returns, kind)
    assert covariance.shape == (4, 4)
    assert_allclose(covariance, covariance.T, atol=1e-15)
    assert np.linalg.eigvalsh(covariance)[0] > 0


# --- prediction ---

def test_exact_predictors_give_exact_forecast():
    panel = exact_lead_lag_panel()
    config = BacktestConfig(t_in=120, horizon=1, q=0.5, **LASSO)
    t = 130
    forecast = predict(panel, t, config, seed=4)
    assert "F" in forecast.assets
    assert forecast.predictors["F"] == ("L1", "L2")
    expected = panel.column("L1")[t] + panel.column("L2")[t]
    assert forecast.as_series()["F"] == pytest.approx(expected, abs=1e-8)
    assert forecast.k_in[forecast.assets.index("F")] == 2


def test_prediction_never_reads_the_future():
    panel = exact_lead_lag_panel(seed=5)
    config = BacktestConfig(t_in=120, horizon=1, q=0.5, **LASSO)
    t = 125
    full = predict(panel, t, config, seed=6)
    truncated = predict(panel.slice_rows(0, t + 1), t, config, seed=6)
    assert full.assets == truncated.assets
    assert np.array_equal(full.predicted, truncated.predicted)


def test_prediction_is_deterministic():
    panel = exact_lead_lag_panel(seed=7)
    config = BacktestConfig(t_in=120, horizon=1, q=0.5, **LASSO)
    first, second = predict(panel, 130, config, seed=1), predict(panel, 130, config, seed=1)
    assert first.assets == second.assets
    assert np.array_equal(first.predicted, second.predicted)


def test_no_admissible_selection_gives_empty_forecast():
    values = 0.01 * rng(8).standard_normal((60, 5))
    panel = ReturnsPanel(calendar(60), tuple("ABCDE"), values)
    forecast = predict(panel, 59, BacktestConfig(t_in=40, horizon=1, q=0.1, **LASSO), seed=0)
    assert forecast.empty
    assert forecast.as_series().empty


def test_empty_network_forecasts_nothing():
    panel = steady_panel()
    empty = DirectedNetwork(nodes=panel.assets, edges=frozenset(), window_end=panel.dates[20],
                            kind=NetworkKind.PREDICTION, q=0.2)
    forecast = PredictorModel(fitted_at=20, network=empty, fits={}).forecast(panel, 20)
    assert forecast.empty


def test_forecast_path_reuses_models_between_refits():
    panel = exact_lead_lag_panel(n_periods=130, seed=9)
    config = BacktestConfig(t_in=120, horizon=4, refit_every=2, q=0.5, **LASSO)
    path = forecast_path(panel, config, seed=3)
    assert [f.row for f in path] == list(range(119, 126))
    assert [f.fitted_at for f in path] == [119, 119, 121, 121, 123, 123, 125]


# --- walk-forward replay ---

def test_walk_forward_reset_and_step():
    panel = steady_panel()
    forecasts = manual_forecasts(panel, range(9, 29), {"UP": 0.001})
    env = WalkForward(panel, forecasts)
    observation, info = env.reset(seed=0)
    assert env.observation_space.contains(observation)
    assert_allclose(observation, [0.001, 0.0, 0.0])
    assert info["forecast"] is forecasts[0]
    terminated, steps = False, 0
    while not terminated:
        action = as_action(long_short(info["forecast"]), panel.assets)
        observation, reward, terminated, truncated, info = env.step(action)
        assert reward == pytest.approx(0.01)
        assert not truncated
        steps += 1
    assert steps == len(forecasts)
    assert info["forecast"] is None
    assert env.cumulative == pytest.approx(1.01 ** steps)
    with pytest.raises(DomainError):
        env.step(np.zeros(3))


def test_walk_forward_random_actions():
    panel = steady_panel(seed=20)
    forecasts = manual_forecasts(panel, range(9, 29), {"X": 0.01})
    env = WalkForward(panel, forecasts)
    env.action_space.seed(0)
    env.reset(seed=0)
    for forecast in forecasts:
        action = env.action_space.sample()
        _, reward, terminated, _, info = env.step(action)
        assert reward == pytest.approx(float(action @ panel.values[forecast.row + 1]))
        assert info["date"] == forecast.date
    assert terminated


def test_walk_forward_truncates_at_max_dates():
    panel = steady_panel()
    env = WalkForward(panel, manual_forecasts(panel, range(9, 29), {"UP": 0.001}), max_dates=5)
    env.reset()
    flags = [env.step(np.array([1.0, 0.0, 0.0]))[2:4] for _ in range(5)]
    assert flags[:4] == [(False, False)] * 4
    assert flags[4] == (False, True)
    with pytest.raises(DomainError):
        env.step(np.zeros(3))


def test_walk_forward_rejects_malformed_actions():
    panel = steady_panel()
    env = WalkForward(panel, manual_forecasts(panel, range(9, 12), {"UP": 0.001}))
    env.reset()
    with pytest.raises(DomainError):
        env.step(np.ones(2))
    with pytest.raises(DomainError):
        env.step(np.array([np.nan, 0.0, 0.0]))
    with pytest.raises(DomainError):
        as_action(pd.Series([1.0], index=["Z"]), panel.assets)


def test_long_short_compounds_a_steady_winner():
    panel = steady_panel()
    config = BacktestConfig(t_in=10, horizon=1)
    forecasts = manual_forecasts(panel, range(9, 29), {"UP": 0.002})
    ledger = replay(panel, forecasts, config, {"long_short": long_short})
    assert ledger.track("long_short").iloc[-1] == pytest.approx(1.01 ** 20)


def test_sign_flip_negates_long_short_and_keeps_long_only():
    panel = steady_panel(seed=10)
    config = BacktestConfig(t_in=10, horizon=1)
    up = manual_forecasts(panel, range(9, 29), {"X": 0.01, "Y": -0.02})
    down = manual_forecasts(panel, range(9, 29), {"X": -0.01, "Y": 0.02})
    policies = {"long_short": long_short, "long_only": long_only}
    a, b = replay(panel, up, config, policies), replay(panel, down, config, policies)

    def daily(ledger, name):
        return ledger.performance.loc[ledger.performance["strategy"] == name, "daily_return"].to_numpy()

    assert_allclose(daily(a, "long_short"), -daily(b, "long_short"), atol=1e-15)
    assert_allclose(daily(a, "long_only"), daily(b, "long_only"))


def test_long_only_equals_equal_weight_market():
    panel = steady_panel(seed=11)
    config = BacktestConfig(t_in=10, horizon=1)
    forecasts = manual_forecasts(panel, range(9, 29), {"UP": 0.01, "X": -0.01, "Y": 0.003})
    ledger = replay(panel, forecasts, config, {"long_only": long_only})
    expected = panel.values[10:30].mean(axis=1)
    assert_allclose(ledger.performance["daily_return"], expected, atol=1e-15)


def test_equal_weights_have_magnitude_one_over_n():
    panel = steady_panel(seed=12)
    forecasts = manual_forecasts(panel, [9], {"UP": 0.01, "X": -0.01, "Y": 0.003})
    assert_allclose(np.abs(long_short(forecasts[0])), 1 / 3)
    assert long_only(forecasts[0]).sum() == pytest.approx(1.0)


def test_rebalance_holds_weights_between_dates():
    panel = steady_panel(seed=13)
    config = BacktestConfig(t_in=10, horizon=3, rebalance=3)
    forecasts = manual_forecasts(panel, range(9, 15), {"X": 0.01})
    flips = iter([1.0, -1.0])
    ledger = replay(panel, forecasts, config,
                    {"alternating": lambda f: pd.Series(next(flips), index=["X"])})
    weights = ledger.positions["weight"].to_numpy()
    assert_allclose(weights, [1, 1, 1, -1, -1, -1])


def test_performance_recomputes_from_positions():
    panel = steady_panel(seed=14)
    config = BacktestConfig(t_in=10, horizon=1)
    forecasts = manual_forecasts(panel, range(9, 29), {"UP": 0.01, "X": -0.02, "Y": 0.005})
    ledger = replay(panel, forecasts, config, {"long_short": long_short, "long_only": long_only})
    for name in ledger.strategies:
        rows = ledger.positions[ledger.positions["strategy"] == name]
        daily = np.array([g["weight"].to_numpy() @ g["realized_return"].to_numpy()
                          for _, g in rows.groupby("date", sort=True)])
        stored = ledger.performance[ledger.performance["strategy"] == name]
        assert np.array_equal(daily, stored["daily_return"].to_numpy())
        assert np.array_equal(np.cumprod(1.0 + daily), stored["cumulative"].to_numpy())


def test_mean_variance_constraints_hold_every_date():
    values = 0.01 * rng(15).standard_normal((30, 3))
    panel = ReturnsPanel(calendar(30), ("UP", "X", "Y"), values)
    config = BacktestConfig(t_in=10, horizon=1, target_return=0.005)
    forecasts = manual_forecasts(panel, range(9, 29), {"UP": 0.01, "X": -0.004, "Y": 0.002})
    ledger = replay(panel, forecasts, config, {
        "mv": MeanVariancePolicy(panel, config, "diagonal_shrinkage", "knockoff_prediction"),
    })
    for _, group in ledger.positions.groupby("date"):
        assert abs(group["weight"].sum() - 1.0) <= 1e-8
        assert abs(group["weight"].to_numpy() @ group["predicted_return"].to_numpy() - 0.005) <= 1e-8


# --- hit ratio ---

def ledger_from(frame):
    return BacktestLedger(forecasts=frame, positions=pd.DataFrame(), performance=pd.DataFrame())


def test_perfect_predictions_hit_every_time():
    realized = rng(16).standard_normal(60)
    frame = pd.DataFrame({"date": calendar(60), "asset": "A", "k_in": np.tile([1, 2, 3], 20),
                          "predicted_return": realized, "predicted_horizon": realized,
                          "realized_horizon": realized})
    table = hit_ratio_by_kin(ledger_from(frame))
    assert list(table["k_in"]) == [1, 2, 3]
    assert_allclose(table["hit_ratio"], 1.0)
    assert list(table["n"]) == [20, 20, 20]


def test_zero_realized_return_is_a_miss():
    frame = pd.DataFrame({"date": calendar(2), "asset": "A", "k_in": [1, 1], "predicted_return": [0.1, 0.1],
                          "predicted_horizon": [0.1, 0.1], "realized_horizon": [0.0, 0.2]})
    assert hit_ratio_by_kin(ledger_from(frame))["hit_ratio"].iloc[0] == 0.5


def test_coin_flip_predictions_hit_half_the_time():
    gen = rng(17)
    n = 20_000
    frame = pd.DataFrame({"date": pd.Timestamp("2020-01-01"), "asset": "A", "k_in": 1,
                          "predicted_return": gen.standard_normal(n),
                          "predicted_horizon": gen.standard_normal(n),
                          "realized_horizon": gen.standard_normal(n)})
    row = hit_ratio_by_kin(ledger_from(frame)).iloc[0]
    assert abs(row["hit_ratio"] - 0.5) <= 4 * row["std_error"]


def test_empty_ledger_has_no_hit_ratio():
    with pytest.raises(DomainError):
        hit_ratio_by_kin(ledger_from(pd.DataFrame(columns=["k_in", "predicted_horizon", "realized_horizon"])))


# --- end to end ---

def small_lead_lag(seed=0):
    return generate_lead_lag(LeadLagSpec(n_leaders=4, max_k_in=2, followers_per_k=1, n_periods=45,
                                         signal=1.0, noise_base=0.2, seed=seed))[0]


def test_equal_weight_backtest(tmp_path):
    panel = small_lead_lag()
    config = BacktestConfig(t_in=30, horizon=2, q=0.5, **LASSO)
    ledger = run_equal_weight(panel, config, seed=1)
    assert ledger.strategies == ["long_short", "long_only"]
    assert len(ledger.performance) == 2 * len(range(29, 43))
    assert "cannot be considered as a proper back-test" in ledger.metadata["caveat"]

    write_ledger(ledger, tmp_path / "ledger.csv")
    written = pd.read_csv(tmp_path / "ledger.csv")
    assert list(written.columns) == ["date", "strategy", "asset", "weight", "predicted_return", "realized_return"]

    summary = summarize(ledger)
    write_summary(summary, tmp_path / "summary.csv")
    assert list(pd.read_csv(tmp_path / "summary.csv").columns) == ["strategy", "cumulative_return",
                                                                   "hit_ratio", "n_days"]
    assert list(summary["n_days"]) == [14, 14]


def test_mean_variance_backtests_share_the_forecast_path():
    panel = small_lead_lag(seed=2)
    config = BacktestConfig(t_in=30, horizon=2, q=0.5, **LASSO)
    forecasts = forecast_path(panel, config, seed=3)
    ledger = run_equal_weight(panel, config, forecasts=forecasts)
    for source in ("knockoff_prediction", "historical_mean"):
        ledger = ledger.merge(run_mean_variance(panel, config, return_source=source, forecasts=forecasts))
    assert ledger.strategies == ["long_short", "long_only", "mean_variance_knockoff_prediction",
                                 "mean_variance_historical_mean"]
    assert set(ledger.metadata["fallback_dates"]) == {"mean_variance_knockoff_prediction",
                                                      "mean_variance_historical_mean"}
    mv = ledger.positions[ledger.positions["strategy"].str.startswith("mean_variance")]
    for _, group in mv.groupby(["strategy", "date"]):
        assert abs(group["weight"].sum() - 1.0) <= 1e-8


def test_backtest_is_deterministic():
    panel = small_lead_lag(seed=4)
    config = BacktestConfig(t_in=30, horizon=2, q=0.5, **LASSO)
    first = run_equal_weight(panel, config, seed=5)
    second = run_equal_weight(panel, config, seed=5)
    pd.testing.assert_frame_equal(first.positions, second.positions)
    pd.testing.assert_frame_equal(first.performance, second.performance)


@pytest.mark.slow
def test_hit_ratio_decreases_with_in_degree():
    tables = []
    for seed in range(50):
        panel, _ = generate_lead_lag(LeadLagSpec(n_leaders=12, max_k_in=4, followers_per_k=3, n_periods=220,
                                                 signal=0.8, noise_base=0.3, noise_growth=0.8, seed=seed))
        config = BacktestConfig(t_in=150, horizon=1, refit_every=1, q=0.3, **LASSO)
        ledger = run_equal_weight(panel, config, seed=seed)
        if not ledger.forecasts.empty:
            tables.append(hit_ratio_by_kin(ledger))
    pooled = pd.concat(tables)
    fit = stats.linregress(pooled["k_in"], pooled["hit_ratio"])
    assert fit.slope < 0
    assert fit.pvalue < 0.05
