import logging
import math

import numpy as np
import pytest

from scipy import stats as scipy_stats

from eprlab.asymptotics import (
    EnsembleStats,
    brownian_sups,
    clt_test,
    estimate_delta_batch_means,
    estimate_delta_ensemble,
    estimate_epr,
    gaussian_rate,
    lil_calibration,
    lil_normalizer,
    lil_scan,
    mdp_curve,
    mdp_rate,
    normalized_fluctuation,
    point_start_suite,
    variance_with_se,
)
from eprlab.epr import FunctionalSample, TrajectoryRecord, geometric_grid
from eprlab.errors import (
    DegenerateLimitError,
    HorizonError,
    InputError,
    InsufficientSampleError,
    ParameterError,
)


def gaussian_stats(n, t, delta, R=2.0, seed=0, shift=0.0):
    rng = np.random.default_rng(seed)
    S = math.sqrt(t * delta) * (rng.standard_normal(n) + shift)
    sample = FunctionalSample(t=t, R_t=R + S / t, S_t=S, S_t_sec3=2.0 * S, log_M_t=-S)
    return EnsembleStats(t=t, sample=sample, stream_ids=np.arange(n))


def stats_from_S(S, t, R=2.0):
    S = np.asarray(S, dtype=float)
    sample = FunctionalSample(t=t, R_t=R + S / t, S_t=S, S_t_sec3=2.0 * S, log_M_t=-S)
    return EnsembleStats(t=t, sample=sample, stream_ids=np.arange(S.shape[0]))


def brownian_record(times, n, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    steps = np.sqrt(np.diff(times, prepend=0.0))
    return TrajectoryRecord(times, scale * np.cumsum(rng.standard_normal((n, times.shape[0])) * steps, axis=1))


def test_estimate_epr_mean_and_se():
    stats = gaussian_stats(400, 4.0, 8.0)
    mean, se = estimate_epr(stats)
    assert mean == pytest.approx(np.mean(stats.R_t))
    assert se == pytest.approx(np.std(stats.R_t, ddof=1) / 20.0)


def test_estimate_delta_ensemble_recovers_variance():
    estimate = estimate_delta_ensemble(gaussian_stats(5000, 4.0, 8.0, seed=1))
    assert estimate.method == "ensemble"
    assert abs(estimate.delta_hat - 8.0) < 4.0 * estimate.se
    sec3 = estimate_delta_ensemble(gaussian_stats(5000, 4.0, 8.0, seed=1), variant="sec3")
    assert sec3.delta_hat == pytest.approx(4.0 * estimate.delta_hat)


def test_estimate_delta_ensemble_needs_replicas():
    with pytest.raises(InsufficientSampleError) as excinfo:
        estimate_delta_ensemble(gaussian_stats(10, 1.0, 1.0))
    assert excinfo.value.required == 30


def test_delta_estimate_ignores_shift_and_scales_quadratically():
    base = estimate_delta_ensemble(gaussian_stats(1000, 4.0, 8.0, seed=3))
    shifted = estimate_delta_ensemble(gaussian_stats(1000, 4.0, 8.0, seed=3, shift=0.7))
    assert shifted.delta_hat == pytest.approx(base.delta_hat, rel=1e-9)
    scaled = estimate_delta_ensemble(stats_from_S(3.0 * gaussian_stats(1000, 4.0, 8.0, seed=3).S(), 4.0))
    assert scaled.delta_hat == pytest.approx(9.0 * base.delta_hat, rel=1e-9)


def test_ensemble_stats_validation():
    sample = FunctionalSample(t=1.0, R_t=np.zeros(2), S_t=np.zeros(2), S_t_sec3=np.zeros(2), log_M_t=np.zeros(2))
    with pytest.raises(InputError):
        EnsembleStats(t=1.0, sample=sample, stream_ids=np.array([3, 3]))
    with pytest.raises(InputError):
        EnsembleStats.from_samples(
            [
                FunctionalSample(t=1.0, R_t=0.0, S_t=0.0, S_t_sec3=0.0, log_M_t=0.0),
                FunctionalSample(t=2.0, R_t=0.0, S_t=0.0, S_t_sec3=0.0, log_M_t=0.0),
            ]
        )


def test_variance_with_se_of_constant_values():
    assert variance_with_se(np.full(10, 3.0)) == (0.0, 0.0)


def test_batch_means_on_increments():
    dt = 0.1
    increments = math.sqrt(2.0 * dt) * np.random.default_rng(2).standard_normal(20_000)
    estimate = estimate_delta_batch_means(increments, batch_len=10.0, dt=dt)
    assert estimate.n_batches == 200
    assert estimate.batch_len == pytest.approx(10.0)
    assert abs(estimate.delta_hat - 2.0) < 4.0 * estimate.se


def test_batch_means_on_a_trajectory_matches_increments():
    dt = 0.5
    increments = np.random.default_rng(3).standard_normal(600)
    record = TrajectoryRecord(dt * np.arange(1, 601), np.cumsum(increments))
    from_record = estimate_delta_batch_means(record, batch_len=5.0)
    from_increments = estimate_delta_batch_means(increments, batch_len=5.0, dt=dt)
    assert from_record.delta_hat == pytest.approx(from_increments.delta_hat, rel=1e-12)
    assert from_record.n_batches == 60


def test_batch_means_needs_batches():
    with pytest.raises(InsufficientSampleError):
        estimate_delta_batch_means(np.ones(100), batch_len=10.0, dt=1.0)
    with pytest.raises(InputError):
        estimate_delta_batch_means(np.ones(100), batch_len=0.1, dt=1.0)


def test_clt_accepts_gaussian_fluctuations():
    report = clt_test(gaussian_stats(2000, 10.0, 8.0, seed=4), delta=8.0)
    assert report.passed
    assert report.to_dict()["pass"]


def test_clt_rejects_shifted_fluctuations():
    report = clt_test(gaussian_stats(2000, 10.0, 8.0, seed=4, shift=0.5), delta=8.0)
    assert not report.passed
    assert report.p_value < 1e-6


def test_clt_degenerate_and_small_samples():
    with pytest.raises(DegenerateLimitError):
        clt_test(gaussian_stats(500, 1.0, 1.0), delta=0.0)
    with pytest.raises(InsufficientSampleError):
        clt_test(gaussian_stats(50, 1.0, 1.0), delta=1.0)


def test_ks_statistic_at_evenly_spaced_quantiles():
    n, t, delta = 400, 9.0, 8.0
    z = scipy_stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
    report = clt_test(stats_from_S(math.sqrt(t * delta) * z, t), delta)
    assert report.ks_statistic == pytest.approx(1.0 / (2 * n), rel=1e-6)
    assert report.passed


def test_ks_statistic_is_invariant_under_matched_rescaling():
    stats = gaussian_stats(500, 10.0, 8.0, seed=12)
    report = clt_test(stats, 8.0)
    rescaled = clt_test(stats_from_S(3.0 * stats.S(), 10.0), 9.0 * 8.0)
    assert rescaled.ks_statistic == pytest.approx(report.ks_statistic, rel=1e-12)
    assert rescaled.p_value == pytest.approx(report.p_value, rel=1e-9)


def test_clt_scaling_is_the_unit_lambda_fluctuation():
    stats = gaussian_stats(600, 25.0, 8.0, seed=13)
    z = normalized_fluctuation(stats.S(), stats.t, lam=1.0) / math.sqrt(8.0)
    np.testing.assert_array_equal(z, stats.S() / math.sqrt(25.0) / math.sqrt(8.0))
    direct = scipy_stats.kstest(z, "norm", method="asymp")
    assert clt_test(stats, 8.0).ks_statistic == pytest.approx(float(direct.statistic), rel=1e-12)


def test_mdp_rate():
    assert mdp_rate(-1.0, 2.0) == 0.0
    assert mdp_rate(2.0, 2.0) == 1.0


def test_mdp_curve_keeps_rows_with_enough_hits():
    ensembles = [gaussian_stats(4000, t, 8.0, seed=int(t)) for t in (10.0, 40.0)]
    report = mdp_curve(ensembles, 0.15, u_grid=[0.5, 1.0, 2.0, 4.0, 8.0], delta=8.0, min_hits=50)
    assert not report.empty
    assert all(row.hits >= 50 for row in report.rows)
    assert [row.t for row in report.largest_u()] == [10.0, 40.0]
    assert report.to_dict()["rows"][0]["discrepancy"] >= 0.0


def test_mdp_curve_empty_when_no_hits(caplog):
    with caplog.at_level(logging.WARNING):
        report = mdp_curve([gaussian_stats(100, 10.0, 8.0)], 0.15, u_grid=[1.0], delta=8.0, min_hits=1000)
    assert report.empty
    assert "empty" in caplog.text


def test_mdp_curve_rejects_bad_exponent():
    with pytest.raises(ParameterError):
        mdp_curve([gaussian_stats(100, 10.0, 8.0)], 0.6, u_grid=[1.0], delta=8.0)
    with pytest.raises(DegenerateLimitError):
        mdp_curve([gaussian_stats(100, 10.0, 8.0)], 0.2, u_grid=[1.0], delta=0.0)


def test_gaussian_rate_tends_to_the_limit_rate():
    rates = [gaussian_rate(1.0, lam, 1.0) for lam in (2.0, 10.0, 100.0)]
    assert rates[0] > rates[1] > rates[2] > mdp_rate(1.0, 1.0)
    assert rates[2] == pytest.approx(mdp_rate(1.0, 1.0), rel=2e-3)


def test_mdp_on_exact_gaussian_fluctuations():
    delta = 8.0
    ensembles = [gaussian_stats(20_000, t, delta, seed=int(t)) for t in (100.0, 400.0, 1600.0)]
    u_grid = math.sqrt(delta) * np.arange(0.05, 4.0, 0.05)
    report = mdp_curve(ensembles, 0.15, u_grid, delta, min_hits=50)

    for row in report.largest_u():
        assert row.gaussian_discrepancy <= 0.25
    # the limit rate is still far off at these lambda
    assert report.largest_u()[-1].discrepancy > 0.25

    shared = report.common_u()
    assert [row.t for row in shared] == [100.0, 400.0, 1600.0]
    assert len({row.u for row in shared}) == 1
    discrepancies = [row.discrepancy for row in shared]
    assert discrepancies[0] > discrepancies[1] > discrepancies[2]
    assert report.to_dict()["common_u"][0]["gaussian_discrepancy"] >= 0.0


def test_common_u_needs_a_u_shared_by_every_t():
    report = mdp_curve([gaussian_stats(200, 10.0, 8.0)], 0.15, u_grid=[0.5], delta=8.0, min_hits=1)
    assert report.common_u([10.0, 40.0]) == []


def test_lil_normalizer():
    t = math.exp(math.e)
    assert float(lil_normalizer(t)) == pytest.approx(math.sqrt(2.0 * t))
    with pytest.raises(HorizonError):
        lil_normalizer(5.0)


def test_lil_scan_drops_early_checkpoints():
    times = np.array([1.0, 10.0, 100.0])
    values = np.array([[5.0, 1.0, 2.0], [0.0, -3.0, 0.5]])
    report = lil_scan(TrajectoryRecord(times, values), delta=1.0, margin=0.5)
    assert report.n_checkpoints == 2
    norm = lil_normalizer(np.array([10.0, 100.0]))
    np.testing.assert_allclose(report.sup, [max(1.0 / norm[0], 2.0 / norm[1]), 0.5 / norm[1]])
    np.testing.assert_allclose(report.inf, [min(1.0 / norm[0], 2.0 / norm[1]), -3.0 / norm[0]])
    assert report.envelope == (0.5, 1.5)


def test_lil_scan_needs_long_horizon():
    with pytest.raises(HorizonError):
        lil_scan(TrajectoryRecord(np.array([1.0, 2.0]), np.zeros((1, 2))), delta=1.0)


def test_lil_scan_of_a_linear_path():
    times = geometric_grid(0.9, 1e5, 0.01)
    report = lil_scan(TrajectoryRecord(times, times[None, :]), delta=1.0)
    T = times[-1]
    assert report.sup[0] == pytest.approx(math.sqrt(T / (2.0 * math.log(math.log(T)))))
    assert report.inf[0] == pytest.approx(math.sqrt(times[0] / (2.0 * math.log(math.log(times[0])))))


def test_lil_trace_rows():
    times = np.array([10.0, 100.0])
    report = lil_scan(TrajectoryRecord(times, np.array([[1.0, 2.0], [3.0, -4.0]])), delta=4.0)
    rows = report.trace_rows()
    assert [(r[0], r[1]) for r in rows] == [(0, 10.0), (0, 100.0), (1, 10.0), (1, 100.0)]
    norm = lil_normalizer(times)
    assert rows[3][2] == pytest.approx(-4.0 / norm[1])
    assert rows[3][3] == pytest.approx(-2.0 / norm[1])


def test_brownian_sups_follow_the_checkpoint_grid():
    times = geometric_grid(0.9, 1e5, 0.01)
    sups = brownian_sups(times, 3, np.random.default_rng(4))
    rng = np.random.default_rng(4)
    paths = np.cumsum(rng.standard_normal((3, times.shape[0])) * np.sqrt(np.diff(times, prepend=0.0)), axis=1)
    np.testing.assert_allclose(sups, np.max(paths / lil_normalizer(times), axis=1))


def test_lil_calibration_accepts_scaled_brownian_motion():
    times = geometric_grid(0.9, 1e5, 0.01)
    report = lil_scan(brownian_record(times, 300, seed=21, scale=2.0), delta=4.0, margin=0.25)
    calibration = lil_calibration(report, np.random.default_rng(22), n_reference=5000, alpha=1e-3)
    assert calibration.passed, calibration.to_dict()
    assert calibration.reference_tail_fraction > 0.0


def test_lil_calibration_rejects_a_drifting_sum():
    times = geometric_grid(0.9, 1e5, 0.01)
    record = brownian_record(times, 300, seed=23)
    drifting = TrajectoryRecord(times, record.values + 0.02 * times)
    calibration = lil_calibration(lil_scan(drifting, delta=1.0), np.random.default_rng(24), n_reference=5000)
    assert not calibration.passed
    assert calibration.p_value < 1e-6


def test_lil_calibration_needs_positive_delta():
    times = np.array([10.0, 100.0])
    with pytest.raises(DegenerateLimitError):
        lil_calibration(lil_scan(TrajectoryRecord(times, np.zeros((2, 2))), delta=0.0), np.random.default_rng(0))


def test_point_start_suite_runs_both_legs(rotated_ou):
    report = point_start_suite(rotated_ou, (3.0, 0.0), t=1.0, n=40, h=0.01, seed=6)
    assert report.n == 40
    assert report.clt_point is None
    assert math.isfinite(report.R_z)
    data = report.to_dict()
    assert data["x0"] == [3.0, 0.0]
    assert data["delta_point"]["n"] == 40
