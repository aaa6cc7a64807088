import math

import numpy as np
import pytest

from eprlab.epr import (
    EnsembleRun,
    EnsembleSettings,
    EprAccumulator,
    EprObserver,
    TrajectoryRecord,
    effective_sample_size,
    finalize,
    geometric_grid,
    martingale_mean,
    reference_epr,
    sample_from_sums,
    simulate_ensemble,
)
from eprlab.errors import ConfigurationError, EmptyPathError, HorizonError, InsufficientSampleError
from eprlab.sde import InitialLaw, PathConfig, simulate_path


def test_accumulator_sums_one_step():
    acc = EprAccumulator().add(np.array([1.0, 2.0]), np.array([0.1, -0.1]), 0.5)
    assert acc.ito_sum == pytest.approx(-0.1)
    assert acc.quad_sum == pytest.approx(2.5)
    assert acc.t_accum == 0.5

    sample = finalize(acc, R=0.0)
    assert sample.R_t == pytest.approx(2.3)
    assert sample.S_t == pytest.approx(1.15)
    assert sample.S_t_sec3 == pytest.approx(2.4)
    assert sample.log_M_t == pytest.approx(-1.15)


def test_accumulator_merge_matches_continuous_adding():
    rng = np.random.default_rng(3)
    psi = rng.standard_normal((10, 2))
    dw = rng.standard_normal((10, 2))
    whole = EprAccumulator()
    first, second = EprAccumulator(), EprAccumulator()
    for k in range(10):
        whole.add(psi[k], dw[k], 0.1)
        (first if k < 4 else second).add(psi[k], dw[k], 0.1)
    merged = first.merge(second)
    assert merged.ito_sum == pytest.approx(whole.ito_sum, rel=1e-14)
    assert merged.quad_sum == pytest.approx(whole.quad_sum, rel=1e-14)
    assert merged.t_accum == pytest.approx(1.0, rel=1e-15)


def test_finalize_needs_elapsed_time():
    with pytest.raises(EmptyPathError):
        finalize(EprAccumulator(), R=1.0)


def test_sample_from_sums_is_vectorised():
    sample = sample_from_sums(np.array([0.0, 1.0]), np.array([4.0, 0.0]), 2.0, R=1.0)
    np.testing.assert_allclose(sample.R_t, [1.0, 0.5])
    np.testing.assert_allclose(sample.S_t, [0.0, -1.0])
    np.testing.assert_allclose(sample.S_t_sec3, [0.0, -3.0])
    rows = list(sample.rows())
    assert rows[1] == (1, 2.0, 0.5, -1.0, -3.0, -1.0)


def test_reference_epr_without_closed_forms(free_bm):
    assert reference_epr(free_bm, R=1.5) == 1.5
    with pytest.raises(ConfigurationError) as excinfo:
        reference_epr(free_bm)
    assert excinfo.value.field == "epr_reference"


def test_geometric_grid():
    grid = geometric_grid(0.5, 1000.0, 0.01, t_min=5.0)
    assert grid[0] == pytest.approx(5.65)
    assert np.all(np.diff(grid) > 0.0)
    assert grid[-1] <= 1000.0
    assert grid.shape[0] == 45
    with pytest.raises(ConfigurationError) as excinfo:
        geometric_grid(1.0, 1000.0, 0.01)
    assert excinfo.value.field == "lil.theta"


def test_trajectory_record_needs_increasing_times():
    with pytest.raises(HorizonError):
        TrajectoryRecord(np.array([1.0, 1.0]), np.zeros(2))
    record = TrajectoryRecord(np.array([1.0, 2.0]), np.array([0.5, -0.5]))
    assert record.pairs() == [(1.0, 0.5), (2.0, -0.5)]


def test_observer_on_reversible_path_is_exactly_zero(reversible_ou):
    observer = EprObserver(reversible_ou, checkpoints=(0.5, 1.0), h=0.01)
    simulate_path(reversible_ou, np.array([1.0, -1.0]), PathConfig(h=0.01, t_end=1.0, seed=2), observer)
    sample = observer.sample()
    assert sample.R_t == 0.0
    assert sample.S_t == 0.0
    trajectory = observer.trajectory()
    np.testing.assert_allclose(trajectory.times, [0.5, 1.0])
    np.testing.assert_array_equal(trajectory.values, [0.0, 0.0])


def test_observer_checkpoints_need_step_size(rotated_ou):
    with pytest.raises(ConfigurationError) as excinfo:
        EprObserver(rotated_ou, checkpoints=(1.0,))
    assert excinfo.value.field == "h"


def test_ensemble_replicas_do_not_depend_on_batching(rotated_ou):
    law = InitialLaw("stationary")
    settings = EnsembleSettings(h=0.01, horizons=(0.5, 1.0), seed=17, noise_block=32)
    together = simulate_ensemble(rotated_ou, law, settings, np.arange(6))
    parts = [simulate_ensemble(rotated_ou, law, settings, ids) for ids in (np.arange(3), np.arange(3, 6))]
    merged = EnsembleRun.concat(parts)
    np.testing.assert_array_equal(merged.ito, together.ito)
    np.testing.assert_array_equal(merged.quad, together.quad)
    np.testing.assert_array_equal(merged.final_state, together.final_state)

    alone = simulate_ensemble(rotated_ou, law, settings, np.array([4]))
    np.testing.assert_array_equal(alone.quad[:, 0], together.quad[:, 4])


def test_ensemble_on_reversible_model(reversible_ou):
    settings = EnsembleSettings(h=0.01, horizons=(1.0,), seed=1)
    run = simulate_ensemble(reversible_ou, InitialLaw("stationary"), settings, np.arange(8))
    sample = run.sample(1.0, R=0.0)
    assert np.all(sample.R_t == 0.0)
    np.testing.assert_allclose(run.horizons, [1.0])
    with pytest.raises(HorizonError):
        run.sample(0.5, R=0.0)


def test_ensemble_uniform_trajectory(rotated_ou):
    settings = EnsembleSettings(h=0.01, horizons=(1.0,), seed=5, uniform_dt=0.25, burn_in=0.1)
    run = simulate_ensemble(rotated_ou, InitialLaw("dirac", x0=(0.0, 0.0)), settings, np.arange(3))
    assert run.burn_in_steps == 10
    trajectory = run.trajectory(R=2.0, grid="uniform")
    np.testing.assert_allclose(trajectory.times, [0.25, 0.5, 0.75, 1.0])
    assert trajectory.values.shape == (3, 4)
    np.testing.assert_allclose(trajectory.values[:, -1], run.sample(1.0, R=2.0).S_t)
    with pytest.raises(HorizonError):
        run.trajectory(R=2.0)


def test_ensemble_settings_validation():
    with pytest.raises(ConfigurationError) as excinfo:
        EnsembleSettings(h=0.01, horizons=(0.001,)).validate()
    assert excinfo.value.field == "horizons"
    with pytest.raises(ConfigurationError) as excinfo:
        EnsembleSettings(h=0.01, horizons=(1.0,), uniform_dt=0.001).validate()
    assert excinfo.value.field == "uniform_dt"


def test_martingale_at_time_zero_is_exact(rotated_ou):
    report = martingale_mean(rotated_ou, 0, 100)
    assert report.lhs == 1.0
    assert report.passed


def test_martingale_needs_enough_replicas(rotated_ou):
    with pytest.raises(InsufficientSampleError) as excinfo:
        martingale_mean(rotated_ou, 1.0, 10)
    assert excinfo.value.required == 100
    assert excinfo.value.got == 10


def test_martingale_mean_near_one(rotated_ou):
    report = martingale_mean(rotated_ou, 0.05, 2000, h=0.005, seed=8)
    assert report.passed
    assert report.details["ess"] > 1000
    assert math.isfinite(report.lhs)


def test_martingale_with_supplied_run_checks_horizon_and_size(rotated_ou):
    settings = EnsembleSettings(h=0.01, horizons=(0.5,), seed=2)
    run = simulate_ensemble(rotated_ou, InitialLaw("stationary"), settings, np.arange(120))
    with pytest.raises(HorizonError):
        martingale_mean(rotated_ou, 1.0, 120, h=0.01, run=run)
    report = martingale_mean(rotated_ou, 0.5, 5000, h=0.01, run=run)
    assert report.n == 120
    assert report.details["t"] == pytest.approx(0.5)

    small = simulate_ensemble(rotated_ou, InitialLaw("stationary"), settings, np.arange(10))
    with pytest.raises(InsufficientSampleError) as excinfo:
        martingale_mean(rotated_ou, 0.5, 5000, h=0.01, run=small)
    assert excinfo.value.got == 10


def test_effective_sample_size():
    assert effective_sample_size(np.ones(10)) == pytest.approx(10.0)
    assert effective_sample_size(np.zeros(3)) == 0.0


def test_centred_functionals_differ_by_half_the_quadratic_excess(rotated_ou):
    settings = EnsembleSettings(h=0.01, horizons=(2.0,), seed=4)
    run = simulate_ensemble(rotated_ou, InitialLaw("stationary"), settings, np.arange(16))
    sample = run.sample(2.0, R=2.0)
    np.testing.assert_allclose(sample.S_t_sec3 - sample.S_t, 0.5 * (run.quad[0] - 2.0 * 4.0), atol=1e-12)
    np.testing.assert_allclose(sample.log_M_t, -2.0 * sample.R_t, rtol=1e-13)
    assert np.all(run.quad[0] >= 0.0)
