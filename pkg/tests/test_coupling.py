import math

import numpy as np
import pytest

from eprlab.coupling import (
    bismut_weight_increment,
    constant,
    coupling_check,
    coupling_drift,
    exp_moment_check,
    gap_bound,
    gaussian,
    gaussian_quadratic_moment,
    harnack_check,
    harnack_exponent,
    hill_tail_index,
    ibp_check,
    linear,
    psi_exp_moment_check,
    quadratic_threshold,
    resolve,
    sigmoid,
    simulate_coupled,
    simulate_ibp_paths,
    tanh,
)
from eprlab.errors import ConfigurationError, ParameterError, UnsupportedModelError
from eprlab.families import ModulatedField, RotatedGaussian, rotation_generator


def test_gaussian_gradient_matches_finite_differences():
    f = gaussian(0.7)
    z = np.array([[0.3, -1.1], [1.5, 0.2]])
    step = 1e-6
    numeric = np.stack(
        [(f(z + step * e) - f(z - step * e)) / (2.0 * step) for e in np.eye(2)], axis=-1
    )
    np.testing.assert_allclose(f.gradient(z), numeric, atol=1e-8)


def test_registry_functions():
    z = np.array([[0.0, 2.0]])
    assert sigmoid()(z)[0] == pytest.approx(0.5)
    np.testing.assert_allclose(sigmoid().gradient(z), [[0.25, 0.0]])
    assert not tanh().positive
    assert not linear([1.0, 0.0]).bounded
    np.testing.assert_array_equal(constant(2.0)(z), [2.0])
    combined = constant(1.0) + gaussian()
    assert combined(np.zeros((1, 2)))[0] == pytest.approx(2.0)
    assert resolve("sigmoid", index=1).name == "sigmoid(z2)"
    with pytest.raises(ConfigurationError) as excinfo:
        resolve("cosine")
    assert excinfo.value.field == "f"


def test_harnack_exponent_without_drift_constant():
    value = harnack_exponent(2.0, 0.0, 1.0, 1.0, 1.0, 1.0)
    assert value == pytest.approx(4.0 / math.expm1(2.0))
    assert harnack_exponent(2.0, 0.0, 1.0, 1.0, 0.0, 1.0) == 0.0


def test_harnack_argument_checks(rotated_ou, free_bm):
    with pytest.raises(ParameterError):
        harnack_check(rotated_ou, gaussian(), 1.0, (0, 0), (1, 0), 1.0, 10)
    with pytest.raises(ConfigurationError):
        harnack_check(rotated_ou, linear([1.0, 0.0]), 2.0, (0, 0), (1, 0), 1.0, 10)
    with pytest.raises(UnsupportedModelError):
        harnack_check(free_bm, gaussian(), 2.0, (0, 0), (1, 0), 1.0, 10)


def test_harnack_same_start_with_constant_function(rotated_ou):
    report = harnack_check(rotated_ou, constant(), 2.0, (0.0, 0.0), (0.0, 0.0), 1.0, 50, h=0.01, kappa=0.0, K=1.0)
    assert report.lhs == 1.0
    assert report.rhs == 1.0
    assert report.passed


def test_harnack_holds_for_gaussian_function(rotated_ou):
    report = harnack_check(
        rotated_ou, gaussian(), 2.0, (0.0, 0.0), (1.0, 0.0), 1.0, 500, h=0.01, kappa=0.0, K=1.0
    )
    assert report.passed
    assert report.details["exponent"] == pytest.approx(4.0 / math.expm1(2.0))


def test_harnack_same_start_is_jensen_for_non_constant_function(rotated_ou):
    report = harnack_check(
        rotated_ou, gaussian(), 2.0, (0.5, 0.0), (0.5, 0.0), 1.0, 300, h=0.01, kappa=0.0, K=1.0
    )
    assert report.details["exponent"] == 0.0
    assert report.margin >= 0.0
    assert report.lhs < report.rhs
    assert report.passed


def test_gap_bound_endpoints():
    assert float(gap_bound(0.0, 0.3, 1.0, 2.0, 1.5)) == pytest.approx(1.5)
    assert float(gap_bound(2.0, 0.3, 1.0, 2.0, 1.5)) == pytest.approx(0.0, abs=1e-12)
    assert coupling_drift(0.0, 0.0, 1.0, 1.0, 1.0) == pytest.approx(2.0 / math.expm1(2.0))


def test_coupled_pairs_meet_by_the_horizon(rotated_ou):
    pair = simulate_coupled(
        rotated_ou, (0.0, 0.0), (1.0, 0.0), 1.0, h=0.01, seed=3, stream_ids=range(20), kappa=0.0, K=1.0
    )
    assert pair.fraction_coupled == 1.0
    assert np.all(pair.tau <= 1.0 + 1e-12)
    np.testing.assert_array_equal(pair.x, pair.y)


def test_coupled_pairs_from_one_point_start_coupled(rotated_ou):
    pair = simulate_coupled(rotated_ou, (1.0, 1.0), (1.0, 1.0), 0.5, h=0.01, stream_ids=range(4), kappa=0.0, K=1.0)
    assert np.all(pair.tau == 0.0)
    assert pair.fraction_strict == 1.0


def test_coupling_check_report(rotated_ou):
    report = coupling_check(
        rotated_ou, [((0.0, 0.0), (1.0, 0.0), 1.0)], 20, h=0.01, kappa=0.0, K=1.0
    )
    assert report.passed
    row = report.to_dict()["rows"][0]
    assert row["fraction_coupled"] == 1.0
    assert row["worst_gap_excess"] <= 0.1


def test_coupling_needs_additive_noise():
    field = ModulatedField(np.eye(2), 0.2, [1.0, 0.0])
    model = RotatedGaussian(2.0, rotation_generator(1.0, 2), field)
    with pytest.raises(UnsupportedModelError):
        simulate_coupled(model, (0.0, 0.0), (1.0, 0.0), 1.0, kappa=0.0, K=1.0)
    with pytest.raises(UnsupportedModelError):
        simulate_ibp_paths(model, (1.0, 0.0), (0.0, 0.0), 1.0, 10)


def test_bismut_weight_increment():
    value = bismut_weight_increment(np.eye(2), np.array([1.0, 0.0]), 0.0, np.zeros(2), np.array([0.5, 2.0]))
    assert value == pytest.approx(0.5)


def test_ibp_identity_on_free_motion(free_bm):
    report = ibp_check(free_bm, gaussian(), (1.0, 0.0), (0.3, 0.0), 1.0, 20_000, h=0.01, seed=2)
    assert report.passed
    assert report.details["jacobian"] == "analytic"


def test_ibp_identity_on_rotated_ou(rotated_ou):
    report = ibp_check(rotated_ou, tanh(), (1.0, 0.0), (0.5, 0.0), 1.0, 40_000, h=0.01, seed=5)
    assert report.passed, report.to_dict()
    assert report.details["jacobian"] == "analytic"


def test_ibp_with_linear_function_has_exact_left_side(rotated_ou):
    u, v = np.array([0.5, -2.0]), np.array([1.0, 3.0])
    report = ibp_check(rotated_ou, linear(u), v, (0.5, 0.0), 0.5, 2000, h=0.01, seed=6)
    assert report.lhs == pytest.approx(float(u @ v))
    assert report.lhs_se == 0.0


def test_ibp_is_linear_in_the_test_function(rotated_ou):
    paths = simulate_ibp_paths(rotated_ou, (1.0, 0.0), (0.5, 0.0), 0.5, 2000, h=0.01, seed=7)
    first, second = tanh(), gaussian()
    together = ibp_check(rotated_ou, first + second, None, None, None, None, paths=paths)
    apart = [ibp_check(rotated_ou, f, None, None, None, None, paths=paths) for f in (first, second)]
    assert together.lhs == pytest.approx(apart[0].lhs + apart[1].lhs, rel=1e-9)
    assert together.rhs == pytest.approx(apart[0].rhs + apart[1].rhs, rel=1e-9)


def test_ibp_jacobian_option(free_bm):
    with pytest.raises(ConfigurationError) as excinfo:
        simulate_ibp_paths(free_bm, (1.0, 0.0), (0.0, 0.0), 1.0, 10, jacobian="bogus")
    assert excinfo.value.field == "jacobian"
    paths = simulate_ibp_paths(free_bm, (1.0, 0.0), (0.0, 0.0), 0.1, 10, h=0.01, jacobian="central-difference")
    assert paths.jacobian == "central-difference"


def test_gaussian_quadratic_moment_and_threshold():
    covariance = 0.5 * np.eye(2)
    assert gaussian_quadratic_moment(np.eye(2), covariance, 0.25) == pytest.approx(4.0 / 3.0)
    assert gaussian_quadratic_moment(np.eye(2), covariance, 1.0) == math.inf
    assert quadratic_threshold(np.eye(2), covariance) == pytest.approx(1.0)
    assert quadratic_threshold(-np.eye(2), covariance) == math.inf


def test_hill_tail_index_of_pareto_samples():
    samples = np.random.default_rng(9).pareto(3.0, 10_000) + 1.0
    assert 2.0 < hill_tail_index(samples) < 4.5


def test_exp_moment_threshold(rotated_ou):
    with pytest.raises(ParameterError):
        exp_moment_check(rotated_ou, (1.0, 0.0), 1.0, 1.0, 10)
    with pytest.raises(ParameterError):
        exp_moment_check(rotated_ou, (1.0, 0.0), 0.0, 1.0, 10)


def test_exp_moment_check_grid(rotated_ou):
    report = exp_moment_check(rotated_ou, (1.0, 0.0), 0.25, 1.0, 200, h=0.01, seed=1)
    assert report.passed
    assert len(report.details["grid"]) == 6
    assert report.details["stationary_moment"] == pytest.approx(4.0 / 3.0)


def test_psi_exp_moment_against_closed_form(rotated_ou):
    report = psi_exp_moment_check(rotated_ou, 0.02, 20_000, seed=5)
    assert report.rhs == pytest.approx(1.0 / 0.88)
    assert report.details["threshold"] == pytest.approx(1.0 / 6.0)
    assert report.passed
    with pytest.raises(ParameterError):
        psi_exp_moment_check(rotated_ou, 0.2, 100)


def test_psi_exp_moment_needs_a_stationary_density(free_bm):
    with pytest.raises(ConfigurationError) as excinfo:
        psi_exp_moment_check(free_bm, 0.1, 100)
    assert excinfo.value.field == "model.family"
