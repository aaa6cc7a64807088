import logging
import math

import numpy as np

from ..errors import ConfigurationError, ParameterError
from ..sde.engine import march
from ..sde.noise import LANE_AUXILIARY, NoiseStream
from ..verification import IDENTITY, INEQUALITY, VerificationReport, mean_and_se


logger = logging.getLogger(__name__)

STABILITY_RATIO = 10.0
MOMENT_STREAM = 2**62


def gaussian_quadratic_moment(Q, covariance, epsilon):
    """E exp(eps x^T Q x) for x ~ N(0, covariance); inf past the divergence threshold."""
    root = np.linalg.cholesky(covariance)
    inner_matrix = np.eye(covariance.shape[0]) - 2.0 * epsilon * (root.T @ Q @ root)
    eigenvalues = np.linalg.eigvalsh(0.5 * (inner_matrix + inner_matrix.T))
    if eigenvalues[0] <= 0.0:
        return math.inf
    return float(np.prod(eigenvalues) ** -0.5)


def quadratic_threshold(Q, covariance):
    """Largest eps with E exp(eps x^T Q x) finite under N(0, covariance)."""
    root = np.linalg.cholesky(covariance)
    top = float(np.linalg.eigvalsh(root.T @ Q @ root)[-1])
    return math.inf if top <= 0.0 else 0.5 / top


def hill_tail_index(values, k=None):
    """Hill estimate of the Pareto tail index of positive samples."""
    values = np.sort(np.asarray(values, dtype=float))[::-1]
    k = k or max(10, int(math.sqrt(values.shape[0])))
    k = min(k, values.shape[0] - 1)
    top = values[:k]
    floor = values[k]
    if floor <= 0.0:
        return math.inf
    logs = np.log(top / floor)
    mean_log = float(np.mean(logs))
    return math.inf if mean_log == 0.0 else 1.0 / mean_log


def exp_moment_check(model, x, epsilon, t, n, h=1e-3, seed=0, starts=None, times=None):
    """E int_0^t exp(eps |X_s^x|^2) ds against c (t + exp(eps |x|^2)).

    c is fitted as the largest ratio over a grid of starts and horizons; the
    check passes when every estimate is finite and the fitted ratios stay
    within a factor of ten of each other.
    """
    x = np.asarray(x, dtype=float)
    covariance = model.stationary_covariance
    threshold = None
    if covariance is not None:
        threshold = quadratic_threshold(np.eye(model.dim), covariance)
        if epsilon >= threshold:
            raise ParameterError(
                f"epsilon={epsilon} is at or above {threshold:g}: E exp(eps |X|^2) diverges "
                "under the stationary Gaussian law"
            )
    if not epsilon > 0.0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")

    starts = [np.zeros(model.dim)] if starts is None else [np.asarray(s, dtype=float) for s in starts]
    starts = [x, *starts]
    times = (t / 4.0, t / 2.0, t) if times is None else times
    record = sorted({max(1, int(round(s / h))) for s in times})
    total_steps = record[-1]
    streams = [NoiseStream(seed, i) for i in range(n)]

    rows = []
    seen = set()
    for start in starts:
        key = tuple(start.tolist())
        if key in seen:
            continue
        seen.add(key)
        integral = np.zeros(n)
        snapshots = {}

        def observe(step, states, dw):
            nonlocal integral
            integral = integral + np.exp(epsilon * np.sum(states * states, axis=1)) * h
            if step + 1 in record:
                snapshots[step + 1] = integral.copy()

        march(model, np.tile(start, (n, 1)), total_steps, h, streams, on_step=observe)
        scale = math.exp(epsilon * float(start @ start))
        for steps in record:
            mean, se = mean_and_se(snapshots[steps])
            rows.append(
                {
                    "x": list(key),
                    "t": steps * h,
                    "estimate": mean,
                    "se": se,
                    "c_fit": mean / (steps * h + scale),
                }
            )

    fits = np.array([row["c_fit"] for row in rows])
    finite = bool(np.all(np.isfinite([row["estimate"] for row in rows])))
    c = float(np.max(fits))
    stable = bool(finite and np.min(fits) > 0.0 and c / np.min(fits) < STABILITY_RATIO)
    primary = next(row for row in rows if row["x"] == x.tolist() and row["t"] == total_steps * h)

    details = {"epsilon": epsilon, "c": c, "grid": rows, "threshold": threshold}
    if covariance is not None:
        details["stationary_moment"] = gaussian_quadratic_moment(np.eye(model.dim), covariance, epsilon)
    return VerificationReport(
        name="exp-moment",
        mode=INEQUALITY,
        lhs=primary["estimate"],
        rhs=c * (primary["t"] + math.exp(epsilon * float(x @ x))),
        lhs_se=primary["se"],
        rhs_se=0.0,
        n=n,
        details=details,
        conditions={"finite": finite, "stable": stable},
    )


def _linear_parts(model):
    if model.family == "linear-ou":
        return model
    if model.family == "rotated-gaussian" and model.additive:
        return model.as_linear()
    return None


def psi_exp_moment_check(model, epsilon, n, seed=0):
    """Stationary mu(exp[eps(|B|^2 + |grad log rho|^2)]) by exact sampling.

    Gaussian-linear models also get the closed form and are compared against it.
    """
    if not model.has_stationary:
        raise ConfigurationError(
            f"{model.family} has no normalisable stationary density", field="model.family"
        )
    linear = _linear_parts(model)
    closed = None
    threshold = None
    if linear is not None:
        Q = linear.M.T @ linear.M + linear.Sigma_inv.T @ linear.Sigma_inv
        threshold = quadratic_threshold(Q, linear.Sigma)
        if epsilon >= threshold:
            raise ParameterError(
                f"epsilon={epsilon} is at or above the Gaussian threshold {threshold:g}"
            )
        closed = gaussian_quadratic_moment(Q, linear.Sigma, epsilon)

    generator = NoiseStream(seed, MOMENT_STREAM).generator(0, LANE_AUXILIARY)
    samples = model.sample_stationary(generator, n)
    drift = model.drift(samples)
    grad = model.grad_log_rho(samples)
    values = np.exp(epsilon * (np.sum(drift * drift, axis=1) + np.sum(grad * grad, axis=1)))
    mean, se = mean_and_se(values)
    tail = hill_tail_index(values)
    if tail < 2.0:
        logger.warning("tail index %.3g < 2: the standard error is unreliable", tail)

    finite = bool(math.isfinite(mean))
    details = {"epsilon": epsilon, "tail_index": tail, "threshold": threshold}
    if closed is None:
        return VerificationReport(
            name="psi-exp-moment",
            mode=INEQUALITY,
            lhs=mean,
            rhs=math.inf,
            lhs_se=se,
            rhs_se=0.0,
            n=n,
            details=details,
            conditions={"finite": finite},
        )
    return VerificationReport(
        name="psi-exp-moment",
        mode=IDENTITY,
        lhs=mean,
        rhs=closed,
        lhs_se=se,
        rhs_se=0.0,
        n=n,
        details=details,
        conditions={"finite": finite},
    )
