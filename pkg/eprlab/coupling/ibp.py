from dataclasses import dataclass

import numpy as np

from ..epr.functional import inner
from ..errors import ConfigurationError
from ..families.base import apply, batched_apply, central_jacobian
from ..sde.engine import march
from ..sde.noise import NoiseStream
from ..verification import IDENTITY, VerificationReport, mean_and_se
from .coupled import require_additive


def bismut_weight_increment(sigma_inv, v, t, jacobian_v, dw):
    """<sigma^-1 (v - t grad_v B(x_t)), dw> for one step, row-wise."""
    return inner(apply(sigma_inv, v - t * jacobian_v), dw)


@dataclass
class IbpPaths:
    """Terminal states and Bismut weights of paths from one start, shared across test functions."""

    terminal: np.ndarray
    weight: np.ndarray
    x: np.ndarray
    v: np.ndarray
    T: float
    h: float
    jacobian: str


def simulate_ibp_paths(model, v, x, T, n, h=1e-3, seed=0, jacobian="auto"):
    require_additive(model, "the integration-by-parts check")
    if jacobian not in ("auto", "analytic", "central-difference"):
        raise ConfigurationError("must be auto, analytic or central-difference", field="jacobian")
    if jacobian == "analytic" and model.jacobian_method != "analytic":
        raise ConfigurationError(
            f"{model.family} has no analytic drift Jacobian", field="jacobian"
        )
    v = np.asarray(v, dtype=float)
    x = np.asarray(x, dtype=float)
    sigma_inv = np.linalg.inv(model.diffusion(np.zeros(model.dim)))
    streams = [NoiseStream(seed, i) for i in range(n)]
    weight = np.zeros(n)

    if jacobian == "central-difference":
        method = "central-difference"

        def drift_jacobian(states):
            return central_jacobian(model.drift, states, model.fd_step)

    else:
        method = model.jacobian_method
        drift_jacobian = model.drift_jacobian

    def observe(step, states, dw):
        nonlocal weight
        jacobian_v = batched_apply(drift_jacobian(states), v)
        weight = weight + bismut_weight_increment(sigma_inv, v, step * h, jacobian_v, dw)

    steps = int(round(T / h))
    terminal, _ = march(model, np.tile(x, (n, 1)), steps, h, streams, on_step=observe)
    return IbpPaths(
        terminal=terminal,
        weight=weight / (steps * h),
        x=x,
        v=v,
        T=steps * h,
        h=h,
        jacobian=method,
    )


def ibp_check(model, f, v, x, T, n, h=1e-3, seed=0, paths=None, jacobian="auto"):
    """E[grad_v f(X_T)] against E[f(X_T) W] with the Bismut weight W, on the same paths."""
    if paths is None:
        paths = simulate_ibp_paths(model, v, x, T, n, h, seed, jacobian)
    lhs_samples = inner(f.gradient(paths.terminal), paths.v)
    rhs_samples = f(paths.terminal) * paths.weight
    lhs, lhs_se = mean_and_se(lhs_samples)
    rhs, rhs_se = mean_and_se(rhs_samples)
    _, diff_se = mean_and_se(lhs_samples - rhs_samples)
    return VerificationReport(
        name="ibp",
        mode=IDENTITY,
        lhs=lhs,
        rhs=rhs,
        lhs_se=lhs_se,
        rhs_se=rhs_se,
        diff_se=diff_se,
        n=int(paths.terminal.shape[0]),
        details={
            "f": f.name,
            "v": paths.v.tolist(),
            "x": paths.x.tolist(),
            "T": paths.T,
            "h": paths.h,
            "jacobian": paths.jacobian,
        },
    )
