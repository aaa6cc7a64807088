import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, NumericOverflowError
from ..families.base import as_state
from .noise import DEFAULT_NOISE_BLOCK, WienerIncrement


logger = logging.getLogger(__name__)


def euler_update(model, x, dw, h):
    """x + B(x) h + sigma(x) dw, left-point evaluation, vectorised over rows."""
    return x + model.drift(x) * h + model.noise(x, dw)


def march(model, x, steps, h, streams, on_step=None, noise_block=DEFAULT_NOISE_BLOCK):
    """Step a batch of replicas together; row ``i`` is driven by ``streams[i]``.

    ``on_step(step, x, dw)`` runs before each update with the left-endpoint
    states. Returns the final states and the running max of |x| per row.
    """
    x = np.array(x, dtype=float)
    n, dim = x.shape
    block_len = int(noise_block)
    noise = np.empty((block_len, n, dim))
    max_norm = np.linalg.norm(x, axis=1)
    step = 0
    for block in range(math.ceil(steps / block_len)):
        for i, stream in enumerate(streams):
            noise[:, i, :] = stream.increments(block_len, dim, h, block=block)
        for k in range(min(block_len, steps - step)):
            dw = noise[k]
            if on_step is not None:
                on_step(step, x, dw)
            x_next = euler_update(model, x, dw, h)
            bad = ~np.all(np.isfinite(x_next), axis=1)
            if np.any(bad):
                replica = int(np.flatnonzero(bad)[0])
                raise NumericOverflowError(
                    f"replica {streams[replica].stream_id} left the finite range",
                    step=step,
                    state=x[replica].copy(),
                )
            x = x_next
            max_norm = np.maximum(max_norm, np.sqrt(np.sum(x * x, axis=1)))
            step += 1
    return x, max_norm


def em_step(x, model, inc, step=None):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (model.dim,) or np.shape(inc.dw)[-1:] != (model.dim,):
        raise ConfigurationError(
            f"state {x.shape} and increment {np.shape(inc.dw)} do not match dimension {model.dim}",
            field="state",
        )
    out = euler_update(model, x, inc.dw, inc.h)
    if not np.all(np.isfinite(out)):
        raise NumericOverflowError("Euler-Maruyama step left the finite range", step=step, state=x)
    return out


def reversed_drift(model, x):
    """Drift of the time-reversed diffusion: sigma sigma^T grad log rho + div(sigma sigma^T) - B.

    The divergence term vanishes for constant sigma.
    """
    x = as_state(x, model.dim)
    grad = model.grad_log_rho(x)
    return (
        np.einsum("...ij,...j->...i", model.covariance(x), grad)
        + model.diffusion_divergence(x)
        - model.drift(x)
    )


@dataclass(frozen=True)
class PathSummary:
    final_state: np.ndarray
    steps: int
    burn_in_steps: int
    realized_horizon: float
    max_norm: float

    def to_dict(self):
        return {
            "final_state": self.final_state.tolist(),
            "steps": self.steps,
            "burn_in_steps": self.burn_in_steps,
            "realized_horizon": self.realized_horizon,
            "max_norm": self.max_norm,
        }


def simulate_path(model, init, cfg, observer=None):
    """Advance one path over burn-in plus round(t_end / h) observed steps.

    ``observer(t, x, inc)`` sees the left endpoint of every observed step, with
    ``t`` measured from the end of burn-in.
    """
    cfg.validate()
    x = np.array(as_state(init, model.dim, field="init"), dtype=float)
    if x.ndim != 1:
        raise ConfigurationError("a single path needs a 1-D initial state", field="init")

    stream = cfg.stream
    burn = cfg.burn_in_steps
    total = burn + cfg.steps
    block_len = int(cfg.noise_block)
    max_norm = float(np.linalg.norm(x))
    step = 0
    for block in range(math.ceil(total / block_len)):
        noise = stream.increments(block_len, model.dim, cfg.h, block=block)
        for k in range(min(block_len, total - step)):
            inc = WienerIncrement(noise[k], cfg.h)
            if observer is not None and step >= burn:
                observer((step - burn) * cfg.h, x, inc)
            x = em_step(x, model, inc, step=step)
            max_norm = max(max_norm, float(np.linalg.norm(x)))
            step += 1

    logger.debug("path %s/%s done after %d steps", cfg.seed, cfg.stream_id, step)
    return PathSummary(
        final_state=x,
        steps=cfg.steps,
        burn_in_steps=burn,
        realized_horizon=cfg.steps * cfg.h,
        max_norm=max_norm,
    )
