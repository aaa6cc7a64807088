import math

import numpy as np

from ..errors import InsufficientSampleError
from ..sde.laws import InitialLaw
from ..verification import IDENTITY, VerificationReport, mean_and_se
from .ensemble import EnsembleSettings, simulate_ensemble


MIN_REPLICAS = 100


def effective_sample_size(weights):
    weights = np.asarray(weights, dtype=float)
    total = float(np.sum(weights * weights))
    if total == 0.0:
        return 0.0
    return float(np.sum(weights)) ** 2 / total


def martingale_mean(model, t, n, h=1e-3, seed=0, law=None, burn_in=0.0, run=None):
    """E exp(log M_t) against 1 over n stationary-start replicas.

    ``run`` lets callers supply an already simulated ensemble (for example one
    spread across workers); it must record the horizon ``t``.
    """
    count = n if run is None else run.n
    if count < MIN_REPLICAS:
        raise InsufficientSampleError("martingale check", required=MIN_REPLICAS, got=count)
    if t == 0:
        return VerificationReport(
            name="martingale", mode=IDENTITY, lhs=1.0, rhs=1.0, lhs_se=0.0, rhs_se=0.0, n=count,
            details={"t": 0.0, "ess": float(count)},
        )

    if run is None:
        law = law or InitialLaw("stationary")
        settings = EnsembleSettings(h=h, horizons=(t,), burn_in=burn_in, seed=seed)
        run = simulate_ensemble(model, law, settings, np.arange(n))
    row, step = run.row(t)
    log_m = -(run.ito[row] + 0.5 * run.quad[row])
    weights = np.exp(log_m)
    mean, se = mean_and_se(weights)
    return VerificationReport(
        name="martingale",
        mode=IDENTITY,
        lhs=mean,
        rhs=1.0,
        lhs_se=se,
        rhs_se=0.0,
        n=run.n,
        details={
            "t": step * run.h,
            "h": run.h,
            "ess": effective_sample_size(weights),
            "max_log_weight": float(np.max(log_m)),
            "finite": bool(math.isfinite(mean)),
        },
    )
