import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import UnsupportedModelError
from ..sde.dissipativity import check_dissipativity
from ..sde.engine import euler_update
from ..sde.noise import DEFAULT_NOISE_BLOCK, NoiseStream


logger = logging.getLogger(__name__)

COUPLING_EPS = 1e-8
HORIZON_ALLOWANCE = 10.0
DISSIPATIVITY_STREAM = 2**63


def coupling_drift(t, kappa, K, T, gap0):
    """xi_t = kappa e^{-K(T-t)} + 2K e^{Kt} |x-y| / (e^{2KT} - 1)."""
    return kappa * math.exp(-K * (T - t)) + 2.0 * K * math.exp(K * t) * gap0 / math.expm1(2.0 * K * T)


def gap_bound(t, kappa, K, T, gap0):
    """Deterministic upper bound on |X_t - Y_t| before coupling."""
    t = np.asarray(t, dtype=float)
    ekt = np.exp(K * t)
    drift_part = kappa * np.exp(-K * t) / K * (ekt - 1.0 - (ekt**2 - 1.0) / (math.exp(K * T) + 1.0))
    start_part = gap0 * np.exp(-K * t) * (1.0 - (ekt**2 - 1.0) / math.expm1(2.0 * K * T))
    return drift_part + start_part


def dissipativity_constants(model, kappa=None, K=None, seed=0, radius=4.0):
    """(kappa, K) as given, or fitted on a ball when either is missing."""
    if kappa is None or K is None:
        report = check_dissipativity(model, 512, radius, NoiseStream(seed, DISSIPATIVITY_STREAM))
        kappa = report.kappa if kappa is None else kappa
        K = report.K if K is None else K
    if not K > 0.0:
        raise UnsupportedModelError(f"coupling needs K > 0, got K={K}")
    return float(max(kappa, 0.0)), float(K)


def require_additive(model, what):
    if not model.additive:
        raise UnsupportedModelError(f"{what} needs a constant diffusion matrix")


@dataclass
class CoupledPair:
    """Final states of n coupled copies started at (x, y) and run to T."""

    x: np.ndarray
    y: np.ndarray
    coupled: np.ndarray
    tau: np.ndarray
    snapped_at_horizon: np.ndarray
    max_excess: np.ndarray
    T: float
    h: float
    kappa: float
    K: float
    details: dict = field(default_factory=dict)

    @property
    def n(self):
        return int(self.coupled.shape[0])

    @property
    def fraction_coupled(self):
        return float(np.mean(self.coupled))

    @property
    def fraction_strict(self):
        return float(np.mean(self.coupled & ~self.snapped_at_horizon))


def simulate_coupled(
    model,
    x,
    y,
    T,
    h=1e-3,
    seed=0,
    stream_ids=(0,),
    kappa=None,
    K=None,
    eps=COUPLING_EPS,
    allowance=HORIZON_ALLOWANCE,
    noise_block=DEFAULT_NOISE_BLOCK,
):
    """Run X from x and the xi-steered Y from y on shared increments.

    Y is declared coupled when the steering step would carry it past X or the
    gap drops below ``eps``; from then on Y := X. A pair still apart at T by
    no more than ``allowance * h`` is counted as coupled at T and flagged in
    ``snapped_at_horizon``.
    """
    require_additive(model, "coupling")
    kappa, K = dissipativity_constants(model, kappa, K, seed)
    x0 = np.asarray(x, dtype=float)
    y0 = np.asarray(y, dtype=float)
    gap0 = float(np.linalg.norm(x0 - y0))
    streams = [NoiseStream(seed, int(s)) for s in stream_ids]
    n = len(streams)
    steps = int(round(T / h))

    X = np.tile(x0, (n, 1))
    Y = np.tile(y0, (n, 1))
    coupled = np.full(n, gap0 < eps)
    tau = np.where(coupled, 0.0, math.inf)
    snapped = np.zeros(n, dtype=bool)
    max_excess = np.full(n, -math.inf)
    Y[coupled] = X[coupled]

    block_len = int(noise_block)
    noise = np.empty((block_len, n, model.dim))
    step = 0
    for block in range(math.ceil(steps / block_len)):
        for i, stream in enumerate(streams):
            noise[:, i, :] = stream.increments(block_len, model.dim, h, block=block)
        for k in range(min(block_len, steps - step)):
            dw = noise[k]
            t = step * h
            gap = X - Y
            r = np.sqrt(np.sum(gap * gap, axis=1))
            xi = coupling_drift(t, kappa, K, T, gap0)
            unit = np.zeros_like(gap)
            apart = r >= eps
            unit[apart] = gap[apart] / r[apart, None]

            # Gap after the shared drift step but before steering.
            unsteered = gap + (model.drift(X) - model.drift(Y)) * h
            overshoot = np.sqrt(np.sum(unsteered * unsteered, axis=1)) <= xi * h

            X_next = euler_update(model, X, dw, h)
            Y_next = euler_update(model, Y, dw, h) + xi * h * unit
            step += 1
            new_gap = np.sqrt(np.sum((X_next - Y_next) ** 2, axis=1))
            newly = ~coupled & (overshoot | (new_gap < eps))
            tau[newly] = step * h
            coupled |= newly
            Y_next[coupled] = X_next[coupled]
            X, Y = X_next, Y_next

            gap_now = np.where(coupled, 0.0, new_gap)
            max_excess = np.maximum(max_excess, gap_now - gap_bound(step * h, kappa, K, T, gap0))

    final_gap = np.sqrt(np.sum((X - Y) ** 2, axis=1))
    late = ~coupled & (final_gap <= allowance * h)
    snapped[late] = True
    tau[late] = steps * h
    coupled |= late
    Y[late] = X[late]
    if np.any(~coupled):
        logger.warning("%d of %d pairs still apart at T=%s", int(np.count_nonzero(~coupled)), n, T)

    return CoupledPair(
        x=X,
        y=Y,
        coupled=coupled,
        tau=tau,
        snapped_at_horizon=snapped,
        max_excess=max_excess,
        T=steps * h,
        h=h,
        kappa=kappa,
        K=K,
        details={"x": x0.tolist(), "y": y0.tolist(), "eps": eps, "allowance_steps": allowance},
    )


@dataclass
class CouplingReport:
    rows: list
    min_fraction: float = 0.999
    allowance: float = HORIZON_ALLOWANCE

    @property
    def passed(self):
        return all(row["pass"] for row in self.rows)

    def to_dict(self):
        return {
            "name": "coupling",
            "pass": self.passed,
            "min_fraction": self.min_fraction,
            "allowance_steps": self.allowance,
            "rows": self.rows,
        }


def coupling_check(
    model, grid, n, h=1e-3, seed=0, kappa=None, K=None, min_fraction=0.999, eps=COUPLING_EPS
):
    """simulate_coupled over a grid of (x, y, T) with the pathwise gap bound checked."""
    kappa, K = dissipativity_constants(model, kappa, K, seed)
    rows = []
    for x, y, T in grid:
        pair = simulate_coupled(
            model, x, y, T, h=h, seed=seed, stream_ids=range(n), kappa=kappa, K=K, eps=eps
        )
        worst = float(np.max(pair.max_excess)) if np.isfinite(pair.max_excess).any() else 0.0
        rows.append(
            {
                "x": list(map(float, x)),
                "y": list(map(float, y)),
                "T": float(T),
                "n": n,
                "fraction_coupled": pair.fraction_coupled,
                "fraction_strict": pair.fraction_strict,
                "max_tau": float(np.max(pair.tau)),
                "worst_gap_excess": worst,
                "kappa": kappa,
                "K": K,
                "pass": bool(
                    pair.fraction_coupled >= min_fraction and worst <= HORIZON_ALLOWANCE * h
                ),
            }
        )
    return CouplingReport(rows=rows, min_fraction=min_fraction)
