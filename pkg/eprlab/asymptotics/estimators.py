import math
from dataclasses import asdict, dataclass

import numpy as np

from ..epr.functional import FunctionalSample, TrajectoryRecord
from ..errors import InputError, InsufficientSampleError


MIN_DELTA_REPLICAS = 30
MIN_BATCHES = 30


@dataclass(frozen=True)
class EnsembleStats:
    """Horizon-t samples of every replica, in replica order."""

    t: float
    sample: FunctionalSample
    stream_ids: np.ndarray
    seed: int = 0

    def __post_init__(self):
        ids = np.asarray(self.stream_ids)
        if np.unique(ids).shape[0] != ids.shape[0]:
            raise InputError("replica stream ids must be pairwise distinct")
        if np.atleast_1d(self.sample.S_t).shape[0] != ids.shape[0]:
            raise InputError("one sample per replica expected")

    @property
    def n(self):
        return int(np.asarray(self.stream_ids).shape[0])

    @property
    def R_t(self):
        return np.atleast_1d(np.asarray(self.sample.R_t, dtype=float))

    def S(self, variant="epr"):
        values = self.sample.S_t if variant == "epr" else self.sample.S_t_sec3
        return np.atleast_1d(np.asarray(values, dtype=float))

    @classmethod
    def from_run(cls, run, t, R):
        sample = run.sample(t, R)
        return cls(t=float(sample.t), sample=sample, stream_ids=run.stream_ids, seed=run.seed)

    @classmethod
    def from_samples(cls, samples, seed=0):
        """Stack scalar FunctionalSample objects; they must share t."""
        samples = list(samples)
        if not samples:
            raise InputError("no samples")
        times = {float(s.t) for s in samples}
        if len(times) != 1:
            raise InputError(f"samples disagree on t: {sorted(times)}")

        def column(name):
            return np.array([float(getattr(s, name)) for s in samples])

        stacked = FunctionalSample(
            t=times.pop(),
            R_t=column("R_t"),
            S_t=column("S_t"),
            S_t_sec3=column("S_t_sec3"),
            log_M_t=column("log_M_t"),
        )
        return cls(t=stacked.t, sample=stacked, stream_ids=np.arange(len(samples)), seed=seed)


def as_stats(ensemble):
    if isinstance(ensemble, EnsembleStats):
        return ensemble
    return EnsembleStats.from_samples(ensemble)


@dataclass(frozen=True)
class DeltaEstimate:
    delta_hat: float
    se: float
    method: str
    n: int
    t: float = None
    batch_len: float = None
    n_batches: int = None
    variant: str = "epr"
    divisor: str = "n-1"

    def to_dict(self):
        return asdict(self)


def estimate_epr(ensemble):
    stats = as_stats(ensemble)
    if stats.n < 2:
        raise InsufficientSampleError("EPR estimate", required=2, got=stats.n)
    values = stats.R_t
    return float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(values.shape[0]))


def variance_with_se(values):
    """Unbiased variance and its delta-method standard error from the fourth central moment."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    centred = values - np.mean(values)
    variance = float(np.sum(centred * centred) / (n - 1))
    m4 = float(np.mean(centred**4))
    spread = max(m4 - (n - 3) / (n - 1) * variance**2, 0.0)
    return variance, math.sqrt(spread / n)


def estimate_delta_ensemble(ensemble, min_replicas=MIN_DELTA_REPLICAS, variant="epr"):
    """delta_hat = Var(S_t) / t across replicas."""
    stats = as_stats(ensemble)
    if stats.n < max(min_replicas, 2):
        raise InsufficientSampleError("ensemble delta estimate", required=max(min_replicas, 2), got=stats.n)
    variance, se = variance_with_se(stats.S(variant))
    return DeltaEstimate(
        delta_hat=variance / stats.t,
        se=se / stats.t,
        method="ensemble",
        n=stats.n,
        t=stats.t,
        variant=variant,
    )


def estimate_delta_batch_means(record, batch_len, dt=1.0, min_batches=MIN_BATCHES):
    """Long-run variance of a single path from non-overlapping batches.

    ``record`` is either a TrajectoryRecord of S_t on a uniform grid starting
    at its first spacing, or a 1-D array of increments over steps of ``dt``.
    """
    if isinstance(record, TrajectoryRecord):
        times = np.asarray(record.times, dtype=float)
        values = np.asarray(record.values, dtype=float)
        if values.ndim != 1:
            raise InputError("batch means runs on a single path")
        dt = float(times[0])
        if not np.allclose(np.diff(times), dt, rtol=1e-9, atol=0.0):
            raise InputError("batch means needs a uniform grid")
        path = np.concatenate([[0.0], values])
    else:
        increments = np.asarray(record, dtype=float)
        if increments.ndim != 1:
            raise InputError("expected a 1-D array of increments")
        path = np.concatenate([[0.0], np.cumsum(increments)])

    per_batch = int(round(batch_len / dt))
    if per_batch < 1:
        raise InputError(f"batch_len {batch_len} is shorter than the grid spacing {dt}")
    n_batches = (path.shape[0] - 1) // per_batch
    if n_batches < min_batches:
        raise InsufficientSampleError("batch means", required=min_batches, got=n_batches)

    edges = path[:: per_batch][: n_batches + 1]
    batch_sums = np.diff(edges)
    length = per_batch * dt
    variance, se = variance_with_se(batch_sums / length)
    return DeltaEstimate(
        delta_hat=length * variance,
        se=length * se,
        method="batch-means",
        n=n_batches,
        batch_len=length,
        n_batches=n_batches,
    )
