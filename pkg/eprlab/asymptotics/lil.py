import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats as scipy_stats

from ..errors import DegenerateLimitError, HorizonError


logger = logging.getLogger(__name__)

MIN_TIME = math.e**2
REFERENCE_PATHS = 20_000


def lil_normalizer(t):
    """sqrt(2 t log log t), natural logs, defined for t >= e^2."""
    t = np.asarray(t, dtype=float)
    if np.any(t < MIN_TIME * (1.0 - 1e-12)):
        raise HorizonError(f"the LIL normaliser needs t >= e^2, got min t = {float(np.min(t))}")
    return np.sqrt(2.0 * t * np.log(np.log(t)))


@dataclass(frozen=True)
class LilReport:
    sup: np.ndarray
    inf: np.ndarray
    delta: float
    margin: float
    T: float
    n_checkpoints: int
    times: np.ndarray = None
    scaled: np.ndarray = None

    @property
    def envelope(self):
        root = math.sqrt(self.delta)
        return (1.0 - self.margin) * root, (1.0 + self.margin) * root

    @property
    def fraction_within(self):
        low, high = self.envelope
        return float(np.mean((self.sup >= low) & (self.sup <= high)))

    @property
    def max_sup_ratio(self):
        root = math.sqrt(self.delta)
        peak = float(np.max(self.sup))
        return math.inf if root == 0.0 and peak > 0.0 else (peak / root if root else 0.0)

    def trace_rows(self):
        """(replica, t, S_t / sqrt(2 t log log t), same over sqrt(delta)) per checkpoint."""
        root = math.sqrt(self.delta) if self.delta > 0.0 else math.nan
        rows = []
        for replica, values in enumerate(self.scaled):
            for t, value in zip(self.times.tolist(), values.tolist()):
                rows.append((replica, t, value, value / root))
        return rows

    def to_dict(self):
        low, high = self.envelope
        return {
            "n": int(self.sup.shape[0]),
            "delta": self.delta,
            "margin": self.margin,
            "T": self.T,
            "n_checkpoints": self.n_checkpoints,
            "checkpoints": [] if self.times is None else self.times.tolist(),
            "envelope": [low, high],
            "fraction_within": self.fraction_within,
            "max_sup_over_sqrt_delta": self.max_sup_ratio,
            "sup": self.sup.tolist(),
            "inf": self.inf.tolist(),
        }


def lil_scan(record, delta, margin=0.25):
    """Running sup and inf of S_t / sqrt(2 t log log t) over the checkpoints of each replica."""
    times = np.asarray(record.times, dtype=float)
    values = np.atleast_2d(np.asarray(record.values, dtype=float))
    if times.size == 0 or times[-1] < MIN_TIME:
        raise HorizonError(f"LIL scan needs a horizon of at least e^2, got {times[-1] if times.size else 0.0}")
    keep = times >= MIN_TIME
    if not np.all(keep):
        logger.info("dropping %d checkpoints below e^2", int(np.count_nonzero(~keep)))
    times = times[keep]
    values = values[:, keep]
    if times.shape[0] < 5:
        logger.warning("LIL scan over only %d checkpoints", times.shape[0])

    scaled = values / lil_normalizer(times)
    return LilReport(
        sup=np.max(scaled, axis=1),
        inf=np.min(scaled, axis=1),
        delta=float(delta),
        margin=float(margin),
        T=float(times[-1]),
        n_checkpoints=int(times.shape[0]),
        times=times,
        scaled=scaled,
    )


def brownian_sups(times, n, generator):
    """Running sup of W_t / sqrt(2 t log log t) over ``times`` for n standard Brownian paths."""
    times = np.asarray(times, dtype=float)
    steps = np.sqrt(np.diff(times, prepend=0.0))
    paths = np.cumsum(generator.standard_normal((n, times.shape[0])) * steps, axis=1)
    return np.max(paths / lil_normalizer(times), axis=1)


@dataclass(frozen=True)
class LilCalibration:
    """sup / sqrt(delta) against Brownian motion read on the same checkpoints."""

    ks_statistic: float
    p_value: float
    alpha: float
    tail_fraction: float
    reference_tail_fraction: float
    tail_bound: float
    n_reference: int

    @property
    def passed(self):
        return self.p_value > self.alpha and self.tail_fraction <= self.tail_bound

    def to_dict(self):
        data = asdict(self)
        data["pass"] = self.passed
        return data


def lil_calibration(report, generator, n_reference=REFERENCE_PATHS, alpha=0.01):
    """Two-sample KS of the observed sups against Brownian sups, plus an upper-tail bound.

    At reachable horizons sup_t S_t / sqrt(2 t log log t) has not settled on
    sqrt(delta); the Brownian sups on the identical grid are the law it should
    follow. The tail check allows three binomial standard errors over the
    Brownian fraction above 1 + margin.
    """
    if not report.delta > 0.0:
        raise DegenerateLimitError(f"delta={report.delta}: the LIL envelope is degenerate")
    if report.times is None:
        raise HorizonError("the LIL report carries no checkpoint grid")
    reference = brownian_sups(report.times, n_reference, generator)
    observed = report.sup / math.sqrt(report.delta)
    result = scipy_stats.ks_2samp(observed, reference)
    high = 1.0 + report.margin
    reference_tail = float(np.mean(reference > high))
    n = observed.shape[0]
    return LilCalibration(
        ks_statistic=float(result.statistic),
        p_value=float(result.pvalue),
        alpha=float(alpha),
        tail_fraction=float(np.mean(observed > high)),
        reference_tail_fraction=reference_tail,
        tail_bound=reference_tail + 3.0 * math.sqrt(reference_tail * (1.0 - reference_tail) / n),
        n_reference=int(n_reference),
    )
