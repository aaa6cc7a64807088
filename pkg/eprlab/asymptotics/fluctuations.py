import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats as scipy_stats

from ..errors import DegenerateLimitError, InsufficientSampleError, ParameterError
from .estimators import as_stats


logger = logging.getLogger(__name__)

MIN_CLT_REPLICAS = 200
MIN_HITS = 50


def normalized_fluctuation(S, t, lam=1.0):
    """S_t / (lambda(t) sqrt(t)); lambda = 1 is the CLT scaling."""
    return np.asarray(S, dtype=float) / (lam * math.sqrt(t))


@dataclass(frozen=True)
class CltReport:
    ks_statistic: float
    p_value: float
    n: int
    delta_used: float
    t: float
    alpha: float = 0.01

    @property
    def passed(self):
        return self.p_value > self.alpha

    def to_dict(self):
        data = asdict(self)
        data["pass"] = self.passed
        data["p_value_method"] = "asymptotic Kolmogorov"
        return data


def clt_test(ensemble, delta, min_replicas=MIN_CLT_REPLICAS, alpha=0.01, variant="epr"):
    """One-sample KS of S_t / sqrt(t delta) against N(0, 1)."""
    if not delta > 0.0:
        raise DegenerateLimitError(
            f"delta={delta}: the Gaussian limit is degenerate; check S_t == 0 exactly instead"
        )
    stats = as_stats(ensemble)
    if stats.n < min_replicas:
        raise InsufficientSampleError("CLT test", required=min_replicas, got=stats.n)
    z = normalized_fluctuation(stats.S(variant), stats.t) / math.sqrt(delta)
    result = scipy_stats.kstest(z, "norm", method="asymp")
    return CltReport(
        ks_statistic=float(result.statistic),
        p_value=float(result.pvalue),
        n=stats.n,
        delta_used=float(delta),
        t=stats.t,
        alpha=alpha,
    )


def mdp_rate(u, delta):
    """inf over [u, inf) of x^2 / (2 delta)."""
    return max(u, 0.0) ** 2 / (2.0 * delta)


def gaussian_rate(u, lam, delta):
    """-log P(Z >= u lambda / sqrt(delta)) / lambda^2 for Z ~ N(0, 1).

    The rate an exactly Gaussian S_t with variance t delta shows at finite
    lambda; it tends to mdp_rate as lambda grows.
    """
    return float(-scipy_stats.norm.logsf(u * lam / math.sqrt(delta)) / lam**2)


def _relative_gap(value, target):
    if target == 0.0:
        return abs(value)
    return abs(value - target) / target


@dataclass(frozen=True)
class MdpRow:
    u: float
    t: float
    lambda_t: float
    hits: int
    probability: float
    empirical: float
    theory: float
    gaussian: float

    @property
    def discrepancy(self):
        return _relative_gap(self.empirical, self.theory)

    @property
    def gaussian_discrepancy(self):
        return _relative_gap(self.empirical, self.gaussian)


@dataclass(frozen=True)
class MdpReport:
    lambda_exponent: float
    delta: float
    min_hits: int
    rows: list = field(default_factory=list)

    @property
    def empty(self):
        return not self.rows

    @property
    def times(self):
        return sorted({row.t for row in self.rows})

    def largest_u(self):
        """Per t, the row at the largest u that met the hit threshold."""
        best = {}
        for row in self.rows:
            if row.t not in best or row.u > best[row.t].u:
                best[row.t] = row
        return [best[t] for t in sorted(best)]

    def common_u(self, times=None):
        """Rows at the largest u that met the hit threshold at every t in ``times``."""
        times = self.times if times is None else sorted(times)
        by_u = {}
        for row in self.rows:
            by_u.setdefault(row.u, {})[row.t] = row
        shared = [u for u, rows in by_u.items() if all(t in rows for t in times)]
        if not shared or not times:
            return []
        u = max(shared)
        return [by_u[u][t] for t in times]

    def to_dict(self):
        def row_dict(row):
            return dict(asdict(row), discrepancy=row.discrepancy, gaussian_discrepancy=row.gaussian_discrepancy)

        return {
            "lambda_exponent": self.lambda_exponent,
            "delta": self.delta,
            "min_hits": self.min_hits,
            "empty": self.empty,
            "rows": [row_dict(row) for row in self.rows],
            "largest_u": [row_dict(row) for row in self.largest_u()],
            "common_u": [row_dict(row) for row in self.common_u()],
        }


def mdp_curve(ensembles, lambda_exponent, u_grid, delta, min_hits=MIN_HITS, variant="epr"):
    """-log P(S_t / (lambda(t) sqrt t) >= u) / lambda(t)^2 against u^2 / (2 delta), lambda(t) = t^a."""
    if not 0.0 < lambda_exponent < 0.5:
        raise ParameterError(f"lambda exponent must lie in (0, 1/2), got {lambda_exponent}")
    if not delta > 0.0:
        raise DegenerateLimitError(f"delta={delta}: no moderate deviation rate")

    rows = []
    for ensemble in ensembles:
        stats = as_stats(ensemble)
        lam = stats.t**lambda_exponent
        scaled = normalized_fluctuation(stats.S(variant), stats.t, lam)
        for u in u_grid:
            hits = int(np.count_nonzero(scaled >= u))
            if hits < min_hits:
                continue
            probability = hits / stats.n
            rows.append(
                MdpRow(
                    u=float(u),
                    t=stats.t,
                    lambda_t=lam,
                    hits=hits,
                    probability=probability,
                    empirical=-math.log(probability) / lam**2,
                    theory=mdp_rate(float(u), delta),
                    gaussian=gaussian_rate(float(u), lam, delta),
                )
            )
    if not rows:
        logger.warning("no u in the grid reached %d exceedances; MDP report is empty", min_hits)
    return MdpReport(lambda_exponent=lambda_exponent, delta=float(delta), min_hits=min_hits, rows=rows)
