import math
from dataclasses import dataclass

import numpy as np

from ..epr.ensemble import EnsembleSettings, simulate_ensemble
from ..epr.functional import reference_epr
from ..sde.laws import InitialLaw
from .estimators import EnsembleStats, estimate_delta_ensemble, estimate_epr
from .fluctuations import clt_test


def _z(a, a_se, b, b_se):
    combined = math.sqrt(a_se**2 + b_se**2)
    if combined == 0.0:
        return 0.0 if a == b else math.inf
    return abs(a - b) / combined


@dataclass(frozen=True)
class PointStartReport:
    x0: tuple
    t: float
    n: int
    R_stationary: tuple
    R_point: tuple
    delta_stationary: object
    delta_point: object
    clt_point: object = None

    @property
    def R_z(self):
        return _z(*self.R_stationary, *self.R_point)

    @property
    def delta_z(self):
        return _z(
            self.delta_stationary.delta_hat,
            self.delta_stationary.se,
            self.delta_point.delta_hat,
            self.delta_point.se,
        )

    def agrees(self, max_z=2.0):
        return self.R_z < max_z and self.delta_z < max_z

    def to_dict(self):
        return {
            "x0": list(self.x0),
            "t": self.t,
            "n": self.n,
            "R_stationary": list(self.R_stationary),
            "R_point": list(self.R_point),
            "R_z": self.R_z,
            "delta_stationary": self.delta_stationary.to_dict(),
            "delta_point": self.delta_point.to_dict(),
            "delta_z": self.delta_z,
            "clt_point": None if self.clt_point is None else self.clt_point.to_dict(),
            "agrees": self.agrees(),
        }


def point_start_suite(
    model,
    x0,
    t,
    n,
    h=1e-3,
    seed=0,
    burn_in=0.0,
    R=None,
    delta=None,
    run_ensemble=None,
    min_replicas=30,
):
    """Stationary-start and Dirac-start estimates side by side.

    The Dirac leg starts exactly at ``x0`` with no burn-in and draws from
    stream ids ``n .. 2n-1`` so the two legs are independent.
    ``run_ensemble(model, law, settings, stream_ids)`` defaults to the
    in-process ensemble engine.
    """
    run_ensemble = run_ensemble or simulate_ensemble
    R = reference_epr(model, R)
    x0 = tuple(float(v) for v in x0)

    stationary = run_ensemble(
        model,
        InitialLaw("stationary"),
        EnsembleSettings(h=h, horizons=(t,), burn_in=burn_in, seed=seed),
        np.arange(n),
    )
    point = run_ensemble(
        model,
        InitialLaw("dirac", x0=x0),
        EnsembleSettings(h=h, horizons=(t,), burn_in=0.0, seed=seed),
        np.arange(n, 2 * n),
    )
    stationary_stats = EnsembleStats.from_run(stationary, t, R)
    point_stats = EnsembleStats.from_run(point, t, R)

    clt_point = None
    if delta is not None and delta > 0.0 and n >= 200:
        clt_point = clt_test(point_stats, delta)

    return PointStartReport(
        x0=x0,
        t=point_stats.t,
        n=n,
        R_stationary=estimate_epr(stationary_stats),
        R_point=estimate_epr(point_stats),
        delta_stationary=estimate_delta_ensemble(stationary_stats, min_replicas=min_replicas),
        delta_point=estimate_delta_ensemble(point_stats, min_replicas=min_replicas),
        clt_point=clt_point,
    )
