import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, EmptyPathError, HorizonError, NumericOverflowError


def inner(u, v):
    """<u, v> over the last axis, summed in coordinate order."""
    out = u[..., 0] * v[..., 0]
    for j in range(1, u.shape[-1]):
        out = out + u[..., j] * v[..., j]
    return out


def _kahan(total, compensation, value):
    y = value - compensation
    t = total + y
    return t, (t - total) - y


@dataclass
class EprAccumulator:
    """Running Ito and quadratic sums of psi along a path (or a batch of paths).

    The fields are floats for one path and arrays of shape ``(n,)`` for ``n``
    replicas stepped together.
    """

    ito_sum: object = 0.0
    quad_sum: object = 0.0
    t_accum: object = 0.0
    ito_comp: object = 0.0
    quad_comp: object = 0.0
    t_comp: object = 0.0

    @classmethod
    def zeros(cls, n=None):
        if n is None:
            return cls()
        return cls(*(np.zeros(n) for _ in range(6)))

    def add(self, psi, dw, h):
        psi = np.asarray(psi, dtype=float)
        self.ito_sum, self.ito_comp = _kahan(self.ito_sum, self.ito_comp, inner(psi, np.asarray(dw)))
        self.quad_sum, self.quad_comp = _kahan(self.quad_sum, self.quad_comp, inner(psi, psi) * h)
        self.t_accum, self.t_comp = _kahan(self.t_accum, self.t_comp, h)
        return self

    def merge(self, other):
        """Append a later stretch of the same path."""
        out = self.copy()
        out.ito_sum, out.ito_comp = _kahan(out.ito_sum, out.ito_comp, other.ito_sum)
        out.quad_sum, out.quad_comp = _kahan(out.quad_sum, out.quad_comp, other.quad_sum)
        out.t_accum, out.t_comp = _kahan(out.t_accum, out.t_comp, other.t_accum)
        return out

    def copy(self):
        return EprAccumulator(*(np.copy(v) if isinstance(v, np.ndarray) else v for v in (
            self.ito_sum, self.quad_sum, self.t_accum, self.ito_comp, self.quad_comp, self.t_comp
        )))


def accumulate(acc, model, x, inc):
    psi = model.psi(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(psi)):
        raise NumericOverflowError(f"psi is not finite at x={np.asarray(x).tolist()}")
    return acc.copy().add(psi, inc.dw, inc.h)


@dataclass(frozen=True)
class FunctionalSample:
    t: object
    R_t: object
    S_t: object
    S_t_sec3: object
    log_M_t: object

    def rows(self, replicas=None):
        """(replica, t, R_t, S_t, S_t_sec3, log_M_t) tuples in replica order."""
        columns = [np.atleast_1d(np.asarray(v, dtype=float)) for v in
                   (self.R_t, self.S_t, self.S_t_sec3, self.log_M_t)]
        n = columns[0].shape[0]
        t = np.broadcast_to(np.asarray(self.t, dtype=float), (n,))
        replicas = range(n) if replicas is None else replicas
        for i, replica in enumerate(replicas):
            yield (int(replica), float(t[i])) + tuple(float(c[i]) for c in columns)


def sample_from_sums(ito_sum, quad_sum, t, R):
    """t R_t = ito + quad/2, centred against mu|psi|^2 = 2R."""
    if np.any(np.asarray(t) <= 0.0):
        raise EmptyPathError("no time accumulated; finalize needs t > 0")
    mu_psi_sq = 2.0 * R
    total = ito_sum + 0.5 * quad_sum
    centred = quad_sum - t * mu_psi_sq
    R_t = total / t
    if not np.all(np.isfinite(R_t)):
        raise NumericOverflowError("sample EPR is not finite")
    return FunctionalSample(
        t=t,
        R_t=R_t,
        S_t=ito_sum + 0.5 * centred,
        S_t_sec3=ito_sum + centred,
        log_M_t=-total,
    )


def reference_epr(model=None, R=None):
    if R is not None:
        return float(R)
    if model is None:
        raise ConfigurationError("no EPR reference supplied", field="epr_reference")
    forms = model.closed_forms()
    if not forms.available:
        raise ConfigurationError(
            f"{forms.reason}; supply a numeric or stationary-mc reference", field="epr_reference"
        )
    return forms.R_exact


def finalize(acc, model=None, R=None):
    if np.any(np.asarray(acc.t_accum) <= 0.0):
        raise EmptyPathError("no time accumulated; finalize needs t > 0")
    return sample_from_sums(acc.ito_sum, acc.quad_sum, acc.t_accum, reference_epr(model, R))


def geometric_grid(theta, t_max, h, t_min=math.e**2):
    """Checkpoints t_n = exp(n^theta) in [t_min, t_max], snapped to the step grid."""
    if not 0.0 < theta < 1.0:
        raise ConfigurationError("must lie in (0, 1)", field="lil.theta")
    times = []
    n = 1
    while True:
        t = math.exp(n**theta)
        if t > t_max:
            break
        if t >= t_min:
            snapped = round(t / h) * h
            if not times or snapped > times[-1]:
                times.append(snapped)
        n += 1
    return np.array(times)


@dataclass(frozen=True)
class TrajectoryRecord:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or np.any(np.diff(times) <= 0.0):
            raise HorizonError("checkpoint times must be strictly increasing")
        if np.shape(self.values)[-1] != times.shape[0]:
            raise HorizonError("one value per checkpoint expected")

    def pairs(self):
        return list(zip(self.times.tolist(), np.asarray(self.values).tolist()))


@dataclass
class EprObserver:
    """Path observer feeding the accumulator and snapshotting sums at checkpoint steps."""

    model: object
    checkpoints: tuple = ()
    h: float = None
    acc: EprAccumulator = field(default_factory=EprAccumulator)
    _snapshots: list = field(default_factory=list)
    _steps: int = 0

    def __post_init__(self):
        if self.checkpoints and self.h is None:
            raise ConfigurationError("checkpoint recording needs the step size", field="h")
        self._targets = {int(round(t / self.h)) for t in self.checkpoints} if self.checkpoints else set()

    def __call__(self, t, x, inc):
        psi = self.model.psi(x)
        if not np.all(np.isfinite(psi)):
            raise NumericOverflowError(f"psi is not finite at t={t}", step=self._steps, state=x)
        self.acc.add(psi, inc.dw, inc.h)
        self._steps += 1
        if self._steps in self._targets:
            self._snapshots.append((self._steps * inc.h, self.acc.ito_sum, self.acc.quad_sum))

    def sample(self, R=None):
        return finalize(self.acc, self.model, R)

    def trajectory(self, R=None):
        R = reference_epr(self.model, R)
        times = np.array([s[0] for s in self._snapshots])
        values = np.array([sample_from_sums(s[1], s[2], s[0], R).S_t for s in self._snapshots])
        return TrajectoryRecord(times, values)
