import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ConfigurationError, HorizonError
from ..sde.engine import march
from ..sde.noise import DEFAULT_NOISE_BLOCK, NoiseStream
from .functional import EprAccumulator, TrajectoryRecord, sample_from_sums


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnsembleSettings:
    h: float
    horizons: tuple
    burn_in: float = 0.0
    seed: int = 0
    noise_block: int = DEFAULT_NOISE_BLOCK
    checkpoints: tuple = ()
    uniform_dt: float = None

    def validate(self):
        if not (self.h > 0.0 and math.isfinite(self.h)):
            raise ConfigurationError("must be > 0", field="h")
        if not self.horizons:
            raise ConfigurationError("at least one horizon is required", field="horizons")
        for t in self.horizons:
            if not t >= self.h:
                raise ConfigurationError(f"horizon {t} is shorter than one step", field="horizons")
        if not self.burn_in >= 0.0:
            raise ConfigurationError("must be >= 0", field="burn_in")
        if self.uniform_dt is not None and not self.uniform_dt >= self.h:
            raise ConfigurationError("must be >= h", field="uniform_dt")
        return self

    def steps_for(self, t):
        return int(round(t / self.h))

    @property
    def horizon_steps(self):
        return np.unique([self.steps_for(t) for t in self.horizons])

    @property
    def checkpoint_steps(self):
        last = int(self.horizon_steps[-1])
        steps = [self.steps_for(t) for t in self.checkpoints]
        return np.unique([s for s in steps if 1 <= s <= last]).astype(int)

    @property
    def uniform_steps(self):
        if self.uniform_dt is None:
            return np.zeros(0, dtype=int)
        stride = self.steps_for(self.uniform_dt)
        return np.arange(stride, int(self.horizon_steps[-1]) + 1, stride)

    def to_dict(self):
        data = asdict(self)
        data["horizons"] = [float(t) for t in self.horizons]
        data["checkpoints"] = [float(t) for t in self.checkpoints]
        return data


@dataclass
class EnsembleRun:
    """Raw EPR sums of a batch of replicas, snapshotted at the recorded steps.

    ``ito`` and ``quad`` have shape ``(len(record_steps), n)``; rows follow
    ``record_steps`` and columns follow ``stream_ids``.
    """

    h: float
    seed: int
    stream_ids: np.ndarray
    record_steps: np.ndarray
    ito: np.ndarray
    quad: np.ndarray
    final_state: np.ndarray
    max_norm: np.ndarray
    horizon_steps: np.ndarray
    checkpoint_steps: np.ndarray
    uniform_steps: np.ndarray
    burn_in_steps: int = 0

    @property
    def n(self):
        return int(self.stream_ids.shape[0])

    @property
    def horizons(self):
        return self.horizon_steps * self.h

    def _rows(self, steps):
        index = np.searchsorted(self.record_steps, steps)
        if np.any(index >= self.record_steps.shape[0]) or np.any(self.record_steps[index] != steps):
            raise HorizonError(f"steps {np.asarray(steps).tolist()} were not recorded")
        return index

    def row(self, t):
        """Record row and step index of horizon ``t``; HorizonError when it was not recorded."""
        step = int(round(t / self.h))
        return int(self._rows(np.array([step]))[0]), step

    def sample(self, t, R):
        row, step = self.row(t)
        return sample_from_sums(self.ito[row], self.quad[row], step * self.h, R)

    def trajectory(self, R, grid="checkpoints"):
        steps = self.checkpoint_steps if grid == "checkpoints" else self.uniform_steps
        if steps.size == 0:
            raise HorizonError(f"no {grid} were recorded")
        rows = self._rows(steps)
        times = steps * self.h
        values = sample_from_sums(self.ito[rows], self.quad[rows], times[:, None], R).S_t
        return TrajectoryRecord(times, values.T)

    @classmethod
    def concat(cls, runs):
        """Merge batches in the order given; callers pass them in replica order."""
        first = runs[0]
        return cls(
            h=first.h,
            seed=first.seed,
            stream_ids=np.concatenate([r.stream_ids for r in runs]),
            record_steps=first.record_steps,
            ito=np.concatenate([r.ito for r in runs], axis=1),
            quad=np.concatenate([r.quad for r in runs], axis=1),
            final_state=np.concatenate([r.final_state for r in runs]),
            max_norm=np.concatenate([r.max_norm for r in runs]),
            horizon_steps=first.horizon_steps,
            checkpoint_steps=first.checkpoint_steps,
            uniform_steps=first.uniform_steps,
            burn_in_steps=first.burn_in_steps,
        )


def simulate_ensemble(model, law, settings, stream_ids):
    """Step every replica in ``stream_ids`` together and record EPR sums.

    Replica ``i`` only ever reads the noise stream ``(settings.seed, stream_ids[i])``,
    and every per-replica operation is row-wise with a fixed summation order,
    so a replica's numbers do not depend on which batch it travels in.
    """
    settings.validate()
    stream_ids = np.asarray(stream_ids, dtype=np.uint64)
    n = stream_ids.shape[0]
    streams = [NoiseStream(settings.seed, int(s)) for s in stream_ids]

    x = law.sample(model, streams)
    burn = int(round(settings.burn_in / settings.h))
    horizon_steps = settings.horizon_steps
    checkpoint_steps = settings.checkpoint_steps
    uniform_steps = settings.uniform_steps
    record_steps = np.union1d(np.union1d(horizon_steps, checkpoint_steps), uniform_steps).astype(int)
    targets = {int(s): i for i, s in enumerate(record_steps)}
    ito = np.zeros((record_steps.shape[0], n))
    quad = np.zeros((record_steps.shape[0], n))
    acc = EprAccumulator.zeros(n)

    def observe(step, x, dw):
        if step < burn:
            return
        acc.add(model.psi(x), dw, settings.h)
        row = targets.get(step - burn + 1)
        if row is not None:
            ito[row] = acc.ito_sum
            quad[row] = acc.quad_sum

    total = burn + int(horizon_steps[-1])
    x, max_norm = march(
        model, x, total, settings.h, streams, on_step=observe, noise_block=settings.noise_block
    )
    logger.debug("ensemble of %d replicas done after %d steps", n, total)

    return EnsembleRun(
        h=settings.h,
        seed=settings.seed,
        stream_ids=stream_ids,
        record_steps=record_steps,
        ito=ito,
        quad=quad,
        final_state=x,
        max_norm=max_norm,
        horizon_steps=horizon_steps,
        checkpoint_steps=checkpoint_steps,
        uniform_steps=uniform_steps,
        burn_in_steps=burn,
    )
