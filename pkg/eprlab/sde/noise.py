import math
from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigurationError


UINT64_LIMIT = 2**64

LANE_INCREMENTS = 0
LANE_INITIAL = 1
LANE_AUXILIARY = 2

DEFAULT_NOISE_BLOCK = 1024


def _check_uint64(value, field):
    if not isinstance(value, (int, np.integer)) or not 0 <= int(value) < UINT64_LIMIT:
        raise ConfigurationError(f"must be an unsigned 64-bit integer, got {value!r}", field=field)
    return int(value)


@dataclass(frozen=True)
class NoiseStream:
    """Counter-based Gaussian stream keyed by (seed, stream_id).

    Block ``b`` of lane ``l`` is drawn from Philox with key (seed, stream_id)
    and counter (0, b, l, 0), so any block can be regenerated on its own and
    replicas never share counter space. ``counter`` is the first block index.
    """

    seed: int
    stream_id: int = 0
    counter: int = 0

    def __post_init__(self):
        _check_uint64(self.seed, "seed")
        _check_uint64(self.stream_id, "stream_id")
        _check_uint64(self.counter, "counter")

    def generator(self, block=0, lane=LANE_INCREMENTS):
        bit_generator = np.random.Philox(
            key=np.array([self.seed, self.stream_id], dtype=np.uint64),
            counter=np.array([0, self.counter + block, lane, 0], dtype=np.uint64),
        )
        return np.random.Generator(bit_generator)

    def increments(self, n_steps, dim, h, block=0):
        normals = self.generator(block, LANE_INCREMENTS).standard_normal((n_steps, dim))
        return normals * math.sqrt(h)

    def advance(self, blocks=1):
        return replace(self, counter=self.counter + blocks)


@dataclass(frozen=True)
class WienerIncrement:
    dw: np.ndarray
    h: float

    def __post_init__(self):
        if not self.h > 0.0:
            raise ConfigurationError(f"step must be > 0, got {self.h}", field="h")
        if not np.all(np.isfinite(self.dw)):
            raise ConfigurationError("increment has non-finite entries", field="dw")


@dataclass(frozen=True)
class PathConfig:
    h: float
    t_end: float
    burn_in: float = 0.0
    seed: int = 0
    stream_id: int = 0
    noise_block: int = DEFAULT_NOISE_BLOCK

    def validate(self):
        if not (self.h > 0.0 and math.isfinite(self.h)):
            raise ConfigurationError("must be > 0", field="h")
        if not (self.t_end >= self.h and math.isfinite(self.t_end)):
            raise ConfigurationError("must be >= h", field="t_end")
        if not self.burn_in >= 0.0:
            raise ConfigurationError("must be >= 0", field="burn_in")
        if int(self.noise_block) < 1:
            raise ConfigurationError("must be >= 1", field="noise_block")
        _check_uint64(self.seed, "seed")
        _check_uint64(self.stream_id, "stream_id")
        return self

    @property
    def steps(self):
        return int(round(self.t_end / self.h))

    @property
    def burn_in_steps(self):
        return int(round(self.burn_in / self.h))

    @property
    def stream(self):
        return NoiseStream(self.seed, self.stream_id)
