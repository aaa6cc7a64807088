from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from ..families.base import apply, as_array
from .noise import LANE_INITIAL


KINDS = ("stationary", "dirac", "gaussian")


@dataclass(frozen=True)
class InitialLaw:
    """Law of X_0. Each replica draws its start from its own stream's initial lane."""

    kind: str = "stationary"
    x0: tuple = None
    mean: tuple = None
    cov: tuple = None

    def validate(self, dim):
        if self.kind not in KINDS:
            raise ConfigurationError(f"must be one of {', '.join(KINDS)}", field="initial.kind")
        if self.kind == "dirac":
            if self.x0 is None or np.shape(self.x0) != (dim,):
                raise ConfigurationError(f"expected length {dim}", field="initial.x0")
        if self.kind == "gaussian":
            if self.mean is None or np.shape(self.mean) != (dim,):
                raise ConfigurationError(f"expected length {dim}", field="initial.mean")
            if self.cov is None or np.shape(self.cov) != (dim, dim):
                raise ConfigurationError(f"expected shape ({dim}, {dim})", field="initial.cov")
            try:
                np.linalg.cholesky(np.asarray(self.cov, dtype=float))
            except np.linalg.LinAlgError as exc:
                raise ConfigurationError("must be positive definite", field="initial.cov") from exc
        return self

    def sample(self, model, streams):
        self.validate(model.dim)
        n = len(streams)
        if self.kind == "dirac":
            return np.tile(np.asarray(self.x0, dtype=float), (n, 1))

        out = np.empty((n, model.dim))
        if self.kind == "stationary":
            for i, stream in enumerate(streams):
                out[i] = model.sample_stationary(stream.generator(0, LANE_INITIAL), 1)[0]
            return out

        chol = np.linalg.cholesky(np.asarray(self.cov, dtype=float))
        mean = np.asarray(self.mean, dtype=float)
        for i, stream in enumerate(streams):
            z = stream.generator(0, LANE_INITIAL).standard_normal(model.dim)
            out[i] = mean + apply(chol, z)
        return out

    @property
    def is_stationary(self):
        return self.kind == "stationary"

    def to_dict(self):
        data = {"kind": self.kind}
        if self.kind == "dirac":
            data["x0"] = [float(v) for v in self.x0]
        if self.kind == "gaussian":
            data["mean"] = [float(v) for v in self.mean]
            data["cov"] = [[float(v) for v in row] for row in self.cov]
        return data

    @classmethod
    def from_mapping(cls, data):
        if data is None:
            return cls()
        if not isinstance(data, dict):
            raise ConfigurationError("expected a table", field="initial")
        unknown = set(data) - {"kind", "x0", "mean", "cov"}
        if unknown:
            raise ConfigurationError(f"unknown keys {sorted(unknown)}", field="initial")

        def _tuple(key):
            value = data.get(key)
            if value is None:
                return None
            array = as_array(value, f"initial.{key}")
            if array.ndim == 2:
                return tuple(tuple(row) for row in array.tolist())
            return tuple(array.tolist())

        return cls(
            kind=data.get("kind", "stationary"),
            x0=_tuple("x0"),
            mean=_tuple("mean"),
            cov=_tuple("cov"),
        )
