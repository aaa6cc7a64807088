import numpy as np

from ..errors import ConfigurationError
from .base import FD_STEP, as_array
from .free import FreeBrownian
from .linear import LinearOU
from .rotated import ConstantField, ModulatedField, RotatedGaussian, rotation_generator


def _require(data, key, prefix="model"):
    if key not in data:
        raise ConfigurationError("missing", field=f"{prefix}.{key}")
    return data[key]


def _number(data, key, default=None, prefix="model"):
    value = data.get(key, default)
    if value is None:
        raise ConfigurationError("missing", field=f"{prefix}.{key}")
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"not a number: {value!r}", field=f"{prefix}.{key}") from exc


def _integer(data, key, default, prefix="model"):
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigurationError(f"expected a positive integer, got {value!r}", field=f"{prefix}.{key}")
    return value


def _matrix(value, field):
    return None if value is None else as_array(value, field, ndim=2)


def _sigma_field(sigma, dim, fd_step):
    if sigma is None:
        return ConstantField(np.eye(dim))
    if not isinstance(sigma, dict):
        return ConstantField(as_array(sigma, "model.sigma", ndim=2))
    kind = sigma.get("kind", "constant")
    matrix = as_array(sigma.get("matrix", np.eye(dim)), "model.sigma.matrix")
    if matrix.shape != (dim, dim):
        raise ConfigurationError(f"expected shape ({dim}, {dim})", field="model.sigma.matrix")
    if kind == "constant":
        return ConstantField(matrix)
    if kind == "modulated":
        return ModulatedField(
            matrix,
            _number(sigma, "epsilon", prefix="model.sigma"),
            as_array(sigma.get("w", np.ones(dim)), "model.sigma.w"),
            derivative=sigma.get("derivative", "analytic"),
            fd_step=fd_step,
        )
    raise ConfigurationError(f"unknown sigma kind {kind!r}", field="model.sigma.kind")


def model_from_manifest(data):
    """Build a model from its manifest; derived entries are recomputed, not trusted."""
    if not isinstance(data, dict):
        raise ConfigurationError("expected a table", field="model")
    family = _require(data, "family")
    fd_step = _number(data, "fd_step", FD_STEP)
    alpha = None if data.get("alpha") is None else _number(data, "alpha")

    if family == "linear-ou":
        M = _matrix(_require(data, "M"), "model.M")
        return LinearOU(M, _matrix(data.get("sigma"), "model.sigma"), fd_step=fd_step)

    if family == "rotated-ou":
        return RotatedGaussian(
            _number(data, "beta"),
            rotation_generator(_number(data, "a"), 2),
            ConstantField(np.eye(2)),
            alpha=alpha,
            fd_step=fd_step,
        )

    if family == "rotated-gaussian":
        if "A" in data:
            A = as_array(data["A"], "model.A", ndim=2)
            dim = A.shape[0]
        else:
            dim = _integer(data, "dim", 2)
            A = rotation_generator(_number(data, "a", 0.0), dim)
        return RotatedGaussian(
            _number(data, "beta"),
            A,
            _sigma_field(data.get("sigma"), dim, fd_step),
            alpha=alpha,
            fd_step=fd_step,
        )

    if family == "free":
        return FreeBrownian(_integer(data, "dim", 2), _matrix(data.get("sigma"), "model.sigma"))

    raise ConfigurationError(f"unknown family {family!r}", field="model.family")


def model_manifest(model):
    data = model.manifest()
    if model.family == "rotated-gaussian":
        data["derived"]["alpha"] = model.alpha
        data["derived"]["divergence"] = model.divergence_method
    return data
