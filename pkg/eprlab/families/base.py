from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ConfigurationError, NumericOverflowError, UnsupportedModelError


FD_STEP = 1e-5
MAX_CLOSED_FORM_DIM = 16


def apply(matrix, x):
    """Matrix-vector product over the last axis of ``x``.

    Summed column by column in a fixed order, so every row of a batch gets
    the same floating-point result no matter how many rows travel with it.
    """
    x = np.asarray(x, dtype=float)
    out = x[..., 0:1] * matrix[:, 0]
    for j in range(1, matrix.shape[1]):
        out = out + x[..., j : j + 1] * matrix[:, j]
    return out


def batched_apply(matrices, x):
    matrices = np.asarray(matrices, dtype=float)
    if matrices.ndim == 2:
        return apply(matrices, x)
    x = np.asarray(x, dtype=float)
    out = matrices[..., :, 0] * x[..., 0:1]
    for j in range(1, matrices.shape[-1]):
        out = out + matrices[..., :, j] * x[..., j : j + 1]
    return out


def as_matrix(value, dim, field):
    try:
        matrix = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"not a numeric matrix ({exc})", field=field) from exc
    if matrix.shape != (dim, dim):
        raise ConfigurationError(
            f"expected shape ({dim}, {dim}), got {matrix.shape}", field=field
        )
    if not np.all(np.isfinite(matrix)):
        raise ConfigurationError("entries must be finite", field=field)
    return matrix


def as_array(value, field, ndim=None):
    """Float array from a config value; ragged or non-numeric input names the field."""
    try:
        array = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"not numeric ({exc})", field=field) from exc
    if ndim is not None and array.ndim != ndim:
        raise ConfigurationError(f"expected {ndim} dimensions, got shape {array.shape}", field=field)
    return array


def check_invertible(matrix, field):
    if np.linalg.cond(matrix) > 1e12:
        raise ConfigurationError("diffusion matrix is singular or ill-conditioned", field=field)


def as_state(x, dim, field="state"):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != dim:
        raise ConfigurationError(
            f"expected trailing dimension {dim}, got shape {x.shape}", field=field
        )
    return x


def snap_to_zero(matrix, scale, rtol=1e-12):
    snapped = np.array(matrix, dtype=float)
    snapped[np.abs(snapped) <= rtol * max(scale, 1.0)] = 0.0
    return snapped


@dataclass(frozen=True)
class ClosedForms:
    available: bool
    R_exact: float = None
    delta_exact: float = None
    delta_sec3: float = None
    mu_psi_sq: float = None
    reason: str = ""

    def to_dict(self):
        return asdict(self)


class DiffusionModel:
    """One diffusion dX = B(X)dt + sigma(X)dW under study.

    All field methods are vectorised over leading axes: ``x`` has shape
    ``(..., d)``; matrix fields return ``(..., d, d)``.
    """

    family = "abstract"
    additive = True
    has_stationary = False
    jacobian_method = "central-difference"

    def __init__(self, dim, fd_step=FD_STEP):
        if int(dim) < 1:
            raise ConfigurationError("dimension must be >= 1", field="model.dim")
        self.dim = int(dim)
        self.fd_step = fd_step

    def drift(self, x):
        raise NotImplementedError

    def diffusion(self, x):
        raise NotImplementedError

    def covariance(self, x):
        sigma = self.diffusion(x)
        return sigma @ np.swapaxes(sigma, -1, -2)

    def diffusion_divergence(self, x):
        """sum_j d_j (sigma sigma^T)_ij, zero for additive noise."""
        return np.zeros_like(np.asarray(x, dtype=float))

    def noise(self, x, dw):
        return batched_apply(self.diffusion(x), dw)

    def solve_diffusion(self, x, v):
        v = np.asarray(v, dtype=float)
        return np.linalg.solve(self.diffusion(x), v[..., None])[..., 0]

    def diffusion_transpose_apply(self, x, v):
        return batched_apply(np.swapaxes(self.diffusion(x), -1, -2), v)

    def grad_log_rho(self, x):
        raise UnsupportedModelError(f"{self.family} model carries no stationary density")

    def psi(self, x):
        return psi_general(self, x)

    def drift_jacobian(self, x):
        return central_jacobian(self.drift, x, self.fd_step)

    def sample_stationary(self, rng, n):
        raise UnsupportedModelError(f"{self.family} model has no stationary sampler")

    @property
    def stationary_covariance(self):
        return None

    def closed_forms(self):
        return ClosedForms(available=False, reason=f"no closed forms for {self.family}")

    def sigma_inverse_norm(self):
        if not self.additive:
            raise UnsupportedModelError("operator norm of sigma^-1 needs constant sigma")
        sigma = self.diffusion(np.zeros(self.dim))
        return float(np.linalg.norm(np.linalg.inv(sigma), 2))

    def params(self):
        return {}

    def manifest(self):
        forms = self.closed_forms()
        data = {"family": self.family, "dim": self.dim, "fd_step": self.fd_step}
        data.update(self.params())
        data["derived"] = {
            "closed_forms": forms.to_dict(),
            "jacobian": self.jacobian_method,
        }
        cov = self.stationary_covariance
        if cov is not None:
            data["derived"]["Sigma"] = cov.tolist()
        return data


class ConstantDiffusionModel(DiffusionModel):
    additive = True

    def __init__(self, dim, sigma, fd_step=FD_STEP):
        super().__init__(dim, fd_step=fd_step)
        self.sigma = as_matrix(sigma, self.dim, "model.sigma")
        check_invertible(self.sigma, "model.sigma")
        self.sigma_inv = np.linalg.inv(self.sigma)
        self.a = self.sigma @ self.sigma.T

    def diffusion(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.sigma, x.shape[:-1] + (self.dim, self.dim))

    def covariance(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.a, x.shape[:-1] + (self.dim, self.dim))

    def noise(self, x, dw):
        return apply(self.sigma, dw)

    def solve_diffusion(self, x, v):
        return apply(self.sigma_inv, v)

    def diffusion_transpose_apply(self, x, v):
        return apply(self.sigma.T, v)

    def sigma_inverse_norm(self):
        return float(np.linalg.norm(self.sigma_inv, 2))


def central_jacobian(fn, x, step=FD_STEP):
    x = np.asarray(x, dtype=float)
    dim = x.shape[-1]
    columns = []
    for j in range(dim):
        offset = np.zeros(dim)
        offset[j] = step
        columns.append((fn(x + offset) - fn(x - offset)) / (2.0 * step))
    return np.stack(columns, axis=-1)


def psi_general(model, x):
    """psi = 2 sigma^-1 B - sigma^T grad log rho."""
    x = np.asarray(x, dtype=float)
    first = 2.0 * model.solve_diffusion(x, model.drift(x))
    second = model.diffusion_transpose_apply(x, model.grad_log_rho(x))
    out = first - second
    if not np.all(np.isfinite(out)):
        raise NumericOverflowError("psi is not finite (singular diffusion?)")
    return out


def psi_of(model, x):
    if not model.has_stationary:
        raise UnsupportedModelError(f"{model.family} model carries no stationary data")
    out = model.psi(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(out)):
        raise NumericOverflowError("psi is not finite (singular diffusion?)")
    return out
