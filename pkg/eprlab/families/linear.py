import numpy as np
from scipy.linalg import solve_continuous_lyapunov, solve_discrete_lyapunov

from ..errors import AvailabilityError, ConfigurationError
from .base import (
    MAX_CLOSED_FORM_DIM,
    ClosedForms,
    ConstantDiffusionModel,
    apply,
    as_matrix,
    snap_to_zero,
)


def lyapunov_stationary(M, sigma):
    """Stationary covariance of dX = MX dt + sigma dW.

    Solves M S + S M^T + sigma sigma^T = 0 through the Kronecker-vectorised
    dense system (row-major vec), which is O(d^6) and capped at d = 16.
    """
    M = np.asarray(M, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    dim = M.shape[0]
    if dim > MAX_CLOSED_FORM_DIM:
        raise ConfigurationError(
            f"dimension {dim} exceeds the closed-form cap {MAX_CLOSED_FORM_DIM}",
            field="model.M",
        )
    eigenvalues = np.linalg.eigvals(M)
    if np.max(eigenvalues.real) >= 0.0:
        raise ConfigurationError(
            f"drift matrix is not Hurwitz (max real eigenvalue {np.max(eigenvalues.real):.6g})",
            field="model.M",
        )

    a = sigma @ sigma.T
    identity = np.eye(dim)
    operator = np.kron(M, identity) + np.kron(identity, M)
    solution = np.linalg.solve(operator, -a.reshape(-1)).reshape(dim, dim)
    solution = 0.5 * (solution + solution.T)

    residual = np.linalg.norm(M @ solution + solution @ M.T + a, "fro")
    if residual > 1e-10 * max(1.0, np.linalg.norm(a, "fro")):
        raise ConfigurationError(
            f"Lyapunov residual {residual:.3e} above tolerance", field="model.M"
        )
    try:
        np.linalg.cholesky(solution)
    except np.linalg.LinAlgError as exc:
        raise ConfigurationError(
            "stationary covariance is not positive definite", field="model.M"
        ) from exc
    return solution


class LinearOU(ConstantDiffusionModel):
    family = "linear-ou"
    has_stationary = True
    jacobian_method = "analytic"

    def __init__(self, M, sigma=None, fd_step=None):
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ConfigurationError(f"expected a square matrix, got shape {M.shape}", field="model.M")
        dim = M.shape[0]
        if sigma is None:
            sigma = np.eye(dim)
        kwargs = {} if fd_step is None else {"fd_step": fd_step}
        super().__init__(dim, sigma, **kwargs)
        self.M = as_matrix(M, dim, "model.M")
        self.Sigma = lyapunov_stationary(self.M, self.sigma)
        self.Sigma_inv = np.linalg.inv(self.Sigma)
        self.Sigma_inv = 0.5 * (self.Sigma_inv + self.Sigma_inv.T)
        self._chol = np.linalg.cholesky(self.Sigma)

        drift_part = 2.0 * self.sigma_inv @ self.M
        density_part = self.sigma.T @ self.Sigma_inv
        # Reversible models cancel to round-off; those entries become exact zeros.
        scale = max(np.max(np.abs(drift_part)), np.max(np.abs(density_part)))
        self.G = snap_to_zero(drift_part + density_part, scale)

    def drift(self, x):
        return apply(self.M, x)

    def grad_log_rho(self, x):
        return -apply(self.Sigma_inv, x)

    def psi(self, x):
        return apply(self.G, x)

    def drift_jacobian(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.M, x.shape[:-1] + (self.dim, self.dim))

    def sample_stationary(self, rng, n):
        return apply(self._chol, rng.standard_normal((n, self.dim)))

    @property
    def stationary_covariance(self):
        return self.Sigma

    @property
    def is_reversible(self):
        return not np.any(self.G)

    def mean_psi_sq(self):
        return float(np.trace(self.G.T @ self.G @ self.Sigma))

    def poisson_delta(self, variant="epr"):
        """Long-run variance of the centred EPR functional.

        With g = c |psi|^2 and psi = Gx, the quadratic phi = x^T P x solving
        M^T P + P M = -c G^T G turns the time integral of g - mu(g) into a
        martingale plus boundary terms; delta is then mu(|(G + 2 sigma^T P) x|^2).
        c = 1/2 for t(R_t - R), c = 1 for the uncompensated S_t_sec3 variant.
        """
        weights = {"epr": 0.5, "sec3": 1.0}
        if variant not in weights:
            raise AvailabilityError(f"unknown delta variant {variant!r}")
        if not np.any(self.G):
            return 0.0
        Q = self.G.T @ self.G
        P = solve_continuous_lyapunov(self.M.T, -weights[variant] * Q)
        H = self.G + 2.0 * self.sigma.T @ P
        return float(np.trace(H.T @ H @ self.Sigma))

    def closed_forms(self):
        mu_psi_sq = self.mean_psi_sq()
        return ClosedForms(
            available=True,
            R_exact=0.5 * mu_psi_sq,
            delta_exact=self.poisson_delta("epr"),
            delta_sec3=self.poisson_delta("sec3"),
            mu_psi_sq=mu_psi_sq,
        )

    def params(self):
        return {"M": self.M.tolist(), "sigma": self.sigma.tolist()}

    def em_covariance_step(self, covariance, h):
        """Covariance after one Euler-Maruyama step from N(0, covariance)."""
        step = np.eye(self.dim) + h * self.M
        return step @ covariance @ step.T + h * self.a

    def em_stationary_covariance(self, h):
        """Fixed point of em_covariance_step: the stationary law of the Euler-Maruyama chain."""
        step = np.eye(self.dim) + h * self.M
        if np.max(np.abs(np.linalg.eigvals(step))) >= 1.0:
            raise AvailabilityError(f"the Euler-Maruyama chain with h={h} has no stationary law")
        covariance = solve_discrete_lyapunov(step, h * self.a)
        return 0.5 * (covariance + covariance.T)

    def discrete_mean_psi_sq(self, h):
        return float(np.trace(self.G.T @ self.G @ self.em_stationary_covariance(h)))
