import numpy as np

from .base import ConstantDiffusionModel


class FreeBrownian(ConstantDiffusionModel):
    """B = 0 with constant sigma. No invariant probability measure."""

    family = "free"
    jacobian_method = "analytic"

    def __init__(self, dim, sigma=None):
        if sigma is None:
            sigma = np.eye(int(dim))
        super().__init__(dim, sigma)

    def drift(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def drift_jacobian(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (self.dim, self.dim))

    def params(self):
        return {"sigma": self.sigma.tolist()}
