import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ParameterError
from .noise import LANE_AUXILIARY, NoiseStream


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DissipativityReport:
    """Tightest (kappa, K) with <B(x)-B(y), x-y> <= kappa |x-y| - K |x-y|^2 on the sample."""

    kappa: float
    K: float
    satisfied: bool
    n_pairs: int
    radius: float
    mode: str
    K_pairs: float
    K_jacobian: float = None
    note: str = ""

    def to_dict(self):
        return asdict(self)


def _uniform_ball(generator, n, dim, radius):
    directions = generator.standard_normal((n, dim))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    radii = radius * generator.random((n, 1)) ** (1.0 / dim)
    return directions / norms * radii


def check_dissipativity(model, n_pairs, radius, rng):
    if int(n_pairs) < 1:
        raise ParameterError(f"n_pairs must be >= 1, got {n_pairs}")
    if not radius > 0.0:
        raise ParameterError(f"radius must be > 0, got {radius}")
    generator = rng.generator(0, LANE_AUXILIARY) if isinstance(rng, NoiseStream) else rng

    x = _uniform_ball(generator, int(n_pairs), model.dim, radius)
    y = _uniform_ball(generator, int(n_pairs), model.dim, radius)
    diff = x - y
    r2 = np.sum(diff * diff, axis=1)
    q = np.sum((model.drift(x) - model.drift(y)) * diff, axis=1)
    # x == y pairs constrain nothing.
    mask = r2 > 0.0

    if not model.additive:
        spread = model.diffusion(x) - model.diffusion(y)
        hs = np.sum(spread * spread, axis=(-2, -1))
        ratios = -(hs[mask] + 2.0 * q[mask]) / r2[mask]
        K = float(np.min(ratios)) if ratios.size else math.inf
        return DissipativityReport(
            kappa=0.0,
            K=K,
            satisfied=bool(math.isfinite(K) and K > 0.0),
            n_pairs=int(n_pairs),
            radius=float(radius),
            mode="multiplicative",
            K_pairs=K,
            note="K fitted to |sigma(x)-sigma(y)|_HS^2 + 2<B(x)-B(y), x-y> <= -K |x-y|^2",
        )

    K_pairs = float(np.min(-q[mask] / r2[mask])) if np.any(mask) else math.inf
    symmetric = model.drift_jacobian(np.concatenate([x, y]))
    symmetric = 0.5 * (symmetric + np.swapaxes(symmetric, -1, -2))
    K_jacobian = float(np.min(-np.linalg.eigvalsh(symmetric)[..., -1]))
    K = min(K_pairs, K_jacobian)
    kappa = 0.0
    note = ""

    if not K > 0.0:
        # Contraction may only hold at large separation; fit K there and absorb the rest in kappa.
        r = np.sqrt(r2)
        far = mask & (r >= np.median(r[mask])) if np.any(mask) else mask
        if np.any(far):
            K = float(np.min(-q[far] / r2[far]))
        if K > 0.0:
            kappa = float(max(0.0, np.max((q[mask] + K * r2[mask]) / r[mask])))
            note = "K fitted on the far half of the pairs, kappa absorbs the rest"
        else:
            note = "no K > 0 fits the sampled pairs"
            logger.warning("drift of %s is not dissipative on the sampled ball", model.family)

    return DissipativityReport(
        kappa=kappa,
        K=float(K),
        satisfied=bool(math.isfinite(K) and K > 0.0),
        n_pairs=int(n_pairs),
        radius=float(radius),
        mode="additive",
        K_pairs=K_pairs,
        K_jacobian=K_jacobian,
        note=note,
    )


def default_burn_in(report, floor=1.0):
    """10 / K, the relaxation time of the contraction estimate."""
    if not report.satisfied:
        return floor
    return max(floor, 10.0 / report.K)
