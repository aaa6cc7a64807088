import math
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from ..sde.engine import march
from ..sde.noise import NoiseStream
from ..verification import INEQUALITY, VerificationReport, mean_and_se
from .coupled import dissipativity_constants, require_additive
from .functions import HARNACK_FUNCTIONS, require_positive_bounded, resolve


def harnack_exponent(p, kappa, K, sigma_inv_norm, distance, T):
    s2 = sigma_inv_norm**2
    first = 2.0 * p * kappa**2 * s2 * math.expm1(K * T) / ((p - 1.0) * (math.exp(K * T) + 1.0))
    second = 2.0 * p * K * s2 * distance**2 / ((p - 1.0) * math.expm1(2.0 * K * T))
    return first + second


def terminal_states(model, start, T, n, h=1e-3, seed=0):
    """X_T from ``start`` for replicas 0..n-1."""
    streams = [NoiseStream(seed, i) for i in range(n)]
    x = np.tile(np.asarray(start, dtype=float), (n, 1))
    final, _ = march(model, x, int(round(T / h)), h, streams)
    return final


def harnack_check(
    model, f, p, x, y, T, n, h=1e-3, seed=0, kappa=None, K=None, samples=None
):
    """(P_T f(x))^p against P_T f^p(y) times the dimension-free exponential factor.

    ``samples`` may carry precomputed terminal states ``(X_T^x, X_T^y)``.
    Both sides use the same replica streams; with x == y they share paths.
    """
    if not p > 1.0:
        raise ParameterError(f"p must be > 1, got {p}")
    require_additive(model, "the Harnack check")
    require_positive_bounded(f)
    kappa, K = dissipativity_constants(model, kappa, K, seed)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    distance = float(np.linalg.norm(x - y))
    exponent = harnack_exponent(p, kappa, K, model.sigma_inverse_norm(), distance, T)

    if samples is None:
        from_x = terminal_states(model, x, T, n, h, seed)
        from_y = from_x if distance == 0.0 else terminal_states(model, y, T, n, h, seed)
    else:
        from_x, from_y = samples

    mean_f, se_f = mean_and_se(f(from_x))
    mean_fp, se_fp = mean_and_se(f(from_y) ** p)
    factor = math.exp(exponent)
    return VerificationReport(
        name="harnack",
        mode=INEQUALITY,
        lhs=mean_f**p,
        rhs=mean_fp * factor,
        lhs_se=p * mean_f ** (p - 1.0) * se_f,
        rhs_se=se_fp * factor,
        n=int(from_x.shape[0]),
        details={
            "f": f.name,
            "p": p,
            "x": x.tolist(),
            "y": y.tolist(),
            "T": T,
            "h": h,
            "kappa": kappa,
            "K": K,
            "sigma_inv_norm": model.sigma_inverse_norm(),
            "exponent": exponent,
        },
    )


@dataclass
class HarnackGridReport:
    reports: list

    @property
    def passed(self):
        return all(r.passed for r in self.reports)

    def to_dict(self):
        return {
            "name": "harnack-grid",
            "pass": self.passed,
            "n_checks": len(self.reports),
            "reports": [r.to_dict() for r in self.reports],
        }


def harnack_grid(
    model,
    n,
    h=1e-3,
    seed=0,
    functions=HARNACK_FUNCTIONS,
    ps=(1.5, 2.0, 4.0),
    distances=(0.5, 1.0, 2.0),
    horizons=(0.25, 1.0),
    base=None,
):
    """Every (f, p, |x-y|, T) in both orientations, plus the x == y case per (f, p, T)."""
    require_additive(model, "the Harnack check")
    kappa, K = dissipativity_constants(model, seed=seed)
    base = np.zeros(model.dim) if base is None else np.asarray(base, dtype=float)
    direction = np.zeros(model.dim)
    direction[0] = 1.0
    cache = {}

    def states(start, T):
        key = (tuple(start.tolist()), T)
        if key not in cache:
            cache[key] = terminal_states(model, start, T, n, h, seed)
        return cache[key]

    reports = []
    for name in functions:
        f = resolve(name)
        for T in horizons:
            for p in ps:
                same = states(base, T)
                reports.append(
                    harnack_check(model, f, p, base, base, T, n, h, seed, kappa, K, (same, same))
                )
                for distance in distances:
                    other = base + distance * direction
                    for x, y in ((base, other), (other, base)):
                        reports.append(
                            harnack_check(
                                model, f, p, x, y, T, n, h, seed, kappa, K, (states(x, T), states(y, T))
                            )
                        )
    return HarnackGridReport(reports)
