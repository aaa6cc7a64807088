import math
from dataclasses import dataclass, field

import numpy as np


INEQUALITY = "inequality"
IDENTITY = "identity"
SLACK = 3.0


def mean_and_se(values):
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n < 2:
        return float(np.mean(values)), 0.0
    return float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(n))


@dataclass
class VerificationReport:
    """Monte Carlo comparison of two sides of an inequality or identity.

    ``diff_se`` is the standard error of lhs - rhs when both sides come from
    the same paths; otherwise the sides are treated as independent.
    """

    name: str
    mode: str
    lhs: float
    rhs: float
    lhs_se: float
    rhs_se: float
    n: int
    diff_se: float = None
    slack: float = SLACK
    details: dict = field(default_factory=dict)
    conditions: dict = field(default_factory=dict)
    margin: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        if self.mode not in (INEQUALITY, IDENTITY):
            raise ValueError(f"unknown mode {self.mode!r}")
        se = self.combined_se
        # Round-off allowance so exact agreement passes with se = 0.
        tolerance = self.slack * se + 1e-12 * max(1.0, abs(self.lhs), abs(self.rhs))
        if self.mode == INEQUALITY:
            self.margin = self.rhs - self.lhs
            self.passed = bool(self.lhs <= self.rhs + tolerance)
        else:
            self.margin = abs(self.lhs - self.rhs)
            self.passed = bool(self.margin <= tolerance)
        if self.conditions:
            self.passed = self.passed and all(self.conditions.values())

    @property
    def combined_se(self):
        if self.diff_se is not None:
            return float(self.diff_se)
        return math.sqrt(self.lhs_se**2 + self.rhs_se**2)

    def to_dict(self):
        return {
            "name": self.name,
            "mode": self.mode,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "lhs_se": self.lhs_se,
            "rhs_se": self.rhs_se,
            "combined_se": self.combined_se,
            "margin": self.margin,
            "pass": self.passed,
            "n": self.n,
            "slack": self.slack,
            "details": self.details,
            "conditions": self.conditions,
        }
