from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError


@dataclass(frozen=True)
class TestFunction:
    """A test function f with its gradient, both vectorised over rows of ``z``."""

    __test__ = False

    name: str
    f: object
    grad: object
    bounded: bool = True
    positive: bool = True

    def __call__(self, z):
        return self.f(np.asarray(z, dtype=float))

    def gradient(self, z):
        return self.grad(np.asarray(z, dtype=float))

    def __add__(self, other):
        return TestFunction(
            name=f"{self.name}+{other.name}",
            f=lambda z: self.f(z) + other.f(z),
            grad=lambda z: self.grad(z) + other.grad(z),
            bounded=self.bounded and other.bounded,
            positive=self.positive and other.positive,
        )


def constant(c=1.0):
    return TestFunction(
        name=f"constant({c:g})",
        f=lambda z: np.full(z.shape[:-1], float(c)),
        grad=lambda z: np.zeros_like(z),
        positive=c > 0.0,
    )


def gaussian(scale=1.0):
    """exp(-scale |z|^2)."""
    return TestFunction(
        name=f"gaussian({scale:g})",
        f=lambda z: np.exp(-scale * np.sum(z * z, axis=-1)),
        grad=lambda z: -2.0 * scale * z * np.exp(-scale * np.sum(z * z, axis=-1))[..., None],
    )


def _axis(z, index):
    out = np.zeros(z.shape[-1])
    out[index] = 1.0
    return out


def sigmoid(index=0):
    def f(z):
        return 1.0 / (1.0 + np.exp(-z[..., index]))

    def grad(z):
        s = f(z)
        return (s * (1.0 - s))[..., None] * _axis(z, index)

    return TestFunction(name=f"sigmoid(z{index + 1})", f=f, grad=grad)


def tanh(index=0):
    return TestFunction(
        name=f"tanh(z{index + 1})",
        f=lambda z: np.tanh(z[..., index]),
        grad=lambda z: (1.0 / np.cosh(z[..., index]) ** 2)[..., None] * _axis(z, index),
        positive=False,
    )


def linear(u):
    u = np.asarray(u, dtype=float)
    return TestFunction(
        name=f"linear({','.join(f'{v:g}' for v in u)})",
        f=lambda z: np.sum(z * u, axis=-1),
        grad=lambda z: np.broadcast_to(u, z.shape).copy(),
        bounded=False,
        positive=False,
    )


REGISTRY = {
    "constant": constant,
    "gaussian": gaussian,
    "sigmoid": sigmoid,
    "tanh": tanh,
    "linear": linear,
}

HARNACK_FUNCTIONS = ("constant", "gaussian", "sigmoid")


def resolve(name, **params):
    if name not in REGISTRY:
        raise ConfigurationError(
            f"unknown test function {name!r}; choose from {', '.join(sorted(REGISTRY))}",
            field="f",
        )
    return REGISTRY[name](**params)


def require_positive_bounded(f):
    if not (f.bounded and f.positive):
        raise ConfigurationError(f"{f.name} is not a bounded positive function", field="f")
    return f
