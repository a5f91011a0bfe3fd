"""Named right-hand sides used by the experiments and the CLI.

Each preset returns ``(f, jacobian)`` with ``f(t, u) -> array`` and
``jacobian(t, u) -> (dim, dim) array``.
"""
from __future__ import annotations

from typing import Callable, Dict, Tuple

import numpy as np

__all__ = ["PRESETS", "make_rhs", "preset_dim"]

Pair = Tuple[Callable, Callable]


def linear(lam: float = -1.0) -> Pair:
    lam = float(lam)
    return (lambda t, u: lam * u), (lambda t, u: np.array([[lam]]))


def logistic(A: float = 2.0, B: float = 1.0) -> Pair:
    A, B = float(A), float(B)
    return (lambda t, u: A * u - B * u * u), (lambda t, u: np.array([[A - 2.0 * B * u[0]]]))


def sinsq() -> Pair:
    """``f(u) = sin(1 + u^2)``."""
    return (lambda t, u: np.sin(1.0 + u * u)), (lambda t, u: np.array([[2.0 * u[0] * np.cos(1.0 + u[0] ** 2)]]))


def sine() -> Pair:
    """``f(u) = sin(u)``, derivative bounded by 1."""
    return (lambda t, u: np.sin(u)), (lambda t, u: np.array([[np.cos(u[0])]]))


def cubic_decay() -> Pair:
    """``f(u) = -u^3``, smooth and non-increasing."""
    return (lambda t, u: -(u**3)), (lambda t, u: np.array([[-3.0 * u[0] ** 2]]))


def forced_damping() -> Pair:
    """``f(t, u) = -u + sin t``."""
    return (lambda t, u: -u + np.sin(t)), (lambda t, u: np.array([[-1.0]]))


def zero() -> Pair:
    return (lambda t, u: np.zeros_like(u)), (lambda t, u: np.zeros((u.size, u.size)))


def financial() -> Pair:
    """Fractional financial system in ``(x, y, z)``."""

    def f(t, u):
        x, y, z = u
        return np.array([z + (y - 1.0) * x, 1.0 - 0.1 * y - x * x, -x - z])

    def jac(t, u):
        x, y, _ = u
        return np.array([[y - 1.0, x, 1.0], [-2.0 * x, -0.1, 0.0], [-1.0, 0.0, -1.0]])

    return f, jac


PRESETS: Dict[str, Callable[..., Pair]] = {
    "linear": linear,
    "logistic": logistic,
    "sinsq": sinsq,
    "sine": sine,
    "cubic-decay": cubic_decay,
    "forced-damping": forced_damping,
    "zero": zero,
    "financial": financial,
}

_DIMS = {"financial": 3}


def make_rhs(name: str, **params) -> Pair:
    """Look up a preset by name and bind its parameters."""
    try:
        builder = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for preset {name!r}: {exc}") from None


def preset_dim(name: str) -> int:
    return _DIMS.get(name, 1)
