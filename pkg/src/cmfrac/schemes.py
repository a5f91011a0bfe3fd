"""Weight generators for convolution schemes of Caputo/Volterra type.

Each homogeneous scheme is described by a pair ``(omega, a)`` of mutually
inverse sequences: ``omega`` discretizes the Caputo derivative,
``h^{-alpha} sum_j omega_j (u_{n-j} - u_0)``, and ``a`` discretizes the
Riemann-Liouville integral, ``u_n = u_0 + h^alpha sum_{j<n} a_j f_{n-j}``.

The weights do not depend on ``h`` for the standard kernel.  Exponentially
weighted kernels ``t^{alpha-1} e^{-gamma t} / Gamma(alpha)`` do depend on
``h``; they are produced by :func:`volterra_exp_weights` as ready-to-use
sequences ``b`` that already include the ``h^alpha`` factor.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.special import gamma as _gamma

from .seqkit import as_seq, conv_inverse, convolve, miller_power

__all__ = [
    "SchemeKind",
    "SchemeWeights",
    "VolterraVariant",
    "VolterraWeights",
    "gl_weights",
    "l1_weights",
    "interp_weights",
    "cq_theta_weights",
    "counterexample_weights",
    "volterra_exp_weights",
    "sum_kernel_weights",
    "make_weights",
    "catalog",
    "CATALOG_SPECS",
]


class SchemeKind(str, enum.Enum):
    GL = "gl"
    L1 = "l1"
    INTERP = "interp"
    CQ_THETA = "cq_theta"
    COUNTEREXAMPLE = "counterexample"
    # theta < 1; not CM-preserving, only meant as a negative control
    TRAPEZOID = "trapezoid"


@dataclass(frozen=True)
class SchemeWeights:
    """Paired weights for one scheme at one order ``alpha``."""

    alpha: float
    kind: SchemeKind
    omega: np.ndarray
    a: np.ndarray
    params: Dict[str, float] = field(default_factory=dict)
    h_dependent: bool = False

    def __len__(self) -> int:
        return self.a.size

    @property
    def label(self) -> str:
        if not self.params:
            return self.kind.value
        extra = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.kind.value}({extra})"

    @property
    def cm_preserving(self) -> bool:
        return self.kind is not SchemeKind.TRAPEZOID

    def to_csv_rows(self) -> List[Tuple[int, float, float]]:
        return [(i, float(w), float(x)) for i, (w, x) in enumerate(zip(self.omega, self.a))]


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def _check_n(n: int) -> int:
    if int(n) != n or n < 2:
        raise ValueError(f"N must be an integer >= 2, got {n}")
    return int(n)


def _freeze(*arrays: np.ndarray):
    out = []
    for arr in arrays:
        arr = np.array(arr, dtype=float)
        arr.flags.writeable = False
        out.append(arr)
    return out


def _binomial_series(x: float, power: float, n: int) -> np.ndarray:
    """Coefficients of ``(1 + x z)^power``."""
    c = np.zeros(n)
    c[0] = 1.0
    if n > 1:
        c[1] = x
    return miller_power(c, power)


def gl_weights(alpha: float, N: int) -> SchemeWeights:
    """Grunwald-Letnikov: ``F_omega = (1-z)^alpha``, ``F_a = (1-z)^-alpha``."""
    alpha = _check_alpha(alpha)
    N = _check_n(N)
    omega = _binomial_series(-1.0, alpha, N)
    a = _binomial_series(-1.0, -alpha, N)
    omega, a = _freeze(omega, a)
    return SchemeWeights(alpha, SchemeKind.GL, omega, a)


def _second_difference_power(j: np.ndarray, p: float) -> np.ndarray:
    """``(j+1)^p - 2 j^p + (j-1)^p`` without catastrophic cancellation.

    The direct formula loses about ``j^2`` ulps.  For ``j >= 8`` the even
    binomial series ``2 sum_m C(p, 2m) j^(p - 2m)`` is summed instead; its
    terms shrink by at least ``1/64`` each, so 20 terms reach full precision.
    """
    out = (j + 1.0) ** p - 2.0 * j**p + (j - 1.0) ** p
    big = j >= 8
    if big.any():
        x2 = 1.0 / j[big] ** 2
        acc = np.zeros_like(x2)
        xp = np.ones_like(x2)
        coef = 1.0
        for k in range(40):
            coef *= (p - k) / (k + 1.0)  # C(p, k + 1)
            if k % 2 == 1:
                xp = xp * x2
                acc += coef * xp
        out[big] = 2.0 * j[big] ** p * acc
    return out


def l1_weights(alpha: float, N: int) -> SchemeWeights:
    """L1 scheme (piecewise-linear interpolation of ``u`` in the Caputo integral)."""
    alpha = _check_alpha(alpha)
    N = _check_n(N)
    g = _gamma(2.0 - alpha)
    j = np.arange(N, dtype=float)
    p = 1.0 - alpha
    omega = np.empty(N)
    omega[0] = 1.0 / g
    omega[1:] = _second_difference_power(j[1:], p) / g
    a = conv_inverse(omega)
    omega, a = _freeze(omega, a)
    return SchemeWeights(alpha, SchemeKind.L1, omega, a)


def interp_weights(alpha: float, N: int) -> SchemeWeights:
    """Piecewise-constant interpolation of ``f`` in the fractional integral.

    ``a_n = int_n^{n+1} s^{alpha-1} / Gamma(alpha) ds = ((n+1)^alpha - n^alpha) / Gamma(1+alpha)``.
    """
    alpha = _check_alpha(alpha)
    N = _check_n(N)
    n = np.arange(N, dtype=float)
    a = ((n + 1.0) ** alpha - n**alpha) / _gamma(1.0 + alpha)
    omega = conv_inverse(a)
    omega, a = _freeze(omega, a)
    return SchemeWeights(alpha, SchemeKind.INTERP, omega, a)


def cq_theta_weights(alpha: float, theta: float, N: int) -> SchemeWeights:
    """Convolution quadrature built on the theta-method.

    ``F_a(z) = ((theta + (1-theta) z) / (1 - z))^alpha``.  CM-preserving for
    ``theta >= 1``; ``0 < theta < 1`` yields a ``TRAPEZOID`` kind that fails
    the CM test and is only useful as a negative control.
    """
    alpha = _check_alpha(alpha)
    N = _check_n(N)
    theta = float(theta)
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    # theta + (1-theta) z = theta (1 + ((1-theta)/theta) z)
    num = _binomial_series((1.0 - theta) / theta, alpha, N)
    den = _binomial_series(-1.0, -alpha, N)
    a = theta**alpha * convolve(num, den)
    omega = conv_inverse(a)
    omega, a = _freeze(omega, a)
    kind = SchemeKind.CQ_THETA if theta >= 1.0 else SchemeKind.TRAPEZOID
    return SchemeWeights(alpha, kind, omega, a, {"theta": theta})


def counterexample_weights(alpha: float, C: float, t1: float, N: int) -> SchemeWeights:
    """``F_a(z) = (1-z)^-alpha + C / (1 - t1 z)``.

    CM and consistent, but the sup of ``|arg F_omega|`` over the closed disk
    approaches ``pi/2`` as ``C`` grows and ``t1 -> 1``.
    """
    alpha = _check_alpha(alpha)
    N = _check_n(N)
    if C < 0:
        raise ValueError("C must be nonnegative")
    if not 0.0 < t1 < 1.0:
        raise ValueError("t1 must lie in (0, 1)")
    a = _binomial_series(-1.0, -alpha, N) + C * t1 ** np.arange(N, dtype=float)
    omega = conv_inverse(a)
    omega, a = _freeze(omega, a)
    return SchemeWeights(alpha, SchemeKind.COUNTEREXAMPLE, omega, a, {"C": float(C), "t1": float(t1)})


# ---------------------------------------------------------------------------
# Volterra kernels


class VolterraVariant(str, enum.Enum):
    BACKWARD_EULER_CQ = "backward_euler_cq"  # delta(z) = 1 - z
    THETA_CQ = "theta_cq"  # delta(z) = (1-z)/(theta + (1-theta) z), theta = 2 by default
    PIECEWISE_INTEGRAL = "piecewise_integral"  # b_n = int_{t_n}^{t_{n+1}} k(t) dt
    SUM_OF_STANDARD = "sum_of_standard"


@dataclass(frozen=True)
class VolterraWeights:
    """Quadrature weights ``b`` for ``u_n = u_0 + sum_{j<n} b_j f_{n-j}``.

    ``b`` already contains the ``h^alpha`` factor.  For the exponentially
    weighted kernel ``alpha`` and ``gamma`` describe the kernel; for sums of
    standard kernels they are left at their defaults and ``terms`` records
    the ``(c_i, alpha_i)`` pairs.
    """

    alpha: float
    gamma: float
    h: float
    variant: VolterraVariant
    b: np.ndarray
    theta: float = 2.0
    terms: Tuple[Tuple[float, float], ...] = ()

    def __len__(self) -> int:
        return self.b.size


def _theta2_exp_coefficients(alpha: float, hg: float, n: int) -> np.ndarray:
    # literal m/n/p recurrences for theta = 2
    q = (1.0 + hg) / (1.0 + 2.0 * hg)
    k = np.arange(1, n, dtype=float)
    nn = np.ones(n)
    nn[1:] = np.cumprod(-q * ((1.0 - alpha) / k - 1.0))
    p = np.ones(n)
    p[1:] = np.cumprod(-0.5 * ((1.0 + alpha) / k - 1.0))
    return ((1.0 + 2.0 * hg) / 2.0) ** (-alpha) * np.convolve(nn, p)[:n]


def _piecewise_exp_integral(alpha: float, gam: float, h: float, n: int) -> np.ndarray:
    g_alpha = _gamma(alpha)
    out = np.empty(n)
    # first cell: integrate t^{alpha-1} e^{-gamma t} termwise
    total, term, k = 0.0, 1.0, 0
    while True:
        contrib = term * h ** (alpha + k) / (alpha + k)
        total += contrib
        if abs(contrib) <= 1e-17 * abs(total) or k > 200:
            break
        k += 1
        term *= -gam / k
    out[0] = total / g_alpha

    def kern(t):
        return t ** (alpha - 1.0) * math.exp(-gam * t)

    for i in range(1, n):
        val, _ = integrate.quad(kern, i * h, (i + 1) * h, epsabs=1e-15, epsrel=1e-13, limit=200)
        out[i] = val / g_alpha
    return out


def volterra_exp_weights(
    alpha: float,
    gamma: float,
    h: float,
    variant: VolterraVariant | str,
    N: int,
    theta: float = 2.0,
) -> VolterraWeights:
    """Weights for the kernel ``k(t) = t^{alpha-1} e^{-gamma t} / Gamma(alpha)``.

    Parameters
    ----------
    variant : VolterraVariant or str
        ``backward_euler_cq``: ``F_v = (1 - z + h gamma)^-alpha``.
        ``theta_cq``: ``F_v = (delta(z) + h gamma)^-alpha`` with the theta-method
        ``delta``; ``theta = 2`` follows the m/n/p recurrences literally.
        ``piecewise_integral``: exact cell integrals of the kernel.
    theta : float
        Only used by ``theta_cq``; must be ``>= 1``.
    """
    alpha = _check_alpha(alpha)
    N = _check_n(N)
    variant = VolterraVariant(variant)
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if not h > 0:
        raise ValueError("h must be positive")
    hg = h * gamma
    if variant is VolterraVariant.BACKWARD_EULER_CQ:
        m = _binomial_series(-1.0 / (1.0 + hg), -alpha, N)
        v = (1.0 + hg) ** (-alpha) * m
        b = h**alpha * v
    elif variant is VolterraVariant.THETA_CQ:
        if theta < 1.0:
            raise ValueError("theta must be >= 1 for a CM-preserving kernel quadrature")
        if theta == 2.0:
            v = _theta2_exp_coefficients(alpha, hg, N)
        else:
            # (theta + (1-theta) z)^alpha (1 + h gamma theta)^-alpha (1 - q z)^-alpha
            q = (1.0 + hg * (theta - 1.0)) / (1.0 + hg * theta)
            num = _binomial_series((1.0 - theta) / theta, alpha, N)
            den = _binomial_series(-q, -alpha, N)
            v = (theta / (1.0 + hg * theta)) ** alpha * convolve(num, den)
        b = h**alpha * v
    elif variant is VolterraVariant.PIECEWISE_INTEGRAL:
        b = _piecewise_exp_integral(alpha, float(gamma), float(h), N)
    else:
        raise ValueError("use sum_kernel_weights for sums of standard kernels")
    (b,) = _freeze(b)
    return VolterraWeights(alpha, float(gamma), float(h), variant, b, theta=float(theta))


def sum_kernel_weights(
    terms: Sequence[Tuple[float, float]], h: float, N: int, scheme: str = "gl", theta: float = 1.0
) -> VolterraWeights:
    """Weights for ``k(t) = sum_i c_i t^{alpha_i - 1} / Gamma(alpha_i)``.

    Each standard kernel is discretized with the same homogeneous scheme and
    the scaled weights ``c_i h^{alpha_i} a^{(i)}`` are added.  A sum of CM
    sequences is CM.
    """
    N = _check_n(N)
    if not terms:
        raise ValueError("need at least one kernel term")
    b = np.zeros(N)
    for c, al in terms:
        if c <= 0:
            raise ValueError("kernel coefficients must be positive")
        w = make_weights(scheme, al, N, theta=theta)
        b += c * h**al * w.a
    (b,) = _freeze(b)
    tt = tuple((float(c), float(al)) for c, al in terms)
    return VolterraWeights(
        alpha=min(al for _, al in tt), gamma=0.0, h=float(h), variant=VolterraVariant.SUM_OF_STANDARD, b=b, terms=tt
    )


# ---------------------------------------------------------------------------


def make_weights(kind: SchemeKind | str, alpha: float, N: int, **params) -> SchemeWeights:
    """Build weights by kind name; extra parameters go to the generator."""
    kind = SchemeKind(kind)
    if kind is SchemeKind.GL:
        return gl_weights(alpha, N)
    if kind is SchemeKind.L1:
        return l1_weights(alpha, N)
    if kind is SchemeKind.INTERP:
        return interp_weights(alpha, N)
    if kind in (SchemeKind.CQ_THETA, SchemeKind.TRAPEZOID):
        return cq_theta_weights(alpha, params.get("theta", 1.0), N)
    if kind is SchemeKind.COUNTEREXAMPLE:
        return counterexample_weights(alpha, params.get("C", 1.0), params.get("t1", 0.9), N)
    raise ValueError(f"unknown scheme kind {kind!r}")


# The CM-preserving production schemes exercised across the test suite.
CATALOG_SPECS: Tuple[Tuple[str, Dict[str, float]], ...] = (
    ("gl", {}),
    ("l1", {}),
    ("interp", {}),
    ("cq_theta", {"theta": 1.0}),
    ("cq_theta", {"theta": 1.5}),
    ("cq_theta", {"theta": 2.0}),
)


def catalog(alpha: float, N: int) -> List[SchemeWeights]:
    """All catalog schemes at order ``alpha`` with ``N`` weights each."""
    return [make_weights(kind, alpha, N, **params) for kind, params in CATALOG_SPECS]
