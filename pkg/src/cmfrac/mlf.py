"""One-parameter Mittag-Leffler function on the real line.

``E_alpha(z) = sum_k z^k / Gamma(alpha k + 1)`` for ``0 < alpha <= 1``.

Two evaluation routes:

* Taylor series for ``z >= 0`` (``z <= 20``) and for small negative ``z``
  (``|z|^{1/alpha} <= 2``, where cancellation costs at most a factor ~e^2/alpha).
* For the rest of the negative axis, the Laplace-type representation

  ``E_alpha(-x) = sin(pi a)/(pi a) * int_0^inf exp(-y^{1/a}) x / (y^2 + 2 x y cos(pi a) + x^2) dy``

  integrated with adaptive Gauss-Kronrod.  The integrand is smooth and
  positive; for ``alpha`` near 1 it has a narrow peak at ``y = x`` which is
  passed to the integrator as a breakpoint.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate
from scipy.special import gammaln, rgamma

__all__ = ["UnsupportedDomainError", "mittag_leffler", "mittag_leffler_asymptotic"]

SERIES_MAX_Z = 20.0
_NEG_SERIES_RADIUS = 2.0  # series on z < 0 only while |z|^(1/alpha) <= this
_TAIL_CUT = 50.0  # exp(-50) ~ 2e-22 truncates the integral


class UnsupportedDomainError(ValueError):
    """Argument outside the range where the advertised accuracy holds."""


def _series(alpha: float, z: float) -> float:
    if z == 0.0:
        return 1.0
    logz = math.log(abs(z))
    neg = z < 0
    total = 1.0
    prev_mag = 1.0
    k = 1
    while True:
        mag = math.exp(k * logz - gammaln(alpha * k + 1.0))
        term = -mag if (neg and k % 2) else mag
        total += term
        if not math.isfinite(total):
            raise UnsupportedDomainError(f"E_{alpha}({z}) overflows")
        # terms decrease monotonically past the peak; stop once negligible
        if mag < prev_mag and mag <= 1e-17 * abs(total):
            return total
        prev_mag = mag
        k += 1
        if k > 100_000:
            raise UnsupportedDomainError(f"series for E_{alpha}({z}) did not converge")


def _negative_integral(alpha: float, x: float) -> float:
    b = 1.0 - alpha
    s = math.sin(math.pi * b)  # = sin(pi alpha), accurate for alpha near 1
    q = math.sin(0.5 * math.pi * b) ** 2  # (1 + cos(pi alpha)) / 2 without cancellation
    inv = 1.0 / alpha

    def f(y):
        return math.exp(-(y**inv)) * x / ((y - x) ** 2 + 4.0 * x * y * q)

    upper = _TAIL_CUT**alpha
    pts = sorted({p for p in (x * (1 - 4 * s), x * (1 - s), x, x * (1 + s), x * (1 + 4 * s)) if 0.0 < p < upper})
    val, _ = integrate.quad(f, 0.0, upper, points=pts or None, epsabs=0.0, epsrel=1e-13, limit=1000)
    return s / (math.pi * alpha) * val


def _scalar(alpha: float, z: float) -> float:
    if alpha == 1.0:
        if z > SERIES_MAX_Z:
            raise UnsupportedDomainError(f"z={z} above the supported range z <= {SERIES_MAX_Z}")
        return math.exp(z)
    if z > SERIES_MAX_Z:
        raise UnsupportedDomainError(f"z={z} above the supported range z <= {SERIES_MAX_Z}")
    if z >= 0.0 or (-z) ** (1.0 / alpha) <= _NEG_SERIES_RADIUS:
        return _series(alpha, z)
    return _negative_integral(alpha, -z)


def mittag_leffler(alpha: float, z):
    """Evaluate ``E_alpha(z)`` for real ``z`` (scalar or array).

    Relative accuracy is about 1e-12 on the negative axis and near machine
    precision for the series range.

    Raises
    ------
    UnsupportedDomainError
        For ``alpha`` outside ``(0, 1]``, complex ``z``, ``z > 20`` or
        overflow.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise UnsupportedDomainError(f"alpha must lie in (0, 1], got {alpha}")
    arr = np.asarray(z)
    if np.iscomplexobj(arr):
        raise UnsupportedDomainError("complex arguments are not supported")
    if not np.all(np.isfinite(arr)):
        raise UnsupportedDomainError("non-finite argument")
    if arr.ndim == 0:
        return _scalar(alpha, float(arr))
    flat = [_scalar(alpha, float(v)) for v in arr.ravel()]
    return np.array(flat).reshape(arr.shape)


def mittag_leffler_asymptotic(alpha: float, z: float, terms: int = 10) -> float:
    """Large negative ``z`` expansion ``-sum_{k>=1} z^{-k} / Gamma(1 - k alpha)``.

    Summation stops at the smallest term.  Omits exponentially small
    contributions, so it is only a cross-check for ``|z|`` large.
    """
    if z >= 0:
        raise UnsupportedDomainError("asymptotic expansion is for negative arguments")
    total = 0.0
    last = math.inf
    for k in range(1, terms + 1):
        term = -(z ** (-k)) * float(rgamma(1.0 - k * alpha))
        if term != 0.0 and abs(term) > last:
            break
        total += term
        if term != 0.0:
            last = abs(term)
    return total
