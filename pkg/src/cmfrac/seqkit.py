"""Sequence algebra for convolution-type schemes.

Sequences are finite prefixes ``v = (v_0, ..., v_{N-1})`` stored as 1-D float
arrays.  Everything here is a pure function: convolution, convolution inverse,
generating-function evaluation, the Miller power recurrence, the discrete
resolvent, and a finite-depth complete-monotonicity check.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

__all__ = [
    "CMReport",
    "SingularSequenceError",
    "as_seq",
    "delta",
    "convolve",
    "conv_inverse",
    "check_cm",
    "miller_power",
    "eval_generating",
    "resolvent",
]


class SingularSequenceError(ValueError):
    """Raised when a sequence with zero leading term has to be inverted."""


def as_seq(values, name: str = "sequence") -> np.ndarray:
    """Validate ``values`` and return them as a read-only float array."""
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    arr.flags.writeable = False
    return arr


def delta(n: int) -> np.ndarray:
    """Prefix of length ``n`` of the convolution identity ``(1, 0, 0, ...)``."""
    d = np.zeros(n)
    d[0] = 1.0
    return d


def convolve(u, v) -> np.ndarray:
    """Truncated discrete convolution.

    Entry ``n`` is ``sum_{j<=n} u_j v_{n-j}``; the result has length
    ``min(len(u), len(v))``.
    """
    u = as_seq(u, "u")
    v = as_seq(v, "v")
    n = min(u.size, v.size)
    return np.convolve(u[:n], v[:n])[:n]


def conv_inverse(w) -> np.ndarray:
    """Convolution inverse of ``w`` by forward substitution.

    Returns ``a`` of the same length with ``w * a = (1, 0, 0, ...)``.

    Raises
    ------
    SingularSequenceError
        If ``w[0] == 0``.
    """
    w = as_seq(w, "w")
    if w[0] == 0.0:
        raise SingularSequenceError("leading term is zero; sequence has no convolution inverse")
    n = w.size
    a = np.zeros(n)
    a[0] = 1.0 / w[0]
    # reversed buffer keeps the history slice contiguous
    rev = np.zeros(n)
    rev[n - 1] = a[0]
    for k in range(1, n):
        a[k] = -a[0] * np.dot(w[1 : k + 1], rev[n - k : n])
        rev[n - 1 - k] = a[k]
    return a


@dataclass(frozen=True)
class CMReport:
    """Outcome of a finite-depth complete-monotonicity check.

    ``min_difference`` is the most negative iterated difference divided by
    ``scale = max|v|``; multiply by ``scale`` for the raw value.
    ``first_violation`` is the ``(j, k)`` pair with smallest ``j`` (then
    ``k``) whose normalized difference is below ``-tolerance``, and
    ``violation_value`` is the raw (unnormalized) difference there.
    """

    is_cm: bool
    depth_checked: int
    span_checked: int
    min_difference: float
    first_violation: Optional[Tuple[int, int]]
    tolerance: float
    scale: float
    argmin: Tuple[int, int]
    violation_value: Optional[float] = None

    @property
    def raw_min_difference(self) -> float:
        return self.min_difference * self.scale


def _two_diff(a: np.ndarray, b: np.ndarray):
    """Error-free ``a - b = s + e``."""
    s = a - b
    bb = s - a
    e = (a - (s - bb)) - (b + bb)
    return s, e


def check_cm(v, max_depth: int = 20, tol: float = 1e-8) -> CMReport:
    """Check ``((I - E)^j v)_k >= 0`` for ``0 <= j <= max_depth``.

    Iterated differences are carried in double-double form (a high part plus
    its rounding error), so the differencing itself adds no roundoff beyond
    ~1e-32 relative; what remains is the rounding already present in ``v``.
    Depth is capped at ``len(v) - 1``.

    Parameters
    ----------
    v : array_like
        Real sequence.  Complex input is rejected.
    max_depth : int
        Largest difference order ``j`` to examine.
    tol : float
        Tolerance applied to differences normalized by ``max|v|``.
    """
    if np.iscomplexobj(np.asarray(v)):
        raise TypeError("complete monotonicity is a property of real sequences")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    v = as_seq(v, "v")
    depth = min(max_depth, v.size - 1)
    scale = float(np.max(np.abs(v)))
    if scale == 0.0:
        return CMReport(True, depth, v.size - 1, 0.0, None, tol, 0.0, (0, 0))

    hi = v.copy()
    lo = np.zeros_like(hi)
    min_diff = np.inf
    argmin = (0, 0)
    first = None
    first_val = None
    for j in range(depth + 1):
        if j > 0:
            s, e = _two_diff(hi[:-1], hi[1:])
            e = e + (lo[:-1] - lo[1:])
            hi = s + e
            lo = e - (hi - s)
        vals = (hi + lo) / scale
        k = int(np.argmin(vals))
        if vals[k] < min_diff:
            min_diff = float(vals[k])
            argmin = (j, k)
        if first is None:
            bad = np.flatnonzero(vals < -tol)
            if bad.size:
                first = (j, int(bad[0]))
                first_val = float(hi[bad[0]] + lo[bad[0]])
    return CMReport(
        is_cm=first is None,
        depth_checked=depth,
        span_checked=v.size - 1,
        min_difference=min_diff,
        first_violation=first,
        tolerance=tol,
        scale=scale,
        argmin=argmin,
        violation_value=first_val,
    )


def miller_power(c, alpha: float) -> np.ndarray:
    """Coefficients of ``(sum_j c_j z^j) ** alpha`` for a series with ``c_0 = 1``.

    Uses ``v_n = sum_{j=1}^{n} ((alpha + 1) j / n - 1) c_j v_{n-j}``.  When only
    ``c_1`` is nonzero the recurrence collapses to a running product, which is
    evaluated with ``cumprod``.
    """
    c = as_seq(c, "c")
    if c[0] != 1.0:
        raise ValueError(f"leading coefficient must be 1, got {c[0]!r}")
    n = c.size
    v = np.zeros(n)
    v[0] = 1.0
    if n == 1:
        return v
    nz = np.flatnonzero(c[1:]) + 1
    if nz.size == 0:
        return v
    if nz.size == 1 and nz[0] == 1:
        k = np.arange(1, n, dtype=float)
        v[1:] = np.cumprod(((alpha + 1.0) / k - 1.0) * c[1])
        return v
    cj = c[nz]
    jcj = nz * cj
    for m in range(1, n):
        idx = nz <= m
        if not idx.any():
            continue
        hist = v[m - nz[idx]]
        v[m] = (alpha + 1.0) / m * np.dot(jcj[idx], hist) - np.dot(cj[idx], hist)
    return v


def eval_generating(v, z):
    """Evaluate the truncated generating function ``sum_n v_n z^n`` by Horner.

    ``z`` may be a scalar or an array of points.
    """
    v = as_seq(v, "v")
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        # plain Python complex arithmetic is much faster than 0-d arrays
        zs = complex(z)
        acc = 0j
        for coef in reversed(v.tolist()):
            acc = acc * zs + coef
        return acc
    acc = np.zeros_like(z)
    for coef in v[::-1]:
        acc = acc * z + coef
    return acc


def resolvent(a, lam: float) -> np.ndarray:
    """Discrete resolvent ``b`` solving ``b + lam (a * b) = lam a``.

    ``b_0 = lam a_0 / (1 + lam a_0)``; later terms by forward substitution.
    """
    a = as_seq(a, "a")
    if not lam > 0:
        raise ValueError("lam must be positive")
    if a[0] < 0:
        raise ValueError("a_0 must be nonnegative")
    n = a.size
    b = np.zeros(n)
    denom = 1.0 + lam * a[0]
    rev = np.zeros(n)
    b[0] = lam * a[0] / denom
    rev[n - 1] = b[0]
    for k in range(1, n):
        b[k] = lam * (a[k] - np.dot(a[1 : k + 1], rev[n - k : n])) / denom
        rev[n - 1 - k] = b[k]
    return b
