"""Linear stability of convolution schemes for ``D_c^alpha u = lambda u``.

The complement of the stability region (with ``h = 1``) is the image of the
closed unit disk under ``F_omega``.  Its boundary is traced by sampling
``F_omega(e^{i theta})``, and the largest ``|arg F_omega|`` over the circle
bounds the same quantity over the disk.  Because ``F_omega`` is evaluated from
a truncated series, the truncation error on ``|F_omega|`` is about
``sum_{n>=N} |omega_n| = O(N^-alpha)``; near ``theta = 0`` where
``F_omega -> 0`` the relative error grows, so use long weight sequences when
the cusp matters.

Empirical classification runs the exact linear recurrence and inspects the
tail of ``|u_n|``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .csvio import write_csv
from .schemes import SchemeWeights
from .solver import solve_linear_test

__all__ = [
    "StabilityLocus",
    "StabilityReport",
    "WedgeProbe",
    "boundary_locus",
    "max_arg",
    "instability_radius",
    "is_stable_empirical",
    "classify_grid",
    "write_grid_csv",
    "wedge_probe",
]


@dataclass(frozen=True)
class StabilityLocus:
    """Samples of ``F_omega(e^{i theta})`` at ``theta_k = 2 pi k / resolution``, ``k >= 1``."""

    alpha: float
    scheme_kind: str
    theta: np.ndarray
    values: np.ndarray
    resolution: int

    def __len__(self) -> int:
        return self.theta.size

    def to_csv(self, path):
        rows = [(float(t), float(v.real), float(v.imag)) for t, v in zip(self.theta, self.values)]
        return write_csv(path, "stability_locus", ["theta", "re", "im"], rows)


def boundary_locus(w: SchemeWeights, resolution: int = 4096) -> StabilityLocus:
    """Sample the stability boundary of ``w``.

    ``sum_n omega_n e^{2 pi i n k / M}`` only depends on ``omega`` folded
    modulo ``M``, so all ``M - 1`` samples come from one inverse FFT of
    length ``M = resolution``.

    Truncating ``omega`` at ``N`` terms corrupts ``F_omega`` within about
    ``2 pi / N`` of ``theta = 0``.  The first sample sits at ``2 pi / M``, so
    ``resolution <= len(w.omega)`` keeps the locus outside that band; larger
    resolutions raise a ``RuntimeWarning`` and can overstate ``max_arg``.
    """
    M = int(resolution)
    if M < 4:
        raise ValueError("resolution must be at least 4")
    om = np.asarray(w.omega, dtype=float)
    if M > om.size:
        warnings.warn(
            f"resolution {M} exceeds the {om.size} weights; samples near theta = 0 "
            "are dominated by truncation error",
            RuntimeWarning,
            stacklevel=2,
        )
    pad = (-om.size) % M
    folded = np.concatenate([om, np.zeros(pad)]).reshape(-1, M).sum(axis=0)
    F = M * np.fft.ifft(folded)
    k = np.arange(1, M)
    return StabilityLocus(
        alpha=w.alpha,
        scheme_kind=w.label,
        theta=2.0 * np.pi * k / M,
        values=F[1:],
        resolution=M,
    )


def max_arg(locus: StabilityLocus) -> float:
    """``max |arg F_omega|`` over the sampled boundary."""
    if len(locus) == 0:
        raise ValueError("empty locus")
    return float(np.max(np.abs(np.angle(locus.values))))


def instability_radius(locus: StabilityLocus) -> float:
    """``max |F_omega|`` on the circle; the instability set lies inside this disk."""
    return float(np.max(np.abs(locus.values)))


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of an empirical stability run.

    ``exponent`` and ``prefactor`` describe a least-squares fit
    ``env_n ~ prefactor * n^exponent`` of the running tail maximum
    ``env_n = max_{m >= n} |u_m|`` over the last quartile.
    """

    stable: bool
    tail_max: float
    exponent: float
    prefactor: float
    reason: str
    lam: complex
    h: float
    N: int


def _tail_envelope_fit(mag: np.ndarray):
    N = mag.size - 1
    env = np.maximum.accumulate(mag[::-1])[::-1]
    lo = max(1, (3 * N) // 4)
    idx = np.unique(np.geomspace(lo, N, 64).astype(int))
    y = env[idx]
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        return -math.inf if np.all(y == 0) else math.inf, 0.0
    slope, icept = np.polyfit(np.log(idx), np.log(y), 1)
    return float(slope), float(math.exp(icept))


def is_stable_empirical(
    alpha: float, lam: complex, w: SchemeWeights, h: float, N: int, u0: complex = 1.0
) -> StabilityReport:
    """Classify ``lam`` by running the linear test recurrence for ``N`` steps.

    Stable when ``max_{N/2 <= n <= N} |u_n| < 1e-2 |u_0|``, or when the tail
    envelope decays with fitted power-law exponent ``<= -alpha/2``.  The
    envelope (running maximum from the right) is non-increasing by
    construction, which makes the test robust to oscillating solutions.
    """
    if N < 2048:
        raise ValueError("N must be at least 2048 for a meaningful tail")
    with np.errstate(over="ignore", invalid="ignore"):
        # unstable runs may overflow; that is reported, not warned about
        traj = solve_linear_test(alpha, complex(lam), w, h, N, u0)
    mag = np.abs(traj.scalar)
    tail_max = float(np.max(mag[N // 2 :]))
    exponent, prefactor = _tail_envelope_fit(mag)
    if not np.isfinite(tail_max):
        return StabilityReport(False, tail_max, exponent, prefactor, "overflow", complex(lam), h, N)
    if tail_max < 1e-2 * abs(u0):
        return StabilityReport(True, tail_max, exponent, prefactor, "tail below 1e-2", complex(lam), h, N)
    if exponent <= -alpha / 2:
        return StabilityReport(True, tail_max, exponent, prefactor, "power-law decay", complex(lam), h, N)
    return StabilityReport(False, tail_max, exponent, prefactor, "no decay", complex(lam), h, N)


def classify_grid(alpha: float, lams: Sequence[complex], w: SchemeWeights, h: float, N: int) -> List[StabilityReport]:
    return [is_stable_empirical(alpha, lam, w, h, N) for lam in lams]


def write_grid_csv(path, reports: Sequence[StabilityReport]):
    rows = [(float(r.lam.real), float(r.lam.imag), bool(r.stable)) for r in reports]
    return write_csv(path, "stability_grid", ["re_lambda", "im_lambda", "stable"], rows)


@dataclass(frozen=True)
class WedgeProbe:
    """Stability classification of ``z = r e^{i phi}`` on a polar grid.

    ``stable[i, j]`` refers to ``radii[i]`` and ``angles[j]``.
    ``boundary[i]`` is the midpoint between the largest unstable angle and the
    smallest stable angle above it, or NaN when the grid does not bracket a
    transition.
    """

    radii: np.ndarray
    angles: np.ndarray
    stable: np.ndarray
    boundary: np.ndarray
    N: int


def _bracket(angles: np.ndarray, row: np.ndarray) -> float:
    unstable = np.flatnonzero(~row)
    if unstable.size == 0 or unstable[-1] == row.size - 1:
        return math.nan
    j = unstable[-1]
    if not row[j + 1 :].all():
        return math.nan
    return 0.5 * (angles[j] + angles[j + 1])


def wedge_probe(
    alpha: float,
    w: SchemeWeights,
    radius_list: Sequence[float],
    angle_grid: Sequence[float],
    N: int = 32768,
) -> WedgeProbe:
    """Probe the stability region near the origin with ``h = 1``, ``lambda = z``.

    Angles are measured from the positive real axis in ``[0, pi]``; the
    region is symmetric about the real axis.  Small radii need long runs
    because the growth rate of unstable modes scales like ``r^{1/alpha}``.
    """
    radii = np.asarray(radius_list, dtype=float)
    angles = np.sort(np.asarray(angle_grid, dtype=float))
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    if len(w) < N:
        raise ValueError(f"need {N} weights, scheme has {len(w)}")
    grid = np.zeros((radii.size, angles.size), dtype=bool)
    for i, r in enumerate(radii):
        for j, phi in enumerate(angles):
            grid[i, j] = is_stable_empirical(alpha, r * np.exp(1j * phi), w, 1.0, N).stable
    boundary = np.array([_bracket(angles, grid[i]) for i in range(radii.size)])
    return WedgeProbe(radii, angles, grid, boundary, N)
