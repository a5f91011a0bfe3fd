"""Post-hoc measurements on computed trajectories.

Monotonicity classification, ordering checks, the discrete Caputo derivative
and the energy inequality it satisfies, local truncation errors, convergence
tables and algebraic decay fits.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .csvio import write_csv
from .schemes import SchemeWeights
from .solver import FODEProblem, Trajectory, num_steps, solve_fode

__all__ = [
    "Direction",
    "MonotonicityReport",
    "ConvergenceTable",
    "monotonicity_report",
    "verify_ordering",
    "discrete_caputo",
    "energy_inequality_gap",
    "truncation_error",
    "convergence_table",
    "decay_rate_fit",
]

MONO_RTOL = 1e-13


class Direction(str, enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    CONSTANT = "constant"
    NONMONOTONE = "nonmonotone"


@dataclass(frozen=True)
class MonotonicityReport:
    """Sign pattern of consecutive differences.

    ``first_break`` is the first index ``n`` whose step ``u_{n+1} - u_n``
    opposes the direction set by the first significant step;
    ``max_violation`` is the largest such opposing step (0 when monotone).
    ``strict`` is true when every step exceeds the tolerance in magnitude.
    """

    direction: Direction
    first_break: Optional[int]
    max_violation: float
    strict: bool
    tolerance: float

    @property
    def is_monotone(self) -> bool:
        return self.direction is not Direction.NONMONOTONE


def _scalar_values(x: Union[Trajectory, np.ndarray, Sequence[float]]) -> np.ndarray:
    if isinstance(x, Trajectory):
        if x.dim != 1:
            raise ValueError("monotonicity is a scalar property; pass a norm sequence for systems")
        vals = x.scalar
    else:
        vals = np.asarray(x)
        if vals.ndim == 2 and vals.shape[1] == 1:
            vals = vals[:, 0]
        if vals.ndim != 1:
            raise ValueError("monotonicity is a scalar property; pass a norm sequence for systems")
    if np.iscomplexobj(vals):
        raise TypeError("monotonicity is defined for real sequences")
    return np.asarray(vals, dtype=float)


def monotonicity_report(traj: Union[Trajectory, np.ndarray, Sequence[float]]) -> MonotonicityReport:
    """Classify a scalar trajectory (or any real 1-D sequence).

    Steps with ``|u_{n+1} - u_n| <= 1e-13 max|u|`` count as flat.
    """
    u = _scalar_values(traj)
    scale = float(np.max(np.abs(u))) if u.size else 0.0
    tol = MONO_RTOL * (scale if scale > 0 else 1.0)
    d = np.diff(u)
    if d.size == 0 or np.all(np.abs(d) <= tol):
        return MonotonicityReport(Direction.CONSTANT, None, 0.0, False, tol)
    strict = bool(np.all(np.abs(d) > tol))
    first_sig = d[np.flatnonzero(np.abs(d) > tol)[0]]
    sign = 1.0 if first_sig > 0 else -1.0
    opposing = np.flatnonzero(sign * d < -tol)
    if opposing.size == 0:
        direction = Direction.INCREASING if sign > 0 else Direction.DECREASING
        return MonotonicityReport(direction, None, 0.0, strict, tol)
    return MonotonicityReport(
        Direction.NONMONOTONE, int(opposing[0]), float(np.max(-sign * d[opposing])), False, tol
    )


def verify_ordering(tA: Trajectory, tB: Trajectory, rtol: float = 1e-12) -> bool:
    """True iff ``tA[n] <= tB[n] + rtol * scale`` for every ``n``."""
    if tA.dim != 1 or tB.dim != 1:
        raise ValueError("ordering is checked for scalar trajectories")
    if len(tA) != len(tB) or not np.allclose(tA.times, tB.times, rtol=0, atol=1e-14 * max(1.0, tA.times[-1])):
        raise ValueError("trajectories live on different grids")
    a, b = tA.scalar, tB.scalar
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
    return bool(np.all(a <= b + rtol * scale))


def discrete_caputo(w: SchemeWeights, values, h: float) -> np.ndarray:
    """``h^-alpha sum_{j=0}^n omega_j (u_{n-j} - u_0)`` for every grid index ``n``.

    ``values`` has shape ``(M,)`` or ``(M, dim)``; the result has the same
    shape (row 0 is zero).
    """
    v = np.asarray(values)
    M = v.shape[0]
    if M > len(w.omega):
        raise ValueError(f"need {M} weights, scheme has {len(w.omega)}")
    om = np.asarray(w.omega[:M])
    dv = v - v[0]
    if dv.ndim == 1:
        out = np.convolve(om, dv)[:M]
    else:
        out = np.stack([np.convolve(om, dv[:, i])[:M] for i in range(dv.shape[1])], axis=1)
    return out / h**w.alpha


def energy_inequality_gap(w: SchemeWeights, traj: Trajectory) -> Tuple[np.ndarray, float]:
    """``D_h(|u|^2)_n - 2 u_n . D_h(u)_n`` for ``n >= 1`` and its natural scale.

    The inequality ``D_h E(u_n) <= grad E(u_n) . D_h u_n`` holds for convex
    ``E`` when ``omega_0 > 0`` and ``omega_j <= 0``; here ``E = |u|^2``.  The
    returned scale is ``h^-alpha omega_0 max|u|^2``, the size of the largest
    individual term.
    """
    U = np.asarray(traj.values)
    if np.iscomplexobj(U):
        raise TypeError("energy inequality is checked on real trajectories")
    E = np.sum(U * U, axis=1)
    dE = discrete_caputo(w, E, traj.h)
    dU = discrete_caputo(w, U, traj.h)
    gap = dE - 2.0 * np.sum(U * dU, axis=1)
    scale = w.omega[0] / traj.h**w.alpha * float(np.max(E))
    return gap[1:], scale


def truncation_error(w: SchemeWeights, exact_u, f_on_grid, h: float) -> np.ndarray:
    """Local truncation error ``r_n = D_h^alpha u(t_n) - f(t_n, u(t_n))``.

    ``r_0`` is set to zero: the scheme never updates ``n = 0``.
    """
    u = np.asarray(exact_u, dtype=float)
    f = np.asarray(f_on_grid, dtype=float)
    if u.shape != f.shape:
        raise ValueError("exact_u and f_on_grid must be aligned")
    r = discrete_caputo(w, u, h) - f
    r[0] = 0.0
    return r


@dataclass(frozen=True)
class ConvergenceTable:
    """Sup-norm errors against a reference.

    ``observed_orders[i]`` compares rows ``i`` and ``i + 1``:
    ``log(e_i / e_{i+1}) / log(h_i / h_{i+1})``.
    """

    h_list: np.ndarray
    errors: np.ndarray
    observed_orders: np.ndarray

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.errors) < 0))

    def to_csv(self, path):
        rows = []
        for i, (h, e) in enumerate(zip(self.h_list, self.errors)):
            order = "" if i == 0 else float(self.observed_orders[i - 1])
            rows.append((float(h), float(e), order))
        return write_csv(path, "convergence", ["h", "error", "observed_order"], rows)


def _orders(h: np.ndarray, e: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])


def convergence_table(
    p: FODEProblem,
    w_factory: Callable[[int], SchemeWeights],
    h_list: Sequence[float],
    reference: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ref_ratio: int = 8,
) -> ConvergenceTable:
    """Errors ``sup_{nh <= T} |u(t_n) - u_n|`` for each step in ``h_list``.

    Parameters
    ----------
    w_factory : callable
        ``N -> SchemeWeights`` with at least ``N`` weights.
    reference : callable, optional
        Exact solution on an array of times, returning shape ``(M,)`` or
        ``(M, dim)``.  Without it a self-reference is computed at
        ``h_ref = min(h_list) / ref_ratio``; every ``h`` must then be an
        integer multiple of ``h_ref``.
    """
    hs = np.asarray(h_list, dtype=float)
    if hs.size == 0 or np.any(hs <= 0) or np.any(np.diff(hs) >= 0):
        raise ValueError("h_list must be positive and strictly decreasing")
    ref_traj = None
    if reference is None:
        h_ref = hs[-1] / ref_ratio
        ref_traj = solve_fode(p, w_factory(num_steps(p.T, h_ref)), h_ref)
    errors = []
    for h in hs:
        N = num_steps(p.T, h)
        traj = solve_fode(p, w_factory(N), h)
        keep = traj.times <= p.T * (1 + 1e-12)
        U = traj.values[keep]
        if ref_traj is None:
            R = np.asarray(reference(traj.times[keep]), dtype=float).reshape(U.shape)
        else:
            stride = h / ref_traj.h
            if abs(stride - round(stride)) > 1e-9:
                raise ValueError(f"h={h} is not a multiple of the reference step {ref_traj.h}")
            R = ref_traj.values[:: int(round(stride))][: U.shape[0]]
        errors.append(float(np.max(np.linalg.norm(U - R, axis=1))))
    e = np.array(errors)
    return ConvergenceTable(hs, e, _orders(hs, e))


def decay_rate_fit(
    traj: Union[Trajectory, np.ndarray, Sequence[float]], window: Optional[Tuple[int, int]] = None
) -> Tuple[float, float]:
    """Fit ``u_n ~ prefactor * n^exponent`` by least squares in log-log space.

    Parameters
    ----------
    window : (start, stop), optional
        Inclusive index range; every index is used.  The default is the last
        half ``[N/2, N]`` subsampled at 64 log-spaced indices.

    Returns
    -------
    exponent, prefactor : float
    """
    u = _scalar_values(traj)
    N = u.size - 1
    if window is None:
        idx = np.unique(np.geomspace(max(1, N // 2), N, 64).astype(int))
    else:
        start, stop = int(window[0]), int(window[1])
        if not 1 <= start < stop <= N:
            raise ValueError(f"window {window} must satisfy 1 <= start < stop <= {N}")
        idx = np.arange(start, stop + 1)
    y = u[idx]
    if np.any(y <= 0):
        raise ValueError("decay fit needs strictly positive values on the window")
    slope, icept = np.polyfit(np.log(idx), np.log(y), 1)
    return float(slope), float(math.exp(icept))
