"""Implicit time stepping for Caputo fractional ODEs and convolution Volterra equations.

All solvers march the integral form

    u_n = u_0 + sum_{j=0}^{n-1} b_j f(t_{n-j}, u_{n-j}),   n >= 1,

with ``b = h^alpha a`` for fractional ODEs and ``b`` taken from
:class:`~cmfrac.schemes.VolterraWeights` for general kernels.  Each step
solves ``u_n - b_0 f(t_n, u_n) = rhs_n`` by Newton's method (analytic or
forward-difference Jacobian) or, on request, damped fixed-point iteration.  History sums are
computed directly, O(N^2) overall.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from .csvio import write_csv
from .schemes import SchemeWeights, VolterraVariant, VolterraWeights

__all__ = [
    "FODEProblem",
    "Trajectory",
    "StandardKernel",
    "SumKernel",
    "ExpKernel",
    "VolterraProblem",
    "StepFailureError",
    "EvaluationError",
    "SingularStepError",
    "solve_fode",
    "solve_linear_test",
    "solve_volterra",
    "solve_backward_euler",
    "num_steps",
]

RHS = Callable[[float, np.ndarray], np.ndarray]
JAC = Callable[[float, np.ndarray], np.ndarray]


class StepFailureError(RuntimeError):
    """The per-step nonlinear solve did not converge."""

    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


class EvaluationError(StepFailureError):
    """The right-hand side returned NaN or Inf."""


class SingularStepError(ZeroDivisionError):
    """``1 - lambda h^alpha a_0 = 0`` in the linear test recurrence."""


@dataclass(frozen=True)
class FODEProblem:
    """``D_c^alpha u = f(t, u)``, ``u(0) = u0`` on ``[0, T]``.

    ``lipschitz`` is optional; when given, the step-size condition
    ``h^alpha L a_0 < 1`` is checked and a warning is issued if it fails.
    """

    alpha: float
    f: RHS
    u0: np.ndarray
    T: float
    jacobian: Optional[JAC] = None
    lipschitz: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        u0 = np.atleast_1d(np.asarray(self.u0, dtype=float)).copy()
        if u0.ndim != 1:
            raise ValueError("u0 must be a scalar or a 1-D vector")
        u0.flags.writeable = False
        object.__setattr__(self, "u0", u0)
        if not self.T > 0:
            raise ValueError("T must be positive")

    @property
    def dim(self) -> int:
        return self.u0.size


@dataclass(frozen=True)
class Trajectory:
    """Solution on the uniform grid ``t_n = n h``.

    ``values`` has shape ``(N + 1, dim)``; it is complex for linear test runs
    with complex ``lambda``.
    """

    h: float
    times: np.ndarray
    values: np.ndarray
    scheme_kind: str = ""

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values differ in length")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def scalar(self) -> np.ndarray:
        """The single component of a ``dim == 1`` trajectory."""
        if self.dim != 1:
            raise ValueError(f"trajectory has dim {self.dim}, not a scalar")
        return self.values[:, 0]

    def norms(self) -> np.ndarray:
        """Euclidean norm of each state."""
        return np.linalg.norm(self.values, axis=1)

    def to_csv(self, path):
        cols = ["n", "t"]
        cplx = np.iscomplexobj(self.values)
        for i in range(self.dim):
            cols += [f"u_{i}_re", f"u_{i}_im"] if cplx else [f"u_{i}"]
        rows = []
        for n, (t, v) in enumerate(zip(self.times, self.values)):
            row = [n, float(t)]
            for x in v:
                row += [float(x.real), float(x.imag)] if cplx else [float(x)]
            rows.append(row)
        return write_csv(path, "trajectory", cols, rows)


def num_steps(T: float, h: float) -> int:
    """``ceil(T / h)``, tolerant of ``T / h`` landing just above an integer."""
    return int(math.ceil(T / h - 1e-9))


def _finite_or_raise(x: np.ndarray, step: int) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise EvaluationError(step, "right-hand side returned NaN or Inf")
    return x


def _eval(f, t, u, step):
    return _finite_or_raise(np.atleast_1d(np.asarray(f(t, u), dtype=float)), step)


def _fd_jacobian(f, t, u, fu, step):
    """Forward-difference Jacobian, one column per component."""
    J = np.empty((u.size, u.size))
    for i in range(u.size):
        du = 1.49e-8 * (1.0 + abs(u[i]))
        up = u.copy()
        up[i] += du
        J[:, i] = (_eval(f, t, up, step) - fu) / du
    return J


def _converged(g, u, tol):
    return np.linalg.norm(g) <= tol * (1.0 + np.linalg.norm(u))


def _newton(f, jac, t, u, rhs, c, step, max_iter, tol):
    eye = np.eye(u.size)
    fu = _eval(f, t, u, step)
    g = u - c * fu - rhs
    for _ in range(max_iter):
        if _converged(g, u, tol):
            return u, fu
        Jf = _fd_jacobian(f, t, u, fu, step) if jac is None else np.atleast_2d(np.asarray(jac(t, u), dtype=float))
        try:
            du = np.linalg.solve(eye - c * Jf, -g)
        except np.linalg.LinAlgError as exc:
            raise StepFailureError(step, f"singular Newton matrix ({exc})") from None
        u = u + du
        fu = _eval(f, t, u, step)
        g = u - c * fu - rhs
    if _converged(g, u, tol):
        return u, fu
    raise StepFailureError(step, f"Newton did not converge in {max_iter} iterations")


def _fixed_point(f, t, u, rhs, c, step, max_iter, tol):
    fu = _eval(f, t, u, step)
    g = u - c * fu - rhs
    res = np.linalg.norm(g)
    damping = 1.0
    for _ in range(max_iter):
        if _converged(g, u, tol):
            return u, fu
        trial = u - damping * g
        f_trial = _eval(f, t, trial, step)
        g_trial = trial - c * f_trial - rhs
        res_trial = np.linalg.norm(g_trial)
        if res_trial < res:
            u, fu, g, res = trial, f_trial, g_trial, res_trial
        else:
            # residual grew: halve the step and retry from the last iterate
            damping *= 0.5
    if _converged(g, u, tol):
        return u, fu
    raise StepFailureError(step, f"fixed-point iteration did not converge in {max_iter} iterations")


def _solve_step(f, jac, t, guess, rhs, c, step, max_iter, tol, method):
    """Solve ``u - c f(t, u) = rhs`` starting from ``guess``."""
    if method == "fixed_point":
        return _fixed_point(f, t, guess.copy(), rhs, c, step, max_iter, tol)
    return _newton(f, jac, t, guess.copy(), rhs, c, step, max_iter, tol)


def _march(f, jac, u0, b, h, n_steps, max_iter, tol, label, method):
    if method not in ("newton", "fixed_point"):
        raise ValueError(f"unknown method {method!r}")
    dim = u0.size
    times = h * np.arange(n_steps + 1)
    U = np.empty((n_steps + 1, dim))
    U[0] = u0
    # Frev[n_steps - k] = f_k so each history slice is contiguous
    Frev = np.empty((n_steps + 1, dim))
    f0 = _eval(f, 0.0, u0.copy(), 0)
    Frev[n_steps] = f0
    c = b[0]
    for n in range(1, n_steps + 1):
        hist = b[1:n] @ Frev[n_steps - n + 1 : n_steps] if n > 1 else 0.0
        rhs = u0 + hist
        U[n], fn = _solve_step(f, jac, times[n], U[n - 1], rhs, c, n, max_iter, tol, method)
        Frev[n_steps - n] = fn
    return Trajectory(h=h, times=times, values=U, scheme_kind=label)


def solve_fode(
    p: FODEProblem,
    w: SchemeWeights,
    h: float,
    *,
    method: str = "newton",
    max_iter: int = 50,
    tol: float = 1e-12,
) -> Trajectory:
    """Integrate a fractional ODE with the scheme ``w`` and step ``h``.

    Parameters
    ----------
    method : {"newton", "fixed_point"}
        ``newton`` uses ``p.jacobian`` when given and a forward-difference
        Jacobian otherwise.  ``fixed_point`` is Picard iteration with the
        step halved whenever the residual grows; it converges only when
        ``h^alpha a_0 L < 1`` and can be slow close to that bound.

    Raises
    ------
    StepFailureError
        If a step's nonlinear solve fails (the error carries ``.step``).
    """
    if not h > 0:
        raise ValueError("h must be positive")
    if abs(w.alpha - p.alpha) > 1e-14:
        raise ValueError(f"scheme order {w.alpha} does not match problem order {p.alpha}")
    n_steps = num_steps(p.T, h)
    if n_steps > len(w.a):
        raise ValueError(f"need {n_steps} weights, scheme has {len(w.a)}")
    if p.lipschitz is not None and h**p.alpha * p.lipschitz * w.a[0] >= 1.0:
        warnings.warn(
            f"h^alpha L a_0 = {h ** p.alpha * p.lipschitz * w.a[0]:.3g} >= 1; "
            "comparison and monotonicity guarantees do not apply",
            RuntimeWarning,
            stacklevel=2,
        )
    b = h**p.alpha * np.asarray(w.a[:n_steps])
    return _march(p.f, p.jacobian, p.u0, b, h, n_steps, max_iter, tol, w.label, method)


def solve_linear_test(
    alpha: float, lam: complex, w: SchemeWeights, h: float, N: int, u0: complex = 1.0
) -> Trajectory:
    """Exact recurrence for ``D_c^alpha u = lam u``.

    ``u_n = (u_0 + z sum_{j=1}^{n-1} a_j u_{n-j}) / (1 - z a_0)`` with
    ``z = lam h^alpha``.  The trajectory is real when ``lam`` and ``u0`` are
    real, complex otherwise.
    """
    if abs(w.alpha - alpha) > 1e-14:
        raise ValueError(f"scheme order {w.alpha} does not match alpha={alpha}")
    if N > len(w.a):
        raise ValueError(f"need {N} weights, scheme has {len(w.a)}")
    z = lam * h**alpha
    denom = 1.0 - z * w.a[0]
    if denom == 0:
        raise SingularStepError("1 - lambda h^alpha a_0 = 0")
    cplx = np.iscomplexobj(np.asarray(lam)) or np.iscomplexobj(np.asarray(u0))
    dtype = complex if cplx else float
    a = np.asarray(w.a[:N], dtype=float)
    u = np.empty(N + 1, dtype=dtype)
    rev = np.empty(N + 1, dtype=dtype)
    u[0] = u0
    rev[N] = u0
    inv = 1.0 / denom
    for n in range(1, N + 1):
        hist = np.dot(a[1:n], rev[N - n + 1 : N]) if n > 1 else 0.0
        u[n] = (u0 + z * hist) * inv
        rev[N - n] = u[n]
    return Trajectory(h=h, times=h * np.arange(N + 1), values=u[:, None], scheme_kind=w.label)


def solve_backward_euler(
    f: RHS,
    u0,
    T: float,
    h: float,
    *,
    jacobian: Optional[JAC] = None,
    max_iter: int = 50,
    tol: float = 1e-12,
) -> Trajectory:
    """Implicit Euler for the integer-order problem ``u' = f(t, u)``.

    This is the ``alpha = 1`` member of the family: ``a = (1, 1, 1, ...)``.
    """
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    n_steps = num_steps(T, h)
    b = np.full(n_steps, float(h))
    return _march(f, jacobian, u0, b, h, n_steps, max_iter, tol, "backward_euler", "newton")


# ---------------------------------------------------------------------------
# Volterra equations


@dataclass(frozen=True)
class StandardKernel:
    """``k(t) = t^{alpha-1} / Gamma(alpha)``."""

    alpha: float


@dataclass(frozen=True)
class SumKernel:
    """``k(t) = sum_i c_i t^{alpha_i - 1} / Gamma(alpha_i)``."""

    terms: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        for c, al in self.terms:
            if not (c > 0 and 0 < al < 1):
                raise ValueError(f"invalid kernel term (c={c}, alpha={al})")


@dataclass(frozen=True)
class ExpKernel:
    """``k(t) = t^{alpha-1} e^{-gamma t} / Gamma(alpha)``."""

    alpha: float
    gamma: float

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")


Kernel = Union[StandardKernel, SumKernel, ExpKernel]


@dataclass(frozen=True)
class VolterraProblem:
    """``u(t) = u0 + int_0^t k(t - s) f(s, u(s)) ds`` on ``[0, T]``."""

    kernel: Kernel
    f: RHS
    u0: np.ndarray
    T: float
    jacobian: Optional[JAC] = None

    def __post_init__(self):
        u0 = np.atleast_1d(np.asarray(self.u0, dtype=float)).copy()
        u0.flags.writeable = False
        object.__setattr__(self, "u0", u0)


def _check_kernel_match(kernel: Kernel, vw: VolterraWeights):
    if isinstance(kernel, ExpKernel):
        ok = vw.variant is not VolterraVariant.SUM_OF_STANDARD and math.isclose(
            vw.alpha, kernel.alpha, abs_tol=1e-14
        ) and math.isclose(vw.gamma, kernel.gamma, abs_tol=1e-14)
    elif isinstance(kernel, StandardKernel):
        ok = (
            vw.variant is not VolterraVariant.SUM_OF_STANDARD
            and math.isclose(vw.alpha, kernel.alpha, abs_tol=1e-14)
            and vw.gamma == 0.0
        ) or (vw.terms == ((1.0, float(kernel.alpha)),))
    else:
        ok = vw.terms == tuple((float(c), float(a)) for c, a in kernel.terms)
    if not ok:
        raise ValueError(f"weights {vw.variant.value} do not match kernel {kernel}")


def solve_volterra(
    p: VolterraProblem,
    vw: VolterraWeights,
    *,
    method: str = "newton",
    max_iter: int = 50,
    tol: float = 1e-12,
) -> Trajectory:
    """March ``u_n = u_0 + sum_{j<n} b_j f_{n-j}`` with the kernel weights ``vw``."""
    _check_kernel_match(p.kernel, vw)
    n_steps = num_steps(p.T, vw.h)
    if n_steps > len(vw.b):
        raise ValueError(f"need {n_steps} weights, have {len(vw.b)}")
    return _march(
        p.f, p.jacobian, p.u0, np.asarray(vw.b[:n_steps]), vw.h, n_steps, max_iter, tol, vw.variant.value, method
    )
