"""Time-fractional advection-diffusion on the unit interval.

Central differences in space give the semi-discrete system
``D_t^alpha U = -L U`` with

    (L u)_j = d (u_{j+1} - u_{j-1}) / (2 dx) - D (u_{j+1} - 2 u_j + u_{j-1}) / dx^2.

The periodic grid is ``x_j = j dx`` for ``j = 1..Nx`` with ``dx = 1/Nx``.  A
homogeneous Dirichlet variant (pure diffusion, interior nodes
``x_j = j dx``, ``j = 1..Nx-1``) is available for ``d = 0``.  Time stepping
uses the ``omega`` form of a convolution scheme with one cached LU
factorization.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft as sfft
from scipy.linalg import lu_factor, lu_solve

from .csvio import write_csv
from .mlf import UnsupportedDomainError, mittag_leffler
from .schemes import SchemeWeights
from .solver import Trajectory

__all__ = [
    "AdvDiffOperator",
    "eigenvalues_advdiff",
    "solve_subdiffusion",
    "spectral_reference",
    "write_field_csv",
    "write_eigen_csv",
]


@dataclass(frozen=True)
class AdvDiffOperator:
    """Central-difference advection-diffusion operator ``L``."""

    d: float
    D: float
    Nx: int
    boundary: str = "periodic"

    def __post_init__(self):
        if int(self.Nx) != self.Nx or self.Nx < 3:
            raise ValueError("Nx must be an integer >= 3")
        if not self.D > 0:
            raise ValueError("D must be positive")
        if self.boundary not in ("periodic", "dirichlet"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.boundary == "dirichlet" and self.d != 0:
            raise ValueError("the Dirichlet variant is pure diffusion (d = 0)")

    @property
    def dx(self) -> float:
        return 1.0 / self.Nx

    @property
    def size(self) -> int:
        return self.Nx if self.boundary == "periodic" else self.Nx - 1

    @property
    def x(self) -> np.ndarray:
        return self.dx * np.arange(1, self.size + 1)

    @cached_property
    def matrix(self) -> np.ndarray:
        n, dx = self.size, self.dx
        diag = 2.0 * self.D / dx**2
        up = self.d / (2.0 * dx) - self.D / dx**2
        lo = -self.d / (2.0 * dx) - self.D / dx**2
        L = np.diag(np.full(n, diag)) + np.diag(np.full(n - 1, up), 1) + np.diag(np.full(n - 1, lo), -1)
        if self.boundary == "periodic":
            L[-1, 0] += up
            L[0, -1] += lo
        L.flags.writeable = False
        return L

    def action(self, u) -> np.ndarray:
        u = np.asarray(u)
        if u.shape != (self.size,):
            raise ValueError(f"field must have shape ({self.size},)")
        return self.matrix @ u

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues ``lambda`` of ``-L``, ordered by mode number."""
        if self.boundary == "periodic":
            return eigenvalues_advdiff(self.d, self.D, self.Nx)
        k = np.arange(1, self.Nx)
        return 2.0 * self.D / self.dx**2 * (np.cos(np.pi * k * self.dx) - 1.0) + 0j


def eigenvalues_advdiff(d: float, D: float, Nx: int) -> np.ndarray:
    """``lambda_j = 2D/dx^2 (cos(2 pi j dx) - 1) - i d/dx sin(2 pi j dx)``, ``j = 1..Nx``."""
    if int(Nx) != Nx or Nx < 3:
        raise ValueError("Nx must be an integer >= 3")
    dx = 1.0 / Nx
    th = 2.0 * np.pi * np.arange(1, Nx + 1) * dx
    re = 2.0 * D / dx**2 * (np.cos(th) - 1.0)
    im = -d / dx * np.sin(th)
    # make the j = Nx mode exactly zero (cos(2 pi) rounds to 1, sin does not vanish)
    im[-1] = 0.0
    re[-1] = 0.0
    return re + 1j * im


def solve_subdiffusion(op: AdvDiffOperator, u0_field, w: SchemeWeights, h: float, N: int) -> Trajectory:
    """March ``h^-alpha sum_j omega_j (U^{n-j} - U^0) + L U^n = 0``.

    With ``V^n = U^n - U^0`` each step solves
    ``(omega_0 h^-alpha I + L) V^n = -L U^0 - h^-alpha sum_{j=1}^{n-1} omega_j V^{n-j}``.
    """
    u0 = np.asarray(u0_field, dtype=float)
    if u0.shape != (op.size,):
        raise ValueError(f"initial field must have shape ({op.size},)")
    if N > len(w.omega) - 1:
        raise ValueError(f"need {N + 1} weights, scheme has {len(w.omega)}")
    if not h > 0:
        raise ValueError("h must be positive")
    c = h ** (-w.alpha)
    om = np.asarray(w.omega[: N + 1])
    M = c * om[0] * np.eye(op.size) + op.matrix
    lu = lu_factor(M, check_finite=True)
    assert np.all(np.abs(np.diag(lu[0])) > 0), "step matrix is singular"
    Lu0 = op.matrix @ u0
    Vrev = np.zeros((N + 1, op.size))  # Vrev[N - k] = V^k
    U = np.empty((N + 1, op.size))
    U[0] = u0
    for n in range(1, N + 1):
        hist = om[1:n] @ Vrev[N - n + 1 : N] if n > 1 else 0.0
        V = lu_solve(lu, -Lu0 - c * hist)
        Vrev[N - n] = V
        U[n] = u0 + V
    return Trajectory(h=h, times=h * np.arange(N + 1), values=U, scheme_kind=w.label)


def spectral_reference(op: AdvDiffOperator, u0_field, alpha: float, t: float) -> np.ndarray:
    """Exact semi-discrete solution ``sum_k z_k E_alpha(lambda_k t^alpha) phi_k``.

    Only real spectra (``d = 0``) are supported.
    """
    if op.d != 0:
        raise UnsupportedDomainError("complex eigenvalues need E_alpha off the real axis")
    u0 = np.asarray(u0_field, dtype=float)
    if u0.shape != (op.size,):
        raise ValueError(f"initial field must have shape ({op.size},)")
    if t == 0:
        return u0.copy()
    ta = t**alpha
    if op.boundary == "periodic":
        k = np.arange(op.Nx)
        lam = 2.0 * op.D / op.dx**2 * (np.cos(2.0 * np.pi * k / op.Nx) - 1.0)
        lam[0] = 0.0
        decay = mittag_leffler(alpha, lam * ta)
        return np.real(sfft.ifft(sfft.fft(u0) * decay))
    lam = op.eigenvalues().real
    decay = mittag_leffler(alpha, lam * ta)
    return sfft.idst(sfft.dst(u0, type=1) * decay, type=1)


def write_field_csv(path, op: AdvDiffOperator, u):
    rows = [(float(x), float(v)) for x, v in zip(op.x, np.asarray(u))]
    return write_csv(path, "field", ["x", "u"], rows)


def write_eigen_csv(path, lam):
    rows = [(j, float(z.real), float(z.imag)) for j, z in enumerate(np.asarray(lam), start=1)]
    return write_csv(path, "eigenvalues", ["j", "re", "im"], rows)
