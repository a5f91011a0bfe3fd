"""Monotone logistic trajectories at a coarse step.

Solves ``D^alpha u = u (2 - u)`` with the Grunwald-Letnikov scheme from six
initial values.  Each trajectory moves monotonically toward the equilibrium
``u = 2`` and the discrete energy inequality holds throughout.

    python3 demos/logistic_monotone.py
"""
import numpy as np

from cmfrac.analysis import energy_inequality_gap, monotonicity_report
from cmfrac.presets import make_rhs
from cmfrac.schemes import gl_weights
from cmfrac.solver import FODEProblem, solve_fode

alpha, h, T = 0.8, 0.05, 5.0
f, jac = make_rhs("logistic", A=2.0, B=1.0)
w = gl_weights(alpha, 101)
for u0 in (0.5, 1.0, 1.5, 3.0, 4.0, 5.0):
    tr = solve_fode(FODEProblem(alpha, f, u0, T, jacobian=jac), w, h)
    rep = monotonicity_report(tr)
    gap, scale = energy_inequality_gap(w, tr)
    print(
        f"u0 = {u0:3.1f}  u(T) = {tr.scalar[-1]:.5f}  {rep.direction.value:10s}"
        f"  energy gap max {np.max(gap / scale):+.2e}"
    )
