"""Stability angles from boundary loci.

The largest argument of the boundary locus is the half-opening of the
instability region around the positive axis.  GL attains ``alpha pi / 2``;
L1 sits strictly below ``pi / 2``.

    python3 demos/stability_angles.py
"""
import math

from cmfrac.schemes import catalog
from cmfrac.stability import boundary_locus, max_arg

N, M = 2**16, 2**14
for alpha in (0.3, 0.5, 0.8):
    print(f"alpha = {alpha}  (alpha pi/2 = {alpha / 2:.4f} pi)")
    for w in catalog(alpha, N):
        theta = max_arg(boundary_locus(w, M))
        print(f"  {w.label:22s} theta_0 = {theta / math.pi:.4f} pi")
