"""Which convolution weights are completely monotone?

Builds every catalog scheme plus the trapezoidal negative control, runs the
difference test to depth 20 and prints the verdicts.

    python3 demos/cm_weights.py
"""
from cmfrac.schemes import catalog, cq_theta_weights
from cmfrac.seqkit import check_cm

ALPHA, N = 0.5, 128

print(f"alpha = {ALPHA}, N = {N}, depth 20")
for w in catalog(ALPHA, N):
    rep = check_cm(w.a, 20)
    print(f"  {w.label:22s} a CM: {rep.is_cm}   min normalized difference {rep.min_difference:+.2e}")

# the trapezoid rule oscillates, so it fails at the second difference
trap = cq_theta_weights(ALPHA, 0.5, N)
rep = check_cm(trap.a, 20, 1e-6)
print(f"  {trap.label:22s} a CM: {rep.is_cm}   first violation {rep.first_violation} = {rep.violation_value:.4f}")
