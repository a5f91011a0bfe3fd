"""CM-preserving convolution schemes for Caputo fractional ODEs and Volterra equations.

Modules
-------
seqkit     sequence algebra and the complete-monotonicity check
schemes    (omega, a) weight generators and Volterra kernel weights
mlf        Mittag-Leffler function on the real line
solver     implicit time stepping
stability  stability loci and empirical classification
analysis   monotonicity, truncation error, convergence and decay fits
pdelab     time-fractional advection-diffusion
cli        config-driven experiment runner
"""

__version__ = "0.1.0"

from .seqkit import CMReport, SingularSequenceError, check_cm, conv_inverse, convolve, eval_generating, miller_power, resolvent  # noqa: E402
from .schemes import (  # noqa: E402
    SchemeKind,
    SchemeWeights,
    VolterraVariant,
    VolterraWeights,
    catalog,
    counterexample_weights,
    cq_theta_weights,
    gl_weights,
    interp_weights,
    l1_weights,
    make_weights,
    sum_kernel_weights,
    volterra_exp_weights,
)
from .mlf import UnsupportedDomainError, mittag_leffler  # noqa: E402
from .solver import (  # noqa: E402
    ExpKernel,
    FODEProblem,
    StandardKernel,
    StepFailureError,
    SumKernel,
    Trajectory,
    VolterraProblem,
    solve_fode,
    solve_linear_test,
    solve_volterra,
)

__all__ = [
    "CMReport",
    "SingularSequenceError",
    "check_cm",
    "conv_inverse",
    "convolve",
    "eval_generating",
    "miller_power",
    "resolvent",
    "SchemeKind",
    "SchemeWeights",
    "VolterraVariant",
    "VolterraWeights",
    "catalog",
    "counterexample_weights",
    "cq_theta_weights",
    "gl_weights",
    "interp_weights",
    "l1_weights",
    "make_weights",
    "sum_kernel_weights",
    "volterra_exp_weights",
    "UnsupportedDomainError",
    "mittag_leffler",
    "ExpKernel",
    "FODEProblem",
    "StandardKernel",
    "StepFailureError",
    "SumKernel",
    "Trajectory",
    "VolterraProblem",
    "solve_fode",
    "solve_linear_test",
    "solve_volterra",
]
