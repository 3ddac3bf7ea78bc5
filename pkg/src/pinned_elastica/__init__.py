"""Critical points, energies, stability and gradient flow of length-penalized pinned planar elasticae.

The modulus q (not the parameter m = q^2) is used throughout.
"""

from .classify import (CriticalPoint, Family, ProblemParams, build_critical_point,
                       enumerate_critical_points, mode_floor)
from .curves import (PlanarCurve, curvature_at, reconstruct_from_curvature, sample_curve,
                     self_intersections, wavelike_curve)
from .elliptic import (JacobiTriple, Modulus, ellip_E, ellip_E_inc, ellip_F_inc, ellip_K, jacobi,
                       jacobi_am)
from .energy import (ComparisonReport, EnergyBreakdown, compare_all, crossover_lambda,
                     energy_closed_form, loop_threshold, psi, single_term_comparison)
from .flow import FlowOutcome, FlowState, init_flow, run, step
from .moduli import (Branch, BranchedModulus, Constants, constants, eval_e, eval_f, eval_g,
                     eval_g_prime, eval_h, eval_I, find_constants, invert_g)
from .stability import (Mechanism, StabilityVerdict, Verdict, count_local_minimizers,
                        degenerate_third_derivative, second_derivative_sign, stability_verdict)

__version__ = "0.1.0"

__all__ = [
    "Branch", "BranchedModulus", "ComparisonReport", "Constants", "CriticalPoint", "EnergyBreakdown",
    "Family", "FlowOutcome", "FlowState", "JacobiTriple", "Mechanism", "Modulus", "PlanarCurve",
    "ProblemParams", "StabilityVerdict", "Verdict", "build_critical_point", "compare_all", "constants",
    "count_local_minimizers", "crossover_lambda", "curvature_at", "degenerate_third_derivative",
    "ellip_E", "ellip_E_inc", "ellip_F_inc", "ellip_K", "energy_closed_form",
    "enumerate_critical_points", "eval_I", "eval_e", "eval_f", "eval_g", "eval_g_prime", "eval_h",
    "find_constants", "init_flow", "invert_g", "jacobi", "jacobi_am", "loop_threshold", "mode_floor",
    "psi", "reconstruct_from_curvature", "run", "sample_curve", "second_derivative_sign",
    "self_intersections", "single_term_comparison", "stability_verdict", "step", "wavelike_curve",
]
