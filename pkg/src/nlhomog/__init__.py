"""Numerical laboratory for non-local pair energies with oscillating periodic weights."""

from .kernel import (
    AntiderivativeTable,
    PeriodicStepFunction,
    PeriodicStepKernel,
    kernel_mean,
    make_lambda_kernel,
)
from .states import (
    AdmissibleDecomposition,
    AdmissibleInterval,
    NotAdmissible,
    StepFunction,
    TripleWellPotential,
    admissible_interval,
    decompose,
    eval_potential,
    integrate,
    oscillating_profile,
)
from .energy import EnergyReport, evaluate, evaluate_quadrature, rect_integral
from .cell import (
    CellKernelMatrix,
    CellProfile,
    CellSolveResult,
    build_cell_matrix,
    cell_energy,
    gamma_closed_form,
    optimal_profile,
    solve_brute_force,
    solve_relaxed,
)
from .gammalab import (
    Certificate,
    ConvergenceStudy,
    fM_threshold_experiment,
    gamma_limit_constant_value,
    homogenized_F,
    implied_g1,
    non_representability_certificate,
    run_flat_study,
    run_recovery_study,
    run_step_study,
    step_limit_value,
    two_scale_pairing,
)
from .util import ArgumentRangeError, ResourceLimitError

__version__ = "0.1.0"
