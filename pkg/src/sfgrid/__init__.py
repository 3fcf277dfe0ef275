"""Adaptive 1D grids from a preferential-attachment grid-field model."""

from .bench import BenchEntry, BenchReport, ConvergenceRow, compare, convergence_study
from .gridgen import (
    BoundaryLayerSpec,
    Grid1D,
    calibrate,
    generate_boundary_layer_grid,
    h_case2_linearized,
    h_case3,
    peclet,
    peclet_profile,
    step_between,
    step_field,
    step_profile,
    uniform_grid,
)
from .kfield import (
    EvolutionParams,
    GradientHistory,
    GridField,
    SMode,
    accumulate_gradient,
    attachment_probabilities,
    evolve_constant_m,
    evolve_explicit,
    k_case3_exact,
    k_case3_first_order,
)
from .solver import (
    Solution,
    TransportProblem,
    TridiagonalSystem,
    assemble,
    boundary_layer_approx,
    error_norms,
    exact_solution,
    solve,
    solve_tridiagonal,
)

__version__ = "0.1.0"
