"""Nonlocal K-perimeters on voxel grids: kernels, energies, Plateau solvers, epsilon-sweeps."""

from .quadrature import QuadratureConfig, tree_sum
from .kernel import (
    KernelConstants,
    KernelSpec,
    check_admissibility,
    compute_constants,
    make_kernel,
    rescale,
    tabulated_kernel,
)
from .grid import (
    Annulus,
    Ball,
    Box,
    CellSet,
    DomainMask,
    GridSpec,
    Halfspace,
    PhaseField,
    WavyHalfspace,
    classical_perimeter,
    make_domain,
    make_shape,
    unit_cube,
)
from .functional import (
    EnergyBreakdown,
    PairWeightTable,
    bv_bound_check,
    build_weights,
    coarea_check,
    energy_J,
    interaction,
    locality_defect,
    perimeter_K,
    submodularity_gap,
)
from .plateau import (
    PlateauProblem,
    PlateauSolution,
    check_optimality,
    flatness_experiment,
    solve_enumerate,
    solve_exact,
    solve_relaxed,
)
from .gamma import SweepRecord, extrapolate, gamma_liminf_probe, sweep

__version__ = "0.1.0"
