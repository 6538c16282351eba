"""cauchykit: boundary geometry of first order systems on an interval.

The package realizes operators J(x)(d/dx + B(x)) on [0, 1] through their
boundary data: fundamental solutions, Cauchy-data subspaces, Calderon
projections, eigenvalue counts through winding numbers, spectral flow,
Maslov indices, sectorial boundary calculi, and a boundary symbol
obstruction for bounding pairs.
"""

from ._accel import backend
from .calderon import (
    calderon_pair,
    calderon_projection,
    calderon_vs_tangential,
    cauchy_data_space,
    green_form,
    green_form_defect,
    poisson_solution,
    weak_ucp_check,
)
from .cobordism import (
    BoundarySymbolPair,
    boundary_pair_from_system,
    obstruction_details,
    signature_obstruction,
)
from .eigenproblem import (
    RealizedOperator,
    fd_eigenvalues,
    fd_order,
    find_eigenvalues,
    graph_gap,
)
from .errors import CauchyKitError
from .experiments import (
    OperatorPath,
    default_window,
    rotation_gaps,
    sf_mas_experiment,
)
from .propagation import fundamental_solution, fundamental_solution_batch, propagate_grid
from .sectorial import (
    TangentialMatrix,
    approx_poisson,
    approx_poisson_pair,
    cutoff,
    eigenprojection_oracle,
    p_minus,
    p_plus,
    q_minus,
    q_plus,
    sectorial_projection,
)
from .spectral_flow import EigenFamily, spectral_flow, track_eigenvalues
from .symplectic import (
    HermitianSymplecticSpace,
    LagrangianFrame,
    LagrangianPath,
    maslov_index,
)
from .systems import (
    DoubleCoupling,
    IntervalSystem,
    constant_system,
    random_symmetric_system,
    random_system,
    scalar_shift_system,
    sl_companion_system,
)

__version__ = "0.1.0"

__all__ = [
    "BoundarySymbolPair",
    "CauchyKitError",
    "DoubleCoupling",
    "EigenFamily",
    "HermitianSymplecticSpace",
    "IntervalSystem",
    "LagrangianFrame",
    "LagrangianPath",
    "OperatorPath",
    "RealizedOperator",
    "TangentialMatrix",
    "approx_poisson",
    "approx_poisson_pair",
    "backend",
    "boundary_pair_from_system",
    "calderon_pair",
    "calderon_projection",
    "calderon_vs_tangential",
    "cauchy_data_space",
    "constant_system",
    "default_window",
    "cutoff",
    "eigenprojection_oracle",
    "fd_eigenvalues",
    "fd_order",
    "find_eigenvalues",
    "fundamental_solution",
    "fundamental_solution_batch",
    "graph_gap",
    "green_form",
    "green_form_defect",
    "maslov_index",
    "obstruction_details",
    "p_minus",
    "p_plus",
    "poisson_solution",
    "propagate_grid",
    "q_minus",
    "q_plus",
    "random_symmetric_system",
    "random_system",
    "rotation_gaps",
    "scalar_shift_system",
    "sectorial_projection",
    "sf_mas_experiment",
    "signature_obstruction",
    "sl_companion_system",
    "spectral_flow",
    "track_eigenvalues",
    "weak_ucp_check",
]
