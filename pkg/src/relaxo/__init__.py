"""relaxo: SOR and adaptive SOR solvers for sparse SPD systems.

The relaxation parameter of SOR is steered through the step size
``h = 2*omega/(2 - omega)`` of an equivalent dissipative discrete-gradient
scheme, using a steepest-descent step, an Armijo test, or the Wolfe
conditions.
"""

from relaxo.discrete_gradient import (
    QuadraticObjective,
    dg_scheme_step,
    itoh_abe_dg_generic,
    itoh_abe_dg_quadratic,
    verify_equivalence,
)
from relaxo.problems import omega_opt, ones_rhs, poisson_matrix, poisson_rhs, random_spd
from relaxo.solvers import (
    IterationRecord,
    NonFiniteError,
    SolveReport,
    SolverConfig,
    armijo_holds,
    best_omega,
    curvature_holds,
    h_from_omega,
    objective_from_residual,
    omega_from_h,
    omega_sweep,
    solve,
    sor_sweep,
    steepest_step,
    update_step_size,
)
from relaxo.sparse import (
    MatrixMarketError,
    MatvecCounter,
    ScaledSystem,
    SparseMatrix,
    dot,
    jacobi_scale,
    matvec,
    norm2,
    parse_matrix_market,
    read_matrix_market,
    write_matrix_market,
)

__version__ = "0.1.0"
