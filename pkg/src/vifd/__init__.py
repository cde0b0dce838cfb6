"""Solver library for variational inequalities with point-to-set operators.

The method combines a projected trial step, a backtracking linesearch over the
operator's support function, and an anchored projection of the fixed start
point onto the intersection of the feasible set with every separating
halfspace found so far.
"""

from .sets import (
    Box,
    FeasibleSet,
    Halfspace,
    LinearConstraintSystem,
    Polyhedron,
    SimplexSlice,
    as_point,
    assemble,
    contains,
    halfspace_from_pair,
    w_halfspace,
)
from .qp import (
    InfeasibleSystem,
    MaxPivots,
    QpSolution,
    UnsupportedShape,
    least_distance,
    oracle_project,
    simplex_projection,
)
from .operators import (
    DomainError,
    FractionalGradient,
    HsQuasimonotone,
    PROBLEM_NAMES,
    ProblemInstance,
    RayOperator,
    RhoOperator,
    SetValuedOperator,
    SupportResult,
    UnknownProblem,
    make_problem,
)
from .solver import (
    BetaSchedule,
    Counters,
    IterationRecord,
    LinesearchFailure,
    RunReport,
    SolverParams,
    SolverState,
    StopCertificate,
    StopReason,
    compute_z,
    linesearch_f,
    solve,
    step,
    step2_stop_check,
)
from .bench import (
    ExperimentConfig,
    ResultRow,
    emit,
    emit_many,
    preset_configs,
    run_experiment,
    run_reports,
)

__version__ = "0.1.0"
