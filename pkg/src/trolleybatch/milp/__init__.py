from .backend import (
    BackendConfig,
    find_cbc,
    parse_cbc_solution,
    parse_name_value,
    require_solution,
    solve,
    solve_relaxation,
)
from .model import (
    BINARY,
    CONTINUOUS,
    ERROR,
    FEASIBLE,
    INF,
    INFEASIBLE,
    INTEGER,
    OPTIMAL,
    TIMEOUT,
    UNBOUNDED,
    Constraint,
    MilpModel,
    SolveResult,
    Variable,
)
from .mps import sanitize, write_mps
