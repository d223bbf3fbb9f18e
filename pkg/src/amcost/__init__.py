"""Cost machine and sized-type checker for a small JavaScript-XML subset."""
from .costalg import (
    AddC, Arrow, Cost, CostExpr, MaxC, MulC, NumC, Record, TypeEnv, VarC, free_vars,
    instantiate, leq, lub, normalize, normalize_type, parse_cost, parse_type, render,
    render_type,
)
from .errors import (
    AmcostError, CyclicBounds, FinalState, FuelExhausted, ImportCycle, MachineError,
    ParseError, ShapeMismatch, Stuck, TypeCheckError, UnboundVar, UnresolvedFile,
)
from .harness import (
    GenConfig, SoundnessVerdict, check_soundness, generate_program, soundness_campaign,
)
from .machine import (
    DEFAULT_COSTS, CostTable, FsFileGetter, MemoryFileGetter, RunResult, initial_config,
    run, step,
)
from .parser import format_file, parse_file
from .typecheck import (
    CheckResult, Constraint, gather_constraints, infer, solve_constraints, type_expr,
    type_file, type_stmts,
)

__version__ = "0.1.0"
