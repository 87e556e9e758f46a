"""Stasis points and small two-cycles of the switched inclusion x' in {f1(x), f2(x)}."""
from .cycle import (
    FlowBoxChart,
    LoopResult,
    ReducedAction,
    TwoCycle,
    check_theorem1_hypotheses,
    cycle_family,
    find_loop,
    find_two_cycle_direct,
    find_two_cycle_reduced,
    g_map,
    make_chart,
    reduced_action,
    stasis_in_cycle_check,
    verify_two_cycle,
)
from .expr import Expression, differentiate, parse
from .field import FieldPair, VectorField, builtin, load_system, parse_system
from .ode import (
    IntegratorConfig,
    SwitchSchedule,
    Trajectory,
    flow,
    flow_variational,
    relaxed_trajectory,
    switched_trajectory,
    time_to_hyperplane,
)
from .stasis import (
    StasisCurve,
    StasisPoint,
    find_stasis_fixed_lambda,
    nondegeneracy_report,
    stasis_residual,
    trace_stasis_curve,
    weights_from_antiparallel,
)

__version__ = "0.1.0"
