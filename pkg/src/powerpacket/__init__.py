"""Optimal routing of packetized electric power on time-expanded networks."""

from .costs import (
    AbsoluteValue,
    Affine,
    CostTree,
    Deviation,
    IndicatorInterval,
    LaminarCostSpec,
    PiecewiseLinearConvex,
    UnivariateConvexCost,
    all_times,
    all_times_group,
    check_midpoint_convexity,
    eval_node_cost,
    eval_univariate,
    laminar_to_tree,
    validate_laminar,
)
from .network import (
    ExpandedGraph,
    Network,
    NodeKind,
    SpatioTemporalFlow,
    STArc,
    STNode,
    TimeHorizon,
    boundary,
    expand,
    strain,
    validate_network,
)
from .scenarios import (
    MeshSpec,
    build_mesh,
    build_problem_e1,
    build_problem_e2,
    build_problem_e3,
    oracle_cost,
)
from .solver import Problem, Solution, evaluate, reduce, solve, verify_optimality
from .spm import SymbolPropagationMatrix, SymbolSet, from_flow, render, to_flow

__version__ = "0.1.0"
