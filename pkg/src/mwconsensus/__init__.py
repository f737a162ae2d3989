"""Event-triggered bipartite consensus on matrix-weighted networks.

A simulation library and CLI for multi-agent systems whose edges carry
symmetric sign-definite matrix weights.  Agents broadcast state only when a
per-agent dynamic threshold is violated; the package covers the leaderless
and leader-follower protocols, the structural checks they require, and full
post-run analytics.
"""

from .analysis import RunSummary, bipartite_error, event_stats, fit_decay_rate, \
    lyapunov_leaderless, lyapunov_lf
from .errors import AssumptionViolated, AsymmetryWarning, Diverged, \
    GraphFormatError, InvalidMatrix, InvalidScenario, MwcError, NoNeighbors, \
    NotNeighbors, NotPSD, UnsupportedWeight
from .linalg import DefinitenessClass, EigenDecomposition, SymMatrix, \
    classify_definiteness, matrix_abs, matrix_sgn, spectral_abs, sym_eigen, \
    sym_sqrt
from .mwgraph import Bipartition, GaugeMatrix, InputCoupling, \
    MatrixWeightedGraph, build_grounded_laplacian, build_laplacian, \
    check_gauge_identity, detect_structural_balance, gauge_matrix, null_space, \
    predicted_bipartite_limit, verify_assumption1, verify_assumption2
from .sim import Scenario, TrajectoryRecord, chi_floor_check, min_inter_event, \
    run, step, validate_scenario
from .trigger import LeaderFollower, Leaderless, TriggerParams, \
    chi_rate_leaderless, chi_rate_lf, control_leader_follower, \
    control_leaderless, gamma, leaderless_fires, lf_fires, mu_bar, \
    relative_broadcast, validate_params

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
