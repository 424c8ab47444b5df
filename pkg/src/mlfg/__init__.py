"""Equilibrium solver for quadratic multi-leader-follower games.

The follower's quadratic program has a closed-form, piecewise-linear best
response; substituting a smoothed version of it into the leader objectives
gives a family of smooth Nash equilibrium problems indexed by a smoothing
parameter. The library solves that family along a geometric continuation
with a first-order warm-start predictor, and certifies the limit point
independently (per-leader global re-solves and a strong stationarity
system with constructed multipliers).
"""

__version__ = "0.1.0"

from .homotopy import HomotopyConfig, HomotopyTrace, StageRecord, homotopy_solve, taylor_direction
from .kkt import (
    GeneralizedJacobian,
    KktResidual,
    generalized_jacobian,
    kkt_residual,
    merit,
    merit_subgradient,
)
from .model import (
    FollowerSpec,
    GameFormatError,
    GameSpec,
    GameValidationError,
    LeaderSpec,
    PrimalDualPoint,
    compose_strategy,
    load_bundled,
    load_game,
    save_game,
    slice_rows,
    split_strategy,
    validate_game,
)
from .smoothing import (
    AffineMaps,
    SmoothingFamily,
    best_response_exact,
    best_response_smoothed,
    leader_gradient_smoothed,
    leader_objective,
    leader_objective_smoothed,
    phi_tilde,
    phi_tilde_d1,
    phi_tilde_d2,
    phi_tilde_deps,
    phi_tilde_dt_deps,
    phi_value,
    potential_value,
    smoothed_gradient_stack,
)
from .solvers import (
    InnerResult,
    NewtonConfig,
    SubgradConfig,
    aggregate_direction,
    armijo_search,
    lu_solve,
    newton_solve,
    subgradient_solve,
)
from .verify import (
    Certificate,
    EpigraphQP,
    OracleError,
    best_response_qp_oracle,
    certify,
    monotonicity_probe,
    potential_identity_probe,
    s_stationarity_certificate,
    smoothing_drift,
    verify_nash,
)

__all__ = [
    "__version__",
    "AffineMaps",
    "Certificate",
    "EpigraphQP",
    "FollowerSpec",
    "GameFormatError",
    "GameSpec",
    "GameValidationError",
    "GeneralizedJacobian",
    "HomotopyConfig",
    "HomotopyTrace",
    "InnerResult",
    "KktResidual",
    "LeaderSpec",
    "NewtonConfig",
    "OracleError",
    "PrimalDualPoint",
    "SmoothingFamily",
    "StageRecord",
    "SubgradConfig",
    "aggregate_direction",
    "armijo_search",
    "best_response_exact",
    "best_response_qp_oracle",
    "best_response_smoothed",
    "certify",
    "compose_strategy",
    "generalized_jacobian",
    "homotopy_solve",
    "kkt_residual",
    "leader_gradient_smoothed",
    "leader_objective",
    "leader_objective_smoothed",
    "load_bundled",
    "load_game",
    "lu_solve",
    "merit",
    "merit_subgradient",
    "monotonicity_probe",
    "newton_solve",
    "phi_tilde",
    "phi_tilde_d1",
    "phi_tilde_d2",
    "phi_tilde_deps",
    "phi_tilde_dt_deps",
    "phi_value",
    "potential_identity_probe",
    "potential_value",
    "s_stationarity_certificate",
    "save_game",
    "slice_rows",
    "smoothed_gradient_stack",
    "smoothing_drift",
    "split_strategy",
    "subgradient_solve",
    "taylor_direction",
    "validate_game",
    "verify_nash",
]
