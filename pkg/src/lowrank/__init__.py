"""Low-rank plus sparse matrix recovery and matrix completion.

Solvers for the convex program min ||A||_* + lam ||E||_1 s.t. A + E = D
(iterative thresholding, accelerated proximal gradient, exact and inexact
augmented Lagrange multiplier methods), an inexact-ALM matrix completion
solver with factored iterates, deterministic synthetic instance generation,
convergence diagnostics and a CLI benchmark harness.
"""

from .linalg import (
    MatrixNorms,
    ObservedSet,
    SparsePlusLowRank,
    SvdConvergenceError,
    TruncatedSVD,
    dual_gauge,
    norms,
    project_omega,
    shrink,
    svt,
    truncated_svd,
)
from .problems import McInstance, RpcaInstance, gen_mc, gen_rpca
from .rpca import (
    IterRecord,
    RpcaConfig,
    SolveResult,
    predict_rank,
    solve_apg,
    solve_ealm,
    solve_ialm,
    solve_it,
)
from .mc import (
    FactoredMatrix,
    McConfig,
    McResult,
    predict_rank_mc,
    rho_from_density,
    solve_mc_ialm,
)
from .diagnostics import (
    KktReport,
    divergence_demo,
    dual_feasibility,
    kkt_report,
    lyapunov_increases,
    lyapunov_trace,
)

__version__ = "0.1.0"

__all__ = [
    "MatrixNorms",
    "ObservedSet",
    "SparsePlusLowRank",
    "SvdConvergenceError",
    "TruncatedSVD",
    "dual_gauge",
    "norms",
    "project_omega",
    "shrink",
    "svt",
    "truncated_svd",
    "McInstance",
    "RpcaInstance",
    "gen_mc",
    "gen_rpca",
    "IterRecord",
    "RpcaConfig",
    "SolveResult",
    "predict_rank",
    "solve_apg",
    "solve_ealm",
    "solve_ialm",
    "solve_it",
    "FactoredMatrix",
    "McConfig",
    "McResult",
    "predict_rank_mc",
    "rho_from_density",
    "solve_mc_ialm",
    "KktReport",
    "divergence_demo",
    "dual_feasibility",
    "kkt_report",
    "lyapunov_increases",
    "lyapunov_trace",
]
