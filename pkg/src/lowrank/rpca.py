"""Four solvers for the low-rank plus sparse decomposition program

    min ||A||_* + lam * ||E||_1   subject to   A + E = D:

dual-ascent iterative thresholding (``solve_it``), an accelerated proximal
gradient method with continuation (``solve_apg``), and exact / inexact
augmented Lagrange multiplier methods (``solve_ealm`` / ``solve_ialm``).
All four share one config, result and per-iteration trace model.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .linalg import as_matrix, dual_gauge, shrink, spectral_norm, svt_triplets
from .problems import round_half_up

__all__ = [
    "RpcaConfig",
    "IterRecord",
    "Iterate",
    "SolveResult",
    "predict_rank",
    "t_sequence",
    "solve_it",
    "solve_apg",
    "solve_ealm",
    "solve_ialm",
]

# Entries at or below this magnitude count as zeros when reporting ||E||_0;
# soft thresholding produces exact zeros, so this is a safety margin only.
ZERO_TOL = 1e-12

MAX_ITER_DEFAULTS = {"it": 100_000, "apg": 1000, "ealm": 100, "ialm": 1000}
SV0_DEFAULTS = {"apg": 5, "ealm": 10, "ialm": 10}


@dataclass
class RpcaConfig:
    """Solver parameters. ``None`` means "use the per-algorithm default",
    which for the ALM solvers follows the published tuning:

    * ``ialm``: mu0 = 1.25 / ||D||_2, rho = 1.6, eps1 = 1e-7, eps2 = 1e-5
    * ``ealm``: mu0 = 0.5 / ||sign(D)||_2, rho = 6, inner_tol = 1e-6
    * ``apg``:  mu0 = 0.99 * ||D||_2, eta = 0.9, mu_bar = 1e-9 * mu0
    * ``it``:   tau = 20 * ||D||_2, delta = 1 (step-size choice for this
      method is known to be difficult; it is included for completeness, not
      speed)

    ``lam`` defaults to ``rows ** -0.5``.
    """

    lam: float | None = None
    mu0: float | None = None
    rho: float | None = None
    eps1: float = 1e-7
    eps2: float = 1e-5
    max_iter: int | None = None
    sv0: int | None = None
    it_tau: float | None = None
    it_delta: float = 1.0
    apg_mu_bar: float | None = None
    apg_eta: float = 0.9
    inner_tol: float = 1e-6
    keep_iterates: bool = False

    def __post_init__(self):
        for name in ("lam", "mu0", "eps1", "eps2", "it_tau", "it_delta",
                     "apg_mu_bar", "inner_tol"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")
        if self.rho is not None and self.rho <= 1:
            raise ValueError("rho must exceed 1")
        if not (0.0 < self.apg_eta < 1.0):
            raise ValueError("apg_eta must lie in (0, 1)")
        for name in ("max_iter", "sv0"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be a positive integer")

    def to_dict(self):
        return asdict(self)


@dataclass
class IterRecord:
    """One solver iteration: penalty value, scaled residuals, rank/support
    counts and the rank-prediction bookkeeping."""

    iter: int
    mu: float
    feas: float
    dual_est: float
    rank_a: int
    e_card: int
    sv_pred: int
    svp: int
    objective: float

    def to_dict(self):
        return asdict(self)


@dataclass
class Iterate:
    """Dense per-iteration snapshot, recorded only on request (desk scale)."""

    a: np.ndarray
    e: np.ndarray
    y: np.ndarray
    mu: float


@dataclass
class SolveResult:
    A: np.ndarray
    E: np.ndarray
    converged: bool
    iterations: int
    svd_count: int
    trace: list[IterRecord]
    algorithm: str
    rank: int
    e_card: int
    Y: np.ndarray | None = None
    iterates: list[Iterate] | None = None

    @property
    def objective(self):
        return self.trace[-1].objective if self.trace else 0.0

    def report(self, config=None, a_star=None):
        """JSON-ready summary: config echo, counts, final residuals and the
        full trace; includes the relative recovery error when the ground
        truth is supplied."""
        last = self.trace[-1] if self.trace else None
        out = {
            "schema": "lowrank.solve.v1",
            "algorithm": self.algorithm,
            "converged": self.converged,
            "iterations": self.iterations,
            "svd_count": self.svd_count,
            "rank": self.rank,
            "e_card": self.e_card,
            "final": {
                "feas": last.feas if last else 0.0,
                "dual_est": last.dual_est if last else 0.0,
                "objective": last.objective if last else 0.0,
            },
            "trace": [r.to_dict() for r in self.trace],
        }
        if config is not None:
            out["config"] = config.to_dict()
        if self.Y is not None and self.Y.any():
            lam = config.lam if config is not None and config.lam is not None \
                else 1.0 / np.sqrt(self.A.shape[0])
            out["final"]["spectral_y"] = spectral_norm(self.Y)
            out["final"]["linf_y_over_lambda"] = float(np.abs(self.Y).max() / lam)
        if a_star is not None:
            a_star = np.asarray(a_star)
            denom = np.linalg.norm(a_star)
            out["rel_error"] = float(np.linalg.norm(self.A - a_star) / denom) \
                if denom else float(np.linalg.norm(self.A))
        return out


def predict_rank(svp, sv, d):
    """Next dimension for the partial SVD: grow by one while the threshold
    count still fits, jump by 5% of the small dimension once it saturates."""
    if not (0 <= svp <= sv <= d):
        raise ValueError("expected 0 <= svp <= sv <= d")
    if svp < sv:
        return svp + 1
    return min(svp + round_half_up(0.05 * d), d)


def t_sequence(n):
    """First ``n`` momentum weights t_0 = 1, t_{k+1} = (1 + sqrt(4 t_k^2 + 1)) / 2."""
    out = [1.0]
    for _ in range(n - 1):
        t = out[-1]
        out.append((1.0 + np.sqrt(4.0 * t * t + 1.0)) / 2.0)
    return out


def _e_card(E):
    return int((np.abs(E) > ZERO_TOL).sum())


def _zero_result(D, algorithm):
    Z = np.zeros_like(D)
    rec = IterRecord(iter=1, mu=0.0, feas=0.0, dual_est=0.0, rank_a=0,
                     e_card=0, sv_pred=0, svp=0, objective=0.0)
    return SolveResult(A=Z, E=Z.copy(), converged=True, iterations=1,
                       svd_count=0, trace=[rec], algorithm=algorithm,
                       rank=0, e_card=0, Y=Z.copy())


def _resolve_lam(cfg, D):
    return cfg.lam if cfg.lam is not None else 1.0 / np.sqrt(D.shape[0])


def solve_it(D, cfg=None):
    """Dual-ascent iterative thresholding on the quadratically relaxed program.

    Each sweep applies singular value thresholding (threshold tau) and soft
    thresholding (threshold lam * tau) to the running multiplier, then takes
    a step of size ``it_delta`` along the constraint violation. Stops once
    the scaled feasibility residual drops below ``eps1``; hitting
    ``max_iter`` returns ``converged=False`` with the full trace.
    """
    cfg = cfg or RpcaConfig()
    D = as_matrix(D, "D")
    if not D.any():
        return _zero_result(D, "it")
    lam = _resolve_lam(cfg, D)
    dnorm = np.linalg.norm(D)
    tau = cfg.it_tau if cfg.it_tau is not None else 20.0 * spectral_norm(D)
    delta = cfg.it_delta
    max_iter = cfg.max_iter or MAX_ITER_DEFAULTS["it"]
    d = min(D.shape)

    Y = np.zeros_like(D)
    E_prev = np.zeros_like(D)
    trace = []
    svd_count = 0
    for k in range(1, max_iter + 1):
        kept, svp, _ = svt_triplets(Y, tau, d)
        svd_count += 1
        A = kept.compose()
        E = shrink(Y, lam * tau)
        R = D - A - E
        Y = Y + delta * R
        feas = float(np.linalg.norm(R) / dnorm)
        dual = float(np.linalg.norm(E - E_prev) / dnorm)
        obj = float(kept.s.sum() + lam * np.abs(E).sum())
        trace.append(IterRecord(k, tau, feas, dual, svp, _e_card(E), d, svp, obj))
        E_prev = E
        if feas < cfg.eps1:
            return SolveResult(A, E, True, k, svd_count, trace, "it",
                               rank=svp, e_card=_e_card(E), Y=Y)
    return SolveResult(A, E, False, max_iter, svd_count, trace, "it",
                       rank=svp, e_card=_e_card(E), Y=Y)


def solve_apg(D, cfg=None):
    """Accelerated proximal gradient with geometric continuation.

    Momentum points for both blocks share the weight (t_{k-1} - 1) / t_k;
    each iteration takes half-step gradient corrections, one SVT at
    mu_k / 2, one shrink at lam * mu_k / 2, then decays the smoothing
    parameter by ``apg_eta`` down to the floor ``apg_mu_bar``.
    """
    cfg = cfg or RpcaConfig()
    D = as_matrix(D, "D")
    if not D.any():
        return _zero_result(D, "apg")
    lam = _resolve_lam(cfg, D)
    dnorm = np.linalg.norm(D)
    mu = cfg.mu0 if cfg.mu0 is not None else 0.99 * spectral_norm(D)
    mu_bar = cfg.apg_mu_bar if cfg.apg_mu_bar is not None else 1e-9 * mu
    eta = cfg.apg_eta
    max_iter = cfg.max_iter or MAX_ITER_DEFAULTS["apg"]
    d = min(D.shape)
    sv = min(cfg.sv0 or SV0_DEFAULTS["apg"], d)

    A = A_prev = np.zeros_like(D)
    E = E_prev = np.zeros_like(D)
    t = t_prev = 1.0
    trace = []
    svd_count = 0
    for k in range(1, max_iter + 1):
        coef = (t_prev - 1.0) / t
        YA = A + coef * (A - A_prev)
        YE = E + coef * (E - E_prev)
        half = 0.5 * (YA + YE - D)
        GA = YA - half
        kept, svp, s_raw = svt_triplets(GA, mu / 2.0, sv)
        svd_count += 1
        A_next = kept.compose()
        GE = YE - half
        E_next = shrink(GE, lam * mu / 2.0)
        t_next = (1.0 + np.sqrt(4.0 * t * t + 1.0)) / 2.0
        mu_used = mu
        mu = max(eta * mu, mu_bar)

        feas = float(np.linalg.norm(D - A_next - E_next) / dnorm)
        dual = float(mu_used * np.linalg.norm(E_next - E) / dnorm)
        obj = float(kept.s.sum() + lam * np.abs(E_next).sum())
        sv_used = len(s_raw)
        trace.append(IterRecord(k, mu_used, feas, dual, svp, _e_card(E_next),
                                sv_used, svp, obj))
        A_prev, A, E_prev, E = A, A_next, E, E_next
        t_prev, t = t, t_next
        sv = predict_rank(svp, sv_used, d)
        if feas < cfg.eps1:
            return SolveResult(A, E, True, k, svd_count, trace, "apg",
                               rank=svp, e_card=_e_card(E))
    return SolveResult(A, E, False, max_iter, svd_count, trace, "apg",
                       rank=svp, e_card=_e_card(E))


def solve_ealm(D, cfg=None):
    """Exact augmented Lagrange multiplier method.

    The multiplier starts at sign(D) scaled into the dual-feasible set. Each
    outer step solves the (A, E) subproblem to tolerance ``inner_tol`` by
    alternating SVT and shrinkage from the previous solution, then takes an
    exact multiplier step and grows the penalty by ``rho``. ``svd_count``
    sums all inner iterations.
    """
    cfg = cfg or RpcaConfig()
    D = as_matrix(D, "D")
    if not D.any():
        return _zero_result(D, "ealm")
    lam = _resolve_lam(cfg, D)
    dnorm = np.linalg.norm(D)
    sgn = np.sign(D)
    mu = cfg.mu0 if cfg.mu0 is not None else 0.5 / spectral_norm(sgn)
    rho = cfg.rho if cfg.rho is not None else 6.0
    max_outer = cfg.max_iter or MAX_ITER_DEFAULTS["ealm"]
    d = min(D.shape)
    sv = min(cfg.sv0 or SV0_DEFAULTS["ealm"], d)

    Y = sgn / dual_gauge(sgn, lam)
    A = np.zeros_like(D)
    E = np.zeros_like(D)
    trace = []
    iterates = [] if cfg.keep_iterates else None
    svd_count = 0
    svp = 0
    for k in range(1, max_outer + 1):
        Aj, Ej = A, E
        while True:
            kept, svp, s_raw = svt_triplets(D - Ej + Y / mu, 1.0 / mu, sv)
            svd_count += 1
            Aj1 = kept.compose()
            Ej1 = shrink(D - Aj1 + Y / mu, lam / mu)
            dA = np.linalg.norm(Aj1 - Aj) / dnorm
            dE = np.linalg.norm(Ej1 - Ej) / dnorm
            Aj, Ej = Aj1, Ej1
            sv = predict_rank(svp, len(s_raw), d)
            if dA < cfg.inner_tol and dE < cfg.inner_tol:
                break
        dual = float(mu * np.linalg.norm(Ej - E) / dnorm)
        A, E = Aj, Ej
        R = D - A - E
        Y = Y + mu * R
        feas = float(np.linalg.norm(R) / dnorm)
        obj = float(kept.s.sum() + lam * np.abs(E).sum())
        trace.append(IterRecord(k, mu, feas, dual, svp, _e_card(E), sv, svp, obj))
        if iterates is not None:
            iterates.append(Iterate(A.copy(), E.copy(), Y.copy(), mu))
        if feas < cfg.eps1:
            return SolveResult(A, E, True, k, svd_count, trace, "ealm",
                               rank=svp, e_card=_e_card(E), Y=Y,
                               iterates=iterates)
        sv = min(svp + round_half_up(0.1 * d), d)
        mu = rho * mu
    return SolveResult(A, E, False, max_outer, svd_count, trace, "ealm",
                       rank=svp, e_card=_e_card(E), Y=Y, iterates=iterates)


def solve_ialm(D, cfg=None):
    """Inexact augmented Lagrange multiplier method (one alternating sweep
    per multiplier step).

    The sparse block moves first against the previous low-rank iterate, the
    low-rank block follows, then the multiplier takes a step of size mu_k
    along the residual. The penalty grows by ``rho`` exactly when
    mu_k * ||E_{k+1} - E_k||_F / ||D||_F falls below ``eps2``; the solve
    stops when that dual surrogate and the feasibility residual are both
    inside tolerance.
    """
    cfg = cfg or RpcaConfig()
    D = as_matrix(D, "D")
    if not D.any():
        return _zero_result(D, "ialm")
    lam = _resolve_lam(cfg, D)
    dnorm = np.linalg.norm(D)
    norm2 = spectral_norm(D)
    mu = cfg.mu0 if cfg.mu0 is not None else 1.25 / norm2
    rho = cfg.rho if cfg.rho is not None else 1.6
    max_iter = cfg.max_iter or MAX_ITER_DEFAULTS["ialm"]
    d = min(D.shape)
    sv = min(cfg.sv0 or SV0_DEFAULTS["ialm"], d)

    Y = D / dual_gauge(D, lam)
    A = np.zeros_like(D)
    E = np.zeros_like(D)
    trace = []
    iterates = [] if cfg.keep_iterates else None
    svd_count = 0
    for k in range(1, max_iter + 1):
        E_next = shrink(D - A + Y / mu, lam / mu)
        kept, svp, s_raw = svt_triplets(D - E_next + Y / mu, 1.0 / mu, sv)
        svd_count += 1
        A_next = kept.compose()
        R = D - A_next - E_next
        Y = Y + mu * R

        feas = float(np.linalg.norm(R) / dnorm)
        dual = float(mu * np.linalg.norm(E_next - E) / dnorm)
        obj = float(kept.s.sum() + lam * np.abs(E_next).sum())
        sv_used = len(s_raw)
        trace.append(IterRecord(k, mu, feas, dual, svp, _e_card(E_next),
                                sv_used, svp, obj))
        A, E = A_next, E_next
        if iterates is not None:
            iterates.append(Iterate(A.copy(), E.copy(), Y.copy(), mu))
        sv = predict_rank(svp, sv_used, d)
        done = feas < cfg.eps1 and dual < cfg.eps2
        if dual < cfg.eps2:
            mu = rho * mu
        if done:
            return SolveResult(A, E, True, k, svd_count, trace, "ialm",
                               rank=svp, e_card=_e_card(E), Y=Y,
                               iterates=iterates)
    return SolveResult(A, E, False, max_iter, svd_count, trace, "ialm",
                       rank=svp, e_card=_e_card(E), Y=Y, iterates=iterates)
