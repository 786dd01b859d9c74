"""Optimality and convergence checkers: KKT residual reports, dual-norm
bounds on multipliers, the Lyapunov quantity that certifies inexact-ALM
progress, a divergence demonstration for too-fast penalty growth, and
trace-level invariant verification for solver reports."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .linalg import as_matrix, dual_gauge, shrink, spectral_norm, svt_triplets
from .problems import RpcaInstance
from .rpca import RpcaConfig, solve_ealm

__all__ = [
    "KktReport",
    "kkt_report",
    "dual_feasibility",
    "lyapunov_trace",
    "lyapunov_increases",
    "divergence_demo",
    "objective_rate_check",
    "high_accuracy_reference",
    "verify_report",
]

DUAL_FEAS_SLACK = 1e-3
LYAPUNOV_REL_SLACK = 1e-8
STALL_ERROR = 1e-2


@dataclass(frozen=True)
class KktReport:
    """Scaled stationarity quantities for a candidate decomposition."""

    feas: float
    dual_est: float
    spectral_y: float
    linf_y_over_lambda: float
    objective: float

    def to_dict(self):
        return asdict(self)


def kkt_report(D, A, E, Y, lam, mu_prev, delta_e_norm):
    """Feasibility and dual-surrogate residuals plus the objective value.

    ``dual_est`` is the standard surrogate mu_prev * ||dE||_F / ||D||_F for
    the distance between the two subdifferentials at (A, E).
    """
    D, A, E, Y = (as_matrix(x, n) for x, n in ((D, "D"), (A, "A"), (E, "E"), (Y, "Y")))
    if not (D.shape == A.shape == E.shape == Y.shape):
        raise ValueError("all matrices must share one shape")
    if lam <= 0:
        raise ValueError("lam must be positive")
    dnorm = np.linalg.norm(D)
    if dnorm == 0.0:
        dnorm = 1.0
    s = np.linalg.svd(A, compute_uv=False)
    return KktReport(
        feas=float(np.linalg.norm(D - A - E) / dnorm),
        dual_est=float(mu_prev * delta_e_norm / dnorm),
        spectral_y=spectral_norm(Y),
        linf_y_over_lambda=float(np.abs(Y).max() / lam) if Y.size else 0.0,
        objective=float(s.sum() + lam * np.abs(E).sum()),
    )


def dual_feasibility(Y, lam, slack=DUAL_FEAS_SLACK):
    """Check that a multiplier sits (almost) inside the dual-feasible set.

    Returns ``(spectral, scaled_linf, ok)`` with ``ok`` true when both
    ||Y||_2 and ||Y||_inf / lam are at most 1 + ``slack``.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    Y = as_matrix(Y, "Y")
    spectral = spectral_norm(Y)
    scaled_linf = float(np.abs(Y).max() / lam) if Y.size else 0.0
    return spectral, scaled_linf, bool(spectral <= 1.0 + slack and scaled_linf <= 1.0 + slack)


def _unpack_iterate(item):
    if hasattr(item, "e"):
        return item.e, item.y, item.mu
    e, y, mu = item
    return e, y, mu


def lyapunov_trace(iterates, e_star, y_star):
    """V_k = ||E_k - E*||_F^2 + mu_k^-2 ||Y_k - Y*||_F^2 along a solver run.

    ``iterates`` is a sequence of per-iteration snapshots (``Iterate`` or
    ``(E, Y, mu)`` triples); the oracle pair should come from a high-accuracy
    reference solve. The sequence is non-increasing for a nondecreasing
    penalty schedule; use :func:`lyapunov_increases` to flag violations.
    """
    if e_star is None or y_star is None:
        raise ValueError("oracle solution (E*, Y*) is required")
    e_star = as_matrix(e_star, "e_star")
    y_star = as_matrix(y_star, "y_star")
    out = []
    for item in iterates:
        e, y, mu = _unpack_iterate(item)
        out.append(float(np.linalg.norm(e - e_star) ** 2
                         + np.linalg.norm(y - y_star) ** 2 / mu**2))
    return out


def lyapunov_increases(values, rel_slack=LYAPUNOV_REL_SLACK):
    """Indices k where V_{k+1} exceeds V_k beyond the relative slack."""
    v = np.asarray(values, dtype=np.float64)
    bad = []
    for k in range(v.size - 1):
        if v[k + 1] > v[k] * (1.0 + rel_slack):
            bad.append(k + 1)
    return bad


def high_accuracy_reference(D, lam=None, tol=1e-10):
    """Reference optimum from the exact-ALM solver with all tolerances
    tightened to ``tol``; the returned result's objective serves as f*."""
    cfg = RpcaConfig(lam=lam, eps1=tol, inner_tol=tol, max_iter=200)
    return solve_ealm(D, cfg)


def objective_rate_check(objectives, mus, f_star, fit_count=3, slack=1.05):
    """Fit C from the first ``fit_count`` points of |obj_k - f*| <= C / mu_k
    and verify the bound (with multiplicative ``slack``) on the rest.

    Returns ``(C, ok)`` where ``ok`` lists one boolean per remaining point.
    """
    obj = np.asarray(objectives, dtype=np.float64)
    mus = np.asarray(mus, dtype=np.float64)
    if obj.size != mus.size or obj.size < fit_count + 1:
        raise ValueError("need matching objective/mu arrays longer than fit_count")
    gaps = np.abs(obj - f_star)
    C = float((gaps[:fit_count] * mus[:fit_count]).max())
    ok = [bool(gaps[k] <= slack * C / mus[k]) for k in range(fit_count, obj.size)]
    return C, ok


def divergence_demo(instance: RpcaInstance, bad_e0_scale, growth,
                    mu_cap_factor=None, max_iter=100, stall_error=STALL_ERROR):
    """Run the inexact ALM iteration with a forced geometric penalty schedule
    mu_k = mu0 * growth**k and a sparse iterate initialized to
    ``bad_e0_scale`` times a random sign matrix.

    With ``growth`` >= 3 the inverse penalties are summable, so a bad enough
    start leaves the iterates stuck far from the optimum: ``stalled`` reports
    whether the final recovery error exceeds ``stall_error``. Passing
    ``mu_cap_factor`` bounds the schedule at that multiple of mu0 (making the
    inverse sum diverge again), which restores convergence and serves as the
    control run. The sign matrix is drawn from a Philox stream keyed by
    (instance seed, 1).
    """
    if growth < 3:
        raise ValueError("growth must be at least 3 so the inverse penalties are summable")
    D = instance.d
    m, n = D.shape
    lam = instance.lam
    mu0 = 1.25 / spectral_norm(D)
    cap = mu_cap_factor * mu0 if mu_cap_factor is not None else None
    rng = np.random.Generator(np.random.Philox([instance.seed, 1]))
    signs = np.where(rng.random((m, n)) < 0.5, -1.0, 1.0)
    E = bad_e0_scale * signs
    A = np.zeros_like(D)
    Y = D / dual_gauge(D, lam)
    d = min(m, n)
    mu = mu0
    for k in range(1, max_iter + 1):
        E = shrink(D - A + Y / mu, lam / mu)
        kept, svp, _ = svt_triplets(D - E + Y / mu, 1.0 / mu, d)
        A = kept.compose()
        Y = Y + mu * (D - A - E)
        mu = mu0 * growth**k
        if cap is not None:
            mu = min(mu, cap)
    final_error = instance.rel_error(A)
    return final_error > stall_error, final_error


def _check(name, status, detail):
    return {"invariant": name, "status": status, "detail": detail}


def verify_report(report, manifest=None):
    """Trace-level invariant verdicts for a solver JSON report.

    Returns a list of ``{invariant, status, detail}`` entries with status
    ``pass``, ``fail`` or ``warn``. The checks cover residual sanity, the
    penalty update rule, stopping consistency, multiplier dual feasibility
    (when the report carries the final gauge values) and the monotone-rank
    observation (warn only).
    """
    checks = []
    trace = report.get("trace", [])
    algorithm = report.get("algorithm", "?")
    cfg = report.get("config") or {}
    feas = [r["feas"] for r in trace]
    dual = [r["dual_est"] for r in trace]
    mus = [r["mu"] for r in trace]

    finite = all(np.isfinite(v) and v >= 0 for v in feas + dual)
    checks.append(_check("residuals_finite_nonnegative",
                         "pass" if finite else "fail",
                         f"{len(trace)} records"))

    if algorithm in ("ialm", "mc-ialm") and len(mus) > 1:
        nondecr = all(b >= a for a, b in zip(mus, mus[1:]))
        checks.append(_check("mu_nondecreasing", "pass" if nondecr else "fail",
                             f"mu range [{min(mus):.3g}, {max(mus):.3g}]"))

    if algorithm == "ialm" and len(mus) > 1:
        rho = cfg.get("rho") or 1.6
        eps2 = cfg.get("eps2", 1e-5)
        ok = True
        for k in range(len(mus) - 1):
            ratio = mus[k + 1] / mus[k]
            grew = abs(ratio - rho) < 1e-9 * rho
            stayed = abs(ratio - 1.0) < 1e-12
            if not (grew or stayed) or grew != (dual[k] < eps2):
                ok = False
                break
        checks.append(_check("mu_adaptive_rule", "pass" if ok else "fail",
                             f"rho={rho}, eps2={eps2}"))

    if report.get("converged") and trace:
        eps1 = cfg.get("eps1", 1e-7)
        ok = feas[-1] < eps1
        checks.append(_check("converged_feasibility", "pass" if ok else "fail",
                             f"final feas {feas[-1]:.3g} vs eps1 {eps1:.3g}"))

    final = report.get("final", {})
    if "spectral_y" in final:
        sp, li = final["spectral_y"], final["linf_y_over_lambda"]
        if sp <= 1 + DUAL_FEAS_SLACK and li <= 1 + DUAL_FEAS_SLACK:
            status = "pass"
        elif sp <= 1.01 and li <= 1.01:
            status = "warn"
        else:
            status = "fail"
        checks.append(_check("dual_feasibility", status,
                             f"|Y|_2={sp:.6f}, |Y|_inf/lam={li:.6f}"))

    ranks = [r["rank_a"] for r in trace]
    if ranks:
        monotone = all(b >= a for a, b in zip(ranks, ranks[1:]))
        checks.append(_check("rank_monotone", "pass" if monotone else "warn",
                             f"rank path {ranks[:3]}...{ranks[-3:]}"))

    if manifest is not None and trace:
        want = manifest.get("r")
        if want is not None:
            got = report.get("rank")
            checks.append(_check("rank_matches_manifest",
                                 "pass" if got == want else "warn",
                                 f"recovered {got}, manifest {want}"))
    return checks
