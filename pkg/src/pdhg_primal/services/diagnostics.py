"""
Closed-form convergence bounds and the audits that compare them with traces.

Basic schemes (tau, sigma constant, lam = tau * sigma):

    F_k(x) = g(x) + sigma k (f(x) - f_*)
    F_k(s^k) - g_*             <= D_x^2 / (2 tau k)
    F_k(s^k) - g_*             >= -D_y^2 / (2 sigma k)
    sqrt(2 (f(s^k) - f_*))     <= (D_y + sqrt(D_y^2 + sigma D_x^2 / tau)) / (sigma k)

Accelerated schemes report F_k(x) = g(x) + gamma Sigma_{k-1} (f(x) - f_*) in the
units of the original g; their bounds are derived for g / gamma and converted.
"""

import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from pdhg_primal.errors import DiagnosticsError
from pdhg_primal.models.certificates import AuditRow, BoundSet, Certificates
from pdhg_primal.models.solver_config import SolverConfig
from pdhg_primal.models.step_sizes import StepSizes
from pdhg_primal.models.trace import Trace
from pdhg_primal.services.oracle import solve_penalized
from pdhg_primal.services.problem import ConstrainedProblem
from pdhg_primal.services.solvers import accel_schedule, run

logger = logging.getLogger(__name__)

AUDIT_SLACK = 1e-8
AUDIT_SLACK_PER_STEP = 1e-10


def penalty_value(p: ConstrainedProblem, sigma: float, k: int, x: np.ndarray,
                  sigma_sum_prev: Optional[float] = None, gamma: float = 1.0) -> float:
    """
    F_k(x) = g(x) + sigma k (f(x) - f_*).

    When sigma_sum_prev is given the accelerated weight gamma * Sigma_{k-1}
    replaces sigma k.
    """
    weight = sigma * k if sigma_sum_prev is None else gamma * sigma_sum_prev
    value = p.g.value(x)
    if math.isinf(value) or weight == 0:
        return value
    return value + weight * (p.f_value(x) - p.fstar)


def epsilon_check(p: ConstrainedProblem, x: np.ndarray, eps: float, g_star: float) -> bool:
    """|g(x) - g_*| <= eps and ||Ax - b|| <= eps"""
    value = p.g.value(x)
    if math.isinf(value):
        return False
    return abs(value - g_star) <= eps and p.residual_norm(x) <= eps


def theorem1_bounds(cert: Certificates, ss: StepSizes, k: int) -> BoundSet:
    """Bounds of the basic schemes at iteration k; the dual ones need cert.d_y"""
    if k < 1:
        raise DiagnosticsError(f"bounds are stated for k >= 1, got k={k}")
    d_x, tau, sigma = cert.d_x, ss.tau, ss.sigma
    upper = d_x ** 2 / (2.0 * tau * k)
    bounds = BoundSet(k=k, penalty_upper=upper, obj_upper=upper)
    if cert.has_dual:
        d_y = cert.d_y
        root = math.sqrt(d_y ** 2 + sigma * d_x ** 2 / tau)
        bounds.penalty_lower = -d_y ** 2 / (2.0 * sigma * k)
        bounds.feas_upper = (d_y + root) / (sigma * k)
        bounds.obj_lower = -(d_y ** 2 + d_y * root) / (sigma * k)
    return bounds


def fsk_bound(cert: Certificates, ss: StepSizes, k: int, g_s: float) -> float:
    """Bound on f(s^k) - f_* from sigma (f(s^k) - f_*) <= D_x^2/(2 tau k^2) + (g_* - g(s^k))/k"""
    if k < 1:
        raise DiagnosticsError(f"bounds are stated for k >= 1, got k={k}")
    return (cert.d_x ** 2 / (2.0 * ss.tau * k ** 2) + (cert.g_star - g_s) / k) / ss.sigma


def theorem2_bounds(cert: Certificates, lam: float, sigma_sum_prev: float, k: int,
                    tau_k: Optional[float] = None, sigma_k: Optional[float] = None,
                    tau0: float = 1.0, gamma: float = 1.0) -> BoundSet:
    """
    Bounds of the accelerated schemes at iteration k.

    With c = lam D_x^2 / tau0^2 and D_y scaled to the normalised g / gamma:
    penalty in [-D_y^2 / (2 gamma Sigma_{k-1}), gamma c / (2 Sigma_{k-1})],
    f(s^k) - f_* <= ((D_y + sqrt(D_y^2 + c)) / (sqrt(2) Sigma_{k-1}))^2 and
    ||x^k - x_bar|| <= sqrt((tau_k / sigma_k) (c + D_y^2)).
    """
    if not sigma_sum_prev > 0:
        raise DiagnosticsError(f"Sigma_(k-1) must be positive, got {sigma_sum_prev} at k={k}")
    c = lam * cert.d_x ** 2 / tau0 ** 2
    upper = gamma * c / (2.0 * sigma_sum_prev)
    bounds = BoundSet(k=k, penalty_upper=upper, obj_upper=upper)
    if cert.has_dual:
        d_y = cert.d_y / gamma
        bounds.penalty_lower = -gamma * d_y ** 2 / (2.0 * sigma_sum_prev)
        bounds.feas_upper = ((d_y + math.sqrt(d_y ** 2 + c)) / (math.sqrt(2.0) * sigma_sum_prev)) ** 2
        bounds.obj_lower = -cert.d_y * math.sqrt(2.0 * bounds.feas_upper)
        if tau_k is not None and sigma_k is not None:
            bounds.dist_upper = math.sqrt((tau_k / sigma_k) * (c + d_y ** 2))
    return bounds


def dual_lower_estimate(cert: Certificates, f_gap: float) -> float:
    """g(x) - g_* >= -D_y sqrt(2 (f(x) - f_*))"""
    if not cert.has_dual:
        raise DiagnosticsError("no dual certificate D_y for this instance")
    if f_gap < 0:
        if f_gap < -1e-12:
            raise DiagnosticsError(f"feasibility gap must be nonnegative, got {f_gap}")
        f_gap = 0.0
    return -cert.d_y * math.sqrt(2.0 * f_gap)


def rate_fit(trace: Trace, column: str, k_min: int = 100, k_max: Optional[int] = None,
             fraction: float = 0.5, offset: float = 0.0, envelope: bool = False) -> float:
    """
    Least-squares slope of log(value - offset) against log k.

    The window is the last `fraction` of records with k_min <= k <= k_max.
    Nonpositive values are dropped. With envelope=True the values are first
    replaced by their running supremum over the remaining tail, which removes
    the oscillation of non-monotone series without changing the rate.
    """
    ks = trace.ks().astype(float)
    values = trace.column(column) - offset
    mask = (ks >= max(k_min, 1)) & ((ks <= k_max) if k_max is not None else True)
    ks, values = ks[mask], values[mask]
    if len(ks) < 10:
        raise DiagnosticsError(f"rate fit needs at least 10 records in the window, got {len(ks)}")
    start = len(ks) - max(int(round(fraction * len(ks))), 2)
    ks, values = ks[start:], values[start:]

    keep = np.isfinite(values) & (values > 0)
    if not np.any(keep):
        raise DiagnosticsError(f"column '{column}' has no positive values in the fit window")
    if not np.all(keep):
        logger.debug("rate fit dropped %d nonpositive values", int(np.sum(~keep)))
    ks, values = ks[keep], values[keep]
    if len(ks) < 2:
        raise DiagnosticsError("rate fit needs two positive values")
    if envelope:
        values = np.maximum.accumulate(values[::-1])[::-1]

    slope, _ = np.polyfit(np.log(ks), np.log(values), 1)
    return float(slope)


def _consecutive_snapshots(trace: Trace) -> None:
    if not trace.has_snapshots:
        raise DiagnosticsError("Lyapunov checks need x and s snapshots")
    ks = trace.ks()
    if len(ks) < 2 or np.any(np.diff(ks) != 1):
        raise DiagnosticsError("Lyapunov checks need a record at every step")


def lyapunov_values(trace: Trace, x_bar: np.ndarray, g_star: float, tau: float) -> np.ndarray:
    """V_k = ||x^k - x_bar||^2 / (2 tau) + k (F_k(s^k) - g_*)"""
    _consecutive_snapshots(trace)
    values = []
    for record in trace.records:
        distance = float(np.sum((record.x - x_bar) ** 2)) / (2.0 * tau)
        penalty = 0.0 if record.k == 0 else record.k * (record.penalty_s - g_star)
        values.append(distance + penalty)
    return np.array(values)


def lyapunov_check(trace: Trace, p: ConstrainedProblem, ss: StepSizes, x_bar: np.ndarray,
                   g_star: float, full: bool = False, slack: float = AUDIT_SLACK,
                   op_norm: Optional[float] = None) -> bool:
    """
    V_{k+1} <= V_k at every recorded step.

    full=True adds the terms the energy estimate actually drops,
    beta ||x^{k+1} - x^k||^2 + sigma (f(x^k) - f_*) with beta = (1 - lam ||A||^2) / (2 tau),
    to the left-hand side.
    """
    x_bar = np.asarray(x_bar, dtype=float)
    values = lyapunov_values(trace, x_bar, g_star, ss.tau)
    left = values[1:].copy()
    if full:
        norm = p.operator_norm() if op_norm is None else op_norm
        beta = (1.0 - ss.lam * norm ** 2) / (2.0 * ss.tau)
        f_star = trace.metadata.get("fstar", p.fstar)
        for index, (before, after) in enumerate(zip(trace.records[:-1], trace.records[1:])):
            step = float(np.sum((after.x - before.x) ** 2))
            left[index] += beta * step + ss.sigma * (before.f_x - f_star)
    return _nonincreasing(left, values[:-1], trace.ks()[1:], slack, "Lyapunov")


def accelerated_lyapunov_check(trace: Trace, x_bar: np.ndarray, g_star: float,
                               gamma: float = 1.0, slack: float = AUDIT_SLACK) -> bool:
    """sigma_k / (2 tau_k) ||x^k - x_bar||^2 + Sigma_{k-1} (F_k(s^k) - g_*) / gamma is nonincreasing"""
    _consecutive_snapshots(trace)
    x_bar = np.asarray(x_bar, dtype=float)
    values = []
    for record in trace.records:
        weight = record.get("sigma_k") / (2.0 * record.get("tau_k"))
        sigma_sum_prev = record.get("Sigma_km1")
        penalty = 0.0 if sigma_sum_prev == 0 else sigma_sum_prev * (record.penalty_s - g_star) / gamma
        values.append(weight * float(np.sum((record.x - x_bar) ** 2)) + penalty)
    values = np.array(values)
    return _nonincreasing(values[1:], values[:-1], trace.ks()[1:], slack, "accelerated Lyapunov")


def _nonincreasing(after: np.ndarray, before: np.ndarray, ks: np.ndarray, slack: float,
                   name: str) -> bool:
    tolerance = slack * np.maximum(1.0, np.abs(before))
    violations = np.nonzero(after > before + tolerance)[0]
    if violations.size:
        first = violations[0]
        logger.info("%s function increases at k=%d: %.6e > %.6e", name, ks[first],
                    after[first], before[first])
        return False
    return True


def _row(quantity: str, k: int, measured: float, bound: float, upper: bool,
         slack: float) -> AuditRow:
    allowance = slack + AUDIT_SLACK_PER_STEP * k
    if upper:
        satisfied = measured <= bound + allowance
    else:
        satisfied = measured >= bound - allowance
    return AuditRow(quantity=quantity, k=k, measured=float(measured), bound=float(bound),
                    satisfied=bool(satisfied))


def audit_theorem1(trace: Trace, cert: Certificates, ss: StepSizes,
                   slack: float = AUDIT_SLACK) -> List[AuditRow]:
    """Compare every recorded k >= 1 of a basic-scheme trace with its bounds"""
    rows: List[AuditRow] = []
    for record in trace.records:
        k = record.k
        if k < 1:
            continue
        bounds = theorem1_bounds(cert, ss, k)
        penalty_gap = record.penalty_s - cert.g_star
        f_gap = record.f_s - cert.f_star
        obj_gap = record.g_s - cert.g_star
        rows.append(_row("penalty_upper", k, penalty_gap, bounds.penalty_upper, True, slack))
        rows.append(_row("obj_upper", k, obj_gap, bounds.obj_upper, True, slack))
        rows.append(_row("fsk_upper", k, f_gap, fsk_bound(cert, ss, k, record.g_s), True, slack))
        if cert.has_dual:
            feasibility = math.sqrt(2.0 * max(f_gap, 0.0))
            rows.append(_row("penalty_lower", k, penalty_gap, bounds.penalty_lower, False, slack))
            rows.append(_row("feas_upper", k, feasibility, bounds.feas_upper, True, slack))
            rows.append(_row("obj_lower", k, obj_gap, bounds.obj_lower, False, slack))
    _log_audit("theorem 1", rows)
    return rows


def audit_theorem2(trace: Trace, cert: Certificates, lam: float, tau0: float = 1.0,
                   gamma: float = 1.0, slack: float = AUDIT_SLACK) -> List[AuditRow]:
    """
    Compare an accelerated trace with its bounds.

    The schedule is taken from the trace columns tau_k, sigma_k, Sigma_km1 when
    present and rebuilt from (tau0, lam) otherwise. The distance bound is audited
    when x snapshots were kept.
    """
    schedule = None
    if "Sigma_km1" not in trace.extra_columns:
        schedule = accel_schedule(tau0, lam, int(trace.ks().max()) + 1)
    rows: List[AuditRow] = []
    for record in trace.records:
        k = record.k
        if k < 1:
            continue
        if schedule is None:
            tau_k, sigma_k = record.get("tau_k"), record.get("sigma_k")
            sigma_sum_prev = record.get("Sigma_km1")
        else:
            tau_k, sigma_k = schedule["tau"][k], schedule["sigma"][k]
            sigma_sum_prev = schedule["sigma_sum"][k - 1]
        bounds = theorem2_bounds(cert, lam, sigma_sum_prev, k, tau_k, sigma_k, tau0, gamma)
        penalty_gap = record.penalty_s - cert.g_star
        f_gap = record.f_s - cert.f_star
        obj_gap = record.g_s - cert.g_star
        rows.append(_row("penalty_upper", k, penalty_gap, bounds.penalty_upper, True, slack))
        rows.append(_row("obj_upper", k, obj_gap, bounds.obj_upper, True, slack))
        if cert.has_dual:
            rows.append(_row("penalty_lower", k, penalty_gap, bounds.penalty_lower, False, slack))
            rows.append(_row("feas_upper", k, f_gap, bounds.feas_upper, True, slack))
            rows.append(_row("obj_lower", k, obj_gap, bounds.obj_lower, False, slack))
            if record.x is not None and cert.x_bar is not None:
                distance = float(np.linalg.norm(record.x - cert.x_bar))
                rows.append(_row("dist_upper", k, distance, bounds.dist_upper, True, slack))
    _log_audit("theorem 2", rows)
    return rows


def _log_audit(name: str, rows: Sequence[AuditRow]) -> None:
    failed = [row for row in rows if not row.satisfied]
    if failed:
        worst = failed[0]
        logger.warning("%s audit: %d of %d rows violated, first %s at k=%d (%.6e vs %.6e)", name,
                       len(failed), len(rows), worst.quantity, worst.k, worst.measured, worst.bound)
    else:
        logger.info("%s audit: all %d rows satisfied", name, len(rows))


def penalty_path_gap(p: ConstrainedProblem, trace: Trace, ss: StepSizes, cert: Certificates,
                     ks: Iterable[int] = (10, 100, 1000), tol: float = 1e-10,
                     config: Optional[SolverConfig] = None,
                     slack: float = 1e-6) -> List[AuditRow]:
    """
    F_k(s^k) - F_k(x_hat^k) for x_hat^k = argmin F_k, against
    0 <= gap <= D_x^2 / (2 tau k) + D_y^2 / (2 sigma k).

    The minimisers are warm-started along increasing k.
    """
    if not cert.has_dual:
        raise DiagnosticsError("the path gap bound needs a dual certificate D_y")
    config = config or SolverConfig()
    rows: List[AuditRow] = []
    x_hat = None
    for k in sorted(ks):
        record = trace.record_at(k)
        if record.s is None:
            raise DiagnosticsError("the path gap needs s snapshots")
        x_hat = solve_penalized(p, ss.sigma * k, tol, x0=x_hat, config=config.oracle)
        gap = penalty_value(p, ss.sigma, k, record.s) - penalty_value(p, ss.sigma, k, x_hat)
        bound = cert.d_x ** 2 / (2.0 * ss.tau * k) + cert.d_y ** 2 / (2.0 * ss.sigma * k)
        satisfied = -slack <= gap <= bound + slack
        rows.append(AuditRow(quantity="penalty_path_gap", k=k, measured=gap, bound=bound,
                             satisfied=satisfied))
        logger.debug("path gap k=%d: %.6e (bound %.6e)", k, gap, bound)
    return rows


def compare_stepsize_ratios(p: ConstrainedProblem, lam: float,
                            ratios: Sequence[float] = (0.01, 100.0), max_iters: int = 1000,
                            x0: Optional[np.ndarray] = None,
                            config: Optional[SolverConfig] = None) -> Dict[float, Trace]:
    """
    Run the primal scheme with the same lam and sigma / tau set to each ratio.

    The final gaps are logged for comparison; nothing is asserted.
    """
    config = config or SolverConfig()
    traces: Dict[float, Trace] = {}
    for ratio in ratios:
        ss = StepSizes(tau=math.sqrt(lam / ratio), sigma=math.sqrt(lam * ratio), safety=config.safety)
        trace = run("primal", p, ss, x0=x0, max_iters=max_iters, config=config)
        final = trace.final
        logger.warning("sigma/tau=%g: f(s)-f*=%.3e g(s)=%.6g after %d iterations", ratio,
                       final.f_s - trace.metadata["fstar"], final.g_s, final.k)
        traces[ratio] = trace
    return traces
