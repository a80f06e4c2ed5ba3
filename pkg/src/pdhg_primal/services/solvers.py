"""
Iteration schemes for min g (+ h) over argmin 1/2 ||Ax - b||^2.

Every step function is pure: it takes a state and returns the next one. The
primal forms never hold a dual vector; with y^0 = 0 and x_bar^0 = x^0 their
x-iterates coincide with the primal-dual forms they are derived from:

    pdhg       == primal == dualspace
    condat-vu  == smooth
    accel-pdhg == accel

Since grad f(x) = A^T (Ax - b) is affine, the primal step uses
(k+1) grad f(z^k) = A^T (A(x^k + k s^k) - (k+1) b) rather than grad f(x^k + k s^k).
"""

import logging
import math
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from pdhg_primal.enums.solver_variant import SolverVariant
from pdhg_primal.errors import ConfigurationError, DimensionError
from pdhg_primal.models.solver_config import SolverConfig
from pdhg_primal.models.states import (AccelPDHGState, AccelState, DualSpaceState, PDHGState,
                                       PrimalState)
from pdhg_primal.models.step_sizes import StepSizes
from pdhg_primal.models.trace import Trace, TraceRecord
from pdhg_primal.services.problem import ConstrainedProblem

logger = logging.getLogger(__name__)

ThetaSequence = Callable[[int], float]
Metric = Callable[[np.ndarray, np.ndarray], float]


def _require_matrix(p: ConstrainedProblem, scheme: str) -> None:
    if p.A is None:
        raise ConfigurationError(f"the {scheme} scheme needs an explicit A")


def _require_smooth(p: ConstrainedProblem, scheme: str) -> None:
    if p.h is None:
        raise ConfigurationError(f"the {scheme} scheme needs a smooth term h")


def _normalization(p: ConstrainedProblem) -> float:
    """gamma of g; the accelerated schemes run on g / gamma"""
    gamma = p.gamma
    if not gamma > 0:
        raise ConfigurationError("accelerated schemes need a strongly convex g (gamma > 0)")
    if math.isinf(gamma):
        raise ConfigurationError("accelerated schemes cannot normalise g with gamma = +inf")
    return gamma


def step_pdhg(state: PDHGState, p: ConstrainedProblem, ss: StepSizes) -> PDHGState:
    """y+ = y + sigma (A x_bar - b),  x+ = prox_{tau g}(x - tau A^T y+),  x_bar = 2x - x_prev"""
    _require_matrix(p, "PDHG")
    x_bar = 2.0 * state.x - state.x_prev
    y = state.y + ss.sigma * p.residual(x_bar)
    x = p.g.prox(ss.tau, state.x - ss.tau * p.A.apply_adjoint(y))
    return PDHGState(k=state.k + 1, x=x, x_prev=state.x, y=y)


def step_primal(state: PrimalState, p: ConstrainedProblem, ss: StepSizes) -> PrimalState:
    """x+ = prox_{tau g}(x - lam A^T (A(x + k s) - (k+1) b)),  s+ = (x+ + k s) / (k+1)"""
    k = state.k
    direction = p.affine_gradient(state.x + k * state.s, k + 1)
    x = p.g.prox(ss.tau, state.x - ss.lam * direction)
    s = (x + k * state.s) / (k + 1)
    return PrimalState(k=k + 1, x=x, s=s)


def initial_dualspace_state(p: ConstrainedProblem, x0: np.ndarray) -> DualSpaceState:
    _require_matrix(p, "dual-space")
    x0 = np.asarray(x0, dtype=float)
    image = p.A.apply(x0)
    return DualSpaceState(k=0, x=x0.copy(), x_tilde=image, s_tilde=image.copy())


def step_primal_dualspace(state: DualSpaceState, p: ConstrainedProblem,
                          ss: StepSizes) -> DualSpaceState:
    """The primal step with A x and A s carried in R^m instead of s in R^n"""
    _require_matrix(p, "dual-space")
    k = state.k
    v = state.x_tilde + k * state.s_tilde - (k + 1) * p.b
    x = p.g.prox(ss.tau, state.x - ss.lam * p.A.apply_adjoint(v))
    x_tilde = p.A.apply(x)
    s_tilde = (x_tilde + k * state.s_tilde) / (k + 1)
    return DualSpaceState(k=k + 1, x=x, x_tilde=x_tilde, s_tilde=s_tilde)


def step_primal_smooth(state: PrimalState, p: ConstrainedProblem, ss: StepSizes) -> PrimalState:
    """The primal step with the extra forward term -tau grad h(x^k)"""
    _require_smooth(p, "smooth primal")
    k = state.k
    direction = p.affine_gradient(state.x + k * state.s, k + 1)
    x = p.g.prox(ss.tau, state.x - ss.tau * p.h.gradient(state.x) - ss.lam * direction)
    s = (x + k * state.s) / (k + 1)
    return PrimalState(k=k + 1, x=x, s=s)


def step_condat_vu(state: PDHGState, p: ConstrainedProblem, ss: StepSizes) -> PDHGState:
    """y+ = y + sigma (A x_bar - b),  x+ = prox_{tau g}(x - tau (A^T y+ + grad h(x)))"""
    _require_matrix(p, "Condat-Vu")
    _require_smooth(p, "Condat-Vu")
    x_bar = 2.0 * state.x - state.x_prev
    y = state.y + ss.sigma * p.residual(x_bar)
    x = p.g.prox(ss.tau, state.x - ss.tau * (p.A.apply_adjoint(y) + p.h.gradient(state.x)))
    return PDHGState(k=state.k + 1, x=x, x_prev=state.x, y=y)


def step_pdhg_gram(state: PDHGState, p: ConstrainedProblem, ss: StepSizes) -> PDHGState:
    """PDHG on the normal equations A^T A x = A^T b; y lives in R^n"""
    x_bar = 2.0 * state.x - state.x_prev
    y = state.y + ss.sigma * (p.normal_apply(x_bar) - p.atb)
    x = p.g.prox(ss.tau, state.x - ss.tau * p.normal_apply(y))
    return PDHGState(k=state.k + 1, x=x, x_prev=state.x, y=y)


def accel_schedule_next(tau_prev: float, lam: float) -> Tuple[float, float, float]:
    """tau_k = tau_{k-1} / sqrt(1 + tau_{k-1}),  sigma_k = lam / tau_k,  theta_k = tau_k / tau_{k-1}"""
    if not (tau_prev > 0 and lam > 0):
        raise ConfigurationError(f"schedule needs tau_prev > 0 and lam > 0, got {tau_prev}, {lam}")
    tau = tau_prev / math.sqrt(1.0 + tau_prev)
    return tau, lam / tau, tau / tau_prev


def accel_schedule(tau0: float, lam: float, count: int) -> Dict[str, np.ndarray]:
    """tau_k, sigma_k and Sigma_k for k = 0..count-1"""
    taus = np.empty(count)
    tau = tau0
    for k in range(count):
        taus[k] = tau
        tau = tau / math.sqrt(1.0 + tau)
    sigmas = lam / taus
    return {"tau": taus, "sigma": sigmas, "sigma_sum": np.cumsum(sigmas)}


def step_accelerated(state: AccelState, p: ConstrainedProblem, lam: float,
                     freeze_schedule: bool = False) -> AccelState:
    """
    Primal accelerated step for strongly convex g (run on g / gamma):

        z   = (sigma_k x + Sigma_{k-1} s) / Sigma_k
        x+  = prox_{tau_k g}(x - tau_k A^T (A(sigma_k x + Sigma_{k-1} s) - Sigma_k b))
        s+  = (sigma_k x+ + Sigma_{k-1} s) / Sigma_k
    """
    gamma = _normalization(p)
    weighted = state.sigma_k * state.x + state.sigma_sum_prev * state.s
    direction = p.affine_gradient(weighted, state.sigma_sum)
    x = p.g.prox(state.tau_k / gamma, state.x - state.tau_k * direction)
    s = (state.sigma_k * x + state.sigma_sum_prev * state.s) / state.sigma_sum
    if freeze_schedule:
        tau_next, sigma_next = state.tau_k, state.sigma_k
    else:
        tau_next, sigma_next, _ = accel_schedule_next(state.tau_k, lam)
    return AccelState(k=state.k + 1, x=x, s=s, tau_k=tau_next, sigma_k=sigma_next,
                      sigma_sum=state.sigma_sum + sigma_next, sigma_sum_prev=state.sigma_sum)


def step_accelerated_pdhg(state: AccelPDHGState, p: ConstrainedProblem, lam: float,
                          freeze_schedule: bool = False) -> AccelPDHGState:
    """y+ = y + sigma_k (A x_bar - b),  x+ = prox_{tau_k g}(x - tau_k A^T y+),  x_bar = x + theta_k (x - x_prev)"""
    _require_matrix(p, "accelerated PDHG")
    gamma = _normalization(p)
    x_bar = state.x + state.theta_k * (state.x - state.x_prev)
    y = state.y + state.sigma_k * p.residual(x_bar)
    x = p.g.prox(state.tau_k / gamma, state.x - state.tau_k * p.A.apply_adjoint(y))
    if freeze_schedule:
        tau_next, sigma_next, theta_next = state.tau_k, state.sigma_k, 1.0
    else:
        tau_next, sigma_next, theta_next = accel_schedule_next(state.tau_k, lam)
    return AccelPDHGState(k=state.k + 1, x=x, x_prev=state.x, y=y, tau_k=tau_next,
                          sigma_k=sigma_next, theta_k=theta_next, sigma_sum_prev=state.sigma_sum)


def tseng_theta(k: int) -> float:
    return 2.0 / (k + 2)


def step_tseng(state: PrimalState, p: ConstrainedProblem, lam: float,
               theta: Optional[ThetaSequence] = None) -> PrimalState:
    """
    z = theta_k x + (1 - theta_k) s,  x+ = prox_{(lam/theta_k) g}(x - (lam/theta_k) grad f(z)),
    s+ = theta_k x+ + (1 - theta_k) s, with theta_k = 2/(k+2) unless another sequence is given.
    """
    theta_k = (theta or tseng_theta)(state.k)
    z = theta_k * state.x + (1.0 - theta_k) * state.s
    step = lam / theta_k
    x = p.g.prox(step, state.x - step * p.f_grad(z))
    s = theta_k * x + (1.0 - theta_k) * state.s
    return PrimalState(k=state.k + 1, x=x, s=s)


def default_step_sizes(variant: Union[SolverVariant, str], p: ConstrainedProblem,
                       config: Optional[SolverConfig] = None,
                       norm: Optional[float] = None) -> StepSizes:
    """Largest admissible stepsizes shrunk by the safety factor, tau = sigma unless a variant needs otherwise"""
    variant = SolverVariant(variant)
    config = config or SolverConfig()
    norm = p.operator_norm(config) if norm is None else norm
    scale = norm if norm > 0 else 1.0
    safety = config.safety
    if variant.needs_smooth_term:
        beta = p.h.beta if p.h is not None else 0.0
        step = safety / (beta + scale)
        return StepSizes(tau=step, sigma=step, safety=safety)
    if variant == SolverVariant.GRAM:
        return StepSizes.from_lambda(safety / scale ** 4, safety=safety)
    if variant.is_accelerated:
        return StepSizes(tau=config.accel_tau0, sigma=safety / scale ** 2 / config.accel_tau0,
                         safety=safety)
    return StepSizes.from_lambda(safety / scale ** 2, safety=safety)


def resolve_step_sizes(variant: Union[SolverVariant, str], p: ConstrainedProblem,
                       tau: Optional[float] = None, sigma: Optional[float] = None,
                       lam: Optional[float] = None, config: Optional[SolverConfig] = None,
                       norm: Optional[float] = None) -> StepSizes:
    """Complete a partial (tau, sigma, lam) choice; anything missing comes from the variant defaults"""
    config = config or SolverConfig()
    safety = config.safety
    if tau is not None and sigma is not None:
        if lam is not None and abs(tau * sigma - lam) > 1e-12 * lam:
            raise ConfigurationError(f"tau * sigma = {tau * sigma:.6g} contradicts lambda = {lam:.6g}")
        return StepSizes(tau=tau, sigma=sigma, safety=safety)
    if lam is not None:
        return StepSizes.from_lambda(lam, tau=tau, sigma=sigma, safety=safety)
    defaults = default_step_sizes(variant, p, config, norm)
    if tau is not None:
        return StepSizes(tau=tau, sigma=defaults.lam / tau, safety=safety)
    if sigma is not None:
        return StepSizes(tau=defaults.lam / sigma, sigma=sigma, safety=safety)
    return defaults


def validate_step_sizes(variant: Union[SolverVariant, str], p: ConstrainedProblem, ss: StepSizes,
                        config: Optional[SolverConfig] = None, norm: Optional[float] = None) -> None:
    """Raise ConfigurationError naming the violated admissibility inequality"""
    variant = SolverVariant(variant)
    norm = p.operator_norm(config) if norm is None else norm
    squared = norm ** 2
    if variant.needs_smooth_term:
        _require_smooth(p, variant.value)
        measured = ss.lam * squared
        limit = 1.0 - ss.tau * p.h.beta
        if not measured < limit:
            raise ConfigurationError(
                f"tau*sigma*||A||^2 = {measured:.6g} >= 1 - tau*beta = {limit:.6g} "
                f"violates tau*sigma*||A||^2 < 1 - tau*beta"
            )
    elif variant == SolverVariant.GRAM:
        measured = ss.lam * squared ** 2
        if not measured < 1.0:
            raise ConfigurationError(
                f"tau*sigma*||A||^4 = {measured:.6g} >= 1 violates tau*sigma*||A||^4 < 1"
            )
    elif variant.is_accelerated:
        _normalization(p)
        measured = ss.lam * squared
        if not measured <= 1.0:
            raise ConfigurationError(f"lambda*||A||^2 = {measured:.6g} > 1 violates lambda*||A||^2 <= 1")
    else:
        measured = ss.lam * squared
        if not measured < 1.0:
            raise ConfigurationError(f"lambda*||A||^2 = {measured:.6g} >= 1 violates lambda*||A||^2 < 1")


class _Runner:
    """Carries one scheme's state and exposes x^k, s^k and the penalty weight uniformly"""

    def __init__(self, variant: SolverVariant, p: ConstrainedProblem, ss: StepSizes,
                 x0: np.ndarray, tau0: float, theta: Optional[ThetaSequence]):
        self.variant = variant
        self.p = p
        self.ss = ss
        self.theta = theta
        self.gamma = _normalization(p) if variant.is_accelerated else 1.0
        self.s = x0.copy()
        if variant in (SolverVariant.PRIMAL, SolverVariant.SMOOTH, SolverVariant.TSENG):
            self.state = PrimalState.initial(x0)
        elif variant == SolverVariant.DUALSPACE:
            self.state = initial_dualspace_state(p, x0)
        elif variant == SolverVariant.ACCEL:
            self.state = AccelState.initial(x0, ss.lam, tau0)
        elif variant == SolverVariant.ACCEL_PDHG:
            _require_matrix(p, "accelerated PDHG")
            self.state = AccelPDHGState.initial(x0, p.m, ss.lam, tau0)
        elif variant == SolverVariant.GRAM:
            self.state = PDHGState.initial(x0, p.n)
        else:
            _require_matrix(p, variant.value)
            self.state = PDHGState.initial(x0, p.m)

    @property
    def k(self) -> int:
        return self.state.k

    @property
    def x(self) -> np.ndarray:
        return self.state.x

    def advance(self) -> None:
        variant, state, p, ss = self.variant, self.state, self.p, self.ss
        k = state.k
        if variant == SolverVariant.PRIMAL:
            self.state = step_primal(state, p, ss)
        elif variant == SolverVariant.SMOOTH:
            self.state = step_primal_smooth(state, p, ss)
        elif variant == SolverVariant.TSENG:
            self.state = step_tseng(state, p, ss.lam, self.theta)
        elif variant == SolverVariant.ACCEL:
            self.state = step_accelerated(state, p, ss.lam)
        elif variant == SolverVariant.DUALSPACE:
            self.state = step_primal_dualspace(state, p, ss)
            self.s = (self.state.x + k * self.s) / (k + 1)
        elif variant == SolverVariant.ACCEL_PDHG:
            self.state = step_accelerated_pdhg(state, p, ss.lam)
            self.s = (state.sigma_k * self.state.x + state.sigma_sum_prev * self.s) / state.sigma_sum
        else:
            step = {SolverVariant.PDHG: step_pdhg, SolverVariant.CONDAT_VU: step_condat_vu,
                    SolverVariant.GRAM: step_pdhg_gram}[variant]
            self.state = step(state, p, ss)
            self.s = (self.state.x + k * self.s) / (k + 1)
        if hasattr(self.state, "s"):
            self.s = self.state.s

    def penalty_weight(self) -> float:
        """sigma k for the basic schemes, gamma Sigma_{k-1} (original units) for the accelerated ones"""
        if self.variant.is_accelerated:
            return self.gamma * self.state.sigma_sum_prev
        return self.ss.sigma * self.state.k

    def schedule_extras(self) -> Dict[str, float]:
        if not self.variant.is_accelerated:
            return {}
        return {"tau_k": self.state.tau_k, "sigma_k": self.state.sigma_k,
                "Sigma_km1": self.state.sigma_sum_prev}


def run(variant: Union[SolverVariant, str], p: ConstrainedProblem,
        step_sizes: Optional[StepSizes] = None, x0: Optional[np.ndarray] = None,
        max_iters: int = 1000, record_every: Optional[int] = None, snapshots: bool = False,
        config: Optional[SolverConfig] = None, tau0: Optional[float] = None,
        theta: Optional[ThetaSequence] = None, metrics: Optional[Dict[str, Metric]] = None,
        metric_problem: Optional[ConstrainedProblem] = None,
        norm: Optional[float] = None) -> Trace:
    """
    Iterate one scheme and record its diagnostics.

    Args:
        variant: scheme to run
        p: problem the steps act on
        step_sizes: (tau, sigma); defaults to the variant's safe choice
        x0: starting point, zeros when omitted
        max_iters: number of steps
        record_every: recording stride; k = 0 and the final k are always recorded
        snapshots: keep copies of x^k and s^k in every record
        config: solver configuration
        tau0: first accelerated stepsize, config.accel_tau0 when omitted
        theta: alternative theta sequence for Tseng's scheme
        metrics: extra columns computed from (x^k, s^k)
        metric_problem: problem used for recorded values when p wraps counting maps
        norm: known ||A||, skips the estimate

    Returns:
        Trace with columns k, f_x, f_s, g_s, F_k_s, residual_s, dx_norm and extras.
    """
    variant = SolverVariant(variant)
    config = config or SolverConfig()
    record_every = config.record_every if record_every is None else record_every
    if max_iters < 0 or record_every < 1:
        raise ConfigurationError(f"need max_iters >= 0 and record_every >= 1, got {max_iters}, {record_every}")
    tau0 = config.accel_tau0 if tau0 is None else tau0
    monitor = metric_problem or p

    norm = p.operator_norm(config) if norm is None else norm
    ss = step_sizes or default_step_sizes(variant, p, config, norm)
    validate_step_sizes(variant, p, ss, config, norm)
    f_star = monitor.compute_fstar(config.fstar_tol, config)

    x0 = np.zeros(p.n) if x0 is None else np.array(x0, dtype=float)
    if x0.shape != (p.n,):
        raise DimensionError(f"x0 has shape {x0.shape}, expected ({p.n},)")

    runner = _Runner(variant, p, ss, x0, tau0, theta)
    trace = Trace(variant=variant.value, metadata={
        "variant": variant.value,
        "tau": ss.tau,
        "sigma": ss.sigma,
        "lambda": ss.lam,
        "tau0": tau0,
        "gamma": runner.gamma,
        "fstar": f_star,
        "max_iters": max_iters,
        "record_every": record_every,
        "x0": x0.tolist(),
    })
    logger.info("running %s: tau=%.6g sigma=%.6g lambda=%.6g ||A||=%.6g, %d iterations",
                variant.value, ss.tau, ss.sigma, ss.lam, norm, max_iters)

    x_prev = x0
    dx_norm = 0.0
    trace.records.append(_record(monitor, runner, f_star, dx_norm, metrics, snapshots))
    for _ in range(max_iters):
        x_prev = runner.x
        runner.advance()
        if runner.k % record_every == 0 or runner.k == max_iters:
            dx_norm = float(np.linalg.norm(runner.x - x_prev))
            trace.records.append(_record(monitor, runner, f_star, dx_norm, metrics, snapshots))

    final = trace.final
    logger.info("%s finished at k=%d: f(s)-f*=%.3e residual=%.3e", variant.value, final.k,
                final.f_s - f_star, final.residual_s)
    return trace


def _record(p: ConstrainedProblem, runner: _Runner, f_star: float, dx_norm: float,
            metrics: Optional[Dict[str, Metric]], snapshots: bool) -> TraceRecord:
    x, s = runner.x, runner.s
    f_s = p.f_value(s)
    g_s = p.g.value(s)
    weight = runner.penalty_weight()
    penalty = g_s if weight == 0 or math.isinf(g_s) else g_s + weight * (f_s - f_star)
    record = TraceRecord(
        k=runner.k,
        f_x=p.f_value(x),
        f_s=f_s,
        g_s=g_s,
        penalty_s=penalty,
        residual_s=p.residual_norm(s),
        dx_norm=dx_norm,
        extras=runner.schedule_extras(),
    )
    for name, metric in (metrics or {}).items():
        record.extras[name] = float(metric(x, s))
    if snapshots:
        record.x = x.copy()
        record.s = s.copy()
    logger.debug("k=%d f_s=%.6e F_k=%.6e", record.k, f_s, penalty)
    return record
