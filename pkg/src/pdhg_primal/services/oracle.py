"""
Reference computations used to certify solver output.

Everything here is independent of the solvers: dense least squares or CGLS for
f_*, a dense KKT solve for quadratic g, and an accelerated proximal-gradient
minimiser of the penalized problem g + (rho/2) ||Ax - b||^2.
"""

import logging
import math
import warnings
from typing import TYPE_CHECKING, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from pdhg_primal.errors import ConfigurationError, ConvergenceWarning, OracleError
from pdhg_primal.models.certificates import Certificates
from pdhg_primal.models.solver_config import OracleConfig
from pdhg_primal.services.operators import LinearMap

if TYPE_CHECKING:
    from pdhg_primal.services.problem import ConstrainedProblem

logger = logging.getLogger(__name__)

PROX_POINT_MAX_ITERS = 10_000


class KKTSolution(NamedTuple):
    x_star: np.ndarray
    u_star: np.ndarray
    g_star: float
    d_y: float


def solve_least_squares(A: LinearMap, b: np.ndarray, tol: float = 1e-10,
                        config: Optional[OracleConfig] = None) -> Tuple[np.ndarray, float]:
    """
    Minimum-norm solution of min 1/2 ||Ax - b||^2.

    Dense lstsq when n <= config.dense_limit, CGLS otherwise. The returned point
    satisfies ||A^T (A x - b)|| <= tol * (1 + ||A^T b||).

    Returns:
        (x_ls, f_star)
    """
    config = config or OracleConfig()
    b = np.asarray(b, dtype=float)
    atb = A.apply_adjoint(b)
    threshold = tol * (1.0 + np.linalg.norm(atb))

    if A.cols <= config.dense_limit:
        x, *_ = np.linalg.lstsq(A.to_dense(), b, rcond=None)
    else:
        x = _cgls(A, b, threshold, config.cg_max_iters)

    r = A.apply(x) - b
    normal_residual = float(np.linalg.norm(A.apply_adjoint(r)))
    if normal_residual > threshold:
        raise OracleError(
            f"least squares stopped with normal-equation residual {normal_residual:.3e} > {threshold:.3e}",
            residual=normal_residual,
        )
    return x, 0.5 * float(r @ r)


def _cgls(A: LinearMap, b: np.ndarray, threshold: float, max_iters: int) -> np.ndarray:
    """Conjugate gradients on A^T A x = A^T b without forming A^T A"""
    x = np.zeros(A.cols)
    r = b.copy()
    s = A.apply_adjoint(r)
    p = s.copy()
    gamma = float(s @ s)
    for _ in range(max_iters):
        if math.sqrt(gamma) <= threshold:
            return x
        q = A.apply(p)
        qq = float(q @ q)
        if qq == 0.0:
            return x
        alpha = gamma / qq
        x += alpha * p
        r -= alpha * q
        s = A.apply_adjoint(r)
        gamma_new = float(s @ s)
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
    residual = math.sqrt(gamma)
    if residual > threshold:
        raise OracleError(f"CGLS did not converge in {max_iters} iterations", residual=residual)
    return x


def solve_qp_kkt(Q, c, A: Optional[LinearMap], b=None, consistent: Optional[bool] = None,
                 gram: Optional[LinearMap] = None, const: float = 0.0,
                 tol: float = 1e-8) -> KKTSolution:
    """
    Solve min 1/2 x^T Q x + c^T x + const  s.t.  A^T A x = A^T b  through its KKT system

        Q x + c + A^T A u = 0,    A^T A x = A^T b.

    The system is solved in the least-squares sense and accepted only if its
    residual is below tol; when it is not, the instance has no KKT point and
    the dual certificate is unavailable.

    Args:
        Q: symmetric positive definite matrix
        c: linear coefficient
        A: constraint map; may be None when gram (= A^T A, with b = 0) is given
        b: right-hand side of A x = b
        consistent: when True, additionally require ||A x* - b|| <= tol
        gram: implicit A^T A for problems without an explicit A
        const: constant term of g
        tol: acceptance threshold on both KKT residuals

    Returns:
        KKTSolution(x_star, u_star, g_star, d_y) with d_y = ||A u*||
    """
    Q = np.array(Q, dtype=float, ndmin=2)
    c = np.asarray(c, dtype=float)
    n = Q.shape[0]
    if A is not None:
        a_dense = A.to_dense()
        G = a_dense.T @ a_dense
        rhs = a_dense.T @ np.asarray(b, dtype=float)
    else:
        G = gram.to_dense()
        rhs = np.zeros(n)

    kkt = np.block([[Q, G], [G, np.zeros((n, n))]])
    solution, *_ = np.linalg.lstsq(kkt, np.concatenate([-c, rhs]), rcond=None)
    x_star, u_star = solution[:n], solution[n:]

    stationarity = float(np.linalg.norm(Q @ x_star + c + G @ u_star))
    feasibility = float(np.linalg.norm(G @ x_star - rhs))
    scale = 1.0 + np.linalg.norm(c) + np.linalg.norm(rhs)
    if max(stationarity, feasibility) > tol * scale:
        raise OracleError(
            f"KKT system is singular for this instance (residuals {stationarity:.3e}, {feasibility:.3e})",
            residual=max(stationarity, feasibility),
        )
    if consistent and A is not None:
        infeasibility = float(np.linalg.norm(a_dense @ x_star - b))
        if infeasibility > tol * scale:
            raise OracleError(f"system declared consistent but ||Ax* - b|| = {infeasibility:.3e}",
                              residual=infeasibility)

    g_star = 0.5 * float(x_star @ Q @ x_star) + float(c @ x_star) + const
    if A is not None:
        d_y = float(np.linalg.norm(a_dense @ u_star))
    else:
        d_y = math.sqrt(max(float(u_star @ G @ u_star), 0.0))
    return KKTSolution(x_star, u_star, g_star, d_y)


def solve_penalized(p: 'ConstrainedProblem', rho: float, tol: float = 1e-10,
                    x0: Optional[np.ndarray] = None,
                    config: Optional[OracleConfig] = None) -> np.ndarray:
    """
    Minimise g(x) + (rho/2) ||Ax - b||^2.

    Accelerated proximal-gradient steps with step eta = 0.99 / (rho ||A||^2) and
    function-value restart; stops once the fixed-point residual ||x+ - y|| of the
    prox-gradient map at the extrapolated point y is below tol.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    config = config or OracleConfig()
    norm = p.operator_norm()
    x = np.zeros(p.n) if x0 is None else np.array(x0, dtype=float)
    if norm == 0.0:
        # constant penalty: minimise g alone
        return _minimise_prox_only(p, x)

    eta = config.penalized_safety / (rho * norm ** 2)

    def objective(point):
        return p.g.value(point) + rho * p.f_value(point)

    y = x.copy()
    t = 1.0
    previous = objective(x)
    residual = math.inf
    for iteration in range(1, config.penalized_max_iters + 1):
        x_new = p.g.prox(eta, y - eta * rho * p.f_grad(y))
        residual = float(np.linalg.norm(x_new - y))
        if residual <= tol:
            logger.debug("penalized solve (rho=%.3g) converged in %d iterations", rho, iteration)
            return x_new
        current = objective(x_new)
        if current > previous:
            # restart momentum
            t = 1.0
            y = x_new.copy()
        else:
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            y = x_new + ((t - 1.0) / t_new) * (x_new - x)
            t = t_new
        x = x_new
        previous = current
    raise OracleError(
        f"penalized solve (rho={rho:.3g}) hit {config.penalized_max_iters} iterations",
        residual=residual,
    )


def _minimise_prox_only(p: 'ConstrainedProblem', x: np.ndarray,
                        max_iters: int = PROX_POINT_MAX_ITERS) -> np.ndarray:
    """Zero map: the minimiser of g alone, reached by proximal-point steps"""
    step = math.inf
    for _ in range(max_iters):
        x_new = p.g.prox(1.0, x)
        step = float(np.linalg.norm(x_new - x))
        if step <= 1e-14:
            return x_new
        x = x_new
    warnings.warn(f"proximal-point iteration stopped after {max_iters} steps with "
                  f"||x+ - x|| = {step:.3e}", ConvergenceWarning)
    return x


def reference_solution(p: 'ConstrainedProblem', x0: Optional[np.ndarray] = None,
                       ladder: Optional[Sequence[float]] = None, tol: float = 1e-10,
                       config: Optional[OracleConfig] = None) -> Tuple[np.ndarray, float]:
    """
    rho-continuation for non-quadratic g: warm-started penalized solves along the ladder.

    Returns:
        (x_bar, d_y_estimate) with d_y_estimate = rho ||A (x_hat - x_ls)|| at the last rho
    """
    config = config or OracleConfig()
    ladder = tuple(ladder or config.rho_ladder)
    x = None if x0 is None else np.asarray(x0, dtype=float)
    for rho in ladder:
        x = solve_penalized(p, rho, tol, x0=x, config=config)
        logger.debug("ladder rho=%.1e f-gap=%.3e", rho, p.f_value(x) - p.fstar)
    d_y = ladder[-1] * math.sqrt(2.0 * max(p.f_value(x) - p.fstar, 0.0))
    if p.A is not None:
        d_y = ladder[-1] * float(np.linalg.norm(p.A.apply(x - p.least_squares_point)))
    return x, d_y


def certify(p: 'ConstrainedProblem', x0: np.ndarray,
            config: Optional[OracleConfig] = None) -> Certificates:
    """Certificates for a run started at x0: KKT path for quadratic-type g, ladder otherwise"""
    config = config or OracleConfig()
    if p.h is not None:
        raise ConfigurationError("certificates cover problems without a smooth term h")
    f_star = p.compute_fstar(config.lsq_tol)
    form = p.g.quadratic_form()
    if form is not None and p.n <= config.dense_limit:
        q, c, const = form
        if np.linalg.eigvalsh(q)[0] > 0:
            solution = solve_qp_kkt(q, c, p.A, p.b, gram=p.gram, const=const, tol=config.kkt_tol)
            logger.info("KKT certificate: g_* = %.12g, D_y = %.6g", solution.g_star, solution.d_y)
            return Certificates.for_start(x0, solution.x_star, solution.g_star, f_star,
                                          d_y=solution.d_y, u_star=solution.u_star)
    x_bar, d_y = reference_solution(p, config=config)
    logger.info("continuation certificate: g_* = %.12g, D_y estimate = %.6g", p.g.value(x_bar), d_y)
    return Certificates.for_start(x0, x_bar, p.g.value(x_bar), f_star, d_y=d_y)


def check_three_point_identity(A: LinearMap, b: np.ndarray, u: np.ndarray, v: np.ndarray,
                               tol: float = 1e-10, x_bar: Optional[np.ndarray] = None) -> bool:
    """
    <grad f(u), x_bar - v> = 2 f_* - f(u) - f(v) + 1/2 ||A(u - v)||^2

    with x_bar a least-squares point (computed when not supplied).
    """
    b = np.asarray(b, dtype=float)
    if x_bar is None:
        x_bar, _ = solve_least_squares(A, b)
    r_bar = A.apply(x_bar) - b
    r_u = A.apply(u) - b
    r_v = A.apply(v) - b
    d = A.apply(np.asarray(u) - np.asarray(v))
    lhs = float(A.apply_adjoint(r_u) @ (x_bar - v))
    rhs = float(r_bar @ r_bar) - 0.5 * float(r_u @ r_u) - 0.5 * float(r_v @ r_v) + 0.5 * float(d @ d)
    return abs(lhs - rhs) <= tol * (1.0 + abs(rhs))
