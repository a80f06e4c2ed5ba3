"""Iteration states. Step functions never mutate them; each step returns a new state."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PDHGState:
    """Primal-dual state (x^k, x^{k-1}, y^k); the extrapolation is formed by the step"""
    k: int
    x: np.ndarray
    x_prev: np.ndarray
    y: np.ndarray

    @classmethod
    def initial(cls, x0: np.ndarray, dual_dim: int) -> 'PDHGState':
        x0 = np.asarray(x0, dtype=float)
        return cls(k=0, x=x0.copy(), x_prev=x0.copy(), y=np.zeros(dual_dim))


@dataclass(frozen=True)
class PrimalState:
    """x^k together with the running average s^k = (x^1 + ... + x^k) / k, s^0 = x^0"""
    k: int
    x: np.ndarray
    s: np.ndarray

    @classmethod
    def initial(cls, x0: np.ndarray) -> 'PrimalState':
        x0 = np.asarray(x0, dtype=float)
        return cls(k=0, x=x0.copy(), s=x0.copy())


@dataclass(frozen=True)
class DualSpaceState:
    """One primal vector and the two images x_tilde = A x, s_tilde = A s"""
    k: int
    x: np.ndarray
    x_tilde: np.ndarray
    s_tilde: np.ndarray


@dataclass(frozen=True)
class AccelState:
    """Primal accelerated state.

    Holds x^k, the weighted average s^k and the schedule entries used by the
    next step: tau_k, sigma_k = lam / tau_k, sigma_sum_prev = Sigma_{k-1} and
    sigma_sum = Sigma_k = Sigma_{k-1} + sigma_k.
    """
    k: int
    x: np.ndarray
    s: np.ndarray
    tau_k: float
    sigma_k: float
    sigma_sum: float
    sigma_sum_prev: float

    @classmethod
    def initial(cls, x0: np.ndarray, lam: float, tau0: float = 1.0) -> 'AccelState':
        x0 = np.asarray(x0, dtype=float)
        sigma0 = lam / tau0
        return cls(k=0, x=x0.copy(), s=x0.copy(), tau_k=tau0, sigma_k=sigma0,
                   sigma_sum=sigma0, sigma_sum_prev=0.0)


@dataclass(frozen=True)
class AccelPDHGState:
    """Accelerated primal-dual state; theta_k = tau_k / tau_{k-1} drives the extrapolation"""
    k: int
    x: np.ndarray
    x_prev: np.ndarray
    y: np.ndarray
    tau_k: float
    sigma_k: float
    theta_k: float
    sigma_sum_prev: float

    @classmethod
    def initial(cls, x0: np.ndarray, dual_dim: int, lam: float,
                tau0: float = 1.0) -> 'AccelPDHGState':
        x0 = np.asarray(x0, dtype=float)
        return cls(k=0, x=x0.copy(), x_prev=x0.copy(), y=np.zeros(dual_dim),
                   tau_k=tau0, sigma_k=lam / tau0, theta_k=1.0, sigma_sum_prev=0.0)

    @property
    def sigma_sum(self) -> float:
        return self.sigma_sum_prev + self.sigma_k
