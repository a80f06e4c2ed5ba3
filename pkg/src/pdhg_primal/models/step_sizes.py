import math
from dataclasses import dataclass
from typing import Optional

from pdhg_primal.errors import ConfigurationError


@dataclass(frozen=True)
class StepSizes:
    """Primal and dual stepsizes (tau, sigma) and the product lam = tau * sigma"""
    tau: float
    sigma: float
    safety: float = 0.99

    def __post_init__(self):
        if not (self.tau > 0 and self.sigma > 0):
            raise ConfigurationError(
                f"stepsizes must be positive, got tau={self.tau}, sigma={self.sigma}"
            )
        if not 0 < self.safety < 1:
            raise ConfigurationError(f"safety factor must lie in (0, 1), got {self.safety}")

    @property
    def lam(self) -> float:
        return self.tau * self.sigma

    @property
    def ratio(self) -> float:
        """sigma / tau"""
        return self.sigma / self.tau

    @classmethod
    def from_lambda(cls, lam: float, tau: Optional[float] = None,
                    sigma: Optional[float] = None, safety: float = 0.99) -> 'StepSizes':
        """Complete (tau, sigma) from lam, splitting evenly when neither is given"""
        if lam <= 0:
            raise ConfigurationError(f"lambda must be positive, got {lam}")
        if tau is not None and sigma is not None:
            raise ConfigurationError("give at most one of tau and sigma together with lambda")
        if tau is not None:
            return cls(tau=tau, sigma=lam / tau, safety=safety)
        if sigma is not None:
            return cls(tau=lam / sigma, sigma=sigma, safety=safety)
        root = math.sqrt(lam)
        return cls(tau=root, sigma=root, safety=safety)

    def to_dict(self) -> dict:
        return {"tau": self.tau, "sigma": self.sigma, "lambda": self.lam, "safety": self.safety}
