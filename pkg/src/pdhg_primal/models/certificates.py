from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class Certificates:
    """Oracle quantities the closed-form bounds are evaluated from.

    d_y is None when no dual certificate is available for the instance.
    """
    d_x: float
    g_star: float
    f_star: float
    d_y: Optional[float] = None
    x_bar: Optional[np.ndarray] = None
    u_star: Optional[np.ndarray] = None

    @property
    def has_dual(self) -> bool:
        return self.d_y is not None

    @classmethod
    def for_start(cls, x0: np.ndarray, x_bar: np.ndarray, g_star: float, f_star: float,
                  d_y: Optional[float] = None,
                  u_star: Optional[np.ndarray] = None) -> 'Certificates':
        x_bar = np.asarray(x_bar, dtype=float)
        d_x = float(np.linalg.norm(np.asarray(x0, dtype=float) - x_bar))
        return cls(d_x=d_x, g_star=float(g_star), f_star=float(f_star), d_y=d_y,
                   x_bar=x_bar, u_star=u_star)

    def to_dict(self) -> dict:
        return {
            "D_x": self.d_x,
            "D_y": self.d_y,
            "g_star": self.g_star,
            "f_star": self.f_star,
            "x_bar": None if self.x_bar is None else self.x_bar.tolist(),
        }


@dataclass
class BoundSet:
    """Closed-form bounds evaluated at one iteration k; None where a dual certificate is needed"""
    k: int
    penalty_upper: float
    obj_upper: float
    penalty_lower: Optional[float] = None
    feas_upper: Optional[float] = None
    obj_lower: Optional[float] = None
    dist_upper: Optional[float] = None


@dataclass
class AuditRow:
    """One measured quantity compared against its bound"""
    quantity: str
    k: int
    measured: float
    bound: float
    satisfied: bool

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "k": self.k,
            "measured": self.measured,
            "bound": self.bound,
            "satisfied": self.satisfied,
        }
