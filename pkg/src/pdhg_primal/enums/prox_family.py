from enum import Enum


class ProxFamily(Enum):
    """Enum representing the closed-form prox families in the catalogue"""
    ZERO = "zero"
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    L1 = "l1"
    BOX = "box"
    NONNEGATIVE = "nonnegative"
    POINT = "point"
    SEPARABLE_SUM = "separable_sum"
    STRONGLY_CONVEXIFIED = "strongly_convexified"


class SmoothFamily(Enum):
    """Enum representing the smooth terms h a problem may carry"""
    ZERO = "zero"
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    QUADRATIC_FORM = "quadratic_form"
