from enum import Enum


class SolverVariant(Enum):
    """Enum naming every iteration scheme the driver can run"""
    PDHG = "pdhg"
    PRIMAL = "primal"
    DUALSPACE = "dualspace"
    SMOOTH = "smooth"
    CONDAT_VU = "condat-vu"
    GRAM = "gram"
    ACCEL = "accel"
    ACCEL_PDHG = "accel-pdhg"
    TSENG = "tseng"

    @property
    def is_accelerated(self) -> bool:
        return self in (SolverVariant.ACCEL, SolverVariant.ACCEL_PDHG)

    @property
    def needs_smooth_term(self) -> bool:
        return self in (SolverVariant.SMOOTH, SolverVariant.CONDAT_VU)

    @property
    def keeps_dual(self) -> bool:
        """Schemes carrying an explicit dual vector y"""
        return self in (SolverVariant.PDHG, SolverVariant.CONDAT_VU,
                        SolverVariant.GRAM, SolverVariant.ACCEL_PDHG)
