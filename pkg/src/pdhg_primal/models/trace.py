from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from pdhg_primal.errors import DiagnosticsError

# CSV column -> TraceRecord attribute
BASE_COLUMNS = {
    "k": "k",
    "f_x": "f_x",
    "f_s": "f_s",
    "g_s": "g_s",
    "F_k_s": "penalty_s",
    "residual_s": "residual_s",
    "dx_norm": "dx_norm",
}


@dataclass
class TraceRecord:
    """Diagnostics recorded at iteration k"""
    k: int
    f_x: float
    f_s: float
    g_s: float
    penalty_s: float
    residual_s: float
    dx_norm: float
    extras: Dict[str, float] = field(default_factory=dict)
    x: Optional[np.ndarray] = None
    s: Optional[np.ndarray] = None

    def get(self, column: str) -> float:
        if column in BASE_COLUMNS:
            return getattr(self, BASE_COLUMNS[column])
        if column in self.extras:
            return self.extras[column]
        raise DiagnosticsError(f"trace has no column '{column}'")

    def to_row(self, extra_columns: List[str]) -> list:
        """Values in CSV column order"""
        row = [getattr(self, attribute) for attribute in BASE_COLUMNS.values()]
        row.extend(self.extras.get(name, float("nan")) for name in extra_columns)
        return row


@dataclass
class Trace:
    """Recorded diagnostic series of one solver run plus the run metadata"""
    variant: str = ""
    records: List[TraceRecord] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def final(self) -> TraceRecord:
        if not self.records:
            raise DiagnosticsError("trace is empty")
        return self.records[-1]

    @property
    def extra_columns(self) -> List[str]:
        names: List[str] = []
        for record in self.records:
            for name in record.extras:
                if name not in names:
                    names.append(name)
        return names

    @property
    def columns(self) -> List[str]:
        return list(BASE_COLUMNS) + self.extra_columns

    @property
    def has_snapshots(self) -> bool:
        return bool(self.records) and all(r.x is not None and r.s is not None for r in self.records)

    def ks(self) -> np.ndarray:
        return np.array([r.k for r in self.records], dtype=int)

    def column(self, name: str) -> np.ndarray:
        return np.array([r.get(name) for r in self.records], dtype=float)

    def record_at(self, k: int) -> TraceRecord:
        for record in self.records:
            if record.k == k:
                return record
        raise DiagnosticsError(f"trace holds no record for k={k}")

    def x_series(self) -> np.ndarray:
        """Stacked x snapshots, one row per record"""
        if not self.has_snapshots:
            raise DiagnosticsError("trace was recorded without snapshots")
        return np.vstack([r.x for r in self.records])

    @classmethod
    def from_series(cls, column: str, ks, values, variant: str = "synthetic") -> 'Trace':
        """Build a trace carrying a single meaningful column, for fitting external series"""
        trace = cls(variant=variant)
        nan = float("nan")
        for k, value in zip(ks, values):
            record = TraceRecord(k=int(k), f_x=nan, f_s=nan, g_s=nan, penalty_s=nan,
                                 residual_s=nan, dx_norm=nan)
            if column in BASE_COLUMNS:
                setattr(record, BASE_COLUMNS[column], float(value))
            else:
                record.extras[column] = float(value)
            trace.records.append(record)
        return trace
