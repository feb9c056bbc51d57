from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from src.models.beamformer_model import Beamformer, FocusingReport, TapSelection
from src.utils.errors import InvalidInputError
from src.utils.helpers import linear_to_db

BREAKDOWN_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SinrBreakdown:
    """接收功率四項分解（正規化單位）與 SINR"""
    p_sig: float
    p_isi: float
    p_co: float
    p_cross: float
    noise: float

    def __post_init__(self):
        for name in ('p_sig', 'p_isi', 'p_co', 'p_cross', 'noise'):
            value = getattr(self, name)
            # 數值誤差造成的極小負值視為 0
            if value < 0 and value > -BREAKDOWN_TOLERANCE * max(1.0, abs(self.p_sig)):
                object.__setattr__(self, name, 0.0)
            elif not value >= 0:
                raise InvalidInputError(f"{name} 必須 ≥ 0，收到 {value}")

    @property
    def interference_plus_noise(self) -> float:
        return self.p_isi + self.p_co + self.p_cross + self.noise

    @property
    def sinr(self) -> float:
        denominator = self.interference_plus_noise
        if denominator == 0.0:
            return float('inf') if self.p_sig > 0 else 0.0
        return self.p_sig / denominator

    @property
    def sinr_db(self) -> float:
        return linear_to_db(self.sinr)

    def to_row(self) -> Dict[str, float]:
        return {
            'p_sig': self.p_sig,
            'p_isi': self.p_isi,
            'p_co': self.p_co,
            'p_cross': self.p_cross,
            'noise': self.noise,
            'sinr_db': self.sinr_db,
        }


@dataclass(frozen=True)
class PowerVector:
    """每位使用者的發射功率 p_j（存功率而不是 √p）"""
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).reshape(-1)
        if not np.all(np.isfinite(p)):
            raise InvalidInputError("功率必須為有限值")
        if np.any(p < 0):
            raise InvalidInputError(f"功率必須 ≥ 0，收到 {p}")
        object.__setattr__(self, 'p', p)

    def __len__(self) -> int:
        return self.p.size

    def __getitem__(self, index: int) -> float:
        return float(self.p[index])

    @property
    def total(self) -> float:
        return float(np.sum(self.p))

    @classmethod
    def zeros(cls, size: int) -> 'PowerVector':
        return cls(np.zeros(size))


class AllocationStatus(str, Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    RANK_DEFICIENT = 'rank_deficient'
    SKIPPED = 'skipped'


class Scheme(str, Enum):
    DISTRIBUTED = 'distributed'
    CENTRALIZED = 'centralized'
    TR_STANDALONE = 'tr_standalone'
    ZF_STANDALONE = 'zf_standalone'


@dataclass
class FemtoBackhaul:
    """femto LP 解完後經 backhaul 傳給 macrocell 的資料"""
    powers: PowerVector
    beamformers: List[Beamformer]
    leakage_gains: np.ndarray   # (N1, N0)，||Σ_i g_ij * h^{10}_in||²


@dataclass
class AllocationResult:
    """一個功率分配方案的結果"""
    status: AllocationStatus
    powers: Optional[PowerVector] = None
    macro_breakdowns: List[SinrBreakdown] = field(default_factory=list)
    femto_breakdowns: List[SinrBreakdown] = field(default_factory=list)
    backhaul: Optional[FemtoBackhaul] = None
    num_macro: int = 0
    message: str = ''

    @property
    def is_optimal(self) -> bool:
        return self.status == AllocationStatus.OPTIMAL

    @property
    def total_power(self) -> float:
        return self.powers.total if self.powers is not None else float('nan')

    @property
    def total_power_db(self) -> float:
        return linear_to_db(self.total_power) if self.powers is not None else float('nan')

    @property
    def macro_powers(self) -> np.ndarray:
        return self.powers.p[:self.num_macro] if self.powers is not None else np.array([])

    @property
    def femto_powers(self) -> np.ndarray:
        return self.powers.p[self.num_macro:] if self.powers is not None else np.array([])

    @classmethod
    def failed(cls, status: AllocationStatus, message: str = '', num_macro: int = 0) -> 'AllocationResult':
        return cls(status=status, num_macro=num_macro, message=message)

    def breakdown_rows(self) -> List[Dict]:
        rows = [{'tier': 'macro', 'user': n, **b.to_row()} for n, b in enumerate(self.macro_breakdowns)]
        rows += [{'tier': 'femto', 'user': j, **b.to_row()} for j, b in enumerate(self.femto_breakdowns)]
        return rows


@dataclass
class DropResult:
    """一次 user drop 的所有結果"""
    drop_index: int
    allocations: Dict[Scheme, AllocationResult] = field(default_factory=dict)
    focusing: List[FocusingReport] = field(default_factory=list)
    tap_selection: Optional[TapSelection] = None
    rank_deficient: bool = False
    # 分散式解在實際跨層干擾下是否仍滿足所有 SINR 目標
    distributed_actual_feasible: Optional[bool] = None
    # MBS 對各 FU 的實際干擾最大值，以及是否都在 P_tol01 內
    max_femto_cross: Optional[float] = None
    cross_within_tolerance: Optional[bool] = None
    fbs_cap_violated: Optional[bool] = None
    error: str = ''

    @property
    def is_feasibility_violation(self) -> bool:
        return self.cross_within_tolerance is True and self.distributed_actual_feasible is False

    def summary_row(self) -> Dict:
        selection = self.tap_selection
        return {
            'drop_id': self.drop_index,
            'alphas': ' '.join(str(a) for a in selection.alphas) if selection is not None else '',
            'rank_deficient': self.rank_deficient,
            'distributed_actual_feasible': self.distributed_actual_feasible,
            'max_femto_cross': self.max_femto_cross,
            'cross_within_tolerance': self.cross_within_tolerance,
            'fbs_cap_violated': self.fbs_cap_violated,
            'error': self.error,
        }

    def allocation_rows(self) -> List[Dict]:
        rows = []
        for scheme, result in self.allocations.items():
            row = {
                'drop_id': self.drop_index,
                'scheme': scheme.value,
                'total_power': result.total_power,
                'total_power_db': result.total_power_db,
                'status': result.status.value,
            }
            for n, value in enumerate(result.macro_powers):
                row[f'p0_{n}'] = float(value)
            for j, value in enumerate(result.femto_powers):
                row[f'p1_{j}'] = float(value)
            rows.append(row)
        return rows

    def sinr_rows(self) -> List[Dict]:
        return [
            {'drop_id': self.drop_index, 'scheme': scheme.value, **row}
            for scheme, result in self.allocations.items()
            for row in result.breakdown_rows()
        ]

    def focusing_rows(self) -> List[Dict]:
        return [
            {
                'drop_id': self.drop_index,
                'user': report.user,
                'peak_power': report.peak_power,
                'isi_power': report.isi_power,
                'ratio': report.peak_to_total_ratio,
            }
            for report in self.focusing
        ]


def rows_to_dataframe(rows: List[Dict], columns: Optional[List[str]] = None) -> pd.DataFrame:
    df = pd.DataFrame(rows)
    if columns is not None:
        df = df.reindex(columns=columns)
    return df
