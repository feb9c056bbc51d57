from dataclasses import dataclass
from enum import Enum
from typing import List

import numpy as np

from src.utils.errors import InvalidInputError

NORM_TOLERANCE = 1e-12


class BeamformerKind(str, Enum):
    TR = 'tr'   # time-reversal prefilter
    ZF = 'zf'   # zero-forcing，逐 tap 選擇


@dataclass(frozen=True)
class Beamformer:
    """Per-antenna prefilters for one user, unit aggregate norm

    `weights[i]` 是第 i 根天線長度 L 的 prefilter；`sampled_tap` 是接收端取樣的
    tap（1-based，TR 固定為 L，ZF 為 tap 選擇得到的 α）。
    """
    user_index: int
    weights: np.ndarray   # (M, L)
    kind: BeamformerKind
    sampled_tap: int

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=complex)
        if weights.ndim != 2:
            raise InvalidInputError(f"weights 必須為 (M, L)，收到 shape {weights.shape}")
        norm = float(np.sum(np.abs(weights) ** 2))
        if abs(norm - 1.0) > NORM_TOLERANCE * 10:
            raise InvalidInputError(f"beamformer 總能量必須為 1，收到 {norm}")
        if not 1 <= self.sampled_tap <= 2 * weights.shape[1] - 1:
            raise InvalidInputError(f"sampled_tap {self.sampled_tap} 超出 [1, {2 * weights.shape[1] - 1}]")
        object.__setattr__(self, 'weights', weights)

    @property
    def num_taps(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class EquivalentChannel:
    """Prefilter convolved with a CIR, 2L−1 taps, 1-based tap access"""
    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=complex)
        if taps.ndim != 1 or taps.size % 2 == 0:
            raise InvalidInputError(f"等效通道長度必須為 2L−1，收到 {taps.size}")
        if not np.all(np.isfinite(taps)):
            raise InvalidInputError("等效通道含有非有限值")
        object.__setattr__(self, 'taps', taps)

    @property
    def num_taps(self) -> int:
        """原始 CIR 長度 L"""
        return (self.taps.size + 1) // 2

    def _check_index(self, index: int) -> None:
        if not 1 <= index <= self.taps.size:
            raise InvalidInputError(f"tap {index} 超出 [1, {self.taps.size}]")

    def tap(self, index: int) -> complex:
        self._check_index(index)
        return complex(self.taps[index - 1])

    def power_at(self, index: int) -> float:
        return abs(self.tap(index)) ** 2

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.taps) ** 2))

    def isi_power(self, index: int) -> float:
        """取樣 tap 以外所有 tap 的能量"""
        self._check_index(index)
        others = np.delete(self.taps, index - 1)
        return float(np.sum(np.abs(others) ** 2))

    def __add__(self, other: 'EquivalentChannel') -> 'EquivalentChannel':
        return EquivalentChannel(self.taps + other.taps)


@dataclass(frozen=True)
class TapSelection:
    """Tap selection output: chosen tap per user and the Γ table behind it"""
    alphas: List[int]           # 1-based
    gamma_table: np.ndarray     # (N, 2L−1)

    def __post_init__(self):
        table = np.asarray(self.gamma_table, dtype=float)
        if table.ndim != 2 or table.shape[0] != len(self.alphas):
            raise InvalidInputError("gamma_table 形狀與使用者數不符")
        object.__setattr__(self, 'gamma_table', table)


@dataclass(frozen=True)
class FocusingReport:
    """Temporal focusing of one TR-served user"""
    user: int
    peak_power: float
    isi_power: float
    peak_to_total_ratio: float
    intended: EquivalentChannel
    unintended: List[EquivalentChannel]
