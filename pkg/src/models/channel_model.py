from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from src.utils.errors import DegenerateChannelError, InvalidInputError


class TapMapping(str, Enum):
    """PDP 轉成 L 個離散 tap 的方式"""
    ORDINAL = 'ordinal'          # 第 l 個實體路徑 → 第 l 個 tap
    NEAREST_BIN = 'nearest_bin'  # 依延遲對到最近的取樣格，超出 L 格截斷


class PdpProfile(BaseModel):
    """Power delay profile of a tapped-delay-line channel"""

    name: str = Field(description="Profile 名稱（例如：'itu_indoor_a'）")
    delays_ns: List[float] = Field(description="各路徑延遲（ns），從 0 開始嚴格遞增")
    powers_db: List[float] = Field(description="各路徑平均功率（dB）")

    class Config:
        frozen = True

    @field_validator('delays_ns')
    def check_delays(cls, v):
        if not v:
            raise ValueError("profile 至少需要一個路徑")
        if v[0] != 0:
            raise ValueError(f"第一個延遲必須為 0，收到 {v[0]}")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("延遲必須嚴格遞增")
        return v

    @field_validator('powers_db')
    def check_powers(cls, v):
        if not all(np.isfinite(v)):
            raise ValueError("路徑功率必須為有限值")
        return v

    @model_validator(mode='after')
    def check_lengths(self) -> 'PdpProfile':
        if len(self.delays_ns) != len(self.powers_db):
            raise ValueError(
                f"delays_ns ({len(self.delays_ns)}) 與 powers_db ({len(self.powers_db)}) 長度不一致"
            )
        return self

    @property
    def num_paths(self) -> int:
        return len(self.delays_ns)

    @property
    def total_power(self) -> float:
        return float(np.sum(10.0 ** (np.asarray(self.powers_db) / 10.0)))

    def bin_powers(
        self,
        num_taps: int,
        mapping: TapMapping = TapMapping.ORDINAL,
        sample_period_ns: float = 50.0
    ) -> np.ndarray:
        """Linear mean power of each of the `num_taps` discrete taps"""
        powers = 10.0 ** (np.asarray(self.powers_db, dtype=float) / 10.0)
        bins = np.zeros(num_taps)

        if mapping == TapMapping.ORDINAL:
            count = min(num_taps, self.num_paths)
            bins[:count] = powers[:count]
            return bins

        indices = np.rint(np.asarray(self.delays_ns) / sample_period_ns).astype(int)
        for index, power in zip(indices, powers):
            if index < num_taps:
                bins[index] += power
        return bins

    @classmethod
    def from_records(cls, records: List[Dict]) -> List['PdpProfile']:
        """從 JSON records 建立 profile 列表"""
        return [cls.model_validate(record) for record in records]


# ITU-R M.1225 的兩個 6-tap 模型
BUILTIN_PROFILES: Dict[str, PdpProfile] = {
    'itu_indoor_a': PdpProfile(
        name='itu_indoor_a',
        delays_ns=[0, 50, 110, 170, 290, 310],
        powers_db=[0, -3, -10, -18, -26, -32],
    ),
    'itu_vehicular_a': PdpProfile(
        name='itu_vehicular_a',
        delays_ns=[0, 310, 710, 1090, 1730, 2510],
        powers_db=[0, -1, -9, -10, -15, -20],
    ),
}


@dataclass(frozen=True)
class Cir:
    """Discrete channel impulse response, pathloss included"""
    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=complex)
        if taps.ndim != 1 or taps.size == 0:
            raise InvalidInputError(f"CIR 必須為一維非空向量，收到 shape {taps.shape}")
        if not np.all(np.isfinite(taps)):
            raise InvalidInputError("CIR 含有非有限值")
        if not np.any(taps):
            raise DegenerateChannelError("CIR 全為零")
        object.__setattr__(self, 'taps', taps)

    @property
    def length(self) -> int:
        return self.taps.size

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.taps) ** 2))


@dataclass(frozen=True)
class Geometry:
    """One user drop, positions in metres with the MBS at the origin"""
    mbs_position: np.ndarray
    fbs_position: np.ndarray
    mu_positions: np.ndarray   # (N0, 2)
    fu_positions: np.ndarray   # (N1, 2)

    def mu_to_mbs(self) -> np.ndarray:
        return np.linalg.norm(self.mu_positions - self.mbs_position, axis=-1)

    def fu_to_fbs(self) -> np.ndarray:
        return np.linalg.norm(self.fu_positions - self.fbs_position, axis=-1)

    def fu_to_mbs(self) -> np.ndarray:
        return np.linalg.norm(self.fu_positions - self.mbs_position, axis=-1)

    def mu_to_fbs(self) -> np.ndarray:
        return np.linalg.norm(self.mu_positions - self.fbs_position, axis=-1)


class Tier(int, Enum):
    MACRO = 0
    FEMTO = 1


@dataclass(frozen=True)
class ChannelSet:
    """All CIRs of one drop

    `links[(k, r)]` has shape (M_k, N_r, L): antenna i of BS k to user j of BS r.
    """
    links: Dict[Tuple[int, int], np.ndarray] = field(default_factory=dict)

    def link(self, serving: int, observed: int) -> np.ndarray:
        return self.links[(int(serving), int(observed))]

    @property
    def num_taps(self) -> int:
        return self.link(Tier.MACRO, Tier.MACRO).shape[-1]

    def num_users(self, tier: int) -> int:
        return self.link(tier, tier).shape[1]

    def num_cirs(self) -> int:
        return sum(array.shape[0] * array.shape[1] for array in self.links.values())

    def scaled(self, factor: float) -> 'ChannelSet':
        """每條鏈路乘上同一個常數，用於尺度不變性檢查"""
        return ChannelSet({key: array * factor for key, array in self.links.items()})
