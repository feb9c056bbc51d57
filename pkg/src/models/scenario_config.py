import json
import os
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from src.models.channel_model import BUILTIN_PROFILES, PdpProfile, TapMapping
from src.utils.errors import ConfigError
from src.utils.helpers import db_to_linear, dbm_to_units

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))), 'config')

# 預設名稱 → 隨附的設定檔
PRESETS = {
    'tableI': os.path.join(CONFIG_DIR, 'table_i.json'),
}


class ScenarioConfig(BaseModel):
    """兩層 HetNet 模擬情境設定（預設值即標準兩層模擬參數）"""

    # 通道
    num_taps: int = Field(default=6, ge=1, description="每條 CIR 的 tap 數 L")
    macro_profile: str = Field(default='itu_vehicular_a', description="MBS↔MU 鏈路的 PDP")
    femto_profile: str = Field(default='itu_indoor_a', description="FBS↔FU 鏈路的 PDP")
    cross_profile: str = Field(default='itu_indoor_a', description="跨層鏈路的 PDP")
    profiles_path: Optional[str] = Field(default=None, description="額外 PDP 檔案（JSON）")
    tap_mapping: TapMapping = Field(default=TapMapping.ORDINAL, description="PDP 到離散 tap 的對應方式")
    sample_period_ns: float = Field(default=50.0, gt=0, description="取樣週期（20 MHz → 50 ns）")

    # 天線與使用者
    macro_antennas: int = Field(default=4, ge=1, description="M0")
    femto_antennas: int = Field(default=4, ge=1, description="M1")
    macro_users: int = Field(default=2, ge=1, description="N0")
    femto_users: int = Field(default=2, ge=0, description="N1，0 代表沒有 femtocell 使用者")

    # 幾何
    macro_radius_m: float = Field(default=200.0, gt=0)
    femto_radius_m: float = Field(default=10.0, gt=0)
    fbs_distance_m: float = Field(default=100.0, gt=0, description="MBS 與 FBS 的距離")
    fu_fixed_distance_m: Optional[float] = Field(default=None, gt=0, description="固定 FU 與 FBS 距離（TR/ZF 比較用）")

    # 路徑損耗指數
    outdoor_exponent: float = Field(default=4.0, gt=0)
    indoor_exponent: float = Field(default=3.0, gt=0)
    cross_exponent: float = Field(default=3.5, gt=0)

    # QoS 與容忍干擾
    gamma_m_db: float = Field(default=-80.0, description="MU 的 SINR 門檻 γ_M")
    gamma_f_db: float = Field(default=-10.0, description="FU 的 SINR 門檻 γ_F")
    p_tol01_dbm: float = Field(default=-7.0, description="MBS → FU 容忍干擾")
    p_tol10_dbm: float = Field(default=-7.0, description="FBS → MU 容忍干擾")
    fbs_max_power_dbm: float = Field(default=20.0, description="FBS 發射功率上限（只回報，不當限制式）")
    noise_power: float = Field(default=1.0, gt=0, description="雜訊功率（正規化單位）")

    # 掃描
    gamma_f_sweep_db: List[float] = Field(default_factory=lambda: [-10.0, -5.0, 0.0, 5.0, 10.0])
    gamma_m_sweep_db: List[float] = Field(default_factory=lambda: [-80.0, -85.0])

    # Monte-Carlo
    n_drops: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0)
    workers: int = Field(default=1, ge=1, description="平行 worker 數，不影響結果")

    # 旗標
    enable_p_tol10_cap: bool = Field(default=False, description="femto LP 加入 FBS→MU 洩漏上限")
    macro_uses_actual_cross: bool = Field(default=True, description="macro LP 使用實際 femto 干擾，否則用 P_tol10")

    class Config:
        frozen = True
        extra = 'forbid'

    @field_validator('gamma_f_sweep_db', 'gamma_m_sweep_db')
    def check_sweep(cls, v):
        if not v:
            raise ValueError("掃描列表不可為空")
        return v

    @model_validator(mode='after')
    def check_zf_dimensions(self) -> 'ScenarioConfig':
        rows = self.macro_users * (2 * self.num_taps - 1)
        columns = self.macro_antennas * self.num_taps
        if columns < rows:
            raise ValueError(
                f"macro ZF 需要 M0·L ≥ N0(2L−1)，目前 {columns} < {rows}"
            )
        profiles = self.profiles()
        for name in (self.macro_profile, self.femto_profile, self.cross_profile):
            if name not in profiles:
                raise ValueError(f"未知的 PDP profile: {name}")
            # nearest_bin 依延遲截斷或補零，路徑數不必等於 L
            if self.tap_mapping == TapMapping.ORDINAL and profiles[name].num_paths != self.num_taps:
                raise ValueError(
                    f"profile '{name}' 有 {profiles[name].num_paths} 個路徑，但 L = {self.num_taps}"
                )
        return self

    # Derived quantities

    @property
    def gamma_m(self) -> float:
        return db_to_linear(self.gamma_m_db)

    @property
    def gamma_f(self) -> float:
        return db_to_linear(self.gamma_f_db)

    @property
    def p_tol01(self) -> float:
        return dbm_to_units(self.p_tol01_dbm)

    @property
    def p_tol10(self) -> float:
        return dbm_to_units(self.p_tol10_dbm)

    @property
    def fbs_max_power(self) -> float:
        return dbm_to_units(self.fbs_max_power_dbm)

    def femto_zf_supported(self) -> bool:
        """M1·L ≥ N1(2L−1)，femto 端能否做 ZF"""
        return self.femto_antennas * self.num_taps >= self.femto_users * (2 * self.num_taps - 1)

    def profiles(self) -> Dict[str, PdpProfile]:
        """內建 profile 加上 profiles_path 檔案中的 profile"""
        profiles = dict(BUILTIN_PROFILES)
        if self.profiles_path:
            profiles.update({p.name: p for p in load_profiles(self.profiles_path)})
        return profiles

    def profile(self, name: str) -> PdpProfile:
        return self.profiles()[name]

    @classmethod
    def from_file(cls, path: str) -> 'ScenarioConfig':
        """讀取 JSON 設定檔，`tableI` 等預設名稱會對應到隨附檔案

        Raises:
            ConfigError: 檔案不存在、格式錯誤或欄位不合法
        """
        resolved = PRESETS.get(path, path)
        try:
            with open(resolved, 'r') as f:
                data = json.load(f)
        except FileNotFoundError as e:
            raise ConfigError(f"找不到設定檔: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"設定檔 JSON 格式錯誤 ({path}): {e}") from e

        if not isinstance(data, dict):
            raise ConfigError(f"設定檔必須是 key-value 物件: {path}")

        # profiles_path 以設定檔所在目錄為基準
        profiles_path = data.get('profiles_path')
        if profiles_path and not os.path.isabs(profiles_path):
            data['profiles_path'] = os.path.join(os.path.dirname(os.path.abspath(resolved)), profiles_path)

        try:
            return cls.model_validate(data)
        except (ValidationError, ConfigError) as e:
            raise ConfigError(f"設定檔內容不合法 ({path}): {e}") from e


def load_profiles(path: str) -> List[PdpProfile]:
    """讀取 PDP profile 檔（JSON 陣列，每筆含 name, delays_ns, powers_db）"""
    try:
        with open(path, 'r') as f:
            records = json.load(f)
        return PdpProfile.from_records(records)
    except FileNotFoundError as e:
        raise ConfigError(f"找不到 profile 檔: {path}") from e
    except (json.JSONDecodeError, ValidationError, TypeError) as e:
        raise ConfigError(f"profile 檔格式錯誤 ({path}): {e}") from e
