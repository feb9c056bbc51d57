import numpy as np
from typing import Union

ArrayOrFloat = Union[float, np.ndarray]


def db_to_linear(value_db: ArrayOrFloat) -> ArrayOrFloat:
    """dB → 線性功率比"""
    result = np.power(10.0, np.asarray(value_db, dtype=float) / 10.0)
    return float(result) if result.ndim == 0 else result


def linear_to_db(value: ArrayOrFloat) -> ArrayOrFloat:
    """線性功率 → dB，0 回傳 -inf"""
    with np.errstate(divide='ignore'):
        result = 10.0 * np.log10(np.asarray(value, dtype=float))
    return float(result) if result.ndim == 0 else result


def dbm_to_units(value_dbm: float) -> float:
    """dBm → 正規化功率單位

    約定 0 dBm ≡ 1 單位 ≡ 雜訊功率，所以 -7 dBm ≈ 0.1995
    """
    return float(db_to_linear(value_dbm))


def drop_rng(seed: int, drop_index: int) -> np.random.Generator:
    """每個 drop 的獨立亂數流

    由 (seed, drop_index) 決定，與 worker 無關，平行與否結果都相同
    """
    return np.random.default_rng(np.random.SeedSequence([seed, drop_index]))
