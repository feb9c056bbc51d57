from abc import ABC, abstractmethod
from typing import Dict

import pandas as pd


class ResultStore(ABC):
    """Abstract base class for simulation output tables"""

    @abstractmethod
    def save(self, name: str, df: pd.DataFrame) -> str:
        """Save one result table

        Args:
            name: 表格名稱（不含副檔名），例如 'gap'
            df: 要寫出的資料

        Returns:
            寫出的檔案路徑
        """
        pass

    @abstractmethod
    def save_run_info(self, info: Dict) -> str:
        """Write run_info.json (config echo, seed, unit convention)"""
        pass
