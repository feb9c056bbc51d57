import json
import os
from enum import Enum
from typing import Dict

import pandas as pd

from src.utils.db.result_store import ResultStore
from src.utils.logging import setup_logging


class FileStore(ResultStore):
    """ResultStore writing one CSV or JSON file per table into an output directory"""

    class Format(str, Enum):
        CSV = 'csv'
        JSON = 'json'   # records，欄位名稱與 CSV 相同

    def __init__(self, out_dir: str, format: 'FileStore.Format' = Format.CSV):
        self.out_dir = out_dir
        self.format = FileStore.Format(format)
        self.logger = setup_logging(__name__)
        os.makedirs(self.out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, f"{name}.{self.format.value}")

    def save(self, name: str, df: pd.DataFrame) -> str:
        file_path = self.path(name)
        if self.format == FileStore.Format.CSV:
            df.to_csv(file_path, index=False)
        else:
            df.to_json(file_path, orient='records', indent=2)
        self.logger.info(f"寫出 {file_path} ({len(df)} 列)")
        return file_path

    def save_run_info(self, info: Dict) -> str:
        file_path = os.path.join(self.out_dir, "run_info.json")
        with open(file_path, 'w') as f:
            json.dump(info, f, indent=2, default=str)
        return file_path
