import json
import os

import pandas as pd
import pandas.testing as pdt

from src.utils.db.file_store import FileStore


def test_csv_store_round_trip(tmp_path):
    store = FileStore(str(tmp_path))
    df = pd.DataFrame({'gamma_f_db': [-10.0, -5.0], 'gap_db': [0.3, 0.25]})
    path = store.save('gap', df)

    assert path.endswith('gap.csv')
    pdt.assert_frame_equal(pd.read_csv(path), df)


def test_json_store_writes_records(tmp_path):
    store = FileStore(str(tmp_path), FileStore.Format.JSON)
    store.save('compare', pd.DataFrame({'gamma_f_db': [0.0], 'mean_tr_db': [1.5]}))

    with open(os.path.join(tmp_path, 'compare.json')) as f:
        records = json.load(f)
    assert records == [{'gamma_f_db': 0.0, 'mean_tr_db': 1.5}]


def test_run_info(tmp_path):
    path = FileStore(str(tmp_path / 'out')).save_run_info({'seed': 7, 'units': '0 dBm = 1'})
    with open(path) as f:
        assert json.load(f)['seed'] == 7
