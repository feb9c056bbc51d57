import json
import os

import pandas as pd
import pytest

from src.services.experiments import GAP_COLUMNS
from src.simulate import build_parser, cli_main


@pytest.fixture
def tiny_config_path(tmp_path, table_config):
    data = table_config.model_dump(mode='json')
    data.update({'n_drops': 2, 'gamma_f_sweep_db': [-10.0], 'gamma_m_sweep_db': [-80.0]})
    path = tmp_path / 'tiny.json'
    path.write_text(json.dumps(data))
    return str(path)


def run(command, config_path, out_dir, *extra):
    return cli_main([command, '--config', config_path, '--out', str(out_dir), '--quiet', *extra])


def test_parser_defaults():
    args = build_parser().parse_args(['gap'])
    assert args.config == 'tableI'
    assert args.format == 'csv'
    assert args.seed is None


def test_missing_config_is_config_error(tmp_path):
    assert run('gap', str(tmp_path / 'nope.json'), tmp_path / 'out') == 1


def test_profile_mismatch_is_config_error(tiny_config_path, tmp_path):
    data = json.loads(open(tiny_config_path).read())
    data['num_taps'] = 4
    bad = tmp_path / 'bad.json'
    bad.write_text(json.dumps(data))
    assert run('gap', str(bad), tmp_path / 'out') == 1
    assert not (tmp_path / 'out' / 'gap.csv').exists()


def test_zero_drops_is_config_error(tiny_config_path, tmp_path):
    assert run('gap', tiny_config_path, tmp_path / 'out', '--drops', '0') == 1


def test_gap_writes_tables(tiny_config_path, tmp_path):
    out = tmp_path / 'out'
    assert run('gap', tiny_config_path, out) == 0

    gap = pd.read_csv(out / 'gap.csv')
    assert list(gap.columns[:len(GAP_COLUMNS)]) == GAP_COLUMNS
    assert len(gap) == 1
    assert (out / 'gap_allocations.csv').exists()

    info = json.loads((out / 'run_info.json').read_text())
    assert info['command'] == 'gap'
    assert info['n_drops'] == 2
    assert info['seed'] == 7


def test_same_seed_same_bytes(tiny_config_path, tmp_path):
    first, second = tmp_path / 'a', tmp_path / 'b'
    assert run('gap', tiny_config_path, first, '--seed', '11') == 0
    assert run('gap', tiny_config_path, second, '--seed', '11') == 0
    for name in ('gap.csv', 'gap_allocations.csv', 'gap_drops.csv'):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_out_dir_from_environment(tiny_config_path, tmp_path, monkeypatch):
    target = tmp_path / 'from_env'
    monkeypatch.setenv('HETNET_OUT_DIR', str(target))
    assert cli_main(['focusing', '--config', tiny_config_path, '--quiet']) == 0
    assert os.path.exists(target / 'focusing.csv')
    assert os.path.exists(target / 'focusing_taps.csv')


def test_drop_json_output(tiny_config_path, tmp_path):
    out = tmp_path / 'out'
    assert run('drop', tiny_config_path, out, '--index', '1', '--format', 'json') == 0
    for name in ('allocations', 'sinr', 'gamma', 'focusing', 'summary'):
        assert (out / f'drop_1_{name}.json').exists()
    summary = json.loads((out / 'drop_1_summary.json').read_text())
    assert summary[0]['drop_id'] == 1
