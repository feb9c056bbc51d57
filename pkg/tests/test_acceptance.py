"""Full-size campaigns; run with `pytest -m slow`"""
import numpy as np
import pytest

from src.models.channel_model import Tier
from src.models.result_model import PowerVector, Scheme
from src.services.beamformers.time_reversal import TimeReversal
from src.services.campaign_runner import SINR_TOLERANCE, run_campaign
from src.services.channel_generator import ChannelGenerator
from src.services.experiments import compare_sweep, gap_sweep
from src.services.link_metrics import femto_sinr
from src.utils.helpers import drop_rng


@pytest.mark.slow
def test_distributed_gap_over_both_macro_targets(table_config):
    config = table_config.model_copy(update={'gamma_f_sweep_db': [-10.0], 'workers': 4})
    summary = gap_sweep(config, show_progress=False).summary.set_index('gamma_m_db')

    assert np.all(summary['dominance_violations'] == 0)
    assert np.all((summary['gap_db'] > 0) & (summary['gap_db'] < 2.0))
    assert summary.loc[-85.0, 'gap_db'] > summary.loc[-80.0, 'gap_db']


@pytest.mark.slow
def test_tr_beats_zf_at_low_targets(table_config):
    result = compare_sweep(table_config.model_copy(update={'workers': 4}), show_progress=False)
    summary = result.summary.set_index('gamma_f_db')

    assert summary.loc[-10.0, 'tr_advantage_db'] > 0
    assert result.stats['sign_changes'] == 1
    assert 2.0 <= result.stats['peak_tr_advantage_db'] <= 8.0


def _assert_tight(breakdowns, gamma, label):
    for user, breakdown in enumerate(breakdowns):
        assert abs(breakdown.sinr / gamma - 1.0) <= SINR_TOLERANCE, f"{label} user {user}: SINR {breakdown.sinr}"


@pytest.mark.slow
def test_sinr_targets_are_tight_at_the_optimum(table_config):
    config = table_config.model_copy(update={'workers': 4})
    assert not config.enable_p_tol10_cap and config.macro_uses_actual_cross
    result = run_campaign(config, show_progress=False)
    generator = ChannelGenerator(config)

    checked = 0
    for drop in result.drops:
        for scheme in (Scheme.CENTRALIZED, Scheme.TR_STANDALONE, Scheme.ZF_STANDALONE):
            allocation = drop.allocations[scheme]
            if allocation.is_optimal:
                _assert_tight(allocation.macro_breakdowns, config.gamma_m, f"drop {drop.drop_index} {scheme.value}")
                _assert_tight(allocation.femto_breakdowns, config.gamma_f, f"drop {drop.drop_index} {scheme.value}")

        distributed = drop.allocations[Scheme.DISTRIBUTED]
        if not distributed.is_optimal:
            continue
        # 每個 (n, j) 洩漏項都不超過 FU j 的總干擾，總干擾有餘裕時上限都不起作用
        if drop.max_femto_cross < config.p_tol01 * (1.0 - 1e-6):
            _assert_tight(distributed.macro_breakdowns, config.gamma_m, f"drop {drop.drop_index} distributed macro")
            checked += 1

        # femto 子問題以 P_tol01 取代實際干擾
        channel_set = generator.generate(drop_rng(config.seed, drop.drop_index))
        femto_bf = TimeReversal().design(channel_set.link(Tier.FEMTO, Tier.FEMTO))
        p1 = PowerVector(distributed.femto_powers)
        _assert_tight(
            [femto_sinr(j, p1, femto_bf, channel_set, config.p_tol01, config.noise_power) for j in range(len(p1))],
            config.gamma_f,
            f"drop {drop.drop_index} distributed femto",
        )

    assert checked > config.n_drops // 2
