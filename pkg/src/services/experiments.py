from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
import pandas as pd

from src.models.result_model import DropResult, Scheme, rows_to_dataframe
from src.models.scenario_config import ScenarioConfig
from src.services.campaign_runner import ALL_SCHEMES, CampaignResult, run_campaign, run_drop
from src.utils.logging import setup_logging

logger = setup_logging(__name__)

GAP_COLUMNS = [
    'gamma_f_db', 'gamma_m_db', 'mean_distributed_db', 'mean_centralized_db', 'gap_db', 'outage_rate',
]
COMPARE_COLUMNS = [
    'gamma_f_db', 'mean_tr_db', 'mean_zf_db', 'tr_advantage_db', 'outage_tr', 'outage_zf', 'paired_drops',
]

# TR/ZF 比較時 FU 與 FBS 的固定距離
COMPARE_FU_DISTANCE_M = 7.0


@dataclass
class SweepResult:
    """Summary table of a sweep plus the per-drop rows of every sweep point"""
    summary: pd.DataFrame
    allocations: pd.DataFrame
    drops: pd.DataFrame
    stats: Dict[str, float] = field(default_factory=dict)


def _tagged_rows(result: CampaignResult, frame: pd.DataFrame) -> pd.DataFrame:
    frame = frame.copy()
    frame.insert(0, 'gamma_m_db', result.config.gamma_m_db)
    frame.insert(0, 'gamma_f_db', result.config.gamma_f_db)
    return frame


def _concat(frames: List[pd.DataFrame]) -> pd.DataFrame:
    frames = [f for f in frames if not f.empty]
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()


def gap_sweep(config: ScenarioConfig, show_progress: bool = True) -> SweepResult:
    """Distributed vs centralized total power over the γ_F × γ_M grid

    每個掃描點使用同一組 (seed, drop_index)，因此各點看到的是相同的 drop。
    平均功率只取兩種方案都可行的 drop，gap_db 即兩者的差。
    """
    rows, allocations, drops = [], [], []
    for gamma_m_db in config.gamma_m_sweep_db:
        for gamma_f_db in config.gamma_f_sweep_db:
            point = config.model_copy(update={'gamma_m_db': gamma_m_db, 'gamma_f_db': gamma_f_db})
            result = run_campaign(point, schemes=(Scheme.DISTRIBUTED, Scheme.CENTRALIZED), show_progress=show_progress)

            mask = result.paired_mask(Scheme.DISTRIBUTED, Scheme.CENTRALIZED)
            row = {
                'gamma_f_db': gamma_f_db,
                'gamma_m_db': gamma_m_db,
                'mean_distributed_db': result.mean_power_db(Scheme.DISTRIBUTED, mask),
                'mean_centralized_db': result.mean_power_db(Scheme.CENTRALIZED, mask),
                'gap_db': result.gap_db(),
                'outage_rate': result.outage_rate(Scheme.DISTRIBUTED),
                'centralized_outage_rate': result.outage_rate(Scheme.CENTRALIZED),
                'dominance_violations': result.dominance_violations(),
                'feasibility_violations': result.feasibility_violations(),
                'distributed_target_miss_rate': result.target_miss_rate(),
                'rank_deficiency_rate': result.rank_deficiency_rate(),
                'fbs_cap_violations': result.fbs_cap_violations(),
            }
            logger.info(
                f"γ_M = {gamma_m_db:g} dB, γ_F = {gamma_f_db:g} dB: gap {row['gap_db']:.3f} dB, "
                f"outage {row['outage_rate']:.1%}"
            )
            if row['dominance_violations']:
                logger.warning(f"{row['dominance_violations']} 個 drop 集中式功率高於分散式")
            rows.append(row)
            allocations.append(_tagged_rows(result, result.allocation_frame()))
            drops.append(_tagged_rows(result, result.drop_frame()))

    summary = rows_to_dataframe(rows)
    extra = [c for c in summary.columns if c not in GAP_COLUMNS]
    return SweepResult(
        summary=summary[GAP_COLUMNS + extra],
        allocations=_concat(allocations),
        drops=_concat(drops),
    )


def sign_changes(values: np.ndarray) -> int:
    """Sign changes along a sequence, NaN and exact zeros skipped"""
    signs = np.sign(np.asarray(values, dtype=float))
    signs = signs[~np.isnan(signs) & (signs != 0)]
    return int(np.count_nonzero(np.diff(signs)))


def compare_sweep(config: ScenarioConfig, show_progress: bool = True) -> SweepResult:
    """TR vs ZF femtocell in isolation over the γ_F sweep

    tr_advantage_db = mean_zf_db − mean_tr_db（正值代表 TR 省功率）。若某點 TR 全部不可行
    而 ZF 仍可行，優勢記為 −inf。
    """
    if config.fu_fixed_distance_m is None:
        config = config.model_copy(update={'fu_fixed_distance_m': COMPARE_FU_DISTANCE_M})
    if not config.femto_zf_supported():
        logger.warning(
            f"femto ZF 需要 M1·L ≥ N1(2L−1)，目前 {config.femto_antennas * config.num_taps} < "
            f"{config.femto_users * (2 * config.num_taps - 1)}，ZF 結果將全部為秩不足"
        )

    rows, allocations, drops = [], [], []
    for gamma_f_db in config.gamma_f_sweep_db:
        point = config.model_copy(update={'gamma_f_db': gamma_f_db})
        result = run_campaign(point, schemes=(Scheme.TR_STANDALONE, Scheme.ZF_STANDALONE), show_progress=show_progress)

        mask = result.paired_mask(Scheme.TR_STANDALONE, Scheme.ZF_STANDALONE)
        mean_tr = result.mean_power_db(Scheme.TR_STANDALONE, mask)
        mean_zf = result.mean_power_db(Scheme.ZF_STANDALONE, mask)
        if np.any(mask):
            advantage = mean_zf - mean_tr
        elif np.any(~np.isnan(result.totals(Scheme.ZF_STANDALONE))):
            advantage = -np.inf
        else:
            advantage = np.nan

        rows.append({
            'gamma_f_db': gamma_f_db,
            'mean_tr_db': mean_tr,
            'mean_zf_db': mean_zf,
            'tr_advantage_db': advantage,
            'outage_tr': result.outage_rate(Scheme.TR_STANDALONE),
            'outage_zf': result.outage_rate(Scheme.ZF_STANDALONE),
            'paired_drops': int(np.sum(mask)),
            'fbs_cap_violations': result.fbs_cap_violations(),
        })
        logger.info(f"γ_F = {gamma_f_db:g} dB: TR 優勢 {advantage:.2f} dB")
        allocations.append(_tagged_rows(result, result.allocation_frame()))
        drops.append(_tagged_rows(result, result.drop_frame()))

    summary = rows_to_dataframe(rows)
    advantages = summary['tr_advantage_db'].to_numpy(dtype=float)
    finite = advantages[np.isfinite(advantages)]
    stats = {
        'sign_changes': sign_changes(advantages),
        'peak_tr_advantage_db': float(np.max(finite)) if finite.size else float('nan'),
        'fu_distance_m': config.fu_fixed_distance_m,
    }
    logger.info(f"TR/ZF 交叉次數 {stats['sign_changes']}，TR 最大優勢 {stats['peak_tr_advantage_db']:.2f} dB")

    extra = [c for c in summary.columns if c not in COMPARE_COLUMNS]
    return SweepResult(
        summary=summary[COMPARE_COLUMNS + extra],
        allocations=_concat(allocations),
        drops=_concat(drops),
        stats=stats,
    )


def focusing_taps(drop: DropResult) -> pd.DataFrame:
    """Tap-by-tap equivalent channels at the intended and unintended FUs"""
    rows = []
    for report in drop.focusing:
        receivers = [('intended', report.intended)]
        receivers += [(f'unintended_{k}', channel) for k, channel in enumerate(report.unintended)]
        for receiver, channel in receivers:
            for tap, value in enumerate(channel.taps, start=1):
                rows.append({
                    'drop_id': drop.drop_index,
                    'user': report.user,
                    'receiver': receiver,
                    'tap': tap,
                    'real': float(value.real),
                    'imag': float(value.imag),
                    'power': float(abs(value) ** 2),
                })
    return rows_to_dataframe(rows)


def focusing_dump(config: ScenarioConfig, show_progress: bool = True) -> SweepResult:
    """TR focusing of every FU over config.n_drops drops, no power allocation"""
    result = run_campaign(config, schemes=(), show_progress=show_progress)
    ratios = result.focusing_frame()
    stats = {}
    if not ratios.empty:
        stats = {
            'mean_peak_to_total_ratio': float(ratios['ratio'].mean()),
            'min_peak_to_total_ratio': float(ratios['ratio'].min()),
        }
    return SweepResult(
        summary=ratios,
        allocations=_concat([focusing_taps(drop) for drop in result.drops]),
        drops=result.drop_frame(),
        stats=stats,
    )


def gamma_rows(drop: DropResult) -> pd.DataFrame:
    """Γ of every (MU, candidate tap) with the chosen tap marked"""
    selection = drop.tap_selection
    if selection is None:
        return pd.DataFrame()
    rows = []
    for n, alpha_chosen in enumerate(selection.alphas):
        for alpha, value in enumerate(selection.gamma_table[n], start=1):
            rows.append({
                'drop_id': drop.drop_index,
                'user': n,
                'alpha': alpha,
                'gamma': float(value),
                'chosen': alpha == alpha_chosen,
            })
    return rows_to_dataframe(rows)


def drop_dump(config: ScenarioConfig, drop_index: int) -> Dict[str, pd.DataFrame]:
    """Everything one drop produces, for debugging"""
    drop = run_drop(config, drop_index, schemes=ALL_SCHEMES)
    return {
        'allocations': rows_to_dataframe(drop.allocation_rows()),
        'sinr': rows_to_dataframe(drop.sinr_rows()),
        'gamma': gamma_rows(drop),
        'focusing': focusing_taps(drop),
        'summary': rows_to_dataframe([drop.summary_row()]),
    }
