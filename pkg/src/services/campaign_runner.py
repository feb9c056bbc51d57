from dataclasses import dataclass, field
from functools import partial
from multiprocessing import Pool
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.models.beamformer_model import Beamformer, BeamformerKind
from src.models.channel_model import ChannelSet, Tier
from src.models.result_model import (
    AllocationResult,
    AllocationStatus,
    DropResult,
    PowerVector,
    Scheme,
    rows_to_dataframe,
)
from src.models.scenario_config import ScenarioConfig
from src.services.beamformers.time_reversal import TimeReversal, focusing_report
from src.services.beamformers.zero_forcing import select_taps
from src.services.channel_generator import ChannelGenerator
from src.services.power_control.lp_solver import SimplexSolver
from src.services.power_control.power_allocator import (
    centralized_alloc,
    femto_power_alloc,
    femto_standalone_alloc,
    joint_breakdowns,
    macro_power_alloc,
)
from src.utils.errors import ConfigError, RankDeficiencyError, SimulationError
from src.utils.helpers import drop_rng, linear_to_db
from src.utils.logging import setup_logging

logger = setup_logging(__name__)

ALL_SCHEMES = (Scheme.DISTRIBUTED, Scheme.CENTRALIZED, Scheme.TR_STANDALONE, Scheme.ZF_STANDALONE)

# SINR 目標達成的相對容忍度
SINR_TOLERANCE = 1e-8
# 集中式 ≤ 分散式 的比較容忍度
DOMINANCE_TOLERANCE = 1e-9


def _meets_targets(breakdowns, gamma: float) -> bool:
    return all(b.sinr >= gamma * (1.0 - SINR_TOLERANCE) for b in breakdowns)


def _distributed(
    config: ScenarioConfig,
    channel_set: ChannelSet,
    macro_bf: List[Beamformer],
    alphas: List[int],
    femto_bf: List[Beamformer],
    drop: DropResult
) -> AllocationResult:
    """femto LP → backhaul → macro LP，並以實際跨層干擾檢查結果"""
    num_macro = len(macro_bf)
    femto = None
    if femto_bf:
        femto = femto_power_alloc(
            channel_set, femto_bf, config.gamma_f, config.p_tol01, config.noise_power,
            p_tol10_cap=config.p_tol10 if config.enable_p_tol10_cap else None,
        )
        if not femto.is_optimal:
            return AllocationResult.failed(femto.status, f"femto: {femto.message}", num_macro)

    macro = macro_power_alloc(
        channel_set, macro_bf, alphas, femto, config.gamma_m, config.p_tol01, config.noise_power,
        use_actual_cross=config.macro_uses_actual_cross, p_tol10=config.p_tol10,
    )
    if not macro.is_optimal:
        return AllocationResult.failed(macro.status, f"macro: {macro.message}", num_macro)

    p1 = femto.powers if femto is not None else PowerVector.zeros(0)
    macro_breakdowns, femto_breakdowns = joint_breakdowns(
        channel_set, macro_bf, alphas, femto_bf, macro.powers, p1, config.noise_power
    )
    drop.distributed_actual_feasible = (
        _meets_targets(macro_breakdowns, config.gamma_m) and _meets_targets(femto_breakdowns, config.gamma_f)
    )
    drop.max_femto_cross = max((b.p_cross for b in femto_breakdowns), default=0.0)
    drop.cross_within_tolerance = drop.max_femto_cross <= config.p_tol01 * (1.0 + SINR_TOLERANCE)
    if drop.is_feasibility_violation:
        logger.warning(f"drop {drop.drop_index}: MBS 干擾未超過 P_tol01，分散式解卻未達 SINR 目標")
    elif not drop.distributed_actual_feasible:
        logger.debug(
            f"drop {drop.drop_index}: MBS 干擾 {drop.max_femto_cross:.3g} 超過 P_tol01，分散式解未達 SINR 目標"
        )

    return AllocationResult(
        status=AllocationStatus.OPTIMAL,
        powers=PowerVector(np.concatenate([macro.powers.p, p1.p])),
        macro_breakdowns=macro_breakdowns,
        femto_breakdowns=femto_breakdowns,
        backhaul=femto.backhaul if femto is not None else None,
        num_macro=num_macro,
    )


def run_drop(
    config: ScenarioConfig,
    drop_index: int,
    schemes: Sequence[Scheme] = ALL_SCHEMES
) -> DropResult:
    """One user drop through the whole pipeline

    geometry → channels → TR → tap selection → LPs。秩不足、不可行或其他模擬錯誤
    都記錄在結果裡，不會中斷整個 campaign。
    """
    schemes = [Scheme(s) for s in schemes]
    drop = DropResult(drop_index=drop_index)
    try:
        channel_set = ChannelGenerator(config).generate(drop_rng(config.seed, drop_index))

        femto_bf = TimeReversal().design(channel_set.link(Tier.FEMTO, Tier.FEMTO))
        drop.focusing = [focusing_report(channel_set, j, femto_bf) for j in range(len(femto_bf))]

        needs_macro = Scheme.DISTRIBUTED in schemes or Scheme.CENTRALIZED in schemes
        macro_bf, alphas = [], []
        if needs_macro:
            try:
                selection, macro_bf = select_taps(channel_set.link(Tier.MACRO, Tier.MACRO), config.noise_power)
                drop.tap_selection = selection
                alphas = selection.alphas
            except RankDeficiencyError as e:
                drop.rank_deficient = True
                logger.warning(f"drop {drop_index}: macro ZF 秩不足 ({e})")

        for scheme in schemes:
            if scheme in (Scheme.DISTRIBUTED, Scheme.CENTRALIZED) and drop.rank_deficient:
                drop.allocations[scheme] = AllocationResult.failed(
                    AllocationStatus.RANK_DEFICIENT, "macro ZF 秩不足", config.macro_users
                )
            elif scheme == Scheme.DISTRIBUTED:
                drop.allocations[scheme] = _distributed(config, channel_set, macro_bf, alphas, femto_bf, drop)
            elif scheme == Scheme.CENTRALIZED:
                drop.allocations[scheme] = centralized_alloc(
                    channel_set, macro_bf, alphas, femto_bf, config.gamma_m, config.gamma_f, config.noise_power
                )
            elif config.femto_users == 0:
                drop.allocations[scheme] = AllocationResult.failed(AllocationStatus.SKIPPED, "沒有 femto 使用者")
            else:
                kind = BeamformerKind.TR if scheme == Scheme.TR_STANDALONE else BeamformerKind.ZF
                drop.allocations[scheme] = femto_standalone_alloc(
                    channel_set, kind, config.gamma_f, config.p_tol01, config.noise_power
                )

        # FBS 20 dBm 上限只回報
        femto_totals = [float(np.sum(r.femto_powers)) for r in drop.allocations.values() if r.is_optimal]
        drop.fbs_cap_violated = any(total > config.fbs_max_power for total in femto_totals)
        if drop.fbs_cap_violated:
            logger.warning(f"drop {drop_index}: FBS 發射功率超過 {config.fbs_max_power_dbm} dBm")

    except ConfigError:
        # 設定錯誤對所有 drop 都一樣，交給呼叫端
        raise
    except (SimulationError, SimplexSolver.Error) as e:
        logger.warning(f"drop {drop_index} 失敗: {e}")
        drop.error = str(e)

    return drop


@dataclass
class CampaignResult:
    """Every drop of one campaign plus aggregates recomputed from the rows"""
    config: ScenarioConfig
    drops: List[DropResult] = field(default_factory=list)

    @property
    def num_drops(self) -> int:
        return len(self.drops)

    def allocation_frame(self) -> pd.DataFrame:
        return rows_to_dataframe([row for drop in self.drops for row in drop.allocation_rows()])

    def sinr_frame(self) -> pd.DataFrame:
        return rows_to_dataframe([row for drop in self.drops for row in drop.sinr_rows()])

    def focusing_frame(self) -> pd.DataFrame:
        return rows_to_dataframe([row for drop in self.drops for row in drop.focusing_rows()])

    def drop_frame(self) -> pd.DataFrame:
        return rows_to_dataframe([drop.summary_row() for drop in self.drops])

    def totals(self, scheme: Scheme) -> np.ndarray:
        """每個 drop 的總功率（線性），非最佳解為 NaN"""
        return np.array([
            drop.allocations[scheme].total_power
            if scheme in drop.allocations and drop.allocations[scheme].is_optimal else np.nan
            for drop in self.drops
        ])

    def mean_power_db(self, scheme: Scheme, mask: Optional[np.ndarray] = None) -> float:
        """先平均線性功率再轉 dB；沒有可用的 drop 時回傳 NaN"""
        totals = self.totals(scheme)
        valid = ~np.isnan(totals) if mask is None else mask & ~np.isnan(totals)
        return linear_to_db(np.mean(totals[valid])) if np.any(valid) else float('nan')

    def outage_rate(self, scheme: Scheme) -> float:
        """不可行、秩不足或出錯的 drop 比例（略過的不計）"""
        statuses = [
            drop.allocations[scheme].status if scheme in drop.allocations else None
            for drop in self.drops
        ]
        counted = [s for s in statuses if s != AllocationStatus.SKIPPED]
        if not counted:
            return float('nan')
        return sum(s != AllocationStatus.OPTIMAL for s in counted) / len(counted)

    def paired_mask(self, first: Scheme, second: Scheme) -> np.ndarray:
        return ~np.isnan(self.totals(first)) & ~np.isnan(self.totals(second))

    def gap_db(self) -> float:
        """分散式與集中式的平均功率差（兩者皆可行的 drop）"""
        mask = self.paired_mask(Scheme.DISTRIBUTED, Scheme.CENTRALIZED)
        return self.mean_power_db(Scheme.DISTRIBUTED, mask) - self.mean_power_db(Scheme.CENTRALIZED, mask)

    def dominance_violations(self) -> int:
        """分散式解實際可行，集中式卻更耗功率的 drop 數"""
        distributed = self.totals(Scheme.DISTRIBUTED)
        centralized = self.totals(Scheme.CENTRALIZED)
        count = 0
        for drop, d, c in zip(self.drops, distributed, centralized):
            if np.isnan(d) or not drop.distributed_actual_feasible:
                continue
            if np.isnan(c) or c > d + DOMINANCE_TOLERANCE * max(1.0, d):
                count += 1
        return count

    def feasibility_violations(self) -> int:
        """MBS 干擾都在 P_tol01 內，分散式解卻仍未達標的 drop 數"""
        return sum(drop.is_feasibility_violation for drop in self.drops)

    def target_miss_rate(self) -> float:
        """分散式解在實際干擾下未達標的比例（不論 MBS 干擾是否超過 P_tol01）"""
        evaluated = [
            drop.distributed_actual_feasible for drop in self.drops
            if drop.distributed_actual_feasible is not None
        ]
        if not evaluated:
            return float('nan')
        return sum(not met for met in evaluated) / len(evaluated)

    def rank_deficiency_rate(self) -> float:
        return sum(drop.rank_deficient for drop in self.drops) / max(self.num_drops, 1)

    def fbs_cap_violations(self) -> int:
        return sum(bool(drop.fbs_cap_violated) for drop in self.drops)

    def error_count(self) -> int:
        return sum(bool(drop.error) for drop in self.drops)

    def aggregates(self) -> Dict[str, float]:
        schemes = sorted({s for drop in self.drops for s in drop.allocations}, key=ALL_SCHEMES.index)
        summary: Dict[str, float] = {
            'gamma_f_db': self.config.gamma_f_db,
            'gamma_m_db': self.config.gamma_m_db,
            'n_drops': self.num_drops,
        }
        for scheme in schemes:
            summary[f'mean_{scheme.value}_db'] = self.mean_power_db(scheme)
            summary[f'outage_{scheme.value}'] = self.outage_rate(scheme)
        if Scheme.DISTRIBUTED in schemes and Scheme.CENTRALIZED in schemes:
            summary['gap_db'] = self.gap_db()
            summary['dominance_violations'] = self.dominance_violations()
            summary['feasibility_violations'] = self.feasibility_violations()
            summary['distributed_target_miss_rate'] = self.target_miss_rate()
        summary['rank_deficiency_rate'] = self.rank_deficiency_rate()
        summary['fbs_cap_violations'] = self.fbs_cap_violations()
        summary['errors'] = self.error_count()
        return summary


def run_campaign(
    config: ScenarioConfig,
    schemes: Sequence[Scheme] = ALL_SCHEMES,
    show_progress: bool = True,
    drop_indices: Optional[Iterable[int]] = None
) -> CampaignResult:
    """Run n_drops independent drops, fanned out to a worker pool when config.workers > 1

    imap 保持 drop 順序，每個 drop 的亂數只取決於 (seed, drop_index)，
    所以 worker 數不影響輸出。
    """
    indices = list(range(config.n_drops)) if drop_indices is None else list(drop_indices)
    worker = partial(run_drop, config, schemes=tuple(schemes))
    progress = dict(
        total=len(indices),
        desc=f"Drops γ_F={config.gamma_f_db:g} dB γ_M={config.gamma_m_db:g} dB",
        bar_format="{l_bar}{bar}| {n_fmt}/{total_fmt} [{elapsed}]",
        colour="blue",
        disable=not show_progress,
    )

    logger.info(f"開始 campaign: {len(indices)} drops, seed {config.seed}, workers {config.workers}")
    if config.workers > 1:
        with Pool(config.workers) as pool:
            drops = list(tqdm(pool.imap(worker, indices), **progress))
    else:
        drops = [worker(index) for index in tqdm(indices, **progress)]

    result = CampaignResult(config=config, drops=drops)
    logger.info(
        f"campaign 完成: 秩不足 {result.rank_deficiency_rate():.1%}, 錯誤 {result.error_count()} 個 drop"
    )
    return result
