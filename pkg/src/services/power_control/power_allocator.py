from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.models.beamformer_model import Beamformer, BeamformerKind, TapSelection
from src.models.channel_model import ChannelSet, Tier
from src.models.result_model import (
    AllocationResult,
    AllocationStatus,
    FemtoBackhaul,
    PowerVector,
    SinrBreakdown,
)
from src.services.beamformers.time_reversal import TimeReversal
from src.services.beamformers.zero_forcing import ZeroForcing
from src.services.link_metrics import TierGains, breakdowns_from_gains, tier_gains
from src.services.power_control.lp_solver import LpProblem, Sense, solve_lp
from src.utils.errors import InvalidInputError, RankDeficiencyError
from src.utils.logging import setup_logging

logger = setup_logging(__name__)

Targets = Union[float, Sequence[float], np.ndarray]


def _targets(gamma: Targets, count: int) -> np.ndarray:
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), (count,)).copy()
    if np.any(gamma < 0):
        raise InvalidInputError(f"SINR 門檻必須 ≥ 0，收到 {gamma}")
    return gamma


def _add_sinr_rows(
    problem: LpProblem,
    offset: int,
    gains: TierGains,
    gamma: np.ndarray,
    fixed_cross: np.ndarray,
    noise: float,
    coupled_offset: Optional[int] = None,
    coupled_leakage: Optional[np.ndarray] = None
) -> None:
    """SINR_n ≥ γ_n 線性化後加入 LP

    S_n p_n − γ_n (ISI_n p_n + Σ_u co[n,u] p_u + Σ_w X[w,n] q_w) ≥ γ_n (fixed_cross_n + noise)
    其中 q 是另一層的功率（集中式才有），X 為另一層漏到本層的增益。
    """
    num_users = gains.signal.size
    for n in range(num_users):
        coeffs = np.zeros(problem.num_variables)
        coeffs[offset:offset + num_users] = -gamma[n] * gains.co[n]
        coeffs[offset + n] = gains.signal[n] - gamma[n] * gains.isi[n]
        if coupled_offset is not None and coupled_leakage is not None and coupled_leakage.shape[0] > 0:
            other = coupled_leakage.shape[0]
            coeffs[coupled_offset:coupled_offset + other] = -gamma[n] * coupled_leakage[:, n]
        problem.add(coeffs, Sense.GE, gamma[n] * (fixed_cross[n] + noise))


def _objective_or_ones(weights: np.ndarray) -> np.ndarray:
    # 沒有受害者時目標退化為 0，改用總功率
    return weights if weights.size and np.all(weights > 0) else np.ones(weights.size)


def femto_power_alloc(
    channel_set: ChannelSet,
    tr_beamformers: List[Beamformer],
    gamma_f: Targets,
    p_tol01: float,
    noise: float = 1.0,
    p_tol10_cap: Optional[float] = None
) -> AllocationResult:
    """Femto subproblem: minimize the leakage onto MUs under SINR targets with tolerated macro interference

    Args:
        p_tol10_cap: 若給定，每個 (j, n) 加上 p_j·||g_j * h^{10}_n||² ≤ P_tol10
    """
    num_femto = len(tr_beamformers)
    gains = tier_gains(
        tr_beamformers,
        channel_set.link(Tier.FEMTO, Tier.FEMTO),
        channel_set.link(Tier.FEMTO, Tier.MACRO),
    )
    gamma = _targets(gamma_f, num_femto)
    tolerated = np.full(num_femto, p_tol01)

    problem = LpProblem(objective=_objective_or_ones(gains.leakage.sum(axis=1)))
    _add_sinr_rows(problem, 0, gains, gamma, tolerated, noise)
    if p_tol10_cap is not None:
        for j in range(num_femto):
            for n in range(gains.leakage.shape[1]):
                coeffs = np.zeros(num_femto)
                coeffs[j] = gains.leakage[j, n]
                problem.add(coeffs, Sense.LE, p_tol10_cap)

    solution = solve_lp(problem)
    if not solution.is_optimal:
        logger.debug(f"femto LP 不可行 (γ_F = {gamma})")
        return AllocationResult.failed(AllocationStatus.INFEASIBLE, "femto SINR 目標不可行")

    powers = PowerVector(solution.x)
    return AllocationResult(
        status=AllocationStatus.OPTIMAL,
        powers=powers,
        femto_breakdowns=breakdowns_from_gains(gains, powers, tolerated, noise),
        backhaul=FemtoBackhaul(powers=powers, beamformers=list(tr_beamformers), leakage_gains=gains.leakage),
        num_macro=0,
    )


def _alphas(selection: Union[TapSelection, Sequence[int]]) -> List[int]:
    return list(selection.alphas) if isinstance(selection, TapSelection) else [int(a) for a in selection]


def macro_power_alloc(
    channel_set: ChannelSet,
    zf_beamformers: List[Beamformer],
    selection: Union[TapSelection, Sequence[int]],
    femto_result: Optional[AllocationResult],
    gamma_m: Targets,
    p_tol01: float,
    noise: float = 1.0,
    use_actual_cross: bool = True,
    p_tol10: float = 0.0
) -> AllocationResult:
    """Macro subproblem: minimum Σp⁰ under SINR targets and per-(n, j) leakage caps P_tol01

    femto 端的 (p¹, g, leakage gains) 由 backhaul 傳入；use_actual_cross=False 時
    MU 的跨層干擾以 P_tol10 代替。
    """
    num_macro = len(zf_beamformers)
    gains = tier_gains(
        zf_beamformers,
        channel_set.link(Tier.MACRO, Tier.MACRO),
        channel_set.link(Tier.MACRO, Tier.FEMTO),
        sampled_taps=_alphas(selection),
    )
    gamma = _targets(gamma_m, num_macro)

    backhaul = femto_result.backhaul if femto_result is not None else None
    if backhaul is None or len(backhaul.powers) == 0:
        cross = np.zeros(num_macro)
    elif use_actual_cross:
        cross = backhaul.leakage_gains.T @ backhaul.powers.p
    else:
        cross = np.full(num_macro, p_tol10)

    problem = LpProblem(objective=np.ones(num_macro))
    _add_sinr_rows(problem, 0, gains, gamma, cross, noise)
    for n in range(num_macro):
        for j in range(gains.leakage.shape[1]):
            coeffs = np.zeros(num_macro)
            coeffs[n] = gains.leakage[n, j]
            problem.add(coeffs, Sense.LE, p_tol01)

    solution = solve_lp(problem)
    if not solution.is_optimal:
        logger.debug(f"macro LP 不可行 (γ_M = {gamma})")
        return AllocationResult.failed(AllocationStatus.INFEASIBLE, "macro SINR 或洩漏限制不可行", num_macro)

    powers = PowerVector(solution.x)
    return AllocationResult(
        status=AllocationStatus.OPTIMAL,
        powers=powers,
        macro_breakdowns=breakdowns_from_gains(gains, powers, cross, noise),
        num_macro=num_macro,
    )


def _joint_gains(
    channel_set: ChannelSet,
    macro_beamformers: List[Beamformer],
    alphas: List[int],
    femto_beamformers: List[Beamformer]
) -> Tuple[TierGains, TierGains]:
    macro = tier_gains(
        macro_beamformers,
        channel_set.link(Tier.MACRO, Tier.MACRO),
        channel_set.link(Tier.MACRO, Tier.FEMTO),
        sampled_taps=alphas,
    )
    femto = tier_gains(
        femto_beamformers,
        channel_set.link(Tier.FEMTO, Tier.FEMTO),
        channel_set.link(Tier.FEMTO, Tier.MACRO),
    )
    return macro, femto


def joint_breakdowns(
    channel_set: ChannelSet,
    macro_beamformers: List[Beamformer],
    selection: Union[TapSelection, Sequence[int]],
    femto_beamformers: List[Beamformer],
    p0: PowerVector,
    p1: PowerVector,
    noise: float = 1.0
) -> Tuple[List[SinrBreakdown], List[SinrBreakdown]]:
    """Both tiers evaluated with the actual mutual cross-tier interference"""
    macro, femto = _joint_gains(channel_set, macro_beamformers, _alphas(selection), femto_beamformers)
    macro_cross = femto.leakage.T @ p1.p if len(p1) else np.zeros(len(p0))
    femto_cross = macro.leakage.T @ p0.p if len(p1) else np.zeros(0)
    return (
        breakdowns_from_gains(macro, p0, macro_cross, noise),
        breakdowns_from_gains(femto, p1, femto_cross, noise),
    )


def centralized_alloc(
    channel_set: ChannelSet,
    macro_beamformers: List[Beamformer],
    selection: Union[TapSelection, Sequence[int]],
    femto_beamformers: List[Beamformer],
    gamma_m: Targets,
    gamma_f: Targets,
    noise: float = 1.0
) -> AllocationResult:
    """Joint minimum Σp over both tiers with full mutual coupling, the lower bound for the distributed scheme"""
    alphas = _alphas(selection)
    macro, femto = _joint_gains(channel_set, macro_beamformers, alphas, femto_beamformers)
    num_macro, num_femto = len(macro_beamformers), len(femto_beamformers)

    problem = LpProblem(objective=np.ones(num_macro + num_femto))
    _add_sinr_rows(
        problem, 0, macro, _targets(gamma_m, num_macro), np.zeros(num_macro), noise,
        coupled_offset=num_macro, coupled_leakage=femto.leakage,
    )
    if num_femto:
        _add_sinr_rows(
            problem, num_macro, femto, _targets(gamma_f, num_femto), np.zeros(num_femto), noise,
            coupled_offset=0, coupled_leakage=macro.leakage,
        )

    solution = solve_lp(problem)
    if not solution.is_optimal:
        return AllocationResult.failed(AllocationStatus.INFEASIBLE, "集中式 SINR 目標不可行", num_macro)

    p0 = PowerVector(solution.x[:num_macro])
    p1 = PowerVector(solution.x[num_macro:])
    macro_breakdowns, femto_breakdowns = joint_breakdowns(
        channel_set, macro_beamformers, alphas, femto_beamformers, p0, p1, noise
    )
    return AllocationResult(
        status=AllocationStatus.OPTIMAL,
        powers=PowerVector(solution.x),
        macro_breakdowns=macro_breakdowns,
        femto_breakdowns=femto_breakdowns,
        num_macro=num_macro,
    )


def femto_standalone_alloc(
    channel_set: ChannelSet,
    beamformer_kind: BeamformerKind,
    gamma_f: Targets,
    p_tol01: float,
    noise: float = 1.0
) -> AllocationResult:
    """Femtocell in isolation: minimum Σp¹ with the macro interference fixed at P_tol01

    TR 在 β = L 取樣；ZF 在 femto 通道上做逐 tap 選擇。
    """
    cirs = channel_set.link(Tier.FEMTO, Tier.FEMTO)
    design = TimeReversal() if BeamformerKind(beamformer_kind) == BeamformerKind.TR else ZeroForcing(noise)
    try:
        beamformers = design.design(cirs)
    except RankDeficiencyError as e:
        logger.debug(f"femto ZF 秩不足: {e}")
        return AllocationResult.failed(AllocationStatus.RANK_DEFICIENT, str(e))

    num_femto = len(beamformers)
    gains = tier_gains(beamformers, cirs, channel_set.link(Tier.FEMTO, Tier.MACRO))
    tolerated = np.full(num_femto, p_tol01)

    problem = LpProblem(objective=np.ones(num_femto))
    _add_sinr_rows(problem, 0, gains, _targets(gamma_f, num_femto), tolerated, noise)
    solution = solve_lp(problem)
    if not solution.is_optimal:
        return AllocationResult.failed(AllocationStatus.INFEASIBLE, f"{design.get_name()} femto 目標不可行")

    powers = PowerVector(solution.x)
    return AllocationResult(
        status=AllocationStatus.OPTIMAL,
        powers=powers,
        femto_breakdowns=breakdowns_from_gains(gains, powers, tolerated, noise),
        num_macro=0,
    )
