from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.models.beamformer_model import Beamformer
from src.models.channel_model import ChannelSet, Tier
from src.models.result_model import PowerVector, SinrBreakdown
from src.services.beamformers.beamformer_design import composite_channel, composite_table
from src.utils.errors import InvalidInputError


@dataclass(frozen=True)
class TierGains:
    """Per-unit-power gains of one tier's beamformers

    signal[n]   = |c_nn[tap_n]|²
    isi[n]      = Σ_{l≠tap_n} |c_nn[l]|²
    co[v, u]    = ||c_uv||²，使用者 u 的訊號漏到同層使用者 v（對角為 0）
    leakage[u, w] = ||Σ_i w_iu * h_iw||²，漏到另一層使用者 w
    """
    signal: np.ndarray
    isi: np.ndarray
    co: np.ndarray
    leakage: np.ndarray


def tier_gains(
    beamformers: List[Beamformer],
    own_cirs: np.ndarray,
    cross_cirs: np.ndarray,
    sampled_taps: Optional[Sequence[int]] = None
) -> TierGains:
    """Tabulate every gain the SINR expressions of a tier need

    Args:
        beamformers: 該層每位使用者的 beamformer
        own_cirs: (M, N, L) 該層天線到自家使用者
        cross_cirs: (M, N_other, L) 該層天線到另一層使用者
        sampled_taps: 每位使用者的取樣 tap（1-based），預設取 beamformer.sampled_tap
    """
    num_users = len(beamformers)
    if sampled_taps is None:
        sampled_taps = [b.sampled_tap for b in beamformers]

    table = composite_table(beamformers, own_cirs)           # (U, V, 2L−1)
    powers = np.abs(table) ** 2
    energies = powers.sum(axis=-1)                            # [u, v]

    signal = np.array([powers[n, n, sampled_taps[n] - 1] for n in range(num_users)])
    isi = np.array([
        np.sum(np.delete(powers[n, n], sampled_taps[n] - 1)) for n in range(num_users)
    ])
    co = energies.T.copy()
    np.fill_diagonal(co, 0.0)

    if np.asarray(cross_cirs).shape[1] > 0:
        leakage = np.sum(np.abs(composite_table(beamformers, cross_cirs)) ** 2, axis=-1)
    else:
        leakage = np.zeros((num_users, 0))

    return TierGains(signal=signal, isi=isi, co=co, leakage=leakage)


def breakdowns_from_gains(
    gains: TierGains,
    powers: PowerVector,
    cross_powers: np.ndarray,
    noise: float
) -> List[SinrBreakdown]:
    """Evaluate every user of a tier from tabulated gains"""
    p = powers.p
    cross_powers = np.broadcast_to(np.asarray(cross_powers, dtype=float), p.shape)
    return [
        SinrBreakdown(
            p_sig=float(p[n] * gains.signal[n]),
            p_isi=float(p[n] * gains.isi[n]),
            p_co=float(gains.co[n] @ p),
            p_cross=float(cross_powers[n]),
            noise=noise,
        )
        for n in range(p.size)
    ]


def _check_user(index: int, count: int, label: str) -> None:
    if not 0 <= index < count:
        raise InvalidInputError(f"{label} {index} 超出 [0, {count})")


def cross_tier_into_macro(
    n: int,
    femto_beamformers: List[Beamformer],
    p1: PowerVector,
    channel_set: ChannelSet
) -> float:
    """Σ_j p_j^1 ||Σ_i g_ij * h^{10}_in||²：FBS 對 MU n 的實際干擾"""
    cirs = channel_set.link(Tier.FEMTO, Tier.MACRO)
    return float(sum(
        p1[j] * composite_channel(beamformer, cirs[:, n, :]).energy
        for j, beamformer in enumerate(femto_beamformers)
    ))


def cross_tier_into_femto(
    j: int,
    macro_beamformers: List[Beamformer],
    p0: PowerVector,
    channel_set: ChannelSet
) -> float:
    """Σ_n p_n^0 ||Σ_m u_mn * h^{01}_mj||²：MBS 對 FU j 的實際干擾"""
    cirs = channel_set.link(Tier.MACRO, Tier.FEMTO)
    return float(sum(
        p0[n] * composite_channel(beamformer, cirs[:, j, :]).energy
        for n, beamformer in enumerate(macro_beamformers)
    ))


def macro_sinr(
    n: int,
    alpha_n: int,
    p0: PowerVector,
    macro_beamformers: List[Beamformer],
    femto_beamformers: List[Beamformer],
    p1: PowerVector,
    channel_set: ChannelSet,
    noise: float = 1.0
) -> SinrBreakdown:
    """SINR of MU n sampled at tap α_n, with the actual femto cross-tier term"""
    own_cirs = channel_set.link(Tier.MACRO, Tier.MACRO)
    _check_user(n, own_cirs.shape[1], "MU")
    if len(p0) != len(macro_beamformers) or len(p1) != len(femto_beamformers):
        raise InvalidInputError("功率向量長度與 beamformer 數不符")

    own = composite_channel(macro_beamformers[n], own_cirs[:, n, :])
    co = sum(
        p0[other] * composite_channel(beamformer, own_cirs[:, n, :]).energy
        for other, beamformer in enumerate(macro_beamformers) if other != n
    )
    return SinrBreakdown(
        p_sig=p0[n] * own.power_at(alpha_n),
        p_isi=p0[n] * own.isi_power(alpha_n),
        p_co=float(co),
        p_cross=cross_tier_into_macro(n, femto_beamformers, p1, channel_set),
        noise=noise,
    )


def femto_sinr(
    j: int,
    p1: PowerVector,
    femto_beamformers: List[Beamformer],
    channel_set: ChannelSet,
    cross_power: float,
    noise: float = 1.0,
    sampled_tap: Optional[int] = None
) -> SinrBreakdown:
    """SINR of FU j

    cross_power 可以是實際的 macro 干擾（見 cross_tier_into_femto）或容忍值 P_tol。
    TR 取樣固定在 β = L；ZF femtocell 可傳入選出的 tap。
    """
    own_cirs = channel_set.link(Tier.FEMTO, Tier.FEMTO)
    _check_user(j, own_cirs.shape[1], "FU")
    if len(p1) != len(femto_beamformers):
        raise InvalidInputError("功率向量長度與 beamformer 數不符")
    if cross_power < 0:
        raise InvalidInputError(f"cross_power 必須 ≥ 0，收到 {cross_power}")

    beta = channel_set.num_taps if sampled_tap is None else sampled_tap
    own = composite_channel(femto_beamformers[j], own_cirs[:, j, :])
    co = sum(
        p1[other] * composite_channel(beamformer, own_cirs[:, j, :]).energy
        for other, beamformer in enumerate(femto_beamformers) if other != j
    )
    return SinrBreakdown(
        p_sig=p1[j] * own.power_at(beta),
        p_isi=p1[j] * own.isi_power(beta),
        p_co=float(co),
        p_cross=float(cross_power),
        noise=noise,
    )
