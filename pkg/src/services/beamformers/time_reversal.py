from typing import List, Optional

import numpy as np

from src.models.beamformer_model import Beamformer, BeamformerKind, FocusingReport
from src.models.channel_model import ChannelSet, Tier
from src.services.beamformers.beamformer_design import BeamformerDesign, composite_channel
from src.utils.errors import DegenerateChannelError, InvalidInputError


def tr_prefilter(cirs: np.ndarray, user_index: int = 0) -> Beamformer:
    """Time-reversal prefilter of one user

    g_i[l] = h_i*[L+1−l] / √(Σ_i ||h_i||²)，接收端取中央 tap β = L。

    Args:
        cirs: (M, L) 或 (L,)，每根天線到該使用者的 CIR
        user_index: 使用者編號

    Raises:
        DegenerateChannelError: 通道全為零
    """
    cirs = np.atleast_2d(np.asarray(cirs, dtype=complex))
    if cirs.ndim != 2 or cirs.shape[1] == 0:
        raise InvalidInputError(f"CIR 必須為 (M, L)，收到 shape {cirs.shape}")

    energy = float(np.sum(np.abs(cirs) ** 2))
    if energy == 0.0:
        raise DegenerateChannelError(f"使用者 {user_index} 的通道能量為零")

    weights = np.conj(cirs[:, ::-1]) / np.sqrt(energy)
    return Beamformer(
        user_index=user_index,
        weights=weights,
        kind=BeamformerKind.TR,
        sampled_tap=cirs.shape[1],
    )


class TimeReversal(BeamformerDesign):
    def design(self, cirs: np.ndarray) -> List[Beamformer]:
        return [tr_prefilter(cirs[:, j, :], user_index=j) for j in range(cirs.shape[1])]

    def get_name(self) -> str:
        return "TR"


def focusing_report(
    channel_set: ChannelSet,
    user: int,
    beamformers: Optional[List[Beamformer]] = None
) -> FocusingReport:
    """How tightly the TR prefilter of `user` focuses energy at tap L

    peak_power 為中央 tap 功率，isi_power 為其餘 tap 功率，另外附上同一訊號
    到達其他 femto 使用者的等效通道。
    """
    cirs = channel_set.link(Tier.FEMTO, Tier.FEMTO)
    num_users = channel_set.num_users(Tier.FEMTO)
    if not 0 <= user < num_users:
        raise InvalidInputError(f"femto 使用者 {user} 不存在")
    if beamformers is None:
        beamformers = TimeReversal().design(cirs)

    beamformer = beamformers[user]
    intended = composite_channel(beamformer, cirs[:, user, :])
    unintended = [
        composite_channel(beamformer, cirs[:, other, :])
        for other in range(num_users) if other != user
    ]

    peak_power = intended.power_at(beamformer.sampled_tap)
    isi_power = intended.isi_power(beamformer.sampled_tap)
    return FocusingReport(
        user=user,
        peak_power=peak_power,
        isi_power=isi_power,
        peak_to_total_ratio=peak_power / (peak_power + isi_power),
        intended=intended,
        unintended=unintended,
    )
