from abc import ABC, abstractmethod
from typing import List

import numpy as np

from src.models.beamformer_model import Beamformer, EquivalentChannel
from src.utils.errors import InvalidInputError


class BeamformerDesign(ABC):
    """Designs one beamformer per served user from the serving tier's CIRs"""

    @abstractmethod
    def design(self, cirs: np.ndarray) -> List[Beamformer]:
        """cirs: (M, N, L) 服務端天線到自家使用者的通道"""
        pass

    @abstractmethod
    def get_name(self) -> str:
        pass


def equivalent_channel(prefilter: np.ndarray, cir: np.ndarray) -> EquivalentChannel:
    """Linear convolution of a length-L prefilter with a length-L CIR

    Raises:
        InvalidInputError: 兩者長度不同
    """
    prefilter = np.asarray(prefilter, dtype=complex)
    cir = np.asarray(getattr(cir, 'taps', cir), dtype=complex)
    if prefilter.ndim != 1 or cir.ndim != 1 or prefilter.size != cir.size:
        raise InvalidInputError(
            f"prefilter 與 CIR 長度必須相同，收到 {prefilter.shape} 與 {cir.shape}"
        )
    return EquivalentChannel(np.convolve(prefilter, cir))


def composite_channel(beamformer: Beamformer, cirs: np.ndarray) -> EquivalentChannel:
    """Σ_i weights_i * cirs_i，cirs 為 (M, L)：各天線到同一位接收者"""
    cirs = np.asarray(cirs, dtype=complex)
    if cirs.shape != beamformer.weights.shape:
        raise InvalidInputError(
            f"通道形狀 {cirs.shape} 與 beamformer {beamformer.weights.shape} 不符"
        )
    zero = EquivalentChannel(np.zeros(2 * beamformer.num_taps - 1, dtype=complex))
    return sum((equivalent_channel(weights, cir) for weights, cir in zip(beamformer.weights, cirs)), zero)


def composite_table(beamformers: List[Beamformer], cirs: np.ndarray) -> np.ndarray:
    """All composite channels of a tier onto a set of receivers

    Args:
        beamformers: 發射端每位使用者的 beamformer
        cirs: (M, V, L) 發射天線到 V 個接收者

    Returns:
        (U, V, 2L−1) 陣列，[u, v] 為使用者 u 的訊號到達接收者 v 的等效通道
    """
    cirs = np.asarray(cirs, dtype=complex)
    num_receivers = cirs.shape[1]
    num_taps = cirs.shape[2]
    table = np.zeros((len(beamformers), num_receivers, 2 * num_taps - 1), dtype=complex)
    for u, beamformer in enumerate(beamformers):
        for v in range(num_receivers):
            table[u, v] = composite_channel(beamformer, cirs[:, v, :]).taps
    return table
