from dataclasses import dataclass
from functools import cached_property
from typing import List, Tuple

import numpy as np

from src.models.beamformer_model import Beamformer, BeamformerKind, TapSelection
from src.services.beamformers.beamformer_design import BeamformerDesign, composite_channel
from src.utils.errors import InvalidInputError, RankDeficiencyError
from src.utils.logging import setup_logging

logger = setup_logging(__name__)

PINV_RCOND = 1e-12


@dataclass
class ZfSystem:
    """Stacked block-Toeplitz channel matrix of one tier

    `matrix` 為 [H̄_1; …; H̄_N]，大小 N(2L−1) × M·L。欄位依 tap 分塊，每塊 M 欄：
    (列 r, 塊 l) = h̄_{r−l+1}，即各天線第 r−l+1 個 tap。
    """
    matrix: np.ndarray
    num_antennas: int
    num_users: int
    num_taps: int

    @property
    def block_rows(self) -> int:
        return 2 * self.num_taps - 1

    def block(self, user: int) -> np.ndarray:
        """H̄_n"""
        start = user * self.block_rows
        return self.matrix[start:start + self.block_rows]

    def selector(self, user: int, alpha: int) -> np.ndarray:
        """z_{n,α}：使用者 n 區塊中第 α 個位置為 1"""
        if not 0 <= user < self.num_users:
            raise InvalidInputError(f"使用者 {user} 超出 [0, {self.num_users})")
        if not 1 <= alpha <= self.block_rows:
            raise InvalidInputError(f"α = {alpha} 超出 [1, {self.block_rows}]")
        z = np.zeros(self.matrix.shape[0], dtype=complex)
        z[user * self.block_rows + alpha - 1] = 1.0
        return z

    @cached_property
    def _svd(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.linalg.svd(self.matrix, full_matrices=False)

    @property
    def rank(self) -> int:
        singular_values = self._svd[1]
        if singular_values.size == 0 or singular_values[0] == 0.0:
            return 0
        return int(np.sum(singular_values > PINV_RCOND * singular_values[0]))

    @property
    def full_row_rank(self) -> bool:
        return self.rank == self.matrix.shape[0]

    @cached_property
    def pseudo_inverse(self) -> np.ndarray:
        """Moore–Penrose pseudoinverse, singular values below 1e-12·σ_max dropped"""
        u, s, vh = self._svd
        rank = self.rank
        return (vh[:rank].conj().T / s[:rank]) @ u[:, :rank].conj().T

    def pack(self, weights: np.ndarray) -> np.ndarray:
        """(M, L) 天線 prefilter → 與 matrix 欄位順序一致的向量"""
        return np.asarray(weights, dtype=complex).T.reshape(-1)

    def unpack(self, vector: np.ndarray) -> np.ndarray:
        """matrix 欄位順序的向量 → (M, L)"""
        return np.asarray(vector, dtype=complex).reshape(self.num_taps, self.num_antennas).T


def build_zf_system(cirs: np.ndarray) -> ZfSystem:
    """Build H̄ from a tier's own CIRs

    Args:
        cirs: (M, N, L)，服務端天線 i 到自家使用者 n
    """
    cirs = np.asarray(cirs, dtype=complex)
    if cirs.ndim != 3:
        raise InvalidInputError(f"CIR 陣列必須為 (M, N, L)，收到 shape {cirs.shape}")
    num_antennas, num_users, num_taps = cirs.shape
    block_rows = 2 * num_taps - 1

    matrix = np.zeros((num_users * block_rows, num_antennas * num_taps), dtype=complex)
    for n in range(num_users):
        for r in range(block_rows):
            for l in range(num_taps):
                tap = r - l
                if 0 <= tap < num_taps:
                    matrix[n * block_rows + r, l * num_antennas:(l + 1) * num_antennas] = cirs[:, n, tap]

    return ZfSystem(matrix=matrix, num_antennas=num_antennas, num_users=num_users, num_taps=num_taps)


def zf_beamformer(system: ZfSystem, user: int, alpha: int) -> Beamformer:
    """w̄ = c·pinv(H̄)·z_{n,α}, normalized to ||w̄|| = 1

    Raises:
        RankDeficiencyError: H̄ 不是列滿秩（通常是 M·L < N(2L−1)）
    """
    z = system.selector(user, alpha)
    if not system.full_row_rank:
        raise RankDeficiencyError(system.rank, system.matrix.shape[0])

    w = system.pseudo_inverse @ z
    w = w / np.linalg.norm(w)
    return Beamformer(
        user_index=user,
        weights=system.unpack(w),
        kind=BeamformerKind.ZF,
        sampled_tap=alpha,
    )


def gamma_metric(
    beamformers: List[Beamformer],
    cirs: np.ndarray,
    user: int,
    alpha: int,
    noise: float = 1.0
) -> float:
    """Γ_{n,α}: desired tap power over ISI + co-user leakage + noise

    `beamformers` 為所有使用者在同一個候選 α 下的 ZF beamformer。
    """
    own = composite_channel(beamformers[user], cirs[:, user, :])
    signal = own.power_at(alpha)
    isi = own.isi_power(alpha)
    co_user = sum(
        composite_channel(beamformers[other], cirs[:, user, :]).energy
        for other in range(len(beamformers)) if other != user
    )
    return signal / (isi + co_user + noise)


def select_taps(cirs: np.ndarray, noise: float = 1.0) -> Tuple[TapSelection, List[Beamformer]]:
    """Tap selection: evaluate every candidate tap and keep the Γ-maximizing one per user

    同分時取最小的 α。
    """
    system = build_zf_system(cirs)
    num_users = system.num_users
    candidates = range(1, system.block_rows + 1)

    gamma_table = np.zeros((num_users, system.block_rows))
    designs: List[List[Beamformer]] = []
    for alpha in candidates:
        beamformers = [zf_beamformer(system, n, alpha) for n in range(num_users)]
        designs.append(beamformers)
        for n in range(num_users):
            gamma_table[n, alpha - 1] = gamma_metric(beamformers, cirs, n, alpha, noise)

    # np.argmax 回傳第一個最大值，即最小的 α
    alphas = [int(np.argmax(gamma_table[n])) + 1 for n in range(num_users)]
    chosen = [designs[alpha - 1][n] for n, alpha in enumerate(alphas)]
    logger.debug(f"tap 選擇 α = {alphas}")

    return TapSelection(alphas=alphas, gamma_table=gamma_table), chosen


class ZeroForcing(BeamformerDesign):
    def __init__(self, noise: float = 1.0):
        self.noise = noise

    def design(self, cirs: np.ndarray) -> List[Beamformer]:
        return select_taps(cirs, self.noise)[1]

    def get_name(self) -> str:
        return "ZF"
