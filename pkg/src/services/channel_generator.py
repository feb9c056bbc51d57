import numpy as np
from typing import Dict, Optional

from src.models.channel_model import ChannelSet, Cir, Geometry, PdpProfile, TapMapping, Tier
from src.models.scenario_config import ScenarioConfig
from src.utils.errors import ConfigError, InvalidInputError
from src.utils.logging import setup_logging

REFERENCE_DISTANCE_M = 1.0


def pathloss_gain(distance: float, exponent: float) -> float:
    """Distance-power law gain, clamped to 1 below the 1 m reference distance

    Raises:
        InvalidInputError: distance 或 exponent 不為正
    """
    if not distance > 0:
        raise InvalidInputError(f"距離必須為正，收到 {distance}")
    if not exponent > 0:
        raise InvalidInputError(f"路徑損耗指數必須為正，收到 {exponent}")
    return (REFERENCE_DISTANCE_M / max(distance, REFERENCE_DISTANCE_M)) ** exponent


def generate_cir(
    profile: PdpProfile,
    pathloss: float,
    rng: np.random.Generator,
    num_taps: Optional[int] = None,
    mapping: TapMapping = TapMapping.ORDINAL,
    sample_period_ns: float = 50.0
) -> Cir:
    """Draw one Rayleigh tapped-delay-line CIR

    第 l 個 tap 是 CN(0, pathloss·P_l)，P_l 為 profile 對應到該 tap 的線性功率。
    """
    if not pathloss > 0:
        raise InvalidInputError(f"pathloss 必須為正，收到 {pathloss}")
    num_taps = profile.num_paths if num_taps is None else num_taps
    variances = pathloss * profile.bin_powers(num_taps, mapping, sample_period_ns)
    samples = rng.standard_normal(num_taps) + 1j * rng.standard_normal(num_taps)
    return Cir(np.sqrt(variances / 2.0) * samples)


def _uniform_disk(rng: np.random.Generator, center: np.ndarray, radius: float, count: int) -> np.ndarray:
    radii = radius * np.sqrt(rng.uniform(size=count))
    angles = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return center + np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])


def _uniform_circle(rng: np.random.Generator, center: np.ndarray, radius: float, count: int) -> np.ndarray:
    angles = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return center + radius * np.column_stack([np.cos(angles), np.sin(angles)])


class ChannelGenerator:
    """Draws user drops and the full set of CIRs for one scenario"""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.logger = setup_logging(__name__)

        profiles = config.profiles()
        self.profiles: Dict[str, PdpProfile] = {}
        for key, name in (('macro', config.macro_profile),
                          ('femto', config.femto_profile),
                          ('cross', config.cross_profile)):
            profile = profiles[name]
            if config.tap_mapping == TapMapping.ORDINAL and profile.num_paths != config.num_taps:
                raise ConfigError(
                    f"{key} profile '{name}' 有 {profile.num_paths} 個路徑，但 L = {config.num_taps}"
                )
            self.profiles[key] = profile

    def drop_users(self, rng: np.random.Generator) -> Geometry:
        """Place the FBS on the 100 m circle and users uniformly on their disks"""
        config = self.config
        mbs = np.zeros(2)
        fbs = _uniform_circle(rng, mbs, config.fbs_distance_m, 1)[0]
        mus = _uniform_disk(rng, mbs, config.macro_radius_m, config.macro_users)
        if config.fu_fixed_distance_m is not None:
            fus = _uniform_circle(rng, fbs, config.fu_fixed_distance_m, config.femto_users)
        else:
            fus = _uniform_disk(rng, fbs, config.femto_radius_m, config.femto_users)
        return Geometry(mbs_position=mbs, fbs_position=fbs, mu_positions=mus, fu_positions=fus)

    def _draw_link(
        self,
        profile: PdpProfile,
        distances: np.ndarray,
        exponent: float,
        num_antennas: int,
        rng: np.random.Generator
    ) -> np.ndarray:
        config = self.config
        taps = np.zeros((num_antennas, len(distances), config.num_taps), dtype=complex)
        for j, distance in enumerate(distances):
            gain = pathloss_gain(distance, exponent)
            for i in range(num_antennas):
                taps[i, j] = generate_cir(
                    profile, gain, rng,
                    num_taps=config.num_taps,
                    mapping=config.tap_mapping,
                    sample_period_ns=config.sample_period_ns
                ).taps
        return taps

    def build_channel_set(self, geometry: Geometry, rng: np.random.Generator) -> ChannelSet:
        """All four link families of one drop, drawn in a fixed order"""
        config = self.config
        links = {
            (Tier.MACRO, Tier.MACRO): self._draw_link(
                self.profiles['macro'], geometry.mu_to_mbs(), config.outdoor_exponent,
                config.macro_antennas, rng),
            (Tier.FEMTO, Tier.FEMTO): self._draw_link(
                self.profiles['femto'], geometry.fu_to_fbs(), config.indoor_exponent,
                config.femto_antennas, rng),
            (Tier.MACRO, Tier.FEMTO): self._draw_link(
                self.profiles['cross'], geometry.fu_to_mbs(), config.cross_exponent,
                config.macro_antennas, rng),
            (Tier.FEMTO, Tier.MACRO): self._draw_link(
                self.profiles['cross'], geometry.mu_to_fbs(), config.cross_exponent,
                config.femto_antennas, rng),
        }
        channel_set = ChannelSet({(int(k), int(r)): array for (k, r), array in links.items()})
        self.logger.debug(f"產生 {channel_set.num_cirs()} 條 CIR")
        return channel_set

    def generate(self, rng: np.random.Generator) -> ChannelSet:
        """drop_users + build_channel_set"""
        return self.build_channel_set(self.drop_users(rng), rng)


def drop_users(config: ScenarioConfig, rng: np.random.Generator) -> Geometry:
    return ChannelGenerator(config).drop_users(rng)


def build_channel_set(geometry: Geometry, config: ScenarioConfig, rng: np.random.Generator) -> ChannelSet:
    return ChannelGenerator(config).build_channel_set(geometry, rng)
