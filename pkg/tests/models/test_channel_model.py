import numpy as np
import numpy.testing as npt
import pytest
from pydantic import ValidationError

from src.models.channel_model import BUILTIN_PROFILES, Cir, Geometry, PdpProfile, TapMapping
from src.utils.errors import DegenerateChannelError, InvalidInputError
from tests.channel_helpers import random_channel_set


class TestPdpProfile:
    def test_builtin_profiles_have_six_paths(self):
        for profile in BUILTIN_PROFILES.values():
            assert profile.num_paths == 6

    def test_delays_must_start_at_zero_and_increase(self):
        with pytest.raises(ValidationError):
            PdpProfile(name='bad', delays_ns=[10, 20], powers_db=[0, -3])
        with pytest.raises(ValidationError):
            PdpProfile(name='bad', delays_ns=[0, 20, 20], powers_db=[0, -3, -6])

    def test_lengths_must_match(self):
        with pytest.raises(ValidationError):
            PdpProfile(name='bad', delays_ns=[0, 50], powers_db=[0])

    def test_profile_is_frozen(self):
        with pytest.raises(ValidationError):
            BUILTIN_PROFILES['itu_indoor_a'].name = 'other'

    def test_ordinal_mapping_keeps_every_path(self):
        bins = BUILTIN_PROFILES['itu_vehicular_a'].bin_powers(6, TapMapping.ORDINAL)
        npt.assert_allclose(bins, 10.0 ** (np.array([0, -1, -9, -10, -15, -20]) / 10.0))

    def test_nearest_bin_mapping_truncates(self):
        indoor = BUILTIN_PROFILES['itu_indoor_a'].bin_powers(6, TapMapping.NEAREST_BIN, 50.0)
        # 0, 50, 110, 170 ns → bins 0..3；290 與 310 ns 落在第 6 格之後
        assert np.all(indoor[:4] > 0)
        npt.assert_array_equal(indoor[4:], 0.0)

        vehicular = BUILTIN_PROFILES['itu_vehicular_a'].bin_powers(6, TapMapping.NEAREST_BIN, 50.0)
        npt.assert_allclose(vehicular, [1.0, 0, 0, 0, 0, 0])

    def test_from_records(self):
        profiles = PdpProfile.from_records([
            {'name': 'two', 'delays_ns': [0, 50], 'powers_db': [0, -3]},
        ])
        assert profiles[0].num_paths == 2
        npt.assert_allclose(profiles[0].total_power, 1.0 + 10 ** -0.3)


class TestCir:
    def test_energy(self):
        cir = Cir(np.array([1.0, 1j, -2.0]))
        assert cir.length == 3
        npt.assert_allclose(cir.energy, 6.0)

    def test_all_zero_is_degenerate(self):
        with pytest.raises(DegenerateChannelError):
            Cir(np.zeros(6))

    def test_rejects_non_finite_and_empty(self):
        with pytest.raises(InvalidInputError):
            Cir(np.array([1.0, np.nan]))
        with pytest.raises(InvalidInputError):
            Cir(np.array([]))


def test_geometry_distances():
    geometry = Geometry(
        mbs_position=np.zeros(2),
        fbs_position=np.array([100.0, 0.0]),
        mu_positions=np.array([[30.0, 40.0]]),
        fu_positions=np.array([[100.0, 7.0]]),
    )
    npt.assert_allclose(geometry.mu_to_mbs(), [50.0])
    npt.assert_allclose(geometry.fu_to_fbs(), [7.0])
    npt.assert_allclose(geometry.fu_to_mbs(), [np.hypot(100.0, 7.0)])
    npt.assert_allclose(geometry.mu_to_fbs(), [np.hypot(70.0, 40.0)])


def test_channel_set_shapes(rng):
    channel_set = random_channel_set(rng, m0=4, m1=3, n0=2, n1=1, taps=5)
    assert channel_set.num_taps == 5
    assert channel_set.num_users(1) == 1
    # 4·2 + 3·1 + 4·1 + 3·2
    assert channel_set.num_cirs() == 21
    assert channel_set.link(1, 0).shape == (3, 2, 5)
    npt.assert_allclose(channel_set.scaled(2.0).link(0, 0), 2.0 * channel_set.link(0, 0))
