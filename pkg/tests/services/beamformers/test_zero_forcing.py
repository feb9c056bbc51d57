import numpy as np
import numpy.testing as npt
import pytest

from src.models.beamformer_model import Beamformer, BeamformerKind
from src.services.beamformers.beamformer_design import composite_channel, composite_table
from src.services.beamformers.zero_forcing import (
    ZeroForcing,
    build_zf_system,
    gamma_metric,
    select_taps,
    zf_beamformer,
)
from src.services.channel_generator import ChannelGenerator
from src.models.channel_model import Tier
from src.utils.errors import InvalidInputError, RankDeficiencyError
from src.utils.helpers import drop_rng
from tests.channel_helpers import complex_gaussian


def test_system_matches_convolution(rng):
    cirs = complex_gaussian(rng, 4, 2, 6)
    system = build_zf_system(cirs)
    assert system.matrix.shape == (22, 24)

    weights = complex_gaussian(rng, 4, 6)
    weights /= np.linalg.norm(weights)
    beamformer = Beamformer(user_index=0, weights=weights, kind=BeamformerKind.ZF, sampled_tap=1)
    stacked = system.matrix @ system.pack(weights)
    for n in range(2):
        npt.assert_allclose(system.block(n) @ system.pack(weights), composite_channel(beamformer, cirs[:, n, :]).taps)
        npt.assert_allclose(stacked[n * 11:(n + 1) * 11], composite_channel(beamformer, cirs[:, n, :]).taps)


def test_pack_unpack_inverse(rng):
    system = build_zf_system(complex_gaussian(rng, 3, 1, 4))
    weights = complex_gaussian(rng, 3, 4)
    npt.assert_array_equal(system.unpack(system.pack(weights)), weights)


def _assert_nulling(cirs, beamformers, alphas):
    table = composite_table(beamformers, cirs)
    for n, alpha in enumerate(alphas):
        desired = abs(table[n, n, alpha - 1])
        residual = np.sum(np.abs(np.delete(table[n, n], alpha - 1)) ** 2)
        residual += sum(np.sum(np.abs(table[u, n]) ** 2) for u in range(len(beamformers)) if u != n)
        assert np.sqrt(residual) <= 1e-9 * desired


def test_nulling_for_every_candidate_tap(rng):
    for _ in range(20):
        cirs = complex_gaussian(rng, 4, 2, 6)
        system = build_zf_system(cirs)
        for alpha in range(1, 12):
            beamformers = [zf_beamformer(system, n, alpha) for n in range(2)]
            _assert_nulling(cirs, beamformers, [alpha, alpha])


@pytest.mark.slow
def test_nulling_on_generated_drops(table_config):
    generator = ChannelGenerator(table_config)
    rank_deficient = 0
    for index in range(1000):
        cirs = generator.generate(drop_rng(table_config.seed, index)).link(Tier.MACRO, Tier.MACRO)
        system = build_zf_system(cirs)
        if not system.full_row_rank:
            rank_deficient += 1
            continue
        for alpha in range(1, 12):
            _assert_nulling(cirs, [zf_beamformer(system, n, alpha) for n in range(2)], [alpha, alpha])
    assert rank_deficient == 0


def test_rank_deficiency_raised(rng):
    # M·L = 2·6 = 12 < N(2L−1) = 22
    system = build_zf_system(complex_gaussian(rng, 2, 2, 6))
    assert not system.full_row_rank
    with pytest.raises(RankDeficiencyError) as error:
        zf_beamformer(system, 0, 1)
    assert error.value.rows == 22
    assert error.value.rank <= 12


def test_selector_bounds(rng):
    system = build_zf_system(complex_gaussian(rng, 4, 2, 6))
    with pytest.raises(InvalidInputError):
        system.selector(0, 12)
    with pytest.raises(InvalidInputError):
        system.selector(2, 1)


def test_gamma_metric_by_hand(rng):
    cirs = complex_gaussian(rng, 4, 2, 6)
    system = build_zf_system(cirs)
    beamformers = [zf_beamformer(system, n, 4) for n in range(2)]
    desired = composite_channel(beamformers[0], cirs[:, 0, :]).power_at(4)
    # 完美 ZF 下分母只剩雜訊
    npt.assert_allclose(gamma_metric(beamformers, cirs, 0, 4, noise=1.0), desired / 1.0, rtol=1e-9)
    npt.assert_allclose(gamma_metric(beamformers, cirs, 0, 4, noise=2.0), desired / 2.0, rtol=1e-9)


def test_select_taps_picks_argmax(rng):
    cirs = complex_gaussian(rng, 4, 2, 6)
    selection, beamformers = select_taps(cirs)
    assert selection.gamma_table.shape == (2, 11)
    for n, alpha in enumerate(selection.alphas):
        assert selection.gamma_table[n, alpha - 1] == selection.gamma_table[n].max()
        assert beamformers[n].sampled_tap == alpha
        assert beamformers[n].user_index == n


def test_selection_invariant_to_channel_scaling(rng):
    for _ in range(10):
        cirs = complex_gaussian(rng, 4, 2, 6)
        assert select_taps(cirs)[0].alphas == select_taps(7.5 * cirs, noise=7.5 ** 2)[0].alphas


def test_single_candidate_tap():
    # 單天線、單 tap：唯一的候選 α = 1，Γ = |h|²/noise
    selection, beamformers = select_taps(np.full((1, 1, 1), 2.0))
    assert selection.alphas == [1]
    npt.assert_allclose(selection.gamma_table, [[4.0]])
    npt.assert_allclose(np.abs(beamformers[0].weights), [[1.0]])


def test_zero_forcing_design(rng):
    design = ZeroForcing()
    beamformers = design.design(complex_gaussian(rng, 4, 2, 6))
    assert design.get_name() == "ZF"
    assert [b.kind for b in beamformers] == [BeamformerKind.ZF, BeamformerKind.ZF]
