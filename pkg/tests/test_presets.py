import numpy as np
import pytest
from numpy.testing import assert_allclose

from rauzy_lab.combinatorics import genus
from rauzy_lab.induction import renormalize
from rauzy_lab.maps import PowerKinkProfile
from rauzy_lab.presets import (D3_LADDER_WORDS, d3_fibonacci_types, fibonacci_word, golden_types,
                               moebius_kink_map, moebius_pair_map, partner_map, random_genus_one_map,
                               split_break, zero_mean_profiles)


@pytest.mark.parametrize("build", [moebius_kink_map, moebius_pair_map, partner_map])
def test_frozen_maps_follow_the_golden_path(build):
    f = build()
    assert renormalize(f, 24)[-1].path.types == golden_types(24)


@pytest.mark.parametrize("build", [moebius_kink_map, partner_map])
def test_zero_mean_maps(build):
    f = build()
    total = sum(float(br.nonlinearity(*br.domain)) for br in f.branches.values())
    assert abs(total) < 1e-12


def test_zero_mean_profile_cancels_the_moebius_term():
    moeb, kink = zero_mean_profiles(1.2, 0.5, 0.6)
    assert isinstance(kink, PowerKinkProfile)
    assert_allclose(kink.total_nonlinearity(), -moeb.total_nonlinearity(), rtol=1e-12)


def test_partner_breaks_match():
    assert_allclose(split_break(partner_map()), split_break(moebius_kink_map()), atol=1e-14)


def test_fibonacci_word_and_d3_path():
    assert fibonacci_word(8) == "abaababa"
    types, bounds = d3_fibonacci_types(5)
    assert len(types) == 15 and bounds == [0, 3, 6, 9, 12, 15]
    assert list(D3_LADDER_WORDS) == [5, 13, 34, 89]


def test_random_maps_have_genus_one():
    rng = np.random.default_rng(0)
    for _ in range(10):
        f = random_genus_one_map(rng)
        assert genus(f.pair) == 1
        assert_allclose(sum(f.lengths), 1.0)
