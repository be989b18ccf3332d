import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import PHI
from rauzy_lab.analysis import (L_vector, bounded_partial_sums, c1_distance, decompose_L,
                                l1_second_derivative_distance, l2_smoothing_sequences, log_slope,
                                m_n_coefficient, moebius_F, pseudo_orbit_residual, affine_model,
                                slope_vector, RenormalizedMap, return_map_distance)
from rauzy_lab.cocycle import (CocyclePath, SubspaceBasis, central_space_limit, stable_subspace_approx,
                               unstable_seed)
from rauzy_lab.induction import initial_state, renormalize
from rauzy_lab.maps import MapError, make_affine_iem
from rauzy_lab.presets import (D3_PAIR, GOLDEN_PAIR, d3_fibonacci_types, golden_standard, golden_types,
                               moebius_pair_map)


@pytest.fixture(scope="module")
def affine_d3():
    rng = np.random.default_rng(5)
    lam = rng.dirichlet(np.ones(3))
    omega = rng.normal(0, 0.1, 3)
    omega -= np.log(np.sum(lam * np.exp(omega)))
    g = make_affine_iem(D3_PAIR, lam, omega)
    states = renormalize(g, 15)
    return g, omega, states, CocyclePath(states[-1].history)


def test_moebius_F_values():
    F = moebius_F(2.0)
    v, d1, _ = F.jet(np.array([0.0, 0.5, 1.0]))
    assert_allclose(v, [0.0, 2 / 3, 1.0])
    assert_allclose(d1[[0, 2]], [2.0, 0.5])
    with pytest.raises(MapError):
        moebius_F(0.0)


def test_m_coefficient_of_a_single_moebius_branch():
    f = moebius_pair_map()
    s = initial_state(f)
    assert_allclose(m_n_coefficient(f, s, "A"), 1.3, rtol=1e-12)
    assert_allclose(m_n_coefficient(f, s, "A", method="quad"), 1.3, rtol=1e-9)


def test_c1_distance_is_small_near_identity():
    assert c1_distance(moebius_F(1 + 1e-6), moebius_F(1.0)) < 1e-5
    assert c1_distance(moebius_F(1.5), moebius_F(1.5)) == 0.0


def test_l1_distance_of_second_derivatives():
    # D F_2 is monotone, so the integral of |D2 F_2| is |DF(1) - DF(0)|
    assert_allclose(l1_second_derivative_distance(moebius_F(1.0), moebius_F(2.0)), 1.5, rtol=1e-8)


def test_affine_L_vectors_follow_the_cocycle(affine_d3):
    g, omega, states, cpath = affine_d3
    for n in (0, 5, 10, 15):
        assert_allclose(L_vector(states[n], g).values, cpath.propagate(omega, n), atol=1e-10)


def test_affine_residuals_vanish(affine_d3):
    g, omega, states, cpath = affine_d3
    for n in range(10):
        _, norm = pseudo_orbit_residual(L_vector(states[n], g), L_vector(states[n + 1], g), cpath.thetas[n])
        assert norm < 1e-9


def test_slope_vector_is_zero_without_central_directions():
    sv = slope_vector(golden_standard(), 5)
    assert sv.accepted
    assert_allclose(sv.values, 0.0)


def test_decomposition_reassembles():
    types, _ = d3_fibonacci_types(89)
    cpath = CocyclePath.from_types(D3_PAIR, types)
    es = stable_subspace_approx(cpath, 20)
    eu = SubspaceBasis(unstable_seed(D3_PAIR), "unstable")
    ec = central_space_limit(cpath, [15, 39, 102, 267]).basis
    L = np.array([0.3, -0.1, 0.25])
    dec = decompose_L(L, es, ec, eu)
    assert_allclose(dec.stable + dec.central + dec.unstable, L, atol=1e-12)
    assert_allclose(np.cross(dec.central, ec.vectors[0]), 0.0, atol=1e-12)
    assert_allclose(decompose_L(2.0 * ec.vectors[0], es, ec, eu).central, 2.0 * ec.vectors[0], atol=1e-12)


def test_zero_slope_model_is_the_golden_rotation():
    model = affine_model(golden_standard(), np.zeros(2), 30)
    assert model.matched == 30
    assert_allclose(model.lengths, [2 - PHI, PHI - 1], atol=1e-8)


def test_return_map_distance_vanishes_for_identical_maps():
    f = golden_standard()
    s = renormalize(f, 6)[-1]
    A = RenormalizedMap(s, f, grid=257)
    assert return_map_distance(A, A) == 0.0
    assert s.path.types == golden_types(6)
    assert A.state.pair == GOLDEN_PAIR


def test_smoothing_sequences_small_example():
    s = l2_smoothing_sequences([1.0, 1.0], 0.5)
    assert_allclose(s.x, [1.5, 1.0])
    assert_allclose(s.z, [1.0, 1.5])
    assert_allclose(s.y, [1.0, 1.0])
    assert s.bound == 8.0 and s.ok
    with pytest.raises(ValueError):
        l2_smoothing_sequences([1.0], 1.0)


def test_trend_helpers():
    n = np.arange(1, 16)
    assert_allclose(log_slope(np.exp(-0.3 * n), n), -0.3)
    assert bounded_partial_sums(0.7 ** n)["ok"]
    assert not bounded_partial_sums(np.ones(15))["ok"]
