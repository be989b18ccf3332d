import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import PHI
from rauzy_lab.cocycle import CocyclePath
from rauzy_lab.induction import (ConnectionDetected, DomainError, Word, brute_force_first_return,
                                 dynamical_partition, eval_return_map, initial_state,
                                 return_map_jet, return_map_log_derivative, renormalize, rv_type)
from rauzy_lab.maps import make_standard_iem
from rauzy_lab.presets import golden_standard, golden_types, moebius_pair_map


@pytest.fixture(scope="module")
def golden_states():
    return renormalize(golden_standard(), 12)


@pytest.fixture(scope="module")
def moebius_states():
    f = moebius_pair_map()
    return f, renormalize(f, 10)


def test_rv_type_examples(golden_pair):
    # top interval longer than the image of the bottom letter: type 0
    s = initial_state(make_standard_iem(golden_pair, [0.3, 0.7]))
    assert rv_type(s, None) == (0, "B", "A")
    s = initial_state(make_standard_iem(golden_pair, [0.7, 0.3]))
    assert rv_type(s, None) == (1, "A", "B")


def test_golden_types_alternate(golden_states):
    assert golden_states[-1].path.types == golden_types(12)


def test_golden_return_times_are_fibonacci(golden_states):
    fib = [1, 1]
    while len(fib) < 16:
        fib.append(fib[-1] + fib[-2])
    # level n carries the consecutive pair (F_n, F_{n+1}), larger entry alternating sides
    for s in golden_states:
        assert sorted(s.q) == [fib[s.level], fib[s.level + 1]]
    assert golden_states[3].q == (5, 3)
    assert golden_states[4].q == (5, 8)


def test_first_domain_has_length_phi_minus_one(golden_states):
    assert_allclose(float(golden_states[1].domain_length), PHI - 1, rtol=1e-15)
    for s in golden_states[2:]:
        assert_allclose(float(s.domain_length), PHI ** -s.level, rtol=1e-10)


def test_level_zero_is_the_map_itself(golden_pair):
    f = make_standard_iem(golden_pair, [0.4, 0.6])
    states = renormalize(f, 0)
    assert len(states) == 1
    assert states[0].q == (1, 1)
    assert states[0].lengths == (0.4, 0.6)


def test_equal_lengths_are_a_connection(golden_pair):
    with pytest.raises(ConnectionDetected) as exc:
        renormalize(make_standard_iem(golden_pair, [0.5, 0.5]), 3)
    assert exc.value.level == 0
    assert len(exc.value.states) == 1


def test_rational_rotation_stops_with_partial_states(golden_pair):
    f = make_standard_iem(golden_pair, ["0.375", "0.625"])
    with pytest.raises(ConnectionDetected) as exc:
        renormalize(f, 10)
    assert exc.value.level == 3
    assert [s.level for s in exc.value.states] == [0, 1, 2, 3]


def test_return_times_match_cocycle(golden_states, d3_pair):
    cpath = CocyclePath(golden_states[-1].history)
    for s in golden_states:
        assert list(s.q) == cpath.q_vector(s.level)
    rng = np.random.default_rng(3)
    f = make_standard_iem(d3_pair, rng.dirichlet(np.ones(3)))
    states = renormalize(f, 10)
    cpath = CocyclePath(states[-1].history)
    assert all(list(s.q) == cpath.q_vector(s.level) for s in states)


def test_brute_force_return_time_at_golden_level_three(golden_states):
    s = golden_states[3]
    f = golden_standard()
    a, b = s.interval("A")
    mid = float(a + b) / 2
    y, time = brute_force_first_return(f, (0.0, float(s.domain_length)), mid)
    assert time == s.q[0] == 5
    assert_allclose(y, eval_return_map(s, f, "A", mid), atol=1e-14)


def test_return_map_matches_iteration_on_moebius_map(moebius_states):
    f, states = moebius_states
    rng = np.random.default_rng(0)
    for s in states[1:9]:
        total = float(s.domain_length)
        for letter in s.alphabet:
            a, b = (float(v) for v in s.interval(letter))
            for x in rng.uniform(a, b, 5):
                y, time = brute_force_first_return(f, (0.0, total), x)
                assert time == len(s.word(letter))
                assert abs(eval_return_map(s, f, letter, x) - y) < 1e-10


def test_jet_matches_finite_differences(moebius_states):
    f, states = moebius_states
    s = states[6]
    a, b = (float(v) for v in s.interval("B"))
    x = a + 0.37 * (b - a)
    h = 1e-4 * (b - a)
    v, d1, d2 = return_map_jet(s, f, "B", np.array([x - h, x, x + h]))
    assert_allclose(d1[1], (v[2] - v[0]) / (2 * h), rtol=1e-6)
    assert_allclose(d2[1], (v[2] - 2 * v[1] + v[0]) / h ** 2, rtol=1e-3)
    assert_allclose(return_map_log_derivative(s, f, "B", x), np.log(d1[1]), rtol=1e-12)


def test_jet_rejects_points_outside_the_interval(golden_states):
    s = golden_states[4]
    with pytest.raises(DomainError):
        return_map_jet(s, golden_standard(), "A", 0.99)


def test_partition_counts_and_refinement(golden_states):
    f = golden_standard()
    part = dynamical_partition(golden_states[3], f, previous=golden_states[2])
    assert len(part) == sum(golden_states[3].q) == 8
    assert_allclose(part.total_length, 1.0, atol=1e-14)
    assert len(part.preserved) + len(part.new) == len(part)
    for n in range(1, 9):
        dynamical_partition(golden_states[n], f, previous=golden_states[n - 1])


def test_word_concat_and_reverse():
    w = Word.concat(Word.concat(Word("A"), Word("B")), Word("C"))
    assert len(w) == 3
    assert w.to_list() == ["A", "B", "C"]
    assert list(w.reversed()) == ["C", "B", "A"]


def test_extended_precision_follows_the_golden_path_to_depth_40():
    states = renormalize(golden_standard("dd"), 40, "dd")
    assert states[-1].path.types == golden_types(40)
    assert_allclose(float(states[-1].domain_length), PHI ** -40, rtol=1e-12)
