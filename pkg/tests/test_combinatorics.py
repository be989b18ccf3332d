import itertools
import json

import numpy as np
import pytest

from rauzy_lab.combinatorics import (CombinatorialPair, InvalidPair, NoPath, RauzyPath, find_path,
                                     genus, k_bounded_check, omega_matrix, rauzy_class, rauzy_move,
                                     replay, validate_pair)


def test_validate_pair_examples(golden_pair, d3_pair):
    assert validate_pair(golden_pair)
    assert validate_pair(d3_pair)
    reducible = CombinatorialPair(("A", "B", "C"), (1, 2, 3), (1, 3, 2))
    v = validate_pair(reducible)
    assert not v and v.reducible_at == 1
    assert not validate_pair(CombinatorialPair(("A", "B"), (1, 1), (2, 1)))


def test_omega_matrices(golden_pair, d3_pair):
    assert omega_matrix(golden_pair) == [[0, 1], [-1, 0]]
    assert omega_matrix(d3_pair) == [[0, 1, 1], [-1, 0, 1], [-1, -1, 0]]


def test_genus(golden_pair, d3_pair):
    assert genus(golden_pair) == 1
    assert genus(d3_pair) == 1
    assert genus(CombinatorialPair.from_monodromy((4, 3, 2, 1))) == 2


def test_d2_moves_are_self_loops(golden_pair):
    assert rauzy_move(golden_pair, 0) == golden_pair
    assert rauzy_move(golden_pair, 1) == golden_pair
    rc = rauzy_class(golden_pair)
    assert len(rc) == 1
    assert all(src == dst for src, _, dst in rc.edges)


def test_d3_move_and_class(d3_pair):
    moved = rauzy_move(d3_pair, 0)
    assert moved.monodromy() == (3, 1, 2)
    assert moved.pi0 == d3_pair.pi0  # type 0 only reorders the bottom row
    assert len(rauzy_class(d3_pair)) == 3


def test_monodromy_round_trip():
    for p in itertools.permutations(range(1, 5)):
        assert CombinatorialPair.from_monodromy(p).monodromy() == p


def test_find_path_replays(d3_pair):
    verts = rauzy_class(d3_pair).vertices
    for a, b in itertools.product(verts, verts):
        types = find_path(a, b)
        assert len(types) <= 2 * len(verts)
        assert replay(a, types) == b


def test_find_path_across_classes(d3_pair):
    other = CombinatorialPair.from_monodromy((4, 3, 2, 1))
    with pytest.raises((NoPath, InvalidPair, ValueError)):
        find_path(d3_pair, other)


def test_omega_antisymmetric_on_random_classes():
    for p in [(4, 3, 2, 1), (4, 1, 3, 2), (2, 4, 1, 3)]:
        pair = CombinatorialPair.from_monodromy(p)
        if not validate_pair(pair):
            continue
        for q in rauzy_class(pair).vertices:
            om = np.array(omega_matrix(q))
            assert np.array_equal(om, -om.T)


def test_k_bounded_golden_and_constant(golden_pair):
    golden = RauzyPath.from_types(golden_pair, [i % 2 for i in range(12)])
    assert k_bounded_check(golden, 2).verdict is True
    const = RauzyPath.from_types(golden_pair, [0] * 12)
    verdict = k_bounded_check(const, 3)
    assert verdict.verdict is False
    # B wins every step: A never wins and B never loses
    _, beta, gamma = verdict.witness
    assert beta == "A" or gamma == "B"


def test_k_bounded_short_prefix_undetermined(golden_pair):
    assert k_bounded_check(RauzyPath.from_types(golden_pair, [0]), 1).verdict is None


def test_pair_json_round_trip(d3_pair):
    text = json.dumps(d3_pair.to_json())
    assert CombinatorialPair.from_json(json.loads(text)) == d3_pair
