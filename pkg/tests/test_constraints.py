"""Constraint networks: construction, closure, merging, generalization."""
import random

import pytest

from rulewalk import allen
from rulewalk.allen import FULL_SET, Relation, rel_set
from rulewalk.constraints import (
    IANetwork,
    KeyMismatchError,
    from_observed,
    generalize,
    merge_paths,
    resolve_time,
)
from rulewalk.hypergraph import Interval

from oracles import realizable

R = Relation


def test_from_observed_singletons():
    net = from_observed([("a", Interval(1, 2)), ("b", Interval(3, 4))])
    ia, ib = net.index_of("a"), net.index_of("b")
    assert net.cells[ia][ib] == rel_set(R.BEFORE)
    assert net.cells[ib][ia] == rel_set(R.AFTER)
    assert net.cells[ia][ia] == rel_set(R.EQUAL)


def test_from_observed_single_node():
    net = from_observed([("a", Interval(2, 2))])
    assert net.n == 1
    assert net.cells[0][0] == rel_set(R.EQUAL)


def test_from_observed_equal_intervals():
    net = from_observed([("a", Interval(1, 3)), ("b", Interval(1, 3))])
    assert net.cells[0][1] == rel_set(R.EQUAL)


def test_resolve_time_composes_chain():
    net = IANetwork(["a", "b", "c"])
    net.set_pair(0, 1, rel_set(R.BEFORE))
    net.set_pair(1, 2, rel_set(R.BEFORE))
    consistent, refined = resolve_time(net)
    assert consistent
    assert refined.cells[0][2] == rel_set(R.BEFORE)
    # input untouched
    assert net.cells[0][2] == FULL_SET


def test_resolve_time_detects_cycle_contradiction():
    net = IANetwork(["a", "b", "c"])
    net.set_pair(0, 1, rel_set(R.BEFORE))
    net.set_pair(1, 2, rel_set(R.BEFORE))
    net.set_pair(0, 2, rel_set(R.AFTER))
    consistent, _ = resolve_time(net)
    assert not consistent


def test_resolve_time_observed_fixpoint():
    net = from_observed(
        [("a", Interval(0, 4)), ("b", Interval(2, 6)), ("c", Interval(2, 2))]
    )
    consistent, refined = resolve_time(net)
    assert consistent
    assert refined.cells == net.cells


def test_resolve_time_monotone_and_idempotent():
    rng = random.Random(7)
    base_relations = list(Relation)
    for _ in range(50):
        n = rng.randint(2, 4)
        net = IANetwork(list(range(n)))
        for i in range(n):
            for j in range(i + 1, n):
                chosen = rng.sample(base_relations, rng.randint(1, 4))
                net.set_pair(i, j, rel_set(*chosen))
        consistent, refined = resolve_time(net)
        for i in range(n):
            for j in range(n):
                assert refined.cells[i][j] & ~net.cells[i][j] == 0  # shrink only
        if consistent:
            again_ok, again = resolve_time(refined)
            assert again_ok
            assert again.cells == refined.cells
            # closure property
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        comp = allen.compose_sets(
                            refined.cells[i][k], refined.cells[k][j]
                        )
                        assert refined.cells[i][j] & ~comp == 0


def test_resolve_time_matches_realization_oracle_on_singletons():
    rng = random.Random(11)
    for _ in range(120):
        n = 4
        net = IANetwork(list(range(n)))
        for i in range(n):
            for j in range(i + 1, n):
                net.set_pair(i, j, 1 << rng.choice(list(Relation)))
        consistent, _ = resolve_time(net)
        assert consistent == realizable(net, max_endpoint=8)


def test_merge_disjoint_paths_keeps_cross_cells_wide():
    net_a = from_observed([(0, Interval(0, 1)), (1, Interval(2, 3))])
    net_b = from_observed([(2, Interval(5, 6))])
    consistent, merged = merge_paths(net_a, net_b)
    assert consistent
    assert merged.n == 3
    i0, i2 = merged.index_of(0), merged.index_of(2)
    assert merged.cells[i0][i2] == FULL_SET


def test_merge_identical_single_node():
    net_a = from_observed([("k", Interval(1, 2))])
    net_b = from_observed([("k", Interval(1, 2))])
    consistent, merged = merge_paths(net_a, net_b, ["k"])
    assert consistent
    assert merged.n == 1
    assert merged.cells[0][0] == rel_set(R.EQUAL)


def test_merge_through_shared_key_composes():
    net_a = IANetwork(["a", "s"])
    net_a.set_pair(0, 1, rel_set(R.BEFORE))
    net_b = IANetwork(["s", "b"])
    net_b.set_pair(0, 1, rel_set(R.BEFORE))
    consistent, merged = merge_paths(net_a, net_b, ["s"])
    assert consistent
    ia, ib = merged.index_of("a"), merged.index_of("b")
    assert merged.cells[ia][ib] == rel_set(R.BEFORE)


def test_merge_shared_key_missing_is_error():
    net_a = IANetwork(["a"])
    net_b = IANetwork(["b"])
    with pytest.raises(KeyMismatchError):
        merge_paths(net_a, net_b, ["a"])


def test_merge_key_type_mismatch_is_error():
    with pytest.raises(KeyMismatchError):
        merge_paths(IANetwork([0]), IANetwork(["zero"]))


def test_merge_inconsistent_inputs_detected():
    net_a = IANetwork(["a", "s"])
    net_a.set_pair(0, 1, rel_set(R.BEFORE))
    net_b = IANetwork(["s", "a"])
    net_b.set_pair(0, 1, rel_set(R.BEFORE))  # i.e. a AFTER s
    consistent, _ = merge_paths(net_a, net_b, ["s", "a"])
    assert not consistent


def test_generalize_unions_cells():
    rule_net = IANetwork([0, 1])
    rule_net.set_pair(0, 1, rel_set(R.BEFORE))
    observed = IANetwork([0, 1])
    observed.set_pair(0, 1, rel_set(R.MEETS))
    widened = generalize(rule_net, observed)
    assert widened.cells[0][1] & rel_set(R.BEFORE, R.MEETS) == rel_set(R.BEFORE, R.MEETS)


def test_generalize_idempotent_on_same_network():
    net = IANetwork([0, 1])
    net.set_pair(0, 1, rel_set(R.BEFORE))
    assert generalize(net, net).cells == net.cells


def test_generalize_closes_under_pc():
    # union that is not closed: widen one leg of a chain
    rule_net = IANetwork([0, 1, 2])
    rule_net.set_pair(0, 1, rel_set(R.BEFORE))
    rule_net.set_pair(1, 2, rel_set(R.BEFORE))
    consistent, rule_net = resolve_time(rule_net)
    assert consistent
    observed = from_observed(
        [(0, Interval(0, 1)), (1, Interval(2, 3)), (2, Interval(4, 5))]
    )
    widened = generalize(rule_net, observed)
    ok, closed = resolve_time(widened)
    assert ok
    assert closed.cells == widened.cells
    # every observed relation survives
    for i in range(3):
        for j in range(3):
            assert widened.cells[i][j] & observed.cells[i][j] == observed.cells[i][j]


def test_generalize_key_mismatch():
    with pytest.raises(KeyMismatchError):
        generalize(IANetwork([0, 1]), IANetwork([1, 0]))


def test_render_mentions_keys_and_relations():
    net = IANetwork(["x", "y"])
    net.set_pair(0, 1, rel_set(R.MEETS))
    assert net.render() == "x {MEETS} y"


def test_generalize_commutative_and_associative_over_observed():
    # unions of realizable singleton networks are already path-consistent,
    # so generalization order cannot matter
    rng = random.Random(23)
    for _ in range(30):
        nets = []
        for _ in range(3):
            intervals = []
            for k in range(3):
                s = rng.randint(0, 8)
                intervals.append((k, Interval(s, s + rng.randint(0, 4))))
            nets.append(from_observed(intervals))
        o0, o1, o2 = nets
        ab = generalize(generalize(o0, o1), o2)
        ba = generalize(generalize(o0, o2), o1)
        assert ab.cells == ba.cells
        left = generalize(generalize(o0, o1), o2)
        right = generalize(o0, generalize(o1, o2))
        assert left.cells == right.cells
