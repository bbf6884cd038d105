import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundcond.cutset import (
    Cutset,
    enumerate_instances,
    find_loop_cutset,
    instance_at,
    instance_count,
    split_network,
    verify_cutset,
)
from boundcond.errors import CutsetError
from boundcond.network import Evidence, generate_random, validate
from boundcond.oracle import all_posteriors
from boundcond.polytree import Polytree
from conftest import load


def cut_is_forest(net, members) -> bool:
    """Independent check: drop each member's outgoing arcs and ask networkx for a forest."""
    g = nx.MultiGraph()
    g.add_nodes_from(net.names)
    g.add_edges_from((p, c) for p, c in net.edges() if p not in members)
    return nx.is_forest(g)


def test_diamond(diamond):
    cs = find_loop_cutset(diamond)
    assert cs.members == ("A",) and instance_count(cs) == 2


def test_polytree_has_empty_cutset():
    cs = find_loop_cutset(load("chain.json"))
    assert cs.members == () and instance_count(cs) == 1


def test_icu_like_regression(icu_like):
    cs = find_loop_cutset(icu_like)
    assert cs.members == ("X00", "X01", "X03", "X05", "X17")
    assert cs.cardinalities == (3, 2, 3, 3, 2)
    assert instance_count(cs) == 108


def test_small_fixture_has_108_instances():
    assert instance_count(find_loop_cutset(load("small_108.json"))) == 108


@settings(max_examples=60, deadline=None)
@given(nodes=st.integers(3, 25), loops=st.integers(0, 6), seed=st.integers(0, 10_000), rev=st.booleans())
def test_heuristic_cutsets_cut_every_loop(nodes, loops, seed, rev):
    try:
        net = generate_random(nodes, 3, 2, loops, seed)
    except ValueError:
        return
    cs = find_loop_cutset(net, reverse_ties=rev)
    assert verify_cutset(net, cs)
    assert cut_is_forest(net, set(cs.members))
    assert not cut_is_forest(net, set()) or loops == 0


def test_verify_rejects_short_cutset(diamond):
    assert not verify_cutset(diamond, Cutset.of(diamond, []))
    assert verify_cutset(diamond, Cutset.of(diamond, ["B"]))


def test_unknown_member(diamond):
    with pytest.raises((KeyError, CutsetError)):
        Cutset.of(diamond, ["Q"])


def test_instance_enumeration_order(icu_like):
    cs = find_loop_cutset(icu_like)
    insts = list(enumerate_instances(cs))
    assert len(insts) == 108
    assert insts[0].assignment == (0, 0, 0, 0, 0)
    assert insts[1].assignment == (0, 0, 0, 0, 1)  # last member varies fastest
    assert all(instance_at(cs, i) == inst for i, inst in enumerate(insts))


def test_split_network_is_polytree_and_consistent(diamond):
    cs = find_loop_cutset(diamond)
    for inst in enumerate_instances(cs):
        sub = split_network(diamond, cs, inst)
        assert validate(sub.network) == []
        beliefs, mass = Polytree(sub.network).propagate(sub.clamp.assignments)
        post, p = all_posteriors(diamond, inst.evidence(cs))
        assert mass == pytest.approx(p, abs=1e-15)
        for n in diamond.names:
            assert beliefs[diamond.layout[n]] == pytest.approx(post[n], abs=1e-14)


def test_instance_evidence(diamond):
    cs = find_loop_cutset(diamond)
    assert instance_at(cs, 1).evidence(cs) == Evidence({"A": 1})
