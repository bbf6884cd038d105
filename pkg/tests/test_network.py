import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundcond.errors import ContradictoryEvidence, NetworkError, NetworkSemanticError, NetworkSyntaxError
from boundcond.network import (
    BeliefNetwork,
    ConditionalTable,
    Evidence,
    Observation,
    Variable,
    generate_random,
    is_singly_connected,
    loop_count,
    network_to_dict,
    parse_evidence,
    parse_network,
    serialize_evidence,
    serialize_network,
    validate,
)
from conftest import FIXTURES, load


def test_fixtures_validate():
    for name in ("single.json", "diamond.json", "chain.json", "icu_like_37.json", "small_108.json"):
        assert validate(load(name)) == [], name


def test_cyclic_fixture_reports_cycle():
    data = json.loads((FIXTURES / "cyclic.json").read_text())
    with pytest.raises(NetworkSemanticError) as info:
        parse_network(json.dumps(data))
    assert any("cycle" in p for p in info.value.problems)


def test_bad_row_sum_reported():
    net = BeliefNetwork((Variable("A", ("t", "f")),), (ConditionalTable("A", (), [[0.5, 0.6]]),))
    report = validate(net)
    assert len(report) == 1 and "row sum 1.1" in report[0]


def test_syntax_error_has_position():
    with pytest.raises(NetworkSyntaxError) as info:
        parse_network('{"variables": [')
    assert info.value.line == 1


def test_layout_and_cpt_shape(diamond):
    assert diamond.state_count == 8
    assert diamond.layout["C"] == slice(4, 6)
    assert diamond.cpt("D").shape == (2, 2, 2)
    assert diamond.children("A") == ("B", "C")
    assert diamond.joint_size() == 16


def test_loop_counts(diamond):
    assert loop_count(diamond) == 1
    assert not is_singly_connected(diamond)
    assert is_singly_connected(load("chain.json"))


def test_evidence_merge_and_conflict():
    a = Evidence({"A": 0})
    assert a.merge({"B": 1}).assignments == {"A": 0, "B": 1}
    assert a.merge({"A": 0}) == a
    with pytest.raises(ContradictoryEvidence):
        a.merge({"A": 1})
    assert a.conflicts_with({"A": 1}) and not a.conflicts_with({"B": 0})


def test_evidence_labels_round_trip(diamond):
    ev = Evidence.from_labels(diamond, {"D": "f"})
    assert ev.assignments == {"D": 1}
    assert ev.labels(diamond) == {"D": "f"}


def test_evidence_stream_round_trip(diamond):
    stream = [Observation(Evidence({"D": 0}), 0), Observation(Evidence({"B": 1}), 3)]
    text = serialize_evidence(stream, diamond)
    assert parse_evidence(text, diamond) == stream


def test_evidence_stream_must_be_ordered(diamond):
    good = json.dumps({"observations": [{"at_step": 1, "set": {"D": "t"}}, {"at_step": 3, "set": {"B": "t"}}]})
    assert len(parse_evidence(good, diamond)) == 2
    bad = json.dumps({"observations": [{"at_step": 3, "set": {"D": "t"}}, {"at_step": 1, "set": {"B": "t"}}]})
    with pytest.raises(NetworkError) as info:
        parse_evidence(bad, diamond)
    assert "at_step" in str(info.value)


def test_serialize_round_trip_fixture(icu_like):
    text = serialize_network(icu_like)
    assert serialize_network(parse_network(text)) == text
    assert network_to_dict(parse_network(text)) == network_to_dict(icu_like)


def test_generator_rejects_infeasible():
    with pytest.raises(ValueError):
        generate_random(4, 1, 2, 10, seed=0)


@settings(max_examples=40, deadline=None)
@given(nodes=st.integers(2, 14), loops=st.integers(0, 4), states=st.integers(2, 3), seed=st.integers(0, 10_000))
def test_generator_hits_loop_target(nodes, loops, states, seed):
    try:
        net = generate_random(nodes, 3, states, loops, seed)
    except ValueError:
        return
    assert validate(net) == []
    assert loop_count(net) == loops
    assert len(net.names) == nodes
    assert all(len(net.parents(n)) <= 3 for n in net.names)
    assert generate_random(nodes, 3, states, loops, seed) == net


def test_generator_asymmetry_pins_first_state():
    net = generate_random(8, 2, 2, 1, seed=3, asymmetry=0.9)
    for name in net.names:
        assert np.allclose(net.cpt(name)[..., 0], 0.9)
