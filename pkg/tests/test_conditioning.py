import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundcond.conditioning import (
    InstanceSolver,
    InstanceWeightTable,
    condition,
    exact_update,
    init_instance_weights,
    prior_marginal,
    solve_all,
)
from boundcond.cutset import Cutset, find_loop_cutset
from boundcond.errors import CutsetError, ImpossibleEvidence
from boundcond.network import Evidence
from boundcond.oracle import all_posteriors
from conftest import load, random_evidence
from helpers import sweep_cases


def test_diamond_weights_are_root_prior(diamond):
    cs = find_loop_cutset(diamond)
    w = init_instance_weights(diamond, cs)
    assert w.weights == pytest.approx([0.3, 0.7], abs=1e-15)


def test_prior_marginal(diamond):
    cs = find_loop_cutset(diamond)
    solver = InstanceSolver(diamond, cs)
    sols = solve_all(solver, Evidence())
    w = InstanceWeightTable(np.array([s.mass for s in sols]))
    assert prior_marginal(sols, w, diamond, "B") == pytest.approx([.3 * .8 + .7 * .1, .3 * .2 + .7 * .9])


def test_exact_update_by_hand():
    w, p_e = exact_update(InstanceWeightTable(np.array([0.25, 0.75])), [0.8, 0.4])
    assert p_e == pytest.approx(0.5)
    assert w.weights == pytest.approx([0.4, 0.6])


def test_exact_update_impossible():
    with pytest.raises(ImpossibleEvidence):
        exact_update(InstanceWeightTable(np.array([0.5, 0.5])), [0.0, 0.0])


def test_solver_rejects_non_cutset(diamond):
    with pytest.raises(CutsetError):
        InstanceSolver(diamond, Cutset.of(diamond, []))


def test_clamp_conflict_gives_zero_mass(diamond):
    solver = InstanceSolver(diamond, find_loop_cutset(diamond))
    sol = solver.solve(0, Evidence({"A": 1}))
    assert sol.mass == 0.0 and sol.beliefs is None


def test_icu_like_consistent_under_two_cutsets(icu_like):
    stream = [Evidence({"X05": 0}), Evidence({"X36": 2})]
    a = condition(icu_like, find_loop_cutset(icu_like), stream)
    b = condition(icu_like, find_loop_cutset(icu_like, reverse_ties=True), stream)
    assert a.evidence_probability == pytest.approx(b.evidence_probability, rel=1e-12)
    for n in icu_like.names:
        assert np.allclose(a.posterior(icu_like, n), b.posterior(icu_like, n), atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 400))
def test_sequential_conditioning_matches_oracle(seed):
    case = sweep_cases(1, seed)[0]
    net = case.net
    result = condition(net, find_loop_cutset(net), case.stream)
    merged = Evidence()
    for ev in case.stream:
        merged = merged.merge(ev)
    post, p_e = all_posteriors(net, merged)
    assert result.evidence_probability == pytest.approx(p_e, rel=1e-10)
    assert result.weights.weights.sum() == pytest.approx(1.0)
    for n in net.names:
        assert np.allclose(result.posterior(net, n), post[n], atol=1e-10)


def test_impossible_sequence():
    net = load("chain.json")
    # chain is a polytree; one trivial instance; A=t then B=f is impossible
    with pytest.raises(ImpossibleEvidence):
        condition(net, find_loop_cutset(net), [Evidence({"A": 0}), Evidence({"B": 1})])


def test_random_evidence_helper_is_possible(icu_like):
    rng = np.random.default_rng(0)
    evs = random_evidence(icu_like, rng, 4)
    result = condition(icu_like, find_loop_cutset(icu_like), evs)
    assert result.evidence_probability > 0
