"""Exact inference by the method of conditioning over a loop cutset."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .cutset import Cutset, instance_at, instance_count, split_network, verify_cutset
from .errors import CutsetError, ImpossibleEvidence
from .network import BeliefNetwork, Evidence
from .polytree import Polytree


@dataclass(frozen=True)
class InstanceSolution:
    """Result of solving one instance subproblem against some evidence.

    ``mass`` is p(c_1..c_m, evidence); ``beliefs`` is the flat vector of
    p(x | evidence, c_1..c_m), or None when ``mass`` is zero.
    """

    index: int
    mass: float
    beliefs: np.ndarray | None


class InstanceSolver:
    """Solves instance subproblems, caching each instance's compiled polytree."""

    def __init__(self, net: BeliefNetwork, cs: Cutset):
        if not verify_cutset(net, cs):
            raise CutsetError(f"{list(cs.members)} does not cut every loop")
        self.net = net
        self.cutset = cs
        self.count = instance_count(cs)
        self._trees: dict[int, tuple[Polytree, Evidence]] = {}
        self.solves = 0

    def _tree(self, index: int) -> tuple[Polytree, Evidence]:
        if index not in self._trees:
            sub = split_network(self.net, self.cutset, instance_at(self.cutset, index), check=False)
            self._trees[index] = (Polytree(sub.network), sub.clamp)
        return self._trees[index]

    def solve(self, index: int, evidence: Evidence) -> InstanceSolution:
        tree, clamp = self._tree(index)
        self.solves += 1
        if clamp.conflicts_with(evidence):
            return InstanceSolution(index, 0.0, None)
        beliefs, mass = tree.propagate(clamp.merge(evidence).assignments)
        return InstanceSolution(index, mass, beliefs)


@dataclass(frozen=True)
class InstanceWeightTable:
    weights: np.ndarray

    def __len__(self):
        return len(self.weights)


def solve_all(solver: InstanceSolver, evidence: Evidence) -> list[InstanceSolution]:
    return [solver.solve(i, evidence) for i in range(solver.count)]


def init_instance_weights(net: BeliefNetwork, cs: Cutset, solver: InstanceSolver | None = None) -> InstanceWeightTable:
    """w_i = p(c_1..c_m), read off each clamped subproblem's evidence probability."""
    solver = solver or InstanceSolver(net, cs)
    return InstanceWeightTable(np.array([s.mass for s in solve_all(solver, Evidence())]))


def _combine(solutions: Sequence[InstanceSolution], weights: InstanceWeightTable, net: BeliefNetwork, variable: str):
    if len(solutions) != len(weights):
        raise ValueError(f"{len(weights)} weights but {len(solutions)} solved instances")
    span = net.layout[variable]
    out = np.zeros(span.stop - span.start)
    for sol, w in zip(solutions, weights.weights):
        if sol is None:
            raise ValueError("unsolved instance present")
        if w > 0:
            out += w * sol.beliefs[span]
    return out


def prior_marginal(solutions: Sequence[InstanceSolution], weights: InstanceWeightTable, net: BeliefNetwork, variable: str) -> np.ndarray:
    """p(x) = sum_i p(x | instance i) w_i."""
    return _combine(solutions, weights, net, variable)


def exact_update(weights: InstanceWeightTable, likelihoods: Iterable[float]) -> tuple[InstanceWeightTable, float]:
    """Multiply each weight by p(e | instance i) and renormalise; returns (new weights, p(e))."""
    lik = np.asarray(list(likelihoods), dtype=float)
    if lik.shape != weights.weights.shape:
        raise ValueError("one likelihood per instance required")
    joint = lik * weights.weights
    p_e = float(joint.sum())
    if p_e == 0.0:
        raise ImpossibleEvidence("evidence has probability zero under every instance")
    return InstanceWeightTable(joint / p_e), p_e


def exact_posterior(solutions: Sequence[InstanceSolution], weights: InstanceWeightTable, net: BeliefNetwork, variable: str) -> np.ndarray:
    """p(x | e) = sum_i p(x | e, instance i) w_i*."""
    return _combine(solutions, weights, net, variable)


@dataclass
class ConditioningResult:
    weights: InstanceWeightTable
    solutions: list[InstanceSolution]
    evidence_probability: float

    def posterior(self, net: BeliefNetwork, variable: str) -> np.ndarray:
        return exact_posterior(self.solutions, self.weights, net, variable)


def condition(net: BeliefNetwork, cs: Cutset, observations: Iterable[Evidence] = (), solver: InstanceSolver | None = None) -> ConditioningResult:
    """Run exact conditioning over a sequence of observations.

    Each observation rescales the weights by its likelihood under every
    instance, as p(c, E_new) / p(c, E_old) from the clamped subproblems.
    """
    solver = solver or InstanceSolver(net, cs)
    evidence = Evidence()
    solutions = solve_all(solver, evidence)
    weights = InstanceWeightTable(np.array([s.mass for s in solutions]))
    p_total = 1.0
    for ev in observations:
        evidence = evidence.merge(ev)
        new = solve_all(solver, evidence)
        lik = [n.mass / o.mass if o.mass > 0 else 0.0 for n, o in zip(new, solutions)]
        weights, p_e = exact_update(weights, lik)
        p_total *= p_e
        solutions = new
    return ConditioningResult(weights, solutions, p_total)

