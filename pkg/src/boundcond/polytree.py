"""Exact lambda/pi message passing on singly connected networks.

Each connected component is swept twice from a fixed pivot (its first node in
network order): leaves-to-pivot, then pivot-to-leaves.  Messages are left
unnormalised, so they carry joint probability mass and the evidence
probability of a component falls out of the fusion sum at its pivot.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .errors import NetworkError
from .network import BeliefNetwork, Evidence, is_singly_connected


class Polytree:
    """Message schedule and table views for one singly connected network."""

    def __init__(self, net: BeliefNetwork):
        if not is_singly_connected(net):
            raise NetworkError("network is not singly connected")
        self.net = net
        names = net.names
        self.index = {n: i for i, n in enumerate(names)}
        self.cards = [net.cardinality(n) for n in names]
        self.parents = [[self.index[p] for p in net.parents(n)] for n in names]
        self.children = [[self.index[c] for c in net.children(n)] for n in names]
        self.cpts = [net.cpt(n) for n in names]
        self.offsets = [net.layout[n].start for n in names]

        # (pivot, preorder, tree_parent) per component
        self.components: list[tuple[int, list[int], dict[int, int]]] = []
        seen: set[int] = set()
        for root in range(len(names)):
            if root in seen:
                continue
            order, up = [root], {root: -1}
            seen.add(root)
            k = 0
            while k < len(order):
                node = order[k]
                k += 1
                for nb in self.parents[node] + self.children[node]:
                    if nb not in seen:
                        seen.add(nb)
                        up[nb] = node
                        order.append(nb)
            self.components.append((root, order, up))

    # -- local fusion --------------------------------------------------------

    def _pi(self, x, pi_in):
        t = self.cpts[x]
        for k in range(len(self.parents[x]) - 1, -1, -1):
            t = np.tensordot(t, pi_in[(self.parents[x][k], x)], axes=([k], [0]))
        return t

    def _lambda(self, x, lam_in, ev_vec, skip=-1):
        lam = ev_vec[x].copy() if ev_vec[x] is not None else np.ones(self.cards[x])
        for c in self.children[x]:
            if c != skip:
                lam *= lam_in[(c, x)]
        return lam

    def _send(self, x, target, pi_in, lam_in, ev_vec):
        if target in self.children[x]:
            pi_in[(x, target)] = self._pi(x, pi_in) * self._lambda(x, lam_in, ev_vec, skip=target)
            return
        # target is a parent of x
        pos = self.parents[x].index(target)
        t = self.cpts[x] @ self._lambda(x, lam_in, ev_vec)
        for k in range(len(self.parents[x]) - 1, -1, -1):
            if k != pos:
                t = np.tensordot(t, pi_in[(self.parents[x][k], x)], axes=([k], [0]))
        lam_in[(x, target)] = t

    def propagate(self, evidence: Mapping[str, int]) -> tuple[np.ndarray, float]:
        """Flat posterior vector over all variable-states and the evidence probability.

        When the evidence has probability zero the belief vector is ``None``.
        """
        ev_vec: list[np.ndarray | None] = [None] * len(self.cards)
        for name, state in evidence.items():
            x = self.index[name]
            vec = np.zeros(self.cards[x])
            vec[state] = 1.0
            ev_vec[x] = vec

        pi_in: dict[tuple[int, int], np.ndarray] = {}
        lam_in: dict[tuple[int, int], np.ndarray] = {}
        beliefs = np.empty(sum(self.cards))
        prob = 1.0
        for pivot, order, up in self.components:
            for x in reversed(order[1:]):
                self._send(x, up[x], pi_in, lam_in, ev_vec)
            for x in order:
                for nb in self.parents[x] + self.children[x]:
                    if up.get(nb) == x:
                        self._send(x, nb, pi_in, lam_in, ev_vec)
            for x in order:
                unnorm = self._pi(x, pi_in) * self._lambda(x, lam_in, ev_vec)
                total = unnorm.sum()
                if x == pivot:
                    prob *= float(total)
                if total > 0:
                    beliefs[self.offsets[x]:self.offsets[x] + self.cards[x]] = unnorm / total
            if prob == 0.0:
                return None, 0.0
        return beliefs, prob


@dataclass(frozen=True)
class PropagationState:
    """Beliefs given the absorbed evidence in one polytree context.

    ``probability`` is p(all absorbed evidence).  After a zero-probability
    absorption the beliefs are the pre-evidence ones and ``usable`` is False.
    """

    tree: Polytree
    evidence: Evidence
    beliefs: np.ndarray
    probability: float = 1.0
    usable: bool = True

    @property
    def net(self) -> BeliefNetwork:
        return self.tree.net


def init_polytree(net: BeliefNetwork) -> PropagationState:
    tree = Polytree(net)
    beliefs, prob = tree.propagate({})
    return PropagationState(tree, Evidence(), beliefs, prob)


def absorb_evidence(net: BeliefNetwork, state: PropagationState, ev: Evidence) -> tuple[PropagationState, float]:
    """Absorb ``ev`` on top of the state's evidence.

    Returns the new state and p(ev | previously absorbed evidence).  Raises
    ContradictoryEvidence when a variable is re-observed in another state.
    """
    if state.tree.net is not net and state.tree.net != net:
        raise ValueError("state belongs to a different network")
    ev.check(net)
    merged = state.evidence.merge(ev)
    if not state.usable or state.probability == 0.0:
        return replace(state, evidence=merged, usable=False, probability=0.0), 0.0
    beliefs, prob = state.tree.propagate(merged.assignments)
    if prob == 0.0:
        return replace(state, evidence=merged, usable=False, probability=0.0), 0.0
    return PropagationState(state.tree, merged, beliefs, prob), prob / state.probability


def node_belief(state: PropagationState, variable: str) -> np.ndarray:
    return state.beliefs[state.net.layout[variable]].copy()
