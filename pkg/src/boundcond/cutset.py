"""Loop cutsets, their instances, and the conditioning transform."""

from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import CutsetError
from .network import BeliefNetwork, ConditionalTable, Evidence, is_singly_connected


@dataclass(frozen=True)
class Cutset:
    members: tuple[str, ...]
    cardinalities: tuple[int, ...]

    @classmethod
    def of(cls, net: BeliefNetwork, members: Sequence[str]) -> Cutset:
        members = tuple(members)
        if len(set(members)) != len(members):
            raise CutsetError("cutset members must be distinct")
        return cls(members, tuple(net.cardinality(m) for m in members))

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class CutsetInstance:
    index: int
    assignment: tuple[int, ...]

    def evidence(self, cs: Cutset) -> Evidence:
        return Evidence(dict(zip(cs.members, self.assignment)))


@dataclass(frozen=True)
class Subproblem:
    """A singly connected network plus the clamped cutset values as evidence."""

    network: BeliefNetwork
    clamp: Evidence


def _remaining_graph(net: BeliefNetwork):
    parents = {n: set(net.parents(n)) for n in net.names}
    children = {n: set(net.children(n)) for n in net.names}
    return parents, children


def _prune(parents, children):
    """Strip nodes of undirected degree <= 1; they lie on no loop."""
    changed = True
    while changed:
        changed = False
        for n in list(parents):
            if len(parents[n]) + len(children[n]) <= 1:
                _drop(n, parents, children)
                changed = True


def _drop(n, parents, children):
    for p in parents.pop(n):
        children[p].discard(n)
    for c in children.pop(n):
        parents[c].discard(n)


def find_loop_cutset(net: BeliefNetwork, reverse_ties: bool = False) -> Cutset:
    """Greedy loop cutset.

    Repeatedly strips loop-free nodes, then removes the node of largest
    undirected degree among those with at most one parent left (such a node
    cuts every remaining loop through it).  Ties go to the smallest name, or
    the largest with ``reverse_ties``, which gives a second, usually different
    cutset for concurrent analyses.
    """
    parents, children = _remaining_graph(net)
    chosen: list[str] = []
    _prune(parents, children)
    while parents:
        candidates = [n for n in parents if len(parents[n]) <= 1]
        if reverse_ties:
            pick = max(candidates, key=lambda n: (len(parents[n]) + len(children[n]), n))
        else:
            pick = min(candidates, key=lambda n: (-(len(parents[n]) + len(children[n])), n))
        chosen.append(pick)
        _drop(pick, parents, children)
        _prune(parents, children)
    order = {n: i for i, n in enumerate(net.names)}
    return Cutset.of(net, sorted(chosen, key=order.__getitem__))


def _cut(net: BeliefNetwork, cs: Cutset, assignment: Sequence[int]) -> BeliefNetwork:
    fixed = dict(zip(cs.members, assignment))
    tables = []
    for t in net.tables:
        absorbed = [p for p in t.parents if p in fixed]
        if not absorbed:
            tables.append(t)
            continue
        cpt = net.cpt(t.child)
        index = tuple(fixed[p] if p in fixed else slice(None) for p in t.parents)
        sliced = cpt[index]
        kept = tuple(p for p in t.parents if p not in fixed)
        rows = sliced.reshape(-1, sliced.shape[-1])
        tables.append(ConditionalTable(t.child, kept, tuple(tuple(r) for r in rows.tolist())))
    return BeliefNetwork(net.variables, tuple(tables))


def verify_cutset(net: BeliefNetwork, cs: Cutset) -> bool:
    """True iff removing the members' outgoing arcs leaves a polytree."""
    for m in cs.members:
        net.variable(m)
    return is_singly_connected(_cut(net, cs, [0] * len(cs)))


def instance_count(cs: Cutset) -> int:
    count = math.prod(cs.cardinalities)
    if count > sys.maxsize:
        raise OverflowError(f"cutset has {count} instances, beyond the enumerable range")
    return count


def enumerate_instances(cs: Cutset) -> Iterator[CutsetInstance]:
    instance_count(cs)
    for i, assignment in enumerate(itertools.product(*(range(c) for c in cs.cardinalities))):
        yield CutsetInstance(i, assignment)


def instance_at(cs: Cutset, index: int) -> CutsetInstance:
    """Decode a mixed-radix instance index (last member fastest)."""
    if not 0 <= index < instance_count(cs):
        raise IndexError(index)
    return CutsetInstance(index, tuple(int(x) for x in np.unravel_index(index, cs.cardinalities)) if cs.members else ())


def split_network(net: BeliefNetwork, cs: Cutset, instance: CutsetInstance, check: bool = True) -> Subproblem:
    """Clamp the cutset to ``instance`` and absorb its outgoing arcs into the child tables."""
    sub = _cut(net, cs, instance.assignment)
    if check and not is_singly_connected(sub):
        raise CutsetError(f"{list(cs.members)} does not cut every loop")
    return Subproblem(sub, instance.evidence(cs))
