"""Discrete belief networks: data model, JSON file format, validation, generation.

Tables are stored row-major over parent configurations with the last-listed
parent varying fastest, so ``cpt(name)`` can reshape the rows directly into an
array of shape ``(*parent_cards, child_card)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import ContradictoryEvidence, NetworkSemanticError, NetworkSyntaxError

ROW_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Variable:
    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))

    @property
    def cardinality(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class ConditionalTable:
    child: str
    parents: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "rows", tuple(tuple(float(p) for p in r) for r in self.rows))


@dataclass(frozen=True)
class BeliefNetwork:
    """A DAG of discrete variables. Immutable; derived indexes are cached lazily.

    Construction does not validate; use :func:`validate` or :func:`parse_network`.
    """

    variables: tuple[Variable, ...]
    tables: tuple[ConditionalTable, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "tables", tuple(self.tables))

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @cached_property
    def _vars(self) -> dict[str, Variable]:
        return {v.name: v for v in self.variables}

    @cached_property
    def _tables(self) -> dict[str, ConditionalTable]:
        return {t.child: t for t in self.tables}

    @cached_property
    def _children(self) -> dict[str, tuple[str, ...]]:
        kids: dict[str, list[str]] = {n: [] for n in self.names}
        for name in self.names:
            for p in self._tables[name].parents:
                kids[p].append(name)
        return {k: tuple(v) for k, v in kids.items()}

    @cached_property
    def _cpts(self) -> dict[str, np.ndarray]:
        out = {}
        for t in self.tables:
            shape = tuple(self.cardinality(p) for p in t.parents) + (self.cardinality(t.child),)
            arr = np.asarray(t.rows, dtype=float).reshape(shape)
            arr.setflags(write=False)
            out[t.child] = arr
        return out

    @cached_property
    def layout(self) -> dict[str, slice]:
        """Slice of each variable's states in a flat vector over all variable-states."""
        out, start = {}, 0
        for v in self.variables:
            out[v.name] = slice(start, start + v.cardinality)
            start += v.cardinality
        return out

    @cached_property
    def state_count(self) -> int:
        return sum(v.cardinality for v in self.variables)

    def variable(self, name: str) -> Variable:
        try:
            return self._vars[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def table(self, name: str) -> ConditionalTable:
        return self._tables[name]

    def cardinality(self, name: str) -> int:
        return self.variable(name).cardinality

    def parents(self, name: str) -> tuple[str, ...]:
        return self._tables[name].parents

    def children(self, name: str) -> tuple[str, ...]:
        return self._children[name]

    def cpt(self, name: str) -> np.ndarray:
        return self._cpts[name]

    def state_index(self, name: str, label: str) -> int:
        states = self.variable(name).states
        try:
            return states.index(label)
        except ValueError:
            raise KeyError(f"variable {name!r} has no state {label!r}") from None

    def edges(self) -> list[tuple[str, str]]:
        return [(p, t.child) for t in self.tables for p in t.parents]

    def joint_size(self) -> int:
        return math.prod(v.cardinality for v in self.variables)


@dataclass(frozen=True, eq=True)
class Evidence:
    """Observed state index per variable."""

    assignments: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        items = dict(sorted((str(k), int(v)) for k, v in dict(self.assignments).items()))
        object.__setattr__(self, "assignments", MappingProxyType(items))

    __hash__ = None  # type: ignore[assignment]

    def __eq__(self, other):
        return isinstance(other, Evidence) and dict(self.assignments) == dict(other.assignments)

    def __len__(self):
        return len(self.assignments)

    def __iter__(self):
        return iter(self.assignments)

    def __contains__(self, name):
        return name in self.assignments

    def __getitem__(self, name):
        return self.assignments[name]

    def items(self):
        return self.assignments.items()

    def merge(self, other: Evidence | Mapping[str, int]) -> Evidence:
        merged = dict(self.assignments)
        for name, state in dict(getattr(other, "assignments", other)).items():
            if name in merged and merged[name] != state:
                raise ContradictoryEvidence(
                    f"{name} already observed in state {merged[name]}, cannot re-observe as {state}"
                )
            merged[name] = state
        return Evidence(merged)

    def conflicts_with(self, other: Evidence | Mapping[str, int]) -> bool:
        other = dict(getattr(other, "assignments", other))
        return any(k in self.assignments and self.assignments[k] != v for k, v in other.items())

    @classmethod
    def from_labels(cls, net: BeliefNetwork, labels: Mapping[str, str]) -> Evidence:
        return cls({k: net.state_index(k, v) for k, v in labels.items()})

    def check(self, net: BeliefNetwork) -> None:
        for name, state in self.items():
            card = net.cardinality(name)
            if not 0 <= state < card:
                raise ValueError(f"state index {state} out of range for {name} ({card} states)")

    def labels(self, net: BeliefNetwork) -> dict[str, str]:
        return {k: net.variable(k).states[v] for k, v in self.items()}


@dataclass(frozen=True)
class Observation:
    """One element of an evidence stream, visible once ``at_step`` solves have run."""

    evidence: Evidence
    at_step: int


# ---------------------------------------------------------------------------
# validation


def _find_cycle(net: BeliefNetwork) -> list[str] | None:
    known = set(net._vars)
    parents = {t.child: [p for p in t.parents if p in known] for t in net.tables if t.child in known}
    color: dict[str, int] = {}
    stack_path: list[str] = []

    def visit(node: str) -> list[str] | None:
        color[node] = 1
        stack_path.append(node)
        for p in parents.get(node, ()):
            if color.get(p) == 1:
                return stack_path[stack_path.index(p):]
            if p not in color:
                found = visit(p)
                if found:
                    return found
        stack_path.pop()
        color[node] = 2
        return None

    for name in net.names:
        if name not in color:
            cyc = visit(name)
            if cyc:
                # path follows child -> parent; report in arc direction
                return list(reversed(cyc))
    return None


def validate(net: BeliefNetwork) -> list[str]:
    """Return a list of problems; empty iff the network is well formed."""
    report: list[str] = []
    seen: set[str] = set()
    for v in net.variables:
        if v.name in seen:
            report.append(f"duplicate variable {v.name!r}")
        seen.add(v.name)
        if len(v.states) < 2:
            report.append(f"variable {v.name!r} has fewer than 2 states")
        if len(set(v.states)) != len(v.states):
            report.append(f"variable {v.name!r} has duplicate state labels")

    cards = {v.name: len(v.states) for v in net.variables}
    counts: dict[str, int] = {}
    for t in net.tables:
        counts[t.child] = counts.get(t.child, 0) + 1
        if t.child not in cards:
            report.append(f"table for unknown variable {t.child!r}")
            continue
        bad_parent = False
        for p in t.parents:
            if p not in cards:
                report.append(f"{t.child}: unknown parent {p!r}")
                bad_parent = True
        if len(set(t.parents)) != len(t.parents):
            report.append(f"{t.child}: duplicate parent")
        if bad_parent:
            continue
        expected_rows = math.prod(cards[p] for p in t.parents)
        if len(t.rows) != expected_rows:
            report.append(f"{t.child}: expected {expected_rows} rows, got {len(t.rows)}")
        for r, row in enumerate(t.rows):
            if len(row) != cards[t.child]:
                report.append(
                    f"{t.child}: row {r} arity mismatch, expected {cards[t.child]} entries, got {len(row)}"
                )
                continue
            if any(not (0.0 <= x <= 1.0) or math.isnan(x) for x in row):
                report.append(f"{t.child}: row {r} has entries outside [0, 1]")
            total = math.fsum(row)
            if abs(total - 1.0) > ROW_TOLERANCE:
                report.append(f"{t.child}: row {r} row sum {total:.12g}")
    for name in cards:
        if counts.get(name, 0) == 0:
            report.append(f"variable {name!r} has no table")
        elif counts[name] > 1:
            report.append(f"variable {name!r} has {counts[name]} tables")
    cycle = _find_cycle(net)
    if cycle:
        report.append("cycle: " + " -> ".join(cycle + [cycle[0]]))
    return report


def loop_count(net: BeliefNetwork) -> int:
    """Number of independent undirected loops (cyclomatic number of the skeleton)."""
    edges = net.edges()
    parent = {n: n for n in net.names}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    components = len(parent)
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            components -= 1
    return len(edges) - len(parent) + components


def is_singly_connected(net: BeliefNetwork) -> bool:
    return loop_count(net) == 0


# ---------------------------------------------------------------------------
# file format


def network_to_dict(net: BeliefNetwork) -> dict:
    return {
        "variables": [{"name": v.name, "states": list(v.states)} for v in net.variables],
        "tables": [
            {"child": t.child, "parents": list(t.parents), "rows": [list(r) for r in t.rows]}
            for t in net.tables
        ],
    }


def serialize_network(net: BeliefNetwork) -> str:
    return json.dumps(network_to_dict(net), indent=2) + "\n"


def _require(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise NetworkSemanticError([f"{where}: missing {key!r}"])
    value = obj[key]
    if not isinstance(value, kind):
        raise NetworkSemanticError([f"{where}: {key!r} must be {kind.__name__}"])
    return value


def network_from_dict(data: dict) -> BeliefNetwork:
    variables = []
    for i, v in enumerate(_require(data, "variables", list, "network")):
        variables.append(
            Variable(_require(v, "name", str, f"variables[{i}]"), tuple(_require(v, "states", list, f"variables[{i}]")))
        )
    tables = []
    for i, t in enumerate(_require(data, "tables", list, "network")):
        rows = _require(t, "rows", list, f"tables[{i}]")
        for r in rows:
            if not isinstance(r, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in r):
                raise NetworkSemanticError([f"tables[{i}]: rows must be lists of numbers"])
        tables.append(
            ConditionalTable(
                _require(t, "child", str, f"tables[{i}]"), tuple(_require(t, "parents", list, f"tables[{i}]")), rows
            )
        )
    return BeliefNetwork(tuple(variables), tuple(tables))


def parse_network(text: str) -> BeliefNetwork:
    """Parse and validate a network file; raises NetworkSyntaxError or NetworkSemanticError."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    net = network_from_dict(data)
    problems = validate(net)
    if problems:
        raise NetworkSemanticError(problems)
    return net


def parse_evidence(text: str, net: BeliefNetwork) -> list[Observation]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    stream = []
    last = 0
    for i, obs in enumerate(_require(data, "observations", list, "evidence")):
        at = obs.get("at_step", 0) if isinstance(obs, dict) else None
        if not isinstance(at, int) or at < 0:
            raise NetworkSemanticError([f"observations[{i}]: at_step must be a non-negative integer"])
        if at < last:
            raise NetworkSemanticError([f"observations[{i}]: at_step decreases ({at} < {last})"])
        last = at
        labels = _require(obs, "set", dict, f"observations[{i}]")
        try:
            ev = Evidence.from_labels(net, labels)
        except KeyError as exc:
            raise NetworkSemanticError([f"observations[{i}]: {exc.args[0]}"]) from None
        stream.append(Observation(ev, at))
    return stream


def serialize_evidence(stream: Iterable[Observation], net: BeliefNetwork) -> str:
    return json.dumps(
        {"observations": [{"at_step": o.at_step, "set": o.evidence.labels(net)} for o in stream]}, indent=2
    ) + "\n"


# ---------------------------------------------------------------------------
# generation


def _random_row(rng: np.random.Generator, card: int, asymmetry: float | None) -> tuple[float, ...]:
    draws = rng.random(card)
    if asymmetry is None:
        return tuple(float(x) for x in draws / draws.sum())
    rest = draws[1:] / draws[1:].sum() * (1.0 - asymmetry)
    return (float(asymmetry),) + tuple(float(x) for x in rest)


def generate_random(
    node_count: int,
    max_parents: int,
    max_states: int,
    loop_target: int,
    seed: int,
    asymmetry: float | None = None,
) -> BeliefNetwork:
    """Random connected network with exactly ``loop_target`` independent loops.

    A random spanning tree over the topological order is drawn first, then
    extra arcs between already-connected nodes are added one loop at a time.
    ``asymmetry`` pins the first state of every row to that probability.
    """
    if node_count < 1 or max_parents < 0 or max_states < 2 or loop_target < 0:
        raise ValueError("need node_count >= 1, max_parents >= 0, max_states >= 2, loop_target >= 0")
    if asymmetry is not None and not 0.0 <= asymmetry <= 1.0:
        raise ValueError("asymmetry must lie in [0, 1]")
    capacity = sum(min(max_parents, j) for j in range(node_count))
    tree_arcs = node_count - 1 if max_parents >= 1 else 0
    if loop_target > capacity - tree_arcs:
        raise ValueError(
            f"cannot place {loop_target} loops in {node_count} nodes with at most {max_parents} parents each"
        )

    rng = np.random.default_rng(seed)
    width = len(str(node_count - 1))
    names = [f"X{i:0{width}d}" for i in range(node_count)]
    cards = [int(c) for c in rng.integers(2, max_states + 1, size=node_count)]
    parents: list[list[int]] = [[] for _ in range(node_count)]
    if max_parents >= 1:
        for j in range(1, node_count):
            parents[j].append(int(rng.integers(0, j)))
    for _ in range(loop_target):
        candidates = [
            (i, j)
            for j in range(1, node_count)
            if len(parents[j]) < max_parents
            for i in range(j)
            if i not in parents[j]
        ]
        i, j = candidates[int(rng.integers(0, len(candidates)))]
        parents[j].append(i)

    variables = tuple(Variable(names[i], tuple(f"s{k}" for k in range(cards[i]))) for i in range(node_count))
    tables = []
    for j in range(node_count):
        ps = sorted(parents[j])
        n_rows = math.prod(cards[p] for p in ps)
        rows = tuple(_random_row(rng, cards[j], asymmetry) for _ in range(n_rows))
        tables.append(ConditionalTable(names[j], tuple(names[p] for p in ps), rows))
    return BeliefNetwork(variables, tuple(tables))
