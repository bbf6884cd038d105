from pathlib import Path

import numpy as np
import pytest

from boundcond.network import BeliefNetwork, ConditionalTable, Evidence, Variable, parse_network

FIXTURES = Path(__file__).parent / "fixtures"

TF = ("t", "f")


def load(name: str) -> BeliefNetwork:
    return parse_network((FIXTURES / name).read_text())


def uniform_diamond() -> BeliefNetwork:
    half = [0.5, 0.5]
    return BeliefNetwork(
        tuple(Variable(n, TF) for n in "ABCD"),
        (
            ConditionalTable("A", (), [half]),
            ConditionalTable("B", ("A",), [half, half]),
            ConditionalTable("C", ("A",), [half, half]),
            ConditionalTable("D", ("B", "C"), [half] * 4),
        ),
    )


def sample_world(net: BeliefNetwork, rng: np.random.Generator) -> dict[str, int]:
    """Ancestral sample; fixture and generated networks list variables topologically."""
    values: dict[str, int] = {}
    for name in net.names:
        row = net.cpt(name)[tuple(values[p] for p in net.parents(name))]
        values[name] = int(rng.choice(len(row), p=row))
    return values


def random_evidence(net: BeliefNetwork, rng: np.random.Generator, count: int) -> list[Evidence]:
    """``count`` single-variable observations consistent with one sampled world (so p(e) > 0)."""
    world = sample_world(net, rng)
    picks = rng.choice(len(net.names), size=min(count, len(net.names)), replace=False)
    return [Evidence({net.names[i]: world[net.names[i]]}) for i in picks]


@pytest.fixture
def diamond():
    return load("diamond.json")


@pytest.fixture
def icu_like():
    return load("icu_like_37.json")


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
