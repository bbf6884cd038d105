#!/usr/bin/env python3
"""Write the network and evidence fixtures used by the test suite.

Every file is a pure function of the seeds below, so rerunning the script
reproduces tests/fixtures byte for byte.
"""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from boundcond.network import (
    BeliefNetwork,
    ConditionalTable,
    Evidence,
    Observation,
    Variable,
    generate_random,
    serialize_evidence,
    serialize_network,
)

ICU_LIKE = dict(node_count=37, max_parents=3, max_states=3, loop_target=6, seed=323)
SMALL_108 = dict(node_count=15, max_parents=4, max_states=3, loop_target=10, seed=182)


def diamond() -> BeliefNetwork:
    tf = ("t", "f")
    return BeliefNetwork(
        (Variable("A", tf), Variable("B", tf), Variable("C", tf), Variable("D", tf)),
        (
            ConditionalTable("A", (), [[0.3, 0.7]]),
            ConditionalTable("B", ("A",), [[0.8, 0.2], [0.1, 0.9]]),
            ConditionalTable("C", ("A",), [[0.6, 0.4], [0.25, 0.75]]),
            ConditionalTable("D", ("B", "C"), [[0.95, 0.05], [0.7, 0.3], [0.4, 0.6], [0.05, 0.95]]),
        ),
    )


def chain() -> BeliefNetwork:
    tf = ("t", "f")
    return BeliefNetwork(
        (Variable("A", tf), Variable("B", tf), Variable("C", tf)),
        (
            ConditionalTable("A", (), [[0.3, 0.7]]),
            ConditionalTable("B", ("A",), [[1.0, 0.0], [0.0, 1.0]]),
            ConditionalTable("C", ("B",), [[0.5, 0.5], [0.2, 0.8]]),
        ),
    )


def sample(net: BeliefNetwork, rng: np.random.Generator) -> dict[str, int]:
    """One ancestral sample; the network's variables are listed in topological order."""
    values: dict[str, int] = {}
    for name in net.names:
        cpt = net.cpt(name)
        row = cpt[tuple(values[p] for p in net.parents(name))]
        values[name] = int(rng.choice(len(row), p=row))
    return values


def protocol_stream(net: BeliefNetwork, seed: int, every: int = 40, count: int = 4) -> list[Observation]:
    rng = np.random.default_rng(seed)
    world = sample(net, rng)
    chosen = rng.choice(len(net.names), size=count, replace=False)
    return [Observation(Evidence({net.names[v]: world[net.names[v]]}), k * every) for k, v in enumerate(chosen)]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "fixtures")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    icu = generate_random(**ICU_LIKE)
    small = generate_random(**SMALL_108)
    files = {
        "single.json": serialize_network(BeliefNetwork((Variable("A", ("t", "f")),), (ConditionalTable("A", (), [[0.5, 0.5]]),))),
        "diamond.json": serialize_network(diamond()),
        "chain.json": serialize_network(chain()),
        "icu_like_37.json": serialize_network(icu),
        "small_108.json": serialize_network(small),
        "diamond_evidence.json": serialize_evidence([Observation(Evidence({"D": 0}), 0)], diamond()),
        "icu_like_37_stream.json": serialize_evidence(protocol_stream(icu, 5), icu),
        "small_108_stream.json": serialize_evidence(protocol_stream(small, 5), small),
    }
    for name, text in files.items():
        (args.out / name).write_text(text, encoding="utf-8")
        print(f"wrote {args.out / name}")


if __name__ == "__main__":
    main()
