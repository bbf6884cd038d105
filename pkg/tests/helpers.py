"""Shared builders for the test suite: sweep networks, evidence, oracle checks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from boundcond.cutset import find_loop_cutset, instance_count
from boundcond.network import BeliefNetwork, Evidence, generate_random
from boundcond.oracle import all_posteriors
from conftest import random_evidence

JOINT_LIMIT = 2**20


@dataclass(frozen=True)
class SweepCase:
    seed: int
    net: BeliefNetwork
    stream: tuple[Evidence, ...]
    gaps: tuple[int, ...]  # solves taken before each later observation


def sweep_cases(count: int, seed: int = 0, observations: int = 3) -> list[SweepCase]:
    """Random loopy networks with at most 15 nodes and a joint of at most 2**20 states."""
    rng = np.random.default_rng(seed)
    cases = []
    attempt = 0
    while len(cases) < count:
        attempt += 1
        nodes = int(rng.integers(8, 16))
        loops = int(rng.integers(3, 11))
        states = int(rng.integers(2, 4))
        try:
            net = generate_random(nodes, 4, states, loops, seed=1000 * seed + attempt)
        except ValueError:
            continue
        if net.joint_size() > JOINT_LIMIT:
            continue
        stream = tuple(random_evidence(net, rng, observations))
        # gaps up to the instance count, so some epochs end before every instance is revisited
        n_inst = instance_count(find_loop_cutset(net))
        gaps = tuple(int(g) for g in rng.integers(0, n_inst + 1, size=len(stream)))
        cases.append(SweepCase(1000 * seed + attempt, net, stream, gaps))
    return cases


def oracle_flat(net: BeliefNetwork, evidence: Evidence) -> np.ndarray:
    post, _ = all_posteriors(net, evidence)
    return np.concatenate([post[n] for n in net.names])


def violation(snapshot, truth: np.ndarray) -> float:
    """Largest amount by which ``truth`` escapes the snapshot's intervals on tracked states."""
    mask = snapshot.tracked_mask()
    below = (snapshot.lower - truth)[mask]
    above = (truth - snapshot.upper)[mask]
    return float(max(below.max(initial=0.0), above.max(initial=0.0)))


def replay_snapshots(case: SweepCase, session_factory=None, **opts):
    """Every snapshot of a session over ``case``: initialisation, each observe, each solve.

    Returns (session, [(epoch, is_solve, snapshot, truth)]).  Between
    observations the session takes ``gaps[k]`` solves; after the last it runs
    until nothing is pending.
    """
    from boundcond.bounded import begin_session

    s = session_factory(case.net) if session_factory else begin_session(case.net, **opts)
    prior = oracle_flat(case.net, Evidence())
    out = [(0, True, rec.snapshot, prior) for rec in s.trace]
    evidence = Evidence()
    for k, (ev, gap) in enumerate(zip(case.stream, case.gaps)):
        evidence = evidence.merge(ev)
        s.observe(ev)
        truth = oracle_flat(case.net, evidence)
        out.append((s.epoch, False, s.snapshot, truth))
        last = k == len(case.stream) - 1
        taken = 0
        while s.ledger.pending.size and (last or taken < gap):
            s.solve_next()
            taken += 1
            out.append((s.epoch, True, s.snapshot, truth))
    return s, out


ACCEPTANCE: list[str] = []


def report(number: int, ok: bool, detail: str) -> bool:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok
