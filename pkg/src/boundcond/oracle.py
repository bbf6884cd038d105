"""Brute-force inference by materialising the full joint distribution.

Deliberately naive: it is the ground truth the other inference paths are
checked against, so it shares no code with them beyond the table layout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EnumerationCapExceeded, ImpossibleEvidence
from .network import BeliefNetwork, Evidence

DEFAULT_CAP = 2**22


@dataclass(frozen=True)
class JointQuery:
    evidence: Evidence
    target: str


def joint_table(net: BeliefNetwork, evidence: Evidence | None = None, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Joint probability tensor (one axis per variable, network order) with evidence zeroed out."""
    size = net.joint_size()
    if size > cap:
        raise EnumerationCapExceeded(f"joint has {size} states, cap is {cap}")
    axis = {n: i for i, n in enumerate(net.names)}
    shape = tuple(net.cardinality(n) for n in net.names)
    joint = np.ones(shape)
    for name in net.names:
        factor_axes = [axis[p] for p in net.parents(name)] + [axis[name]]
        joint = np.einsum(joint, list(range(len(shape))), net.cpt(name), factor_axes, list(range(len(shape))))
    for name, state in (evidence or Evidence()).items():
        mask = np.zeros(shape[axis[name]])
        mask[state] = 1.0
        joint = joint * mask.reshape([-1 if i == axis[name] else 1 for i in range(len(shape))])
    return joint


def evidence_probability(net: BeliefNetwork, evidence: Evidence, cap: int = DEFAULT_CAP) -> float:
    return float(joint_table(net, evidence, cap).sum())


def all_posteriors(net: BeliefNetwork, evidence: Evidence | None = None, cap: int = DEFAULT_CAP) -> tuple[dict[str, np.ndarray], float]:
    """Posterior of every variable and p(evidence).

    Marginals use numpy's pairwise summation, which keeps the rounding error
    at O(log N) ulps even for a few million terms.
    """
    joint = joint_table(net, evidence, cap)
    p_e = float(joint.sum())
    if p_e == 0.0:
        raise ImpossibleEvidence("evidence has probability zero")
    out = {}
    n = joint.ndim
    for i, name in enumerate(net.names):
        marg = joint.sum(axis=tuple(k for k in range(n) if k != i))
        out[name] = marg / marg.sum()
    return out, p_e


def exact_posterior_enumeration(net: BeliefNetwork, q: JointQuery, cap: int = DEFAULT_CAP) -> np.ndarray:
    axis = net.names.index(q.target)
    joint = joint_table(net, q.evidence, cap)
    marg = joint.sum(axis=tuple(k for k in range(joint.ndim) if k != axis))
    total = marg.sum()
    if total == 0.0:
        raise ImpossibleEvidence("evidence has probability zero")
    return marg / total
