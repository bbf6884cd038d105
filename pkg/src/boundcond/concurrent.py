"""Several bounded-conditioning analyses over different cutsets, intersected."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Callable, Iterator, Sequence

import numpy as np

from .bounded import BoundSnapshot, Session, TraceRecord, begin_session, fmt
from .cutset import Cutset
from .errors import NothingPending
from .network import BeliefNetwork, Observation


@dataclass(frozen=True)
class CombinedBounds:
    lower: np.ndarray
    upper: np.ndarray
    layout: dict
    tracked: tuple[str, ...]

    def bounds(self, variable: str) -> tuple[np.ndarray, np.ndarray]:
        span = self.layout[variable]
        return self.lower[span], self.upper[span]

    def tracked_mask(self) -> np.ndarray:
        mask = np.zeros(len(self.lower), dtype=bool)
        for name in self.tracked:
            mask[self.layout[name]] = True
        return mask

    @property
    def width(self) -> float:
        spans = [self.layout[n] for n in self.tracked]
        if not spans:
            return 0.0
        return float(max((self.upper[s] - self.lower[s]).max() for s in spans))


def combine_bounds(snapshots: Sequence[BoundSnapshot]) -> CombinedBounds:
    """Greatest lower and least upper bound, state by state."""
    if not snapshots:
        raise ValueError("need at least one snapshot")
    first = snapshots[0]
    for s in snapshots[1:]:
        if s.tracked != first.tracked or s.layout != first.layout:
            raise ValueError("snapshots cover different variables")
    lower = np.max([s.lower for s in snapshots], axis=0)
    upper = np.min([s.upper for s in snapshots], axis=0)
    return CombinedBounds(lower, upper, first.layout, first.tracked)


Schedule = Callable[[Sequence[Session], int], Iterator[int]]


def round_robin(sessions: Sequence[Session], turn: int) -> Iterator[int]:
    """One solve per analysis per turn, in analysis order."""
    return iter(range(len(sessions)))


@dataclass(frozen=True)
class ConcurrentRow:
    step: int
    analysis: int
    record: TraceRecord | None
    snapshots: tuple[BoundSnapshot, ...]
    combined: CombinedBounds


@dataclass
class ConcurrentRun:
    sessions: list[Session]
    rows: list[ConcurrentRow]

    @property
    def work_units(self) -> int:
        return sum(1 for r in self.rows if r.record is not None)

    @property
    def combined(self) -> CombinedBounds:
        return self.rows[-1].combined


def run_concurrent(net: BeliefNetwork, cutsets: Sequence[Cutset], budget: int,
                   stream: Sequence[Observation] = (), schedule: Schedule = round_robin,
                   epsilon: float | None = None, **session_opts) -> ConcurrentRun:
    """Interleave analyses until ``budget`` solves are spent or none can progress.

    With ``epsilon`` the run also stops once every observation has arrived
    and the combined width is at most ``epsilon``.

    Initialisation of each analysis is not charged to the budget.  Every
    observation in ``stream`` reaches all analyses once ``at_step`` charged
    solves have been made.
    """
    if len(cutsets) < 1:
        raise ValueError("need at least one cutset")
    if budget < 0:
        raise ValueError("budget must be non-negative")
    sessions = [begin_session(net, cs, **session_opts) for cs in cutsets]
    pending = list(stream)
    rows: list[ConcurrentRow] = []
    spent = 0

    def deliver():
        while pending and pending[0].at_step <= spent:
            obs = pending.pop(0)
            for s in sessions:
                s.observe(obs.evidence)

    def emit(analysis, record):
        snaps = tuple(s.snapshot for s in sessions)
        rows.append(ConcurrentRow(spent, analysis, record, snaps, combine_bounds(snaps)))

    deliver()
    emit(-1, None)
    turn = 0
    while spent < budget:
        if epsilon is not None and not pending and rows[-1].combined.width <= epsilon:
            break
        progressed = False
        for a in schedule(sessions, turn):
            if spent >= budget:
                break
            try:
                record = sessions[a].solve_next()
            except NothingPending:
                continue
            spent += 1
            progressed = True
            emit(a, record)
            deliver()
        turn += 1
        if not progressed:
            if not pending:
                break
            # nothing left this epoch; the next observation arrives early
            obs = pending.pop(0)
            for s in sessions:
                s.observe(obs.evidence)
            emit(-1, None)
    return ConcurrentRun(sessions, rows)


CONCURRENT_COLUMNS = (
    "step", "analysis_id", "instance_index", "instance_w_upper", "evidence_epoch", "variable", "state",
    "lower", "upper", "width", "cumulative_work_units", "combined_lower", "combined_upper",
)


def write_concurrent_csv(fh: IO[str], run: ConcurrentRun, net: BeliefNetwork,
                         targets: Sequence[str] | None = None) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CONCURRENT_COLUMNS)
    for row in run.rows:
        comb = row.combined
        names = [n for n in (targets or comb.tracked) if n in comb.tracked]
        for a, snap in enumerate(row.snapshots):
            inst = row.record.instance if row.record is not None and row.analysis == a else -1
            w_up = fmt(row.record.instance_w_upper) if inst >= 0 else ""
            for name in names:
                lo, hi = snap.bounds(name)
                clo, chi = comb.bounds(name)
                for k, label in enumerate(net.variable(name).states):
                    writer.writerow([row.step, a, inst, w_up, snap.epoch, name, label, fmt(lo[k]), fmt(hi[k]),
                                     fmt(snap.width), row.step, fmt(clo[k]), fmt(chi[k])])
