"""Bounded conditioning: anytime posterior intervals over cutset instances.

Instances are solved one at a time in descending weight order.  After every
solve the ledger turns what is known (exact likelihoods of the solved
instances, caps on the unsolved ones) into intervals on the normalised
instance weights, and those into intervals on every posterior.

Epoch 0 is the prior initialisation: instance masses p(c_i) are absolute, so
the unexplored mass is exactly 1 - sum of solved masses.  Every observation
opens a new epoch.  Instances solved in the previous epoch become *stale*
(re-solvable); instances the previous epoch never reached become *frozen*:
their likelihood for the old evidence is unknown, so they can only ever
contribute an upper-bound mass from then on.

Weight intervals in an epoch, with caps [lo_i, hi_i] carried over from the
previous epoch and exact likelihoods l_i = p(e | E_prev, instance i) for
the current instances::

    lower_i = l_i lo_i / (sum_cur l_k hi_k + sum_other hi_k)
    upper_i = l_i hi_i / sum_cur l_k lo_k            (current)
    upper_i = hi_i / sum_cur l_k lo_k                (stale and frozen)

Uppers are clamped to 1; the raw value is kept for audit.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import IO, Iterable, NamedTuple, Sequence

import numpy as np

from .conditioning import InstanceSolver
from .cutset import Cutset, find_loop_cutset
from .errors import ImpossibleEvidence, NothingPending
from .network import BeliefNetwork, Evidence

CURRENT, STALE, FROZEN = 0, 1, 2


class Status(enum.Enum):
    CURRENT = "solved-current"
    STALE = "solved-stale"
    FROZEN = "frozen"


_STATUS = {CURRENT: Status.CURRENT, STALE: Status.STALE, FROZEN: Status.FROZEN}


@dataclass(frozen=True)
class WeightInterval:
    lower: float
    upper: float
    upper_raw: float


class WeightBounds(NamedTuple):
    lower: np.ndarray
    upper: np.ndarray
    upper_raw: np.ndarray


def _ratio(num, den):
    """num/den elementwise with 0/x = 0 and x/0 = inf."""
    num = np.asarray(num, dtype=float)
    den = np.broadcast_to(np.asarray(den, dtype=float), num.shape)
    out = np.full(num.shape, np.inf)
    out[num == 0] = 0.0
    ok = (num != 0) & (den > 0)
    out[ok] = num[ok] / den[ok]
    return out


@dataclass
class InstanceLedger:
    """Per-instance bookkeeping for one bounded-conditioning session."""

    n: int
    state_count: int
    tight: bool = False
    frozen_rule: str = "sound"
    status: np.ndarray = field(init=False)
    mass: np.ndarray = field(init=False)
    likelihood: np.ndarray = field(init=False)
    cap_lower: np.ndarray = field(init=False)
    cap_upper: np.ndarray = field(init=False)
    cap_rank: np.ndarray = field(init=False)
    beliefs: np.ndarray = field(init=False)
    bounds: WeightBounds | None = field(init=False, default=None)
    pinned: np.ndarray | None = field(init=False, default=None)
    epoch: int = field(init=False, default=0)
    h: int = field(init=False, default=0)
    j: int = field(init=False, default=0)

    def __post_init__(self):
        if self.frozen_rule not in ("sound", "literal"):
            raise ValueError(f"unknown frozen_rule {self.frozen_rule!r}")
        self.status = np.full(self.n, STALE, dtype=np.int8)
        self.mass = np.zeros(self.n)
        self.likelihood = np.zeros(self.n)
        self.cap_lower = np.zeros(self.n)
        self.cap_upper = np.ones(self.n)
        self.cap_rank = np.zeros(self.n)
        self.beliefs = np.zeros((self.n, self.state_count))
        self.j = self.n

    @property
    def prior_epoch(self) -> bool:
        return self.epoch == 0

    def status_of(self, i: int) -> Status:
        return _STATUS[int(self.status[i])]

    def interval(self, i: int) -> WeightInterval:
        b = self.bounds or weight_bounds(self)
        return WeightInterval(float(b.lower[i]), float(b.upper[i]), float(b.upper_raw[i]))

    @property
    def pending(self) -> np.ndarray:
        return np.flatnonzero(self.status == STALE)

    @property
    def complete(self) -> bool:
        return bool(np.all(self.status == CURRENT))


def weight_bounds(ledger: InstanceLedger) -> WeightBounds:
    cur = ledger.status == CURRENT
    other = ~cur
    if ledger.pinned is not None:
        w = ledger.pinned.copy()
        bounds = WeightBounds(w, w.copy(), w.copy())
    elif ledger.prior_epoch:
        lower = np.where(cur, ledger.mass, 0.0)
        residual = max(0.0, 1.0 - float(lower.sum()))
        raw = np.where(cur, ledger.mass, residual)
        bounds = WeightBounds(lower, np.minimum(raw, 1.0), raw)
    else:
        num_lo = np.where(cur, ledger.likelihood * ledger.cap_lower, 0.0)
        num_hi = np.where(cur, ledger.likelihood * ledger.cap_upper, 0.0)
        s_lo = float(num_lo.sum())
        d_hi = float(num_hi.sum() + ledger.cap_upper[other].sum())
        if ledger.tight:
            lower = _ratio(num_lo, num_lo + (d_hi - num_hi))
            raw_cur = _ratio(num_hi, num_hi + (s_lo - num_lo))
        else:
            lower = _ratio(num_lo, d_hi)
            raw_cur = _ratio(num_hi, s_lo)
        raw = np.where(cur, raw_cur, _ratio(ledger.cap_upper, s_lo))
        frozen = ledger.status == FROZEN
        if ledger.frozen_rule == "literal" and frozen.any():
            upper_cur = np.minimum(raw_cur[cur], 1.0)
            den = float(lower[cur].sum() + 1.0 - upper_cur.sum())
            raw = np.where(frozen, _ratio(ledger.cap_upper, den), raw)
        lower = np.where(cur, lower, 0.0)
        if not ledger.pending.size and not frozen.any() and float(num_hi.sum()) == 0.0:
            raise ImpossibleEvidence("evidence has probability zero under every instance")
        bounds = WeightBounds(lower, np.minimum(raw, 1.0), raw)
    ledger.bounds = bounds
    return bounds


@dataclass(frozen=True)
class BoundSnapshot:
    """Posterior intervals for every variable-state after some number of solves."""

    step: int
    epoch: int
    lower: np.ndarray
    upper: np.ndarray
    layout: dict
    tracked: tuple[str, ...]
    width: float

    def bounds(self, variable: str) -> tuple[np.ndarray, np.ndarray]:
        span = self.layout[variable]
        return self.lower[span], self.upper[span]

    def tracked_mask(self) -> np.ndarray:
        mask = np.zeros(len(self.lower), dtype=bool)
        for name in self.tracked:
            mask[self.layout[name]] = True
        return mask


def _flat_bounds(ledger: InstanceLedger, wb: WeightBounds) -> tuple[np.ndarray, np.ndarray]:
    cur = ledger.status == CURRENT
    lower = np.where(cur, wb.lower, 0.0) @ ledger.beliefs
    if ledger.pinned is not None:
        upper = lower + float(ledger.pinned[~cur].sum())
    elif ledger.prior_epoch:
        upper = lower + max(0.0, 1.0 - float(ledger.mass[cur].sum()))
    else:
        upper = np.where(cur, wb.upper, 0.0) @ ledger.beliefs + float(wb.upper[~cur].sum())
        if ledger.tight:
            # p(x) <= 1 - sum over the other states of their lower bounds
            upper = np.minimum(upper, 1.0 - np.where(cur, wb.lower, 0.0) @ (1.0 - ledger.beliefs))
    return np.clip(lower, 0.0, 1.0), np.clip(upper, 0.0, 1.0)


def posterior_bounds(ledger: InstanceLedger, net: BeliefNetwork, variable: str) -> tuple[np.ndarray, np.ndarray]:
    """Per-state [lower, upper] for one variable under the ledger's current state."""
    lower, upper = _flat_bounds(ledger, ledger.bounds or weight_bounds(ledger))
    span = net.layout[variable]
    return lower[span], upper[span]


@dataclass(frozen=True)
class TraceRecord:
    step: int
    instance: int
    instance_w_upper: float
    epoch: int
    snapshot: BoundSnapshot

    @property
    def work_units(self) -> int:
        return self.step


class Session:
    """An anytime inference run over one network and cutset.

    Create with :func:`begin_session`, which leaves the session in the
    completely solved prior state.
    """

    def __init__(self, net: BeliefNetwork, cutset: Cutset, solver: InstanceSolver, *, order: str = "desc",
                 tight: bool = False, frozen_rule: str = "sound"):
        if order not in ("desc", "asc", "index"):
            raise ValueError(f"unknown order {order!r}")
        self.net = net
        self.cutset = cutset
        self.solver = solver
        self.order = order
        self.ledger = InstanceLedger(solver.count, net.state_count, tight=tight, frozen_rule=frozen_rule)
        self.evidence = Evidence()
        self.history: list[Evidence] = []
        self.trace: list[TraceRecord] = []
        self.steps = 0
        self.snapshot = self._snapshot()

    # -- state ---------------------------------------------------------------

    @property
    def width(self) -> float:
        return self.snapshot.width

    @property
    def epoch(self) -> int:
        return self.ledger.epoch

    def tracked(self) -> tuple[str, ...]:
        return tuple(n for n in self.net.names if n not in self.evidence)

    def _snapshot(self) -> BoundSnapshot:
        lower, upper = _flat_bounds(self.ledger, weight_bounds(self.ledger))
        tracked = self.tracked()
        snap = BoundSnapshot(self.steps, self.ledger.epoch, lower, upper, self.net.layout, tracked, 0.0)
        mask = snap.tracked_mask()
        width = float((upper - lower)[mask].max()) if mask.any() else 0.0
        return BoundSnapshot(self.steps, self.ledger.epoch, lower, upper, self.net.layout, tracked, width)

    def bounds(self, variable: str) -> tuple[np.ndarray, np.ndarray]:
        return self.snapshot.bounds(variable)

    # -- operations ----------------------------------------------------------

    def order_pending(self) -> list[int]:
        """Stale instances, heaviest first, ties to the lower index.

        The key is the carried-over weight cap, which is w^U up to the common
        normaliser and so gives the same order without depending on clamping.
        """
        idx = self.ledger.pending
        key = self.ledger.cap_rank[idx]
        if self.order == "index" or self.ledger.prior_epoch:
            return [int(i) for i in idx]
        if self.order == "asc":
            return [int(i) for i in idx[np.lexsort((idx, key))]]
        return [int(i) for i in idx[np.lexsort((idx, -key))]]

    def _solve(self, i: int) -> TraceRecord:
        led = self.ledger
        w_upper = float(led.bounds.upper[i]) if led.bounds is not None else 1.0
        sol = self.solver.solve(i, self.evidence)
        prev = led.mass[i]
        led.likelihood[i] = sol.mass / prev if prev > 0 else 0.0
        led.mass[i] = sol.mass
        led.beliefs[i] = sol.beliefs if sol.beliefs is not None else 0.0
        led.status[i] = CURRENT
        led.h += 1
        self.steps += 1
        self.snapshot = self._snapshot()
        record = TraceRecord(self.steps, i, w_upper, led.epoch, self.snapshot)
        self.trace.append(record)
        return record

    def solve_next(self) -> TraceRecord:
        pending = self.order_pending()
        if not pending:
            raise NothingPending("no solved-stale instance left in this epoch")
        return self._solve(pending[0])

    def observe(self, ev: Evidence, exact_weights: Sequence[float] | None = None) -> Session:
        """Open a new evidence epoch.

        ``exact_weights``, when given, pins every instance weight to the
        supplied normalised posterior weights for this epoch, which reduces
        the bounds to the complete-state formulas.
        """
        ev.check(self.net)
        merged = self.evidence.merge(ev)
        led = self.ledger
        wb = led.bounds or weight_bounds(led)
        if exact_weights is not None:
            exact_weights = np.asarray(exact_weights, dtype=float)
            if exact_weights.shape != (led.n,):
                raise ValueError("one exact weight per instance required")
        led.cap_lower = wb.lower.copy()
        led.cap_upper = wb.upper.copy()
        led.cap_rank = wb.upper_raw.copy()
        led.status[led.status == STALE] = FROZEN
        led.status[led.status == CURRENT] = STALE
        led.j, led.h = led.h, 0
        led.epoch += 1
        led.pinned = exact_weights
        led.likelihood[:] = 0.0
        self.evidence = merged
        self.history.append(ev)
        self.snapshot = self._snapshot()
        return self

    def run_until(self, epsilon: float | None = None, max_steps: int | None = None) -> Session:
        taken = 0
        while True:
            if epsilon is not None and self.width <= epsilon:
                break
            if max_steps is not None and taken >= max_steps:
                break
            if not self.ledger.pending.size:
                break
            self.solve_next()
            taken += 1
        return self


def begin_session(net: BeliefNetwork, cs: Cutset | None = None, *, order: str = "desc", tight: bool = False,
                  frozen_rule: str = "sound", solver: InstanceSolver | None = None) -> Session:
    """Solve every instance under no evidence and return the complete prior state."""
    cs = cs if cs is not None else find_loop_cutset(net)
    session = Session(net, cs, solver or InstanceSolver(net, cs), order=order, tight=tight, frozen_rule=frozen_rule)
    for i in range(session.ledger.n):
        session._solve(i)
    return session


# ---------------------------------------------------------------------------
# trace output

TRACE_COLUMNS = (
    "step", "instance_index", "instance_w_upper", "evidence_epoch", "variable", "state",
    "lower", "upper", "width", "cumulative_work_units",
)


def fmt(x: float) -> str:
    return f"{x:.12g}"


def trace_rows(records: Iterable[TraceRecord], net: BeliefNetwork, targets: Sequence[str] | None = None):
    for rec in records:
        snap = rec.snapshot
        names = [n for n in (targets or snap.tracked) if n in snap.tracked]
        for name in names:
            lo, hi = snap.bounds(name)
            for k, label in enumerate(net.variable(name).states):
                yield [rec.step, rec.instance, fmt(rec.instance_w_upper), rec.epoch, name, label,
                       fmt(lo[k]), fmt(hi[k]), fmt(snap.width), rec.work_units]


def write_trace_csv(fh: IO[str], records: Iterable[TraceRecord], net: BeliefNetwork,
                    targets: Sequence[str] | None = None) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    writer.writerows(trace_rows(records, net, targets))
