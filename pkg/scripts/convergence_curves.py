#!/usr/bin/env python3
"""Width-versus-solves curves for the analytical models and an empirical run.

Writes one CSV with columns (series, t, width): the equal-weight worst case
and the homogeneous p-binomial case for an n-root cutset (measured on the
constructed network, alongside the formula), plus the first-epoch trace of a
fixture network with its fitted decay constant.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from boundcond.bounded import begin_session
from boundcond.conditioning import condition
from boundcond.convergence import binomial_width, class_boundaries, fit_decay, homogeneous_network, worst_case_width
from boundcond.cutset import find_loop_cutset
from boundcond.network import Evidence, parse_evidence, parse_network

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def measured(n: int, p: float) -> list[float]:
    net = homogeneous_network(n, p)
    cs = find_loop_cutset(net)
    ev = Evidence({"Z00": 0})
    s = begin_session(net, cs).observe(ev, exact_weights=condition(net, cs, [ev]).weights.weights)
    widths = [s.width]
    while s.ledger.pending.size:
        s.solve_next()
        widths.append(s.width)
    return widths


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--p", type=float, default=0.75)
    ap.add_argument("-o", "--output", type=Path)
    args = ap.parse_args()

    rows = []
    for t, w in enumerate(measured(args.n, 0.5)):
        rows += [("worst_measured", t, w), ("worst_formula", t, worst_case_width(args.n, t))]
    for t, w in enumerate(measured(args.n, args.p)):
        rows.append((f"binomial_measured_p{args.p}", t, w))
    for m, t in enumerate(class_boundaries(args.n)):
        rows.append((f"binomial_formula_p{args.p}", t, binomial_width(args.n, args.p, m)))

    net = parse_network((FIXTURES / "icu_like_37.json").read_text())
    first = parse_evidence((FIXTURES / "icu_like_37_stream.json").read_text(), net)[0].evidence
    s = begin_session(net).observe(first).run_until()
    trace = [(t, r.snapshot.width) for t, r in enumerate(r for r in s.trace if r.epoch == 1)]
    rows += [("icu_like_37_epoch1", t, w) for t, w in trace]
    fit = fit_decay(trace)
    print(f"icu_like_37 epoch 1: k = {fit.k:.6g}, residual = {fit.residual:.6g}", file=sys.stderr)

    fh = open(args.output, "w", newline="") if args.output else sys.stdout
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(("series", "t", "width"))
    writer.writerows((name, t, f"{w:.12g}") for name, t, w in rows)
    if args.output:
        fh.close()


if __name__ == "__main__":
    main()
