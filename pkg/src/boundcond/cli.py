"""Command-line harness: validate, cutset, generate, run, fit."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .bounded import begin_session, fmt, write_trace_csv
from .concurrent import run_concurrent, write_concurrent_csv
from .conditioning import condition
from .convergence import fit_decay
from .cutset import Cutset, find_loop_cutset, instance_count, verify_cutset
from .errors import ContradictoryEvidence, CutsetError, ImpossibleEvidence, NetworkError, NetworkSyntaxError
from .network import (
    BeliefNetwork,
    Evidence,
    generate_random,
    network_from_dict,
    parse_evidence,
    parse_network,
    serialize_network,
    validate,
)
from .oracle import all_posteriors

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_IMPOSSIBLE = 4

MODES = ("exact", "bounded", "concurrent", "oracle")


@dataclass
class RunConfig:
    network: Path
    evidence: Path | None = None
    mode: str = "bounded"
    epsilon: float | None = None
    max_steps: int | None = None
    targets: list[str] = field(default_factory=list)
    cutsets: list[list[str]] = field(default_factory=list)
    seed: int = 0
    trace: Path | None = None
    fit: bool = False
    json: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.epsilon is not None and not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.max_steps is not None and self.max_steps < 0:
            raise ValueError("max-steps must be non-negative")


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None


def _load_network(path: Path) -> BeliefNetwork:
    try:
        return parse_network(_read(path))
    except NetworkError as exc:
        raise _Fail(EXIT_INVALID, f"{path}: {exc}") from None


def _cutset_from(net: BeliefNetwork, members: list[str]) -> Cutset:
    try:
        cs = Cutset.of(net, members)
    except (KeyError, CutsetError) as exc:
        raise _Fail(EXIT_INVALID, f"bad cutset {members}: {exc}") from None
    if not verify_cutset(net, cs):
        raise _Fail(EXIT_INVALID, f"{members} does not cut every loop")
    return cs


def _fmt_cutset(cs: Cutset) -> str:
    return f"cutset: [{', '.join(cs.members)}] instances: {instance_count(cs)}"


# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        data = json.loads(_read(args.network))
    except json.JSONDecodeError as exc:
        print(f"{args.network}: {NetworkSyntaxError(exc.msg, exc.lineno, exc.colno)}")
        return EXIT_INVALID
    try:
        net = network_from_dict(data)
    except NetworkError as exc:
        print(f"{args.network}: {exc}")
        return EXIT_INVALID
    report = validate(net)
    for line in report:
        print(line)
    if report:
        return EXIT_INVALID
    print(f"ok: {len(net.variables)} variables")
    return EXIT_OK


def cmd_cutset(args) -> int:
    net = _load_network(args.network)
    print(_fmt_cutset(find_loop_cutset(net, reverse_ties=args.reverse_ties)))
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        net = generate_random(args.nodes, args.max_parents, args.max_states, args.loops, args.seed, args.asymmetry)
    except ValueError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = serialize_network(net)
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise _Fail(EXIT_IO, f"cannot write {args.output}: {exc.strerror or exc}") from None
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _posterior_lines(net, targets, get):
    out = {}
    for name in targets:
        lo, hi = get(name)
        out[name] = {label: [float(lo[k]), float(hi[k])] for k, label in enumerate(net.variable(name).states)}
    return out


def cmd_run(config: RunConfig) -> int:
    net = _load_network(config.network)
    stream = []
    if config.evidence is not None:
        try:
            stream = parse_evidence(_read(config.evidence), net)
        except NetworkError as exc:
            raise _Fail(EXIT_INVALID, f"{config.evidence}: {exc}") from None
    for name in config.targets:
        if name not in net.names:
            raise _Fail(EXIT_INVALID, f"unknown target {name!r}")

    cutsets = [_cutset_from(net, m) for m in config.cutsets] or [find_loop_cutset(net)]
    summary: dict = {"mode": config.mode, "seed": config.seed}
    try:
        evidence = Evidence()
        for obs in stream:
            evidence = evidence.merge(obs.evidence)
    except ContradictoryEvidence as exc:
        raise _Fail(EXIT_INVALID, str(exc)) from None
    targets = config.targets or [n for n in net.names if n not in evidence]

    try:
        if config.mode == "oracle":
            post, p_e = all_posteriors(net, evidence)
            summary["evidence_probability"] = p_e
            summary["posteriors"] = _posterior_lines(net, targets, lambda n: (post[n], post[n]))
        elif config.mode == "exact":
            cs = cutsets[0]
            result = condition(net, cs, [o.evidence for o in stream])
            summary["cutset"] = list(cs.members)
            summary["instances"] = instance_count(cs)
            summary["evidence_probability"] = result.evidence_probability
            summary["posteriors"] = _posterior_lines(net, targets, lambda n: (result.posterior(net, n),) * 2)
        elif config.mode == "bounded":
            summary.update(_run_bounded(net, cutsets[0], stream, config, targets))
        else:
            if len(cutsets) == 1:
                cutsets.append(find_loop_cutset(net, reverse_ties=True))
            summary.update(_run_concurrent(net, cutsets, stream, config, targets))
    except ImpossibleEvidence as exc:
        summary["error"] = f"impossible evidence: {exc}"
        _emit(summary, config)
        return EXIT_IMPOSSIBLE
    _emit(summary, config)
    return EXIT_OK


def _run_bounded(net, cs, stream, config, targets) -> dict:
    session = begin_session(net, cs)
    budget = config.max_steps
    solves = 0
    queue = list(stream)
    while True:
        while queue and queue[0].at_step <= solves:
            session.observe(queue.pop(0).evidence)
        if not queue:
            before = session.steps
            session.run_until(config.epsilon, None if budget is None else budget - solves)
            solves += session.steps - before
            break
        if budget is not None and solves >= budget:
            break
        if session.ledger.pending.size:
            session.solve_next()
            solves += 1
        else:
            session.observe(queue.pop(0).evidence)

    if config.trace is not None:
        with _open_out(config.trace) as fh:
            write_trace_csv(fh, session.trace, net, config.targets or None)
    out = {
        "cutset": list(cs.members),
        "instances": instance_count(cs),
        "steps": solves,
        "work_units": session.steps,
        "epochs": session.epoch,
        "frozen": int((session.ledger.status == 2).sum()),
        "width": session.width,
        "bounds": _posterior_lines(net, [t for t in targets if t in session.snapshot.tracked], session.bounds),
    }
    if config.fit:
        pts = [(t, r.snapshot.width) for t, r in enumerate(r for r in session.trace if r.epoch == session.epoch)]
        if len(pts) >= 2:
            fit = fit_decay(pts)
            out["decay_k"], out["decay_residual"] = fit.k, fit.residual
    return out


def _run_concurrent(net, cutsets, stream, config, targets) -> dict:
    budget = config.max_steps
    if budget is None:
        budget = sum(instance_count(c) for c in cutsets) * (len(stream) + 1)
    run = run_concurrent(net, cutsets, budget, stream, epsilon=config.epsilon)
    if config.trace is not None:
        with _open_out(config.trace) as fh:
            write_concurrent_csv(fh, run, net, config.targets or None)
    comb = run.combined
    return {
        "cutsets": [list(c.members) for c in cutsets],
        "steps": run.work_units,
        "per_analysis_steps": [sum(1 for r in run.rows if r.analysis == a) for a in range(len(cutsets))],
        "width": comb.width,
        "bounds": _posterior_lines(net, [t for t in targets if t in comb.tracked], comb.bounds),
    }


def _open_out(path: Path):
    try:
        return open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot write {path}: {exc.strerror or exc}") from None


def _emit(summary: dict, config: RunConfig) -> None:
    if config.json:
        print(json.dumps(summary, indent=2, sort_keys=True))
        return
    for key in ("mode", "cutset", "cutsets", "instances", "steps", "work_units", "epochs", "frozen",
                "width", "evidence_probability", "decay_k", "decay_residual", "error"):
        if key in summary:
            value = summary[key]
            if isinstance(value, float):
                value = fmt(value)
            elif isinstance(value, list):
                value = "; ".join(f"[{', '.join(v)}]" if isinstance(v, list) else str(v) for v in value)
                value = value if "[" in value else f"[{value}]"
            print(f"{key}: {value}")
    table = summary.get("posteriors") or summary.get("bounds") or {}
    for name, states in table.items():
        for label, (lo, hi) in states.items():
            if "posteriors" in summary:
                print(f"{name}={label}: {fmt(lo)}")
            else:
                print(f"{name}={label}: [{fmt(lo)}, {fmt(hi)}]")


def cmd_fit(args) -> int:
    text = _read(args.trace)
    per_step: dict[int, tuple[int, float]] = {}
    try:
        for row in csv.DictReader(text.splitlines()):
            per_step.setdefault(int(row["step"]), (int(row["evidence_epoch"]), float(row["width"])))
    except (KeyError, ValueError) as exc:
        raise _Fail(EXIT_INVALID, f"{args.trace}: not a trace file ({exc})") from None
    if not per_step:
        raise _Fail(EXIT_INVALID, f"{args.trace}: empty trace")
    epoch = args.epoch if args.epoch is not None else max(e for e, _ in per_step.values())
    widths = [w for _, (e, w) in sorted(per_step.items()) if e == epoch]
    try:
        fit = fit_decay(list(enumerate(widths)))
    except ValueError as exc:
        raise _Fail(EXIT_INVALID, f"cannot fit epoch {epoch}: {exc}") from None
    print(f"epoch: {epoch}")
    print(f"points: {fit.points}")
    print(f"k: {fmt(fit.k)}")
    print(f"residual: {fmt(fit.residual)}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boundcond", description="Anytime bounded-conditioning inference.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a network file")
    p.add_argument("network", type=Path)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("cutset", help="print the heuristic loop cutset")
    p.add_argument("network", type=Path)
    p.add_argument("--reverse-ties", action="store_true", help="break degree ties by descending name")
    p.set_defaults(func=cmd_cutset)

    p = sub.add_parser("generate", help="write a random network")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--max-parents", type=int, default=3)
    p.add_argument("--max-states", type=int, default=2)
    p.add_argument("--loops", type=int, default=0)
    p.add_argument("--asymmetry", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="run inference and write a trace")
    p.add_argument("network", type=Path)
    p.add_argument("--evidence", type=Path)
    p.add_argument("--mode", choices=MODES, default="bounded")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--max-steps", type=int, help="solve budget after initialisation")
    p.add_argument("--target", action="append", default=[], help="restrict output to this variable")
    p.add_argument("--cutset", action="append", default=[], help="comma-separated cutset override (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", type=Path)
    p.add_argument("--fit", action="store_true", help="fit exp(-k(t+1)) to the last epoch")
    p.add_argument("--json", action="store_true", help="print the summary as JSON")
    p.set_defaults(func=None)

    p = sub.add_parser("fit", help="fit the decay constant of a trace CSV")
    p.add_argument("trace", type=Path)
    p.add_argument("--epoch", type=int)
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            try:
                config = RunConfig(
                    network=args.network, evidence=args.evidence, mode=args.mode, epsilon=args.epsilon,
                    max_steps=args.max_steps, targets=args.target,
                    cutsets=[[m.strip() for m in c.split(",") if m.strip()] for c in args.cutset],
                    seed=args.seed, trace=args.trace, fit=args.fit, json=args.json,
                )
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_USAGE
            return cmd_run(config)
        return args.func(args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
