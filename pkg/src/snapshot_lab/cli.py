"""Command-line interface: simulate / solve / enumerate / reduce / verify /
clique / bench over instance files.

Machine-readable outputs are canonical (sorted keys and id lists) so repeated
runs with identical flags produce byte-identical files; wall-clock timings
are only included behind --timings. Exit codes: 0 feasible/pass, 1
infeasible/fail/cap, 2 usage or input error. ``SNAPSHOT_LAB_LOG`` sets the
logging level.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from .cliques import NotACliqueError, clique_analysis
from .generator import GeneratorParams, instance_stream
from .model import (
    DynamicsMode,
    InvalidInstanceError,
    Move,
    SnapshotInstance,
)
from .reductions import (
    GADGET_IDS,
    check_equivalence,
    embed_target_set,
    gadget_deactivation_robust,
    gadget_sequential_k1,
    target_set_from_dict,
)
from .serialize import (
    canonical_json,
    instance_digest,
    instance_from_dict,
    instance_to_dict,
    load_instance_file,
    trace_jsonl,
)
from .solvers import SearchLimits, solve
from .dynamics import apply_ordering, run_simultaneous
from .verification import CHECK_IDS, CorpusError, check_lemma, feasible_snapshots, replay_corpus

log = logging.getLogger("snapshot_lab")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _parse_ids(raw: str) -> list[int]:
    raw = raw.strip()
    if not raw:
        return []
    try:
        return [int(x) for x in raw.split(",")]
    except ValueError:
        raise InvalidInstanceError([f"expected comma-separated node ids, got {raw!r}"]) from None


def _mode_override(args) -> DynamicsMode | None:
    if args.order is None and args.monotone is None:
        return None
    if args.order is None or args.monotone is None:
        raise InvalidInstanceError(["--order and --monotone must be given together"])
    return DynamicsMode(order=args.order, monotone=args.monotone == "true")


def _limits(args) -> SearchLimits:
    return SearchLimits(
        max_states=getattr(args, "max_states", None) or SearchLimits().max_states,
        max_steps=getattr(args, "max_steps", None),
    )


def instance_dot(instance: SnapshotInstance, seed: frozenset[int] = frozenset()) -> str:
    """DOT rendering with snapshot/seed coloring (output only, never parsed)."""
    lines = ["graph snapshot_instance {", "  node [style=filled];"]
    for v in range(instance.n):
        color = "white"
        if v in instance.snapshot:
            color = "lightblue"
        if v in seed:
            color = "orange" if v in instance.snapshot else "salmon"
        label = f"{instance.graph.labels[v]}\\nt={instance.thresholds[v]}"
        lines.append(f'  n{v} [label="{label}", fillcolor="{color}"];')
    for u, v in sorted(instance.graph.edges()):
        lines.append(f"  n{u} -- n{v};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _cmd_simulate(args) -> int:
    instance = load_instance_file(args.instance, mode_override=_mode_override(args))
    if args.replay:
        cert = json.loads(Path(args.replay).read_text(encoding="utf-8"))
        seed = frozenset(cert.get("seed", []))
        witness = cert.get("witness", {})
        if witness.get("type") == "simultaneous":
            result = run_simultaneous(
                instance.graph, instance.thresholds, seed, instance.mode,
                target=instance.snapshot, max_steps=args.max_steps,
            )
            replay_ok = result.matched and result.trace.match_time == witness["match_time"]
        elif witness.get("type") == "sequential":
            moves = [Move.from_wire(m) for m in witness.get("ordering", [])]
            prefix = witness.get("match_prefix", len(moves))
            result = apply_ordering(
                instance.graph, instance.thresholds, seed,
                [m.node for m in moves], instance.mode, target=instance.snapshot,
            )
            replay_ok = result.trace.match_time == prefix
        else:
            raise InvalidInstanceError([f"certificate witness type {witness.get('type')!r} unknown"])
        _emit(trace_jsonl(result), args.out)
        return EXIT_OK if replay_ok else EXIT_FAIL
    if args.seed is None:
        raise InvalidInstanceError(["simulate needs --seed (or --replay CERT)"])
    seed = frozenset(_parse_ids(args.seed))
    if instance.mode.simultaneous:
        result = run_simultaneous(
            instance.graph, instance.thresholds, seed, instance.mode,
            target=instance.snapshot, max_steps=args.max_steps,
        )
    else:
        if args.ordering is None:
            raise InvalidInstanceError(["sequential simulate needs --ordering LIST"])
        result = apply_ordering(
            instance.graph, instance.thresholds, seed,
            _parse_ids(args.ordering), instance.mode, target=instance.snapshot,
        )
    _emit(trace_jsonl(result), args.out)
    if args.dot:
        Path(args.dot).write_text(instance_dot(instance, seed), encoding="utf-8")
    return EXIT_OK if result.matched else EXIT_FAIL


def _cmd_solve(args) -> int:
    instance = load_instance_file(args.instance, mode_override=_mode_override(args))
    outcome = solve(instance, _limits(args))
    payload = outcome.to_dict(include_timings=args.timings)
    if args.format == "text":
        lines = [f"verdict: {payload['verdict']}"]
        if "seed" in payload:
            lines.append(f"seed: {payload['seed']}")
            lines.append(f"witness: {payload['witness']}")
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(canonical_json(payload), args.out)
    if args.dot:
        seed = frozenset(outcome.certificate.seed) if outcome.certificate else frozenset()
        Path(args.dot).write_text(instance_dot(instance, seed), encoding="utf-8")
    return EXIT_OK if outcome.feasible else EXIT_FAIL


def _cmd_enumerate(args) -> int:
    instance = load_instance_file(args.instance, mode_override=_mode_override(args))
    budget = args.budget if args.budget is not None else instance.budget
    snapshots = feasible_snapshots(
        instance.graph, instance.thresholds, budget, instance.mode, _limits(args)
    )
    payload = {
        "budget": budget,
        "dynamics": {"order": instance.mode.order, "monotone": instance.mode.monotone},
        "count": len(snapshots),
        "snapshots": sorted(sorted(s) for s in snapshots),
    }
    _emit(canonical_json(payload), args.out)
    return EXIT_OK


def _cmd_reduce(args) -> int:
    data = json.loads(Path(args.instance).read_text(encoding="utf-8"))
    if args.gadget == "dummy":
        source = instance_from_dict(data)
        reduced = gadget_deactivation_robust(source)
    else:
        source = target_set_from_dict(data)
        if args.gadget == "embed":
            mode = DynamicsMode(order=args.order or "simultaneous", monotone=True)
            reduced = embed_target_set(source, mode)
        else:
            reduced = gadget_sequential_k1(source)
    if args.out:
        _emit(canonical_json(instance_to_dict(reduced)), args.out)
    if args.check:
        mode = None
        if args.gadget == "embed":
            mode = DynamicsMode(order=args.order or "simultaneous", monotone=True)
        verdict = check_equivalence(args.gadget, source, _limits(args), mode=mode)
        sys.stdout.write(canonical_json(verdict.to_dict()))
        return EXIT_OK if verdict.agree else EXIT_FAIL
    if not args.out:
        _emit(canonical_json(instance_to_dict(reduced)), None)
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.corpus:
        report = replay_corpus()
        if args.format == "json":
            _emit(canonical_json(report.to_dict()), args.out)
        else:
            _emit(report.format_table() + "\n", args.out)
        return EXIT_OK if report.all_passed else EXIT_FAIL
    if not args.lemma:
        raise InvalidInstanceError(["verify needs --lemma ID or --corpus"])
    params = GeneratorParams(
        n_min=args.min_n,
        n_max=args.max_n,
        edge_prob=args.edge_prob,
        threshold_law=args.law,
        budget_min=args.budget_min,
        budget_max=args.budget_max,
        rng_seed=args.rng_seed,
    )
    verdict = check_lemma(args.lemma, instance_stream(params), args.trials, _limits(args))
    written = []
    if verdict.violations:
        root = Path(args.violations_dir) / args.lemma
        root.mkdir(parents=True, exist_ok=True)
        grouped: dict[str, dict] = {}
        for violation in verdict.violations:
            digest = instance_digest(instance_from_dict(violation["instance"]))
            doc = grouped.setdefault(
                digest, dict(violation["instance"], witnesses=[])
            )
            doc["witnesses"].append(violation["witness"])
        for digest in sorted(grouped):
            path = root / f"{digest}.json"
            path.write_text(canonical_json(grouped[digest]), encoding="utf-8")
            written.append(str(path))
    payload = verdict.to_dict(include_timings=args.timings)
    payload["violation_files"] = written
    _emit(canonical_json(payload), args.out)
    return EXIT_OK if verdict.ok else EXIT_FAIL


def _cmd_clique(args) -> int:
    instance = load_instance_file(args.instance, mode_override=_mode_override(args))
    analysis = clique_analysis(instance, strict_property2=args.strict_p2)
    outcome = analysis.outcome
    if args.format == "json":
        payload = outcome.to_dict(include_timings=args.timings)
        payload["rules"] = [r.to_dict() for r in analysis.reports]
        _emit(canonical_json(payload), args.out)
    else:
        lines = []
        for r in analysis.reports:
            line = f"{r.rule}: {r.action}"
            if r.nodes:
                line += f" {list(r.nodes)}"
            if args.explain:
                line += f"  -- {r.justification}"
            lines.append(line)
        lines.append(f"verdict: {outcome.verdict}")
        if outcome.certificate:
            lines.append(f"seed: {sorted(outcome.certificate.seed)}")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if outcome.feasible else EXIT_FAIL


def _cmd_bench(args) -> int:
    rows = []
    for path in sorted(Path(args.dir).glob("*.json")):
        instance = load_instance_file(path)
        outcome = solve(instance, _limits(args))
        row = {
            "digest": instance_digest(instance),
            "mode": instance.mode.describe(),
            "n": instance.n,
            "k": instance.budget,
            "verdict": outcome.verdict,
            "states_expanded": outcome.stats.states_expanded,
        }
        if args.timings:
            row["wall_time"] = f"{outcome.stats.wall_time:.6f}"
        rows.append(row)
    buf = io.StringIO()
    fields = ["digest", "mode", "n", "k", "verdict", "states_expanded"]
    if args.timings:
        fields.append("wall_time")
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _add_mode_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--order", choices=["simultaneous", "sequential"],
                   help="dynamics order override (only when the file omits dynamics)")
    p.add_argument("--monotone", choices=["true", "false"],
                   help="seed-commitment override (only when the file omits dynamics)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snapshot-lab",
        description="Feasibility of diffusion snapshots under threshold best-response dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run dynamics from a given seed, or replay a certificate")
    p.add_argument("--instance", required=True)
    p.add_argument("--seed", help="comma-separated node ids (empty string for the empty seed)")
    p.add_argument("--ordering", help="sequential selection order, comma-separated node ids")
    p.add_argument("--replay", help="certificate JSON produced by `solve`")
    p.add_argument("--max-steps", type=int)
    p.add_argument("--out")
    p.add_argument("--dot", help="write a DOT rendering with snapshot/seed coloring")
    _add_mode_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("solve", help="decide snapshot feasibility and emit a certificate")
    p.add_argument("--instance", required=True)
    p.add_argument("--max-states", type=int)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--timings", action="store_true")
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.add_argument("--out")
    p.add_argument("--dot")
    _add_mode_flags(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("enumerate", help="list every feasible snapshot for a budget")
    p.add_argument("--instance", required=True)
    p.add_argument("--budget", type=int)
    p.add_argument("--max-states", type=int)
    p.add_argument("--out")
    _add_mode_flags(p)
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("reduce", help="build a reduction gadget instance, optionally checking equivalence")
    p.add_argument("--gadget", choices=list(GADGET_IDS), required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--order", choices=["simultaneous", "sequential"],
                   help="target order dynamics for the identity embedding")
    p.add_argument("--check", action="store_true")
    p.add_argument("--max-states", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("verify", help="run structural checks on random instances, or replay the corpus")
    p.add_argument("--lemma", choices=list(CHECK_IDS))
    p.add_argument("--corpus", action="store_true")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--min-n", type=int, default=3)
    p.add_argument("--max-n", type=int, default=7)
    p.add_argument("--edge-prob", type=float, default=0.5)
    p.add_argument("--law", choices=["uniform0", "uniform1", "le2", "mixed"], default="mixed")
    p.add_argument("--budget-min", type=int, default=1)
    p.add_argument("--budget-max", type=int, default=2)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--violations-dir", default="violations")
    p.add_argument("--max-states", type=int)
    p.add_argument("--timings", action="store_true")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("clique", help="apply the clique preprocessing rules and solve")
    p.add_argument("--instance", required=True)
    p.add_argument("--explain", action="store_true")
    p.add_argument("--strict-p2", action="store_true",
                   help="apply the all-sizes reading of the low-threshold-outside rule (comparison only)")
    p.add_argument("--timings", action="store_true")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.add_argument("--out")
    _add_mode_flags(p)
    p.set_defaults(func=_cmd_clique)

    p = sub.add_parser("bench", help="solve every instance in a directory, emit CSV")
    p.add_argument("--dir", required=True)
    p.add_argument("--out")
    p.add_argument("--max-states", type=int)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--timings", action="store_true")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    level = os.environ.get("SNAPSHOT_LAB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInstanceError, NotACliqueError, CorpusError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
