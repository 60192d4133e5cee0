"""``syncheck`` command-line interface.

Every command prints a JSON report (or a short text rendering with
``--pretty``) and signals its outcome through the exit code:

====  ==========================================================
0     clean / synchronisable / equal / solution found
1     network violates well-formedness rules
2     input file could not be read or parsed
10    not synchronisable / trace sets differ / nothing found
11    topology is not a tree
12    command needs every state final, file declares finals
13    subset construction exceeded ``SYNCHECK_MAX_STATES``
====  ==========================================================
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__, pcp, tree
from .automata import StateExplosion
from .io import ParseError, dump_network, format_word, load_network, load_pcp, parse_network
from .network import TreeInfo, classify, topology, validate
from .semantics import (Bounds, Semantics, WrongFinalMode, bounded_trace_equality, realize_trace,
                        replays, traces)

OK, VIOLATIONS, PARSE_ERROR = 0, 1, 2
NEGATIVE, NOT_A_TREE, WRONG_FINAL_MODE, STATE_EXPLOSION = 10, 11, 12, 13


class SelfCheckFailed(RuntimeError):
    pass


def _digest(path: str) -> dict:
    data = Path(path).read_bytes()
    return {"path": path, "sha256": hashlib.sha256(data).hexdigest()}


def _report(command, path, result, bounds=None, complete=None) -> dict:
    return {"command": command, "inputs": [_digest(path)], "result": result,
            "bounds": bounds, "complete": complete}


def cmd_validate(args):
    n = load_network(args.path)
    violations = validate(n)
    result = {"valid": not violations,
              "violations": [{"code": v.code, "detail": v.detail} for v in violations]}
    return _report("validate", args.path, result), (VIOLATIONS if violations else OK)


def _failure_dict(f: tree.Failure) -> dict:
    return {"pair": list(f.pair), "condition": f.condition.value,
            "witness_word": format_word(f.witness_word),
            "lifted_trace": None if f.lifted_trace is None else format_word(f.lifted_trace),
            "lifted_execution": None if f.lifted_execution is None
            else format_word(f.lifted_execution.labels)}


def cmd_decide_tree(args):
    n = load_network(args.path)
    try:
        verdict = tree.decide(n, lift=not args.no_lift)
    except tree.InvalidNetwork as e:
        result = {"error": "invalid-network",
                  "violations": [{"code": v.code, "detail": v.detail} for v in e.violations]}
        return _report("decide-tree", args.path, result), VIOLATIONS
    except tree.NotATree as e:
        result = {"error": "not-a-tree", "reason": e.info.reason, "witness": list(e.info.witness)}
        return _report("decide-tree", args.path, result), NOT_A_TREE
    for f in verdict.failures:
        if f.lifted_execution is not None and not replays(n, f.lifted_execution):
            raise SelfCheckFailed(f"lifted execution for {f.pair} does not replay")
    witness = verdict.witness
    result = {"verdict": verdict.result.value,
              "failures": [_failure_dict(f) for f in verdict.failures],
              "witness_trace": None if witness is None else format_word(witness)}
    return _report("decide-tree", args.path, result), (OK if verdict.synchronisable else NEGATIVE)


def cmd_traces(args):
    n = load_network(args.path)
    sem = Semantics(args.semantics)
    bounds = Bounds(max_steps=args.max_steps, buffer_bound=args.buffer_bound,
                    max_sends=args.max_len)
    ts = traces(n, sem, bounds)
    result = {"semantics": sem.value, "count": len(ts),
              "traces": [format_word(t) for t in ts.sorted()]}
    return _report("traces", args.path, result, bounds.as_dict(), ts.complete), OK


def cmd_compare(args):
    n = load_network(args.path)
    sem = Semantics(args.semantics)
    cmp = bounded_trace_equality(n, args.max_len, args.buffer_bound, sem)
    result = {"equal": cmp.equal_up_to_bounds,
              "status": "EQUAL" if cmp.equal_up_to_bounds else "UNEQUAL",
              "semantics": sem.value,
              "witness": None if cmp.witness is None else format_word(cmp.witness),
              "witness_side": cmp.side,
              "shortest_witness": None if cmp.shortest_witness is None
              else format_word(cmp.shortest_witness),
              "sync_traces": len(cmp.sync), "async_traces": len(cmp.asynchronous)}
    if cmp.witness is not None:
        owner = sem if cmp.side == "async" else Semantics.SYNC
        bb = args.buffer_bound if owner is not Semantics.SYNC else None
        execution = realize_trace(n, owner, cmp.witness, bb)
        if execution is None or not replays(n, execution):
            raise SelfCheckFailed("comparison witness does not replay")
        result["witness_execution"] = format_word(execution.labels)
    bounds = {"max_len": args.max_len, "buffer_bound": args.buffer_bound}
    complete = cmp.sync.complete and cmp.asynchronous.complete
    return (_report("compare", args.path, result, bounds, complete),
            OK if cmp.equal_up_to_bounds else NEGATIVE)


def cmd_encode_pcp(args):
    inst = load_pcp(args.path)
    text = dump_network(pcp.encode(inst))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return None, OK


def _load_pcp_or_network(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        return None, parse_network(text)
    except ParseError:
        inst = load_pcp(path)
        return inst, pcp.encode(inst)


def cmd_pcp_search(args):
    inst, net = _load_pcp_or_network(args.path)
    execution, complete, stats = pcp.search_accepting_trace(
        net, max_sends=args.max_sends, buffer_bound=args.buffer_bound, max_steps=args.max_steps)
    result = {"found": execution is not None, "stats": stats}
    if execution is not None:
        if not replays(net, execution):
            raise SelfCheckFailed("accepting execution does not replay")
        solution = pcp.solution_from_execution(execution)
        result["indices"] = list(solution.indices)
        result["trace"] = format_word(execution.trace)
        result["final_state"] = dict(zip(net.participants, execution.final.locals))
        if inst is not None:
            if not pcp.check_solution(inst, solution.indices):
                raise SelfCheckFailed("indices read from the execution are not a solution")
            result["solution_checked"] = True
    bounds = {"max_sends": args.max_sends, "buffer_bound": args.buffer_bound,
              "max_steps": args.max_steps}
    return (_report("pcp-search", args.path, result, bounds, complete),
            OK if execution is not None else NEGATIVE)


def cmd_topology(args):
    n = load_network(args.path)
    t = topology(n)
    if args.dot:
        sys.stdout.write(t.to_dot())
        return None, OK
    info = classify(t)
    shape = ({"tree": True, "root": info.root, "parent": dict(info.parent)}
             if isinstance(info, TreeInfo) else
             {"tree": False, "reason": info.reason, "witness": list(info.witness)})
    result = {"vertices": list(t.vertices), "edges": [list(e) for e in sorted(t.edges)], **shape}
    return _report("topology", args.path, result), OK


def render(report: dict) -> str:
    """Short human-readable rendering of a report."""
    lines = [f"{report['command']}: {report['inputs'][0]['path']}"]
    for key, value in report["result"].items():
        if isinstance(value, list) and value and isinstance(value[0], (dict, list)):
            lines.append(f"  {key}:")
            for item in value:
                lines.append(f"    - {_flat(item)}")
        else:
            lines.append(f"  {key}: {_flat(value)}")
    if report.get("bounds"):
        lines.append(f"  bounds: {_flat(report['bounds'])}")
    if report.get("complete") is not None:
        lines.append(f"  complete: {report['complete']}")
    lines.append(f"  wall time: {report['wall_time']:.3f}s")
    return "\n".join(lines) + "\n"


def _flat(value) -> str:
    if isinstance(value, dict):
        return ", ".join(f"{k}={_flat(v)}" for k, v in value.items())
    if isinstance(value, list):
        return " ".join(_flat(v) for v in value) if value else "ε"
    return str(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="syncheck", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("path")
        p.add_argument("--pretty", action="store_true", help="human-readable output")
        p.set_defaults(func=func)
        return p

    command("validate", cmd_validate, "check a network file for well-formedness")
    p = command("decide-tree", cmd_decide_tree, "decide synchronisability of a tree network")
    p.add_argument("--no-lift", action="store_true", help="skip lifting witnesses to traces")
    p = command("traces", cmd_traces, "enumerate bounded trace sets")
    p.add_argument("--semantics", choices=[s.value for s in Semantics], default="mailbox")
    p.add_argument("--max-len", type=int, required=True, help="maximum number of sends")
    p.add_argument("--buffer-bound", type=int, default=None)
    p.add_argument("--max-steps", type=int, default=None, help="maximum number of transitions")
    p = command("compare", cmd_compare, "compare synchronous and asynchronous trace sets")
    p.add_argument("--semantics", choices=["mailbox", "p2p"], default="mailbox")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--buffer-bound", type=int, required=True)
    p = command("encode-pcp", cmd_encode_pcp, "encode a PCP instance as a mailbox network")
    p.add_argument("-o", "--output", help="write the network here instead of stdout")
    p = command("pcp-search", cmd_pcp_search, "search an encoded PCP instance for a solution")
    p.add_argument("--max-sends", type=int, default=40)
    p.add_argument("--buffer-bound", type=int, default=12)
    p.add_argument("--max-steps", type=int, default=None)
    p = command("topology", cmd_topology, "show the communication topology")
    p.add_argument("--dot", action="store_true", help="emit Graphviz DOT")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        report, code = args.func(args)
    except (ParseError, OSError) as e:
        print(f"syncheck: {args.path}: {e}", file=sys.stderr)
        return PARSE_ERROR
    except WrongFinalMode as e:
        print(f"syncheck: {e}", file=sys.stderr)
        return WRONG_FINAL_MODE
    except StateExplosion as e:
        print(f"syncheck: {e}", file=sys.stderr)
        return STATE_EXPLOSION
    if report is not None:
        report["wall_time"] = round(time.perf_counter() - started, 6)
        if args.pretty:
            sys.stdout.write(render(report))
        else:
            sys.stdout.write(json.dumps(report, sort_keys=True, default=str) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
