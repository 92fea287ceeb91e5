"""slotdict command line: gen | run | tree | sweep | xor-demo.

Exit codes: 0 ok, 1 usage, 2 verification failure, 3 I/O.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import sys
from typing import Optional, Sequence

from . import harness, transfer_tree, workload
from .lazysort import BudgetError, DictError
from .slot_model import TraceFormatError, TraceHeader, load_trace, write_header, write_records
from .xor_demo import run_demo

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x, 0) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


@contextlib.contextmanager
def _output(path: Optional[str], mode: str = "w"):
    if path is None or path == "-":
        yield sys.stdout.buffer if "b" in mode else sys.stdout
    else:
        with open(path, mode) as fh:
            yield fh


def cmd_gen(args) -> int:
    U = args.U if args.U is not None else args.n * args.n
    try:
        seq = workload.generate(args.n, U, args.seed, include_queries=not args.no_queries,
                                value_universe=args.V)
    except workload.WorkloadError as exc:
        raise UsageError(str(exc)) from None
    with _output(args.o, "wb") as out:
        out.write(workload.serialize(seq))
    return EXIT_OK


def _read_stream(path: str) -> workload.OperationSequence:
    if path == "-":
        return workload.deserialize(sys.stdin.buffer.read())
    with open(path, "rb") as fh:
        return workload.deserialize(fh.read())


def _budget(args, n: int) -> Optional[int]:
    if args.budget_bits is not None and args.wasted_bits_k is not None:
        raise UsageError("give --budget-bits or --wasted-bits-k, not both")
    if args.wasted_bits_k is not None:
        try:
            return harness.budget_for_k(n, args.wasted_bits_k)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return args.budget_bits


def cmd_run(args) -> int:
    if args.dict not in harness.DICT_NAMES:
        raise UsageError(f"unknown dictionary {args.dict!r}; choose from {', '.join(harness.DICT_NAMES)}")
    seq = _read_stream(args.stream)
    budget = _budget(args, seq.n)
    try:
        d = harness.make_dict(args.dict, seq.n, seq.U, budget, V=args.V, seed=args.seed,
                              levels=args.levels, record_trace=args.trace_out is not None)
    except (ValueError, BudgetError) as exc:
        raise UsageError(str(exc)) from None
    try:
        rep = harness.run_sequence(d, seq, verify=args.verify, check_budget=args.check_budget)
    except harness.VerificationError as exc:
        print(f"verification failed at op {exc.op_index}: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except harness.BudgetViolation as exc:
        print(f"budget violated at op {exc.op_index}: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except DictError as exc:
        print(f"dictionary error: {exc!r}", file=sys.stderr)
        return EXIT_VERIFY
    if args.trace_out is not None:
        trace = d.slots.trace
        width = max(1, (seq.U - 1).bit_length())
        with open(args.trace_out, "w") as fh:
            write_header(fh, TraceHeader(seq.n, seq.n_meta, width))
            write_records(fh, trace.times, trace.addrs, trace.kinds)
    with _output(args.o, "a") as out:
        out.write(rep.to_json() + "\n")
    return EXIT_OK


def tree_outputs(records, spec: transfer_tree.TreeSpec) -> tuple[str, str, dict]:
    """Node CSV text, level CSV text and the conservation figures for a trace."""
    costs = transfer_tree.assign_costs(records, spec)
    probes = transfer_tree.probe_per_node(records, spec)
    rows = transfer_tree.level_summary(costs, probes, spec)
    nodes, levels = io.StringIO(), io.StringIO()
    transfer_tree.write_node_csv(nodes, costs, probes, spec)
    transfer_tree.write_summary_csv(levels, rows)
    touches, addrs = transfer_tree.distinct_touches(records, spec)
    check = {
        "sum_cost": sum(costs.values()),
        "touches": touches,
        "addresses": addrs,
        "probe_sums": sorted({r.sum_probe for r in rows}),
    }
    return nodes.getvalue(), levels.getvalue(), check


def cmd_tree(args) -> int:
    with open(args.trace) as fh:
        header, records = load_trace(fh)
    n = args.n if args.n is not None else header.N
    # bulk loading happens before the first meta-operation and is not charged
    records = [r for r in records if r[0] >= 0]
    try:
        if args.branching is not None:
            spec = transfer_tree.build_uniform_spec(n, args.branching)
        else:
            spec = transfer_tree.build_spec(n, args.k, args.c)
    except transfer_tree.TreeSpecError as exc:
        raise UsageError(str(exc)) from None
    try:
        nodes, levels, chk = tree_outputs(records, spec)
    except transfer_tree.TreeSpecError as exc:
        raise UsageError(str(exc)) from None
    prefix = args.o or "tree"
    with open(f"{prefix}.nodes.csv", "w") as fh:
        fh.write(nodes)
    with open(f"{prefix}.levels.csv", "w") as fh:
        fh.write(levels)
    lhs, rhs = chk["sum_cost"], chk["touches"] - chk["addresses"]
    print(f"widths {list(spec.widths)}")
    print(f"sum cost = {lhs}; touches - addresses = {chk['touches']} - {chk['addresses']} = {rhs}")
    print(f"per-level probe sums: {chk['probe_sums']}")
    if lhs != rhs or len(chk["probe_sums"]) > 1:
        print("conservation identity FAILED", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        rows = harness.sweep(args.n, args.k, args.seeds, jobs=args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with _output(args.o) as out:
        if args.gnuplot:
            out.write("# " + " ".join(harness.SWEEP_FIELDS) + "\n")
            for r in rows:
                out.write(" ".join(str(getattr(r, f)) for f in harness.SWEEP_FIELDS) + "\n")
        else:
            harness.write_rows(out, rows, harness.SWEEP_FIELDS)
    return EXIT_OK


def cmd_xor_demo(args) -> int:
    rep = run_demo(U=args.U)
    for line in rep.lines():
        print(line)
    if not rep.ok:
        print("xor demo assertion failed", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="slotdict", description="Slot-model dictionary benchmarks and probe accounting.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a hard-distribution operation stream")
    g.add_argument("-n", type=int, required=True)
    g.add_argument("-U", type=int, help="key universe (default n^2)")
    g.add_argument("-V", type=int, help="attach values drawn from [V]")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--no-queries", action="store_true")
    g.add_argument("-o", help="output file (default stdout)")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="play a stream through one dictionary")
    r.add_argument("stream", help="operation stream file, or - for stdin")
    r.add_argument("--dict", default="lazysort", help=f"one of {', '.join(harness.DICT_NAMES)}")
    r.add_argument("-V", type=int, default=16, help="key split for kv-lazysort (must divide U)")
    r.add_argument("--seed", type=int, default=0, help="hash seed for linear-probe")
    r.add_argument("--budget-bits", type=int)
    r.add_argument("--wasted-bits-k", type=int, help="budget n * ceil(log^(k) n) bits")
    r.add_argument("--levels", type=int, help="force the number of lazy levels")
    r.add_argument("--verify", action="store_true", help="check every answer against a set")
    r.add_argument("--check-budget", action="store_true", help="assert aux bits <= budget after every op")
    r.add_argument("--trace-out", help="write the slot access trace here")
    r.add_argument("-o", help="append the JSON report line here (default stdout)")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("tree", help="transfer-tree accounting of a saved trace")
    t.add_argument("trace")
    t.add_argument("-n", type=int, help="leaves (default: meta-operation count in the header)")
    t.add_argument("-k", type=int, default=1)
    t.add_argument("-c", type=float, default=1.0, help="tree constant")
    t.add_argument("--branching", type=int, help="use a constant-branching tree instead")
    t.add_argument("-o", help="CSV prefix (default 'tree')")
    t.set_defaults(func=cmd_tree)

    s = sub.add_parser("sweep", help="amortized moves over (n, k, seed)")
    s.add_argument("-n", type=_int_list, required=True, help="comma-separated sizes")
    s.add_argument("-k", type=_int_list, default=[1, 2, 3])
    s.add_argument("--seeds", type=_int_list, default=[0])
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--gnuplot", action="store_true", help="space-separated columns, '#' header")
    s.add_argument("-o")
    s.set_defaults(func=cmd_sweep)

    x = sub.add_parser("xor-demo", help="three-cell XOR construction")
    x.add_argument("-U", type=int, default=1000)
    x.set_defaults(func=cmd_xor_demo)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"slotdict: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, workload.ParseError, TraceFormatError) as exc:
        print(f"slotdict: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
