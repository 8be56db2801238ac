"""Command-line entry point: ``dctlearn <subcommand> ...``.

Exit codes are 0 on success, 1 for usage errors and 2 for bad input data.
Set ``DCT_LOG`` to ``error``, ``info`` or ``debug`` for diagnostics on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .dct import construct_cdct, moral_components, residual_sets
from .genbench import (
    DEFAULT_RHO,
    FAMILIES,
    GenConfig,
    aggregates_csv,
    generate,
    ic_ratio,
    records_csv,
    run_benchmark,
)
from .graphs import Dag, GraphError, MixedGraph, parse_graph, serialize_graph
from .meek import OrientationState, essential_graph
from .mvis import lower_bound, mvis_dct, mvis_enumeration
from .policy import POLICIES, ManualOracle, Oracle

log = logging.getLogger("dctlearn")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read(path: str) -> MixedGraph:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise GraphError(f"cannot read {path}: {exc.strerror}") from None
    return parse_graph(text)


def _read_dag(path: str, what: str) -> Dag:
    g = _read(path)
    if not g.is_dag():
        raise GraphError(f"{what} expects a DAG file (only 'd' edges, acyclic); run 'essential' on a DAG instead")
    return g.to_dag()


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_gen(a) -> None:
    cfg = GenConfig(a.family, a.n, a.rho, a.seed, a.extra)
    d = generate(cfg)
    comment = f"family={a.family} n={a.n} seed={a.seed}" + (f" rho={a.rho}" if a.family == "er-moral" else "")
    _emit(serialize_graph(d, [comment]), a.output)


def cmd_essential(a) -> None:
    d = _read_dag(a.graph, "essential")
    _emit(serialize_graph(essential_graph(d).pdag), a.output)


def cmd_dct(a) -> None:
    d = _read_dag(a.graph, "dct")
    comps = []
    for sub, vmap in moral_components(d):
        t, c = construct_cdct(sub)
        name = [sorted(vmap[v] for v in cl) for cl in t.cliques]
        comps.append({
            "vertices": vmap,
            "cliques": name,
            "dct_edges": [{"a": i, "b": j, "kind": t.kind(i, j)} for i, j in t.edges],
            "cdct_nodes": [sorted(comp) for comp in c.components],
            "cdct_edges": [list(e) for e in c.edges],
            "residuals": [sorted(vmap[v] for v in r) for r in residual_sets(c)],
        })
    _emit(_json({"n": d.n, "components": comps}), a.output)


def cmd_mvis(a) -> None:
    d = _read_dag(a.graph, "mvis")
    vis = mvis_dct(d) if a.method == "dct" else mvis_enumeration(d)
    out = vis.to_json()
    out["method"] = a.method
    _emit(_json(out), a.output)


def cmd_lower_bound(a) -> None:
    d = _read_dag(a.graph, "lower-bound")
    _emit(_json({"lower_bound": lower_bound(essential_graph(d))}), a.output)


def _ask_stdin(v: int, nbrs: list[int]) -> list[int]:
    while True:
        print(f"intervene on {v}; undirected neighbours {nbrs}", file=sys.stderr)
        print("  which of them does it point to? (space separated, blank for none): ", end="", file=sys.stderr, flush=True)
        line = sys.stdin.readline()
        if not line:
            raise GraphError("input ended before the graph was oriented")
        try:
            got = [int(t) for t in line.split()]
        except ValueError:
            print("  please enter vertex ids", file=sys.stderr)
            continue
        if set(got) <= set(nbrs):
            return got
        print(f"  {sorted(set(got) - set(nbrs))} are not listed neighbours", file=sys.stderr)


def cmd_simulate(a) -> None:
    g = _read(a.graph)
    policy = POLICIES[a.policy]
    if a.interactive:
        if g.bidirected:
            raise GraphError("interactive mode needs a DAG or an essential graph")
        state = essential_graph(g.to_dag()) if g.is_dag() else OrientationState.from_mixed(g)
        o = ManualOracle(state, _ask_stdin)
        lg = policy(o, a.seed)
        _emit(_json({"targets": lg.targets, "total": lg.total, "arcs": sorted(map(list, o.state.arcs))}), a.output)
        return
    if not g.is_dag():
        raise GraphError("simulate expects a DAG file; use --interactive for an essential graph")
    d = g.to_dag()
    o = Oracle(d)
    lg = policy(o, a.seed)
    m = mvis_dct(d).size
    ratio, zero = ic_ratio(lg.total, m)
    out = {
        "targets": lg.targets,
        "total": lg.total,
        "mvis_size": m,
        "lower_bound": lower_bound(essential_graph(d)),
        "ic_ratio": ratio,
    }
    if zero:
        out["flag"] = "m=0"
    _emit(_json(out), a.output)


def cmd_bench(a) -> None:
    families = a.family or list(FAMILIES)
    sizes = a.n or [15]
    policies = a.policy or list(POLICIES)
    records, agg = run_benchmark(families, sizes, policies, a.trials, a.seed, a.rho, a.extra, a.jobs)
    if a.output and a.output != "-":
        out = Path(a.output)
        out.write_text(records_csv(records), encoding="utf-8", newline="\n")
        out.with_name(out.stem + "_aggregate.csv").write_text(aggregates_csv(agg), encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(records_csv(records) + "\n" + aggregates_csv(agg))


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dctlearn", description="Active causal structure learning with directed clique trees.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def graph_cmd(name, help_, func, out_help="output file (default stdout)"):
        s = sub.add_parser(name, help=help_, description=help_)
        s.add_argument("--graph", required=True, metavar="FILE", help="graph file, '-' for stdin")
        s.add_argument("-o", "--output", metavar="FILE", help=out_help)
        s.set_defaults(func=func)
        return s

    s = sub.add_parser("gen", help="generate a random moral DAG", description="Generate a random moral DAG.")
    s.add_argument("--family", choices=FAMILIES, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--rho", type=float, default=DEFAULT_RHO, help="edge density for er-moral (default %(default)s)")
    s.add_argument("--extra", choices=("uniform", "leaf"), default="uniform", help="extra edge endpoints for tree-like")
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("-o", "--output", metavar="FILE")
    s.set_defaults(func=cmd_gen)

    graph_cmd("essential", "write the essential graph of a DAG", cmd_essential)
    graph_cmd("dct", "JSON report of cliques, directed clique tree, contraction and residuals", cmd_dct)
    s = graph_cmd("mvis", "minimum verifying intervention set of a DAG", cmd_mvis)
    s.add_argument("--method", choices=("dct", "enumeration"), default="dct")
    graph_cmd("lower-bound", "clique lower bound on the verifying set size of a DAG", cmd_lower_bound)

    s = graph_cmd("simulate", "run an intervention policy against a DAG", cmd_simulate)
    s.add_argument("--policy", choices=sorted(POLICIES), default="dct")
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--interactive", action="store_true", help="answer interventions by hand on stdin")

    s = sub.add_parser("bench", help="benchmark policies on generated graphs", description="Benchmark policies on generated graphs.")
    s.add_argument("--family", choices=FAMILIES, action="append", help="repeatable; default both")
    s.add_argument("--n", type=int, action="append", help="repeatable; default 15")
    s.add_argument("--policy", choices=sorted(POLICIES), action="append", help="repeatable; default all")
    s.add_argument("--trials", type=_positive, default=10)
    s.add_argument("--rho", type=float, default=DEFAULT_RHO)
    s.add_argument("--extra", choices=("uniform", "leaf"), default="uniform")
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--jobs", type=_positive, default=1)
    s.add_argument("-o", "--output", metavar="FILE", help="records CSV; aggregates go next to it as *_aggregate.csv")
    s.set_defaults(func=cmd_bench)
    return p


def _setup_logging() -> None:
    level = os.environ.get("DCT_LOG", "warning").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except GraphError as exc:
        print(f"dctlearn: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # bad flag values that argparse could not check on its own
        print(f"dctlearn: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
