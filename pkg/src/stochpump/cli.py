"""Command line interface.

Exit codes: 0 success, 2 invalid input, 3 loop not robust, 4 numerical
failure.  Machine-readable reports go to ``--out`` (stdout when absent);
human-readable messages go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from .adiabatic import analytic_current
from .dynamics import DEFAULT_TOL, average_current
from .errors import CountLimitExceeded, InvalidInput, NotRobust, NumericalFailure
from .formats import format_number, load_file, parse_graph, parse_protocol, write_csv
from .graph_core import cycle_basis
from .holonomy import ground_holonomy_probe
from .params import DEFAULT_DELTA, enumerate_essential_cells
from .sweep import ADIABATIC, sweep
from .topo import check_loop_robust, topological_current
from .trees import enumerate_spanning_trees

EXIT_OK, EXIT_INPUT, EXIT_NOT_ROBUST, EXIT_NUMERIC = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _tau_list(text: str) -> list:
    out = []
    for x in text.split(","):
        x = x.strip()
        if not x:
            continue
        if x == ADIABATIC:
            out.append(ADIABATIC)
        else:
            try:
                out.append(float(x))
            except ValueError:
                raise argparse.ArgumentTypeError(f"bad tau value {x!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="integrator tolerance")
    common.add_argument("--delta-e", type=float, default=DEFAULT_DELTA, help="well-energy tie tolerance")
    common.add_argument("--delta-w", type=float, default=DEFAULT_DELTA, help="barrier tie tolerance")
    common.add_argument("--samples", type=int, default=256, help="loop samples for classification")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default=None, help="report format")

    p = _Parser(prog="stochpump", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("graph-info", parents=[common], help="Betti number, trees and cycle basis")
    s.add_argument("graph")
    s = sub.add_parser("cells", parents=[common], help="top-dimensional cells and their essential flag")
    s.add_argument("graph")
    s = sub.add_parser("simulate", parents=[common], help="average current of the periodic solution")
    s.add_argument("graph")
    s.add_argument("protocol")
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--tau", type=float, required=True)
    s = sub.add_parser("adiabatic", parents=[common], help="adiabatic-limit current")
    s.add_argument("graph")
    s.add_argument("protocol")
    s.add_argument("--beta", type=float, required=True)
    s = sub.add_parser("topological", parents=[common], help="robustness and the integer current")
    s.add_argument("graph")
    s.add_argument("protocol")
    s = sub.add_parser("sweep", parents=[common], help="grid over beta and tau")
    s.add_argument("graph")
    s.add_argument("protocol")
    s.add_argument("--betas", type=_float_list, required=True)
    s.add_argument("--taus", type=_tau_list, required=True, help=f"numbers or '{ADIABATIC}'")
    s.add_argument("--workers", type=int, default=1)
    s = sub.add_parser("holonomy", parents=[common], help="ground-line winding probe")
    s.add_argument("graph")
    s.add_argument("protocol")
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--generator", type=int, default=0)
    s.add_argument("--steps", type=int, default=256)
    return p


def _emit(args, payload, csv_text: Optional[str] = None):
    fmt = args.format or ("csv" if csv_text is not None else "json")
    if fmt == "csv":
        if csv_text is None:
            raise InvalidInput(f"{args.command} has no CSV report")
        text = csv_text
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_inputs(args):
    g = parse_graph(load_file(args.graph))
    proto = parse_protocol(load_file(args.protocol), g) if hasattr(args, "protocol") else None
    return g, proto


def _cmd_graph_info(args) -> int:
    g, _ = _load_inputs(args)
    b = cycle_basis(g)
    trees = enumerate_spanning_trees(g)
    payload = {
        "vertices": g.vertex_count,
        "edges": [list(e) for e in g.edges],
        "betti_number": g.betti_number,
        "spanning_trees": len(trees),
        "reference_tree": list(b.tree),
        "cycles": {str(a): z.tolist() for a, z in zip(b.non_tree, b.cycles)},
    }
    _emit(args, payload)
    print(f"betti number {g.betti_number}, {len(trees)} spanning trees", file=sys.stderr)
    return EXIT_OK


def _cmd_cells(args) -> int:
    g, _ = _load_inputs(args)
    cells = enumerate_essential_cells(g)
    rows, items = [], []
    for c in cells:
        rows.append([
            f"{c.pair[0]}-{c.pair[1]}",
            f"{c.tie[0]}-{c.tie[1]}",
            " ".join(map(str, c.height.h1)),
            str(c.dimension),
            "true" if c.essential else "false",
            " ".join(map(str, c.current)),
        ])
        items.append({
            "minima": list(c.pair), "tie": list(c.tie), "h0": list(c.height.h0), "h1": list(c.height.h1),
            "dimension": c.dimension, "essential": c.essential, "current": list(c.current),
            "forest": list(c.forest),
        })
    csv_text = write_csv(["minima", "tie", "h1", "dimension", "essential", "current"], rows)
    _emit(args, {"cells": items, "essential_count": sum(c.essential for c in cells)}, csv_text)
    print(f"{len(cells)} top cells, {sum(c.essential for c in cells)} essential", file=sys.stderr)
    return EXIT_OK


def _coords_text(coords) -> str:
    return "[" + ", ".join(format_number(c) for c in np.atleast_1d(coords)) + "]"


def _cmd_simulate(args) -> int:
    g, proto = _load_inputs(args)
    rep = average_current(g, proto, args.beta, args.tau, args.tol)
    _emit(args, rep.to_dict())
    print(f"cycle coordinates {_coords_text(rep.coords)}", file=sys.stderr)
    return EXIT_OK


def _cmd_adiabatic(args) -> int:
    g, proto = _load_inputs(args)
    rep = analytic_current(g, proto, args.beta)
    _emit(args, rep.to_dict())
    print(f"cycle coordinates {_coords_text(rep.coords)}", file=sys.stderr)
    return EXIT_OK


def _cmd_topological(args) -> int:
    g, proto = _load_inputs(args)
    ok, diag = check_loop_robust(g, proto, args.delta_e, args.delta_w, args.samples)
    if not ok:
        _emit(args, {"robust": False, "diagnostics": diag})
        print(f"loop is not robust: {diag.get('message')}", file=sys.stderr)
        return EXIT_NOT_ROBUST
    rep = topological_current(g, proto, args.delta_e, args.delta_w, args.samples)
    _emit(args, rep.to_dict())
    print(f"current {_coords_text(rep.coords.astype(int))} in cycle coordinates", file=sys.stderr)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    g, proto = _load_inputs(args)
    rep = sweep(g, proto, args.betas, args.taus, args.tol, args.delta_e, args.delta_w, args.samples,
                args.workers)
    _emit(args, rep.to_dict(), rep.to_csv())
    failed = sum(r.error is not None for r in rep.rows)
    print(f"{len(rep.rows)} cells, {failed} failed, topological current {rep.topological}", file=sys.stderr)
    return EXIT_OK


def _cmd_holonomy(args) -> int:
    g, proto = _load_inputs(args)
    ok, diag = check_loop_robust(g, proto, args.delta_e, args.delta_w, args.samples)
    if not ok:
        _emit(args, {"robust": False, "diagnostics": diag})
        print("loop is not robust", file=sys.stderr)
        return EXIT_NOT_ROBUST
    res = ground_holonomy_probe(g, proto, args.beta, args.generator, args.steps)
    topo = topological_current(g, proto, args.delta_e, args.delta_w, args.samples)
    payload = {
        "winding": res.winding,
        "min_gap": res.min_gap,
        "beta": res.beta,
        "steps": res.steps,
        "stable": res.stable,
        "topological_coordinate": int(topo.coords[args.generator]),
    }
    _emit(args, payload)
    print(f"winding {res.winding} (topological coordinate {payload['topological_coordinate']})", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "graph-info": _cmd_graph_info,
    "cells": _cmd_cells,
    "simulate": _cmd_simulate,
    "adiabatic": _cmd_adiabatic,
    "topological": _cmd_topological,
    "sweep": _cmd_sweep,
    "holonomy": _cmd_holonomy,
}


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (InvalidInput, CountLimitExceeded) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotRobust as exc:
        print(f"loop is not robust: {exc}", file=sys.stderr)
        return EXIT_NOT_ROBUST
    except (NumericalFailure, ArithmeticError) as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
