"""Batch command line: transform, align, eval, stats.

Exit codes are fixed for scripting: 0 success, 2 missing/unreadable files,
3 malformed input (taxonomy/dictionary/gold/mapping records, constraint
codes, unknown node references), 4 bad configuration.  A JSON manifest is
written next to every primary output so a run can be replayed exactly.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import time

from . import __version__
from .candidates import connection_stats, generate_candidates, load_dict
from .constraints import expand_pack
from .errors import ConstraintFormatError, CycleError, ParseError, TaxAlignError, UnknownNodeError
from .evaluation import LEVEL_FILE, LEVEL_NODE, Mapping, build_report, load_gold, \
    render_report, report_tsv_lines
from .relaxation import INIT_RANDOM, INIT_UNIFORM, RelaxConfig, RelaxationEngine, \
    cost_estimate
from .taxonomy import add_virtual_top, collapse_sense_siblings, dump_taxonomy, load_taxonomy

EXIT_OK = 0
EXIT_IO = 2
EXIT_FORMAT = 3
EXIT_CONFIG = 4


class _Parser(argparse.ArgumentParser):
    """argparse reserves exit code 2; usage problems here are config errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _read_taxonomy(path):
    with open(path, encoding="utf-8") as fh:
        return load_taxonomy(fh, path=path)


def _read_dict(path):
    with open(path, encoding="utf-8") as fh:
        return load_dict(fh, path=path)


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _write_manifest(path: str, command: str, inputs: dict, config: dict,
                    outputs: dict, run: dict) -> None:
    manifest = {
        "engine": {"name": "taxalign", "version": __version__},
        "command": command,
        "created_utc": _utc_now(),
        "inputs": inputs,
        "config": config,
        "outputs": outputs,
        "run": run,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_pins(pairs):
    pins = {}
    for raw in pairs or ():
        src, sep, tgt = raw.partition("=")
        if not sep or not src or not tgt:
            raise ValueError(f"--pin expects SRC=TGT, got {raw!r}")
        pins[src] = tgt
    return pins


# -- align -------------------------------------------------------------------

def cmd_align(args) -> int:
    src = _read_taxonomy(args.source)
    tgt = _read_taxonomy(args.target)
    dictionary = _read_dict(args.dict)
    pack = expand_pack(args.constraints)
    pins = _parse_pins(args.pin)
    cfg = RelaxConfig(pack=pack, init=args.init, seed=args.seed, epsilon=args.epsilon,
                      max_iters=args.max_iters, s_max=args.s_max)

    cand = generate_candidates(src, tgt, dictionary, pins=pins)
    started = time.perf_counter()
    engine = RelaxationEngine(cand, cfg, src, tgt)
    result = engine.run()
    elapsed = time.perf_counter() - started

    out_dir = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(out_dir, exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as fh:
        for line in result.mapping.to_lines():
            fh.write(line + "\n")
    outputs = {"mapping": args.out}

    if args.dump_weights:
        with open(args.dump_weights, "w", encoding="utf-8") as fh:
            for src_id, tgt_id, weight in result.weights.items():
                fh.write(f"{src_id}\t{tgt_id}\t{weight:.6f}\n")
        outputs["weights"] = args.dump_weights

    if args.figures:
        from . import figures
        figures.ensure_dir(args.figures)
        outputs["figures"] = [
            figures.convergence_figure(result.trace, cfg.epsilon,
                                       os.path.join(args.figures, "convergence.png")),
            figures.polysemy_figure(cand, os.path.join(args.figures, "polysemy.png")),
        ]

    warnings = []
    if not result.trace.converged:
        warnings.append(f"did not converge within {cfg.max_iters} iterations "
                        f"(last delta {result.trace.deltas[-1]:.3e})")
    n_vars = len(cand.polysemous_ids())
    _write_manifest(
        args.out + ".manifest.json", "align",
        inputs={"source": args.source, "target": args.target, "dict": args.dict},
        config={"constraints": pack.pattern, "init": cfg.init, "seed": cfg.seed,
                "epsilon": cfg.epsilon, "max_iters": cfg.max_iters, "s_max": cfg.s_max,
                "threads": args.threads, "pins": pins},
        outputs=outputs,
        run={"wall_clock_sec": round(elapsed, 6),
             "iterations_run": result.trace.iterations_run,
             "converged": result.trace.converged,
             "cost_estimate": cost_estimate(n_vars, len(pack)),
             "warnings": warnings},
    )
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"aligned {len(src)} source nodes ({n_vars} polysemous variables) "
          f"in {result.trace.iterations_run} iterations -> {args.out}")
    return EXIT_OK


# -- transform ---------------------------------------------------------------

def cmd_transform(args) -> int:
    if not args.add_top and not args.collapse_senses:
        raise ValueError("transform needs --add-top and/or --collapse-senses")
    graph = _read_taxonomy(args.input)
    applied = []
    merge_map = None
    if args.collapse_senses:
        graph, merge_map = collapse_sense_siblings(graph)
        applied.append("collapse-senses")
    if args.add_top:
        graph, _ = add_virtual_top(graph, top_word=args.top_word)
        applied.append("add-top")

    with open(args.out, "w", encoding="utf-8") as fh:
        dump_taxonomy(graph, fh)
    outputs = {"taxonomy": args.out}
    if merge_map is not None:
        merge_path = args.merge_map or args.out + ".merge-map.tsv"
        with open(merge_path, "w", encoding="utf-8") as fh:
            fh.write("# original\tsurviving\n")
            for old in sorted(merge_map):
                fh.write(f"{old}\t{merge_map[old]}\n")
        outputs["merge_map"] = merge_path

    _write_manifest(
        args.out + ".manifest.json", "transform",
        inputs={"taxonomy": args.input},
        config={"transforms": applied, "top_word": args.top_word},
        outputs=outputs,
        run={"n_nodes": len(graph), "n_edges": graph.n_edges, "roots": list(graph.roots)},
    )
    print(f"wrote {args.out} ({len(graph)} nodes, {graph.n_edges} edges, "
          f"{len(graph.roots)} root{'s' if len(graph.roots) != 1 else ''})")
    return EXIT_OK


# -- eval ----------------------------------------------------------------------

def cmd_eval(args) -> int:
    with open(args.mapping, encoding="utf-8") as fh:
        mapping = Mapping.parse(fh, path=args.mapping)
    with open(args.gold, encoding="utf-8") as fh:
        gold = load_gold(fh, path=args.gold)
    tgt = _read_taxonomy(args.target)

    levels = (LEVEL_FILE, LEVEL_NODE) if args.level == "both" else (args.level,)
    report = build_report(mapping, gold, tgt, levels=levels)
    sys.stdout.write(render_report(report))

    outputs = {}
    if args.tsv:
        with open(args.tsv, "w", encoding="utf-8") as fh:
            for line in report_tsv_lines(report):
                fh.write(line + "\n")
        outputs["tsv"] = args.tsv
    if args.figures:
        from . import figures
        figures.ensure_dir(args.figures)
        outputs["figures"] = [
            figures.precision_figure(report, os.path.join(args.figures, "precision.png")),
        ]
    if args.tsv:
        _write_manifest(
            args.tsv + ".manifest.json", "eval",
            inputs={"mapping": args.mapping, "gold": args.gold, "target": args.target},
            config={"level": args.level},
            outputs=outputs,
            run={"coverage_count": report.coverage_count,
                 "coverage_pct": report.coverage_pct},
        )
    return EXIT_OK


# -- stats ---------------------------------------------------------------------

def cmd_stats(args) -> int:
    src = _read_taxonomy(args.source)
    tgt = _read_taxonomy(args.target)
    dictionary = _read_dict(args.dict)
    cand = generate_candidates(src, tgt, dictionary)
    stats = connection_stats(cand)

    def show(value, fmt="{:.1f}%"):
        return fmt.format(value) if value is not None else "n/a"

    print(f"nodes: {stats.n_nodes}")
    print(f"with bilingual connection: {stats.n_connected} ({show(stats.pct_connected)})")
    print(f"polysemous (over connected): {stats.n_polysemous} ({show(stats.pct_polysemous)})")
    print(f"mean polysemy (over connected): {show(stats.mean_polysemy, '{:.2f}')}")

    outputs = {}
    if args.tsv:
        with open(args.tsv, "w", encoding="utf-8") as fh:
            fh.write("# metric\tvalue\n")
            fh.write(f"n_nodes\t{stats.n_nodes}\n")
            fh.write(f"n_connected\t{stats.n_connected}\n")
            fh.write(f"n_polysemous\t{stats.n_polysemous}\n")
            for name, value in (("pct_connected", stats.pct_connected),
                                ("pct_polysemous", stats.pct_polysemous),
                                ("mean_polysemy", stats.mean_polysemy)):
                fh.write(f"{name}\t{value if value is not None else '-'}\n")
        outputs["tsv"] = args.tsv
    if args.figures:
        from . import figures
        figures.ensure_dir(args.figures)
        outputs["figures"] = [
            figures.polysemy_figure(cand, os.path.join(args.figures, "polysemy.png")),
        ]
    if args.tsv:
        _write_manifest(
            args.tsv + ".manifest.json", "stats",
            inputs={"source": args.source, "target": args.target, "dict": args.dict},
            config={},
            outputs=outputs,
            run={"n_connected": stats.n_connected},
        )
    return EXIT_OK


# -- wiring ---------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="taxalign",
                     description="Align a sense taxonomy to a concept taxonomy "
                                 "by relaxation labeling.")
    parser.add_argument("--version", action="version", version=f"taxalign {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("align", parents=[], help="run the full alignment pipeline")
    p.add_argument("--source", required=True, help="source taxonomy file")
    p.add_argument("--target", required=True, help="target taxonomy file")
    p.add_argument("--dict", required=True, help="bilingual dictionary file")
    p.add_argument("--constraints", required=True,
                   help="constraint pack pattern, e.g. 'AA*' or a full code like IIE")
    p.add_argument("--out", required=True, help="mapping output path")
    p.add_argument("--dump-weights", help="also write the full weight table here")
    p.add_argument("--init", choices=[INIT_UNIFORM, INIT_RANDOM], default=INIT_UNIFORM)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--s-max", type=float, default=10.0)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker hint recorded in the manifest; results never depend on it")
    p.add_argument("--pin", action="append", metavar="SRC=TGT",
                   help="fix a source node to one target candidate (repeatable)")
    p.add_argument("--figures", help="directory for convergence/polysemy figures")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("transform", help="rewrite a taxonomy (+top / no-senses)")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--add-top", action="store_true",
                   help="insert a virtual top above every root")
    p.add_argument("--top-word", default="__top__")
    p.add_argument("--collapse-senses", action="store_true",
                   help="merge same-word sibling sense nodes")
    p.add_argument("--merge-map", help="merge map path (default: <out>.merge-map.tsv)")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("eval", help="score a mapping against a gold standard")
    p.add_argument("--mapping", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--target", required=True, help="target taxonomy (for semantic files)")
    p.add_argument("--level", choices=["file", "node", "both"], default="both")
    p.add_argument("--tsv", help="write the machine-readable report here")
    p.add_argument("--figures", help="directory for precision figures")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="bilingual connection and polysemy statistics")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--dict", required=True)
    p.add_argument("--tsv", help="write the stats as TSV here")
    p.add_argument("--figures", help="directory for the polysemy figure")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"taxalign: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ParseError, CycleError, ConstraintFormatError, UnknownNodeError) as exc:
        print(f"taxalign: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ValueError as exc:
        print(f"taxalign: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TaxAlignError as exc:
        print(f"taxalign: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
