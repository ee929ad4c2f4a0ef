"""
Command Line Module
===================
gfrsim gen | validate | route | verify | bench | render

Exit codes: 0 success or delivered, 1 negative result (loop, unreachable,
failed check, an invalid instance under validate or verify), 2 usage error
or a file route and render cannot use.
"""

import argparse
import glob
import logging
import os
import sys
from typing import Dict, Iterable, List, Optional, Sequence, TextIO

from core.config import SimSettings, default_settings, load_settings
from core.errors import GenerationExhausted, GfrError, InstanceError, ParseError, RoutingError, VersionMismatch
from core.models import MsfrStop, triples_as_dicts
from interfaces.charting import save_svg
from services.bench import run_bench
from services.instance_kit import fig2_instance, fr_trap, load, random_instance, save
from services.oracle import all_passed, instance_hash, run_checks
from services.routing_agent import classic_fr, gfr, meter_report, msfr_from_source
from storage.instance_file import instance_text
from storage.records_exporter import BenchCsvExporter, RecordsWriter

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2


class Reporter:
    """Prints report groups as aligned text or as key=value records."""

    def __init__(self, fmt: str, stream: TextIO):
        self.fmt = fmt
        self.stream = stream
        self.records = RecordsWriter(stream)

    def group(self, record: Dict) -> None:
        if self.fmt == "records":
            self.records.write(record)
            return
        width = max((len(k) for k in record), default=0)
        for key, value in record.items():
            if isinstance(value, (list, tuple)):
                value = ", ".join(str(v) for v in value)
            self.stream.write(f"{key.ljust(width)}  {value}\n")
        self.stream.write("\n")

    def lines(self, lines: Iterable[str]) -> None:
        for line in lines:
            self.stream.write(line + "\n")


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "records"), default="text")
    common.add_argument("--config", help="settings YAML (default: config/settings.yaml)")
    common.add_argument("--log-level", help="overrides the configured log level")

    parser = argparse.ArgumentParser(prog="gfrsim", description="Generalized face routing on genus-g surfaces")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate an instance file")
    p.add_argument("--kind", choices=("random", "fr-trap", "fig2"), default="random")
    p.add_argument("--genus", type=int, default=1)
    p.add_argument("--nodes", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write here instead of stdout")

    p = sub.add_parser("validate", parents=[common], help="check an instance file")
    p.add_argument("--instance", required=True)

    p = sub.add_parser("route", parents=[common], help="run a routing algorithm")
    p.add_argument("--instance", required=True)
    p.add_argument("--algo", choices=("gfr", "msfr", "fr"), default="gfr")
    p.add_argument("--trace", action="store_true")

    p = sub.add_parser("verify", parents=[common], help="run the topology oracle checks")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--instance")
    target.add_argument("--corpus", help="directory of *.yaml instances")
    p.add_argument("--samples", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("bench", parents=[common], help="time and memory table over random instances")
    p.add_argument("--genus-list", type=_int_list, default=[0, 1, 2])
    p.add_argument("--size-list", type=_int_list, default=[50])
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="also append rows to this CSV file")

    p = sub.add_parser("render", parents=[common], help="draw an instance as SVG")
    p.add_argument("--instance", required=True)
    p.add_argument("--trace", action="store_true", help="overlay a GFR run")
    p.add_argument("--out", required=True)
    return parser


def _settings(args) -> SimSettings:
    if args.config:
        return SimSettings.from_config(load_settings(args.config))
    return default_settings()


def _configure_logging(args, settings: SimSettings) -> None:
    level = (args.log_level or settings.log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _instance_failure(out: Reporter, path: str, exc: GfrError) -> None:
    out.group({"instance": path, "valid": "false", "error": type(exc).__name__,
               "message": str(exc), "witness": exc.witness or ""})


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args, settings: SimSettings, out: Reporter) -> int:
    try:
        if args.kind == "fr-trap":
            instance = fr_trap(max(args.genus, 1))
        elif args.kind == "fig2":
            instance = fig2_instance()
        else:
            instance = random_instance(args.genus, args.nodes, args.seed, settings)
    except GenerationExhausted as exc:
        out.group({"generated": "false", "error": str(exc)})
        return EXIT_NEGATIVE
    if args.out:
        save(instance, args.out)
        out.group({"generated": "true", "kind": args.kind, "genus": instance.genus,
                   "nodes": len(instance.nodes), "edges": len(instance.edges), "out": args.out})
    else:
        out.stream.write(instance_text(instance))
    return EXIT_OK


def cmd_validate(args, settings: SimSettings, out: Reporter) -> int:
    instance = load(args.instance)
    try:
        _, graph = instance.build(settings)
    except InstanceError as exc:
        _instance_failure(out, args.instance, exc)
        return EXIT_NEGATIVE
    out.group({
        "instance": args.instance,
        "valid": "true",
        "genus": graph.genus,
        "nodes": len(graph.nodes),
        "edges": len(graph.edges),
        "border_walks": len(graph.walks),
        "regions": len(graph.regions),
        "ntbws": sum(1 for w in graph.walks if graph.is_ntbw(w)),
    })
    return EXIT_OK


def cmd_route(args, settings: SimSettings, out: Reporter) -> int:
    instance = load(args.instance)
    try:
        _, graph = instance.build(settings)
    except InstanceError as exc:
        _instance_failure(out, args.instance, exc)
        return EXIT_USAGE
    if graph.route is None:
        out.group({"instance": args.instance, "error": "instance has no route"})
        return EXIT_USAGE

    if args.algo == "msfr":
        outcome = msfr_from_source(graph, settings)
        report = {
            "algorithm": "msfr",
            "outcome": outcome.stop.value,
            "traversal_count": outcome.traversal_count,
            "stop_walk": list(outcome.walk_key),
            "triple": triples_as_dicts([outcome.triple])[0] if outcome.triple else "",
        }
        trace = outcome.trace
        code = EXIT_OK if outcome.stop is MsfrStop.REACHED_T else EXIT_NEGATIVE
    else:
        result = gfr(graph, settings) if args.algo == "gfr" else classic_fr(graph, settings=settings)
        report = result.to_dict()
        report.update({k: v for k, v in meter_report(result).items() if k not in report})
        trace = result.trace
        code = EXIT_OK if result.delivered else EXIT_NEGATIVE

    out.group({"instance": args.instance, **report})
    if args.trace:
        if args.format == "records":
            for step in trace:
                out.group({"step": step.step, "node": step.node, "edge": f"{step.tail}->{step.head}",
                           "phase": step.phase.value, "counters": list(step.counters)})
        else:
            out.lines(step.line() for step in trace)
    return code


def _corpus(directory: str) -> List[str]:
    return sorted(glob.glob(os.path.join(directory, "*.yaml")) + glob.glob(os.path.join(directory, "*.yml")))


def cmd_verify(args, settings: SimSettings, out: Reporter) -> int:
    paths = [args.instance] if args.instance else _corpus(args.corpus)
    if not paths:
        out.group({"corpus": args.corpus, "error": "no instance files"})
        return EXIT_USAGE
    ok = True
    for path in paths:
        instance = load(path)
        digest = instance_hash(instance_text(instance))
        try:
            _, graph = instance.build(settings)
        except InstanceError as exc:
            out.group({"instance": path, "instance_hash": digest, "check_id": "valid_instance",
                       "passed": "false", "witness": f"{type(exc).__name__}: {exc.witness or exc}"})
            ok = False
            continue
        records = run_checks(graph, digest, args.samples, args.seed)
        for record in records:
            out.group({"instance": path, **record.to_dict()})
        ok = ok and all_passed(records)
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_bench(args, settings: SimSettings, out: Reporter) -> int:
    table = run_bench(args.genus_list, args.size_list, args.runs, args.seed, settings)
    exporter = BenchCsvExporter(args.csv) if args.csv else None
    for row in table.rows:
        out.group(row.to_dict())
        if exporter:
            exporter.write_row(row.to_dict())
    for skipped in table.skipped:
        out.group({**skipped, "skipped": "generation exhausted"})
    out.group({"summary": "bench", **table.summary()})
    return EXIT_OK if table.all_delivered and table.within_ceiling and not table.skipped else EXIT_NEGATIVE


def cmd_render(args, settings: SimSettings, out: Reporter) -> int:
    instance = load(args.instance)
    try:
        _, graph = instance.build(settings)
    except InstanceError as exc:
        _instance_failure(out, args.instance, exc)
        return EXIT_USAGE
    result = gfr(graph, settings) if args.trace and graph.route is not None else None
    save_svg(graph, args.out, result)
    out.group({"instance": args.instance, "out": args.out, "disks": 2 * graph.genus,
               "stops": len(result.stops) if result else 0})
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "validate": cmd_validate,
    "route": cmd_route,
    "verify": cmd_verify,
    "bench": cmd_bench,
    "render": cmd_render,
}


def main(argv: Optional[Sequence[str]] = None, stream: Optional[TextIO] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    settings = _settings(args)
    _configure_logging(args, settings)
    out = Reporter(args.format, stream or sys.stdout)
    try:
        return COMMANDS[args.command](args, settings, out)
    except (ParseError, VersionMismatch) as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_USAGE
    except FileNotFoundError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except RoutingError as exc:
        out.group({"command": args.command, "outcome": "Failed", "error": type(exc).__name__,
                   "message": str(exc)})
        return EXIT_NEGATIVE


if __name__ == "__main__":
    sys.exit(main())
