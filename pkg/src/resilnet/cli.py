"""``resilnet`` command-line interface.

Exit codes: 0 success, 1 usage error, 2 invalid input or I/O failure,
3 numerical failure (e.g. the exact enumerator's outcome bound is exceeded).
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import replace

from resilnet import output
from resilnet.cascade import SimulationError
from resilnet.config import (
    ConfigValidationError,
    dump_json,
    experiment_from_dict,
    experiment_to_document,
    parse_config,
    sweep_from_dict,
)
from resilnet.metrics import MetricsError
from resilnet.montecarlo import (
    DEFAULT_EXACT_BOUND,
    ConfigError,
    EnumerationLimitError,
    enumerate_exact,
    run_experiment,
    run_sweep,
)
from resilnet.network import NetworkError, build_network, network_to_spec, validate_network
from resilnet.scorecard import (
    Asset,
    LossTriple,
    MetricRecord,
    ScorecardError,
    assessment_from_dict,
    component_test_count,
    cost_of_incidents,
    gap_analysis,
    mtbsi,
    mttid,
    mttir,
    rank_assets,
    rogue_change_days,
    root_privilege_count,
    score_matrix,
    validate_metric_record,
    vulnerability_exposure,
)

log = logging.getLogger("resilnet")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(path, kind):
    if path is None:
        raise InputError("--config is required for this command")
    doc = parse_config(path)
    if doc.kind != kind:
        raise ConfigValidationError([f"kind: expected a {kind!r} document, got {doc.kind!r}"])
    return doc.data


def _experiment(args):
    data = _load(args.config, "experiment")
    cfg = experiment_from_dict(data)
    overrides = {}
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.seed is not None:
        overrides["seed"] = args.seed
    return data, replace(cfg, **overrides) if overrides else cfg


def _emit(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _write_results(args, profile, report) -> None:
    if args.out:
        output.emit_profile_csv(profile, args.out)
    if args.svg:
        output.emit_plot_svg(profile, args.svg)
    if args.report or not args.out:
        _emit(output.emit_report_json(report), args.report)


def cmd_simulate(args) -> int:
    _, cfg = _experiment(args)
    res = run_experiment(cfg, workers=args.threads)
    log.info("R=%.6f (standard error %.2g) M=%.6f over %d runs", res.report.resilience, res.std_error, res.report.robustness, res.report.runs)
    _write_results(args, res.profile, res.report)
    return EXIT_OK


def cmd_exact(args) -> int:
    _, cfg = _experiment(args)
    res = enumerate_exact(cfg, bound=args.bound)
    log.info("exact enumeration over %d outcomes", res.outcomes)
    _write_results(args, res.profile, res.report)
    return EXIT_OK


def cmd_sweep(args) -> int:
    data, cfg = _experiment(args)
    table = run_sweep(sweep_from_dict(data, cfg), workers=args.threads)
    _emit(output.emit_sweep_csv(table), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    _, cfg = _experiment(args)
    net = build_network(cfg.network, cfg.seed)
    problems = validate_network(net)
    for p in problems:
        print(p, file=sys.stderr)
    if problems:
        return EXIT_INPUT
    print(f"ok: {net.n_nodes} nodes, {len(net.active_links())} active links, {len(net.potential_links())} potential links")
    if args.out:
        dump_json(experiment_to_document(replace(cfg, network=network_to_spec(net))), args.out)
    return EXIT_OK


def _assessment(path):
    data = _load(path, "assessment")
    weights = {(w["stage"], w["domain"]): float(w["weight"]) for w in data.get("weights", [])}
    return assessment_from_dict(data), weights


def cmd_score(args) -> int:
    a, weights = _assessment(args.config)
    s = score_matrix(a, weights)
    doc = {
        "role": a.role,
        "overall": s.overall,
        "stages": s.stages,
        "domains": s.domains,
        "cells": [{"stage": k[0], "domain": k[1], "score": v} for k, v in s.cells.items()],
        "unscored_entries": s.unscored_entries,
        "unscored_cells": [{"stage": k[0], "domain": k[1]} for k in s.unscored_cells],
    }
    _emit(dump_json(doc), args.out)
    return EXIT_OK


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_gap(args) -> int:
    if args.target is None:
        raise InputError("--target is required for gap")
    current, _ = _assessment(args.config)
    target, _ = _assessment(args.target)
    rep = gap_analysis(current, target)
    rows = [
        (i, g.stage, g.domain, output.fmt(g.current), output.fmt(g.target), output.fmt(g.gap), "compared")
        for i, g in enumerate(rep.gaps, start=1)
    ]
    rows += [("", st, dm, "", "", "", reason) for st, dm, reason in rep.structural]
    _emit(_csv(("rank", "stage", "domain", "current", "target", "gap", "status"), rows), args.out)
    return EXIT_OK


def cmd_rank_assets(args) -> int:
    data = _load(args.config, "assets")
    assets = [Asset(a["name"], LossTriple(**a["loss"]), a["threat"]) for a in data["assets"]]
    rows = [(r.rank, r.name, r.loss.label(), r.threat.label(), r.priority) for r in rank_assets(assets)]
    _emit(_csv(("rank", "name", "loss", "threat", "priority"), rows), args.out)
    return EXIT_OK


def cmd_metrics(args) -> int:
    data = _load(args.config, "formula_metrics")
    funcs = {
        "mttid": mttid,
        "mttir": mttir,
        "mtbsi": mtbsi,
        "cost_of_incidents": cost_of_incidents,
        "vulnerability_exposure": lambda v: vulnerability_exposure([(x["id"], x["days"]) for x in v]),
        "rogue_change_days": rogue_change_days,
        "root_privilege_count": root_privilege_count,
        "component_test_count": component_test_count,
    }
    doc = {}
    if "unit" in data:
        doc["unit"] = data["unit"]
    for name, fn in funcs.items():
        if name in data:
            doc[name] = fn(data[name])
    _emit(dump_json(doc), args.out)
    return EXIT_OK


def cmd_validate_metric(args) -> int:
    data = _load(args.config, "metric_record")
    rep = validate_metric_record(MetricRecord.from_dict(data["record"]))
    doc = {"checks": rep.checks, "traceable": rep.traceable, "passed": rep.passed, "failures": rep.failures()}
    _emit(dump_json(doc), args.out)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "exact": cmd_exact,
    "score": cmd_score,
    "gap": cmd_gap,
    "rank-assets": cmd_rank_assets,
    "metrics": cmd_metrics,
    "validate-metric": cmd_validate_metric,
    "check": cmd_check,
}


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="resilnet", description="Network resilience simulation and security scorecards.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config document")
        p.add_argument("--out", help="primary output file (default: stdout)")
        if name in ("simulate", "sweep", "exact", "check"):
            p.add_argument("--runs", type=_positive)
            p.add_argument("--seed", type=_u64)
        if name in ("simulate", "exact"):
            p.add_argument("--report", help="report JSON file")
            p.add_argument("--svg", help="profile plot SVG file")
        if name in ("simulate", "sweep"):
            p.add_argument("--threads", type=int, help="worker threads (default: $RESILNET_THREADS, 0 = auto)")
        if name == "exact":
            p.add_argument("--bound", type=_positive, default=DEFAULT_EXACT_BOUND, help="maximum number of outcomes")
        if name == "gap":
            p.add_argument("--target", help="target assessment document")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"resilnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigValidationError as exc:
        for v in exc.violations:
            print(v, file=sys.stderr)
        return EXIT_INPUT
    except NetworkError as exc:
        for v in exc.violations:
            print(v, file=sys.stderr)
        return EXIT_INPUT
    except EnumerationLimitError as exc:
        print(f"resilnet: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, ConfigError, SimulationError, MetricsError, ScorecardError, ValueError) as exc:
        print(f"resilnet: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
