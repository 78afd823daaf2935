"""Command line interface: ``cqt-sim run | list-presets | compare``.

Exit codes: 0 success, 2 configuration error, 3 numerical error.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import subprocess
import sys
from pathlib import Path

from . import __version__
from .config import (
    SCHEMA_VERSION,
    experiments_from_config,
    load_config,
    spec_to_config,
    validate_config,
)
from .distributions import OutcomeTable
from .engines import ExperimentSpec, enumerate_joint, sample_runs
from .experiments import COMPARISONS, PRESETS, ComparisonReport
from .qcore import ConfigurationError, NumericalUnderflowError
from .statistics import chsh_S, click_histogram, correlator, total_variation

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
DEFAULT_SEED = 0
MAX_CORRELATOR_EVENTS = 8


def tool_version() -> str:
    try:
        rev = subprocess.run(["git", "rev-parse", "--short", "HEAD"], cwd=Path(__file__).parent,
                             capture_output=True, text=True, timeout=5)
        if rev.returncode == 0 and rev.stdout.strip():
            return f"cqt-sim {__version__}-g{rev.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"cqt-sim {__version__}"


def _table_rows(table: OutcomeTable, value_key: str) -> list[dict]:
    values = table.weights.tolist()
    return [{"outcomes": table.label_row(row), value_key: v}
            for row, v in zip(table.rows, values)]


def _statistics(table: OutcomeTable, spec: ExperimentSpec) -> dict:
    out: dict = {"marginals": {}}
    for e in spec.events:
        labels = spec.models[e.model].labels
        marg = table.marginal(e.id)
        out["marginals"][e.id] = {labels[k[0]]: p for k, p in marg.items()}
    binary = [e.id for e in spec.events if len(spec.models[e.model]) == 2]
    if 2 <= len(binary) <= MAX_CORRELATOR_EVENTS:
        out["correlators"] = {f"{a},{b}": correlator(table, (a, b))
                              for i, a in enumerate(binary) for b in binary[i + 1:]}
    if all("click" in spec.models[e.model].labels for e in spec.events) and spec.events:
        click = spec.models[spec.events[0].model].labels.index("click")
        out["click_histogram"] = click_histogram(table, click).tolist()
    return out


def _execute(spec: ExperimentSpec, engine: str, mode: str, runs: int | None, seed: int):
    spec = spec.with_engine(engine)
    if mode == "enumerate":
        table = enumerate_joint(spec)
        return table, {"mode": mode, "table": _table_rows(table, "probability"),
                       "statistics": _statistics(table, spec)}
    table = sample_runs(spec, runs, seed)
    return table, {"mode": mode, "runs": runs, "table": _table_rows(table, "count"),
                   "statistics": _statistics(table, spec)}


def run_config(doc: dict, timestamp: bool = True) -> dict:
    """Execute a validated config document and return the report."""
    validate_config(doc)
    engines = ["causal", "standard"] if doc["engine"] == "both" else [doc["engine"]]
    seed = doc.get("seed", DEFAULT_SEED)
    runs = doc.get("runs")
    report: dict = {"schema_version": SCHEMA_VERSION, "tool_version": tool_version()}
    if timestamp:
        report["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    report.update(config=doc, seed=seed, experiments=[])
    # causal locality is checked per engine when an experiment is re-targeted
    specs = experiments_from_config(doc, engine="standard")
    correlators: dict[str, dict[str, float]] = {eng: {} for eng in engines}
    for name, spec in specs.items():
        entry = {"name": name, "spec": spec_to_config(spec), "results": {}}
        for eng in engines:
            table, result = _execute(spec, eng, doc["mode"], runs, seed)
            entry["results"][eng] = result
            if name.startswith("chsh["):
                correlators[eng][name] = correlator(table, ("L", "R"))
        report["experiments"].append(entry)
    if any(correlators.values()) and len(specs) == 4:
        order = ["chsh[a,b]", "chsh[a,b']", "chsh[a',b]", "chsh[a',b']"]
        report["chsh"] = {eng: {"correlators": corr, "S": chsh_S(*(corr[k] for k in order))}
                          for eng, corr in correlators.items()}
    return report


def report_to_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["experiment", "engine", "mode", "assignment", "value"])
    for exp in report["experiments"]:
        for eng, result in exp["results"].items():
            key = "probability" if result["mode"] == "enumerate" else "count"
            for row in result["table"]:
                assignment = ";".join(f"{k}={v}" for k, v in row["outcomes"].items())
                value = row[key]
                text = format(value, ".17g") if isinstance(value, float) else str(value)
                writer.writerow([exp["name"], eng, result["mode"], assignment, text])
    return buf.getvalue()


def _write(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def _apply_overrides(doc: dict, args) -> dict:
    doc = dict(doc)
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "runs", None) is not None:
        doc["runs"] = args.runs
    return doc


def cmd_run(args) -> int:
    doc = _apply_overrides(load_config(args.config), args)
    validate_config(doc)
    output = doc.get("output", {})
    fmt = args.format or output.get("format", "json")
    report = run_config(doc, timestamp=not args.no_timestamp)
    text = report_to_csv(report) if fmt == "csv" else _dump(report)
    _write(text, args.out or output.get("path"))
    return EXIT_OK


def cmd_list_presets(args) -> int:
    rows = [{"name": name, "parameters": p.defaults, "scenario": p.scenario}
            for name, p in PRESETS.items()]
    if args.json:
        sys.stdout.write(json.dumps(rows, indent=2) + "\n")
    else:
        for r in rows:
            params = ", ".join(f"{k}={v}" for k, v in r["parameters"].items())
            sys.stdout.write(f"{r['name']:<18} {r['scenario']}\n{'':<18} ({params})\n")
    return EXIT_OK


def compare_config(doc: dict, timestamp: bool = True) -> dict:
    validate_config(doc)
    if doc["engine"] != "both":
        raise ConfigurationError("config.engine: compare requires engine \"both\"")
    exp = doc["experiment"]
    out: dict = {"schema_version": SCHEMA_VERSION, "tool_version": tool_version()}
    if timestamp:
        out["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    out["config"] = doc
    if "preset" in exp:
        report: ComparisonReport = COMPARISONS[exp["preset"]](
            exp.get("params", {}), doc.get("runs"), doc.get("seed"))
        out["comparison"] = report.to_dict()
        return out
    # explicit experiments have no closed-form reference; report engine distance
    specs = experiments_from_config(doc, engine="standard")
    out["comparison"] = []
    for name, spec in specs.items():
        causal = enumerate_joint(spec.with_engine("causal")).as_dict()
        standard = enumerate_joint(spec).as_dict()
        out["comparison"].append({"name": name,
                                  "total_variation": total_variation(causal, standard)})
    return out


def cmd_compare(args) -> int:
    doc = _apply_overrides(load_config(args.config), args)
    result = compare_config(doc, timestamp=not args.no_timestamp)
    _write(_dump(result), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqt-sim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=tool_version())
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an experiment config")
    run.add_argument("config")
    run.add_argument("--seed", type=int)
    run.add_argument("--runs", type=int)
    run.add_argument("--out")
    run.add_argument("--format", choices=["json", "csv"])
    run.add_argument("--no-timestamp", action="store_true")
    run.set_defaults(func=cmd_run)

    presets = sub.add_parser("list-presets", help="show the preset registry")
    presets.add_argument("--json", action="store_true")
    presets.set_defaults(func=cmd_list_presets)

    cmp_ = sub.add_parser("compare", help="compare both engines against reference values")
    cmp_.add_argument("config")
    cmp_.add_argument("--seed", type=int)
    cmp_.add_argument("--runs", type=int)
    cmp_.add_argument("--out")
    cmp_.add_argument("--no-timestamp", action="store_true")
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"cqt-sim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalUnderflowError, FloatingPointError) as exc:
        print(f"cqt-sim: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
