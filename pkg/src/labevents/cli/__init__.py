"""Command-line front end.

Subcommands ``table``, ``scenario``, ``check`` and ``verify``. Exit codes:
0 success, 1 verdict mismatch, 2 usage or schema error, 3 numeric invariant
violation. Every option can also be set through ``LABEVENTS_<NAME>``
environment variables (e.g. ``LABEVENTS_TOLERANCE``).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Sequence

from .. import atlas
from .. import lab as labcalc
from ..linalg import InvariantError
from . import acceptance, expected, scenario_file

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_INVARIANT = 3

ENV_PREFIX = "LABEVENTS_"

SCENARIO_NAMES = {
    "qs_ct": atlas.ScenarioId.QS_CT,
    "qs_qt": atlas.ScenarioId.QS_QT,
    "qs_g": atlas.ScenarioId.QS_G,
    "double-slit": atlas.ScenarioId.DOUBLE_SLIT,
}
REFERENCE_ALIASES = {"τ": "tau", "xt": "(x,t)", "x,t": "(x,t)"}
EVENT_ALIASES = {"A₁": "A1", "A₂": "A2"}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = labcalc.DEFAULT_TOLERANCE
    d: int = 2
    seed: int = 0
    format: str = "json"
    strict_local: bool = False

    def __post_init__(self) -> None:
        if not 0 < self.tolerance <= 1e-3:
            raise UsageError(f"--tolerance must lie in (0, 1e-3], got {self.tolerance}")
        if not 2 <= self.d <= 4:
            raise UsageError(f"--d must be 2, 3 or 4, got {self.d}")
        if not -(2 ** 63) <= self.seed < 2 ** 64:
            raise UsageError("--seed must fit in 64 bits")
        if self.format not in ("json", "markdown"):
            raise UsageError(f"--format must be json or markdown, got {self.format!r}")

    def params(self) -> atlas.ModelParams:
        return atlas.ModelParams(d=self.d, seed=self.seed % 2 ** 64)

    def as_dict(self) -> dict:
        return {"tolerance": self.tolerance, "d": self.d, "seed": self.seed, "strict_local": self.strict_local}


def _env(name: str, default: str) -> str:
    return os.environ.get(ENV_PREFIX + name, default)


def _env_flag(name: str) -> bool:
    raw = _env(name, "0").strip().lower()
    if raw in ("1", "true", "yes", "on"):
        return True
    if raw in ("0", "false", "no", "off", ""):
        return False
    raise UsageError(f"{ENV_PREFIX}{name} must be a boolean, got {raw!r}")


def _typed_env(name: str, default, kind):
    raw = _env(name, str(default))
    try:
        return kind(raw)
    except ValueError:
        raise UsageError(f"{ENV_PREFIX}{name}: cannot parse {raw!r}") from None


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS lets the option sit before or after the subcommand without one copy erasing the other
    hide = argparse.SUPPRESS
    common.add_argument("--tolerance", type=float, default=hide, help="verdict tolerance on trace distances")
    common.add_argument("--d", type=int, default=hide, help="target dimension (2-4)")
    common.add_argument("--seed", type=int, default=hide, help="seed for unitaries, states and pointer frames")
    common.add_argument("--format", choices=("json", "markdown"), default=hide)
    common.add_argument("--strict-local", action="store_true", default=hide,
                        help="compare right after the event instead of after the continuation")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="labevents", description="Relative events and quantum-switch verdicts.",
                                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table", parents=[common], help="compute a verdict table and compare to the published labels")
    p.add_argument("--which", choices=("main", "appendix"), default="main")

    p = sub.add_parser("scenario", parents=[common], help="verdicts for one built-in lab")
    p.add_argument("--name", required=True, choices=sorted(SCENARIO_NAMES))
    p.add_argument("--agent", default=None, help="alice, claire or quinn")
    p.add_argument("--reference", default=None, help="t, x, (x,t), a, tau, singleton or t_arr")
    p.add_argument("--event", default="A", help="A, A1 or A2")
    p.add_argument("--emit-file", metavar="PATH", help="also write the triple as a scenario file")

    p = sub.add_parser("check", parents=[common], help="verdicts for a scenario file")
    p.add_argument("file", help="scenario JSON path, or - for stdin")

    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.add_argument("--timings", action="store_true", help="include wall times (output no longer reproducible)")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    given = vars(args)
    tolerance = given["tolerance"] if "tolerance" in given else _typed_env(
        "TOLERANCE", labcalc.DEFAULT_TOLERANCE, float)
    d = given["d"] if "d" in given else _typed_env("D", 2, int)
    seed = given["seed"] if "seed" in given else _typed_env("SEED", 0, int)
    fmt = given["format"] if "format" in given else _env("FORMAT", "json")
    strict = True if given.get("strict_local") else _env_flag("STRICT_LOCAL")
    return RunConfig(tolerance, d, seed, fmt, strict)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


def _verdict_dict(meas: labcalc.MeasurabilityVerdict, loc: labcalc.LocalisationVerdict,
                  loc_label: str | None = None) -> dict:
    return {
        "measurability": {"verdict": meas.label, "distance": meas.distance},
        "localisation": {
            "verdict": loc_label or loc.label,
            "status": loc.status,
            "labels": list(loc.labels),
            "distances": dict(loc.distances),
            "branch_weights": dict(loc.branch_traces),
        },
    }


def _fmt(x: float) -> str:
    return f"{x:.3e}"


def _cell(text) -> str:
    return str(text).replace("|", "\\|")


# table


def cmd_table(which: str, cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    params = cfg.params()
    if which == "main":
        rows = atlas.table_main(params, tolerance=cfg.tolerance, strict_local=cfg.strict_local)
        diff = []
        for i, row in enumerate(rows, start=1):
            want = expected.TABLE_MAIN[i - 1] if i <= len(expected.TABLE_MAIN) else None
            got = (row.measurability, row.localisation)
            if want != got:
                diff.append(f"row {i}: expected {want}, computed {got}")
        if cfg.format == "markdown":
            print("| Protocols (I_A) | P_A of the Lab | O_A (relative event) | Rel. measurability of R_A "
                  "| Localisation of O_A | max measurability distance |", file=out)
            print("|---|---|---|---|---|---|", file=out)
            for row in rows:
                print(f"| {_cell(row.protocols)} | {_cell(row.info_set)} | {_cell(row.event)} | {row.measurability} "
                      f"| {_cell(row.localisation)} "
                      f"| {_fmt(row.max_measurability_distance)} |", file=out)
            print(f"\ntolerance={cfg.tolerance} seed={cfg.seed} d={cfg.d} strict_local={cfg.strict_local}", file=out)
        else:
            report = {
                "table": "main",
                "config": cfg.as_dict(),
                "rows": [{
                    "protocols": row.protocols,
                    "info_set": row.info_set,
                    "event": row.event,
                    "measurability": row.measurability,
                    "localisation": row.localisation,
                    "analyses": [{"scenario": a.scenario.value, "lab": str(a.choice),
                                  **_verdict_dict(a.measurability, a.localisation, a.localisation_label)}
                                 for a in row.analyses],
                } for row in rows],
                "matches_expected": not diff,
                "diff": diff,
            }
            print(_dumps(report), file=out)
    else:
        cells = atlas.table_appendix(params, tolerance=cfg.tolerance, strict_local=cfg.strict_local)
        diff = acceptance.grid_failures(cells)
        if cfg.format == "markdown":
            print(_grid_markdown(cells), file=out)
            print(f"\ntolerance={cfg.tolerance} seed={cfg.seed} d={cfg.d} strict_local={cfg.strict_local}", file=out)
        else:
            report = {
                "table": "appendix",
                "config": cfg.as_dict(),
                "cells": [{"scenario": c.scenario.value, "lab": c.lab_text,
                           "classes": [k.value for k in c.classes], "properties": c.properties,
                           **({"note": c.note} if c.note else {})} for c in cells],
                "matches_expected": not diff,
                "diff": diff,
            }
            print(_dumps(report), file=out)
    if diff:
        print("verdict mismatch:\n  " + "\n  ".join(diff), file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def _grid_markdown(cells: list[atlas.ClassificationCell]) -> str:
    columns = [s.value for s in (atlas.ScenarioId.QS_CT, atlas.ScenarioId.QS_QT, atlas.ScenarioId.QS_G)]
    classes = [atlas.AssumptionClass.FINE, atlas.AssumptionClass.EFFECTIVE, atlas.AssumptionClass.COARSE]
    grid: dict[tuple[str, str], str] = {}
    unresolved: dict[str, str] = {}
    for c in cells:
        kinds = set(c.classes)
        text = c.lab_text if len(kinds) == 1 else f"{c.lab_text} (mixed: {', '.join(k.value for k in c.classes)})"
        kind = c.classes[0]
        if kind is atlas.AssumptionClass.UNRESOLVED:
            unresolved[c.scenario.value] = f"Unresolved: {c.lab_text}"
        else:
            key = (kind.value, c.scenario.value)
            grid[key] = grid[key] + "; " + text if key in grid else text
    lines = ["| Description | " + " | ".join(columns) + " |", "|---|" + "---|" * len(columns)]
    for k in classes:
        row = []
        for col in columns:
            cell = grid.get((k.value, col))
            if cell is None and col in unresolved:
                cell = unresolved.pop(col)
            row.append(cell or "")
        lines.append(f"| {k.value} | " + " | ".join(_cell(c) for c in row) + " |")
    return "\n".join(lines)


# scenario


def _choice_from_args(args: argparse.Namespace) -> tuple[atlas.ScenarioId, atlas.LabChoice]:
    s = SCENARIO_NAMES[args.name]
    default_agent = "claire" if s is atlas.ScenarioId.DOUBLE_SLIT else "alice"
    default_ref = "x" if s is atlas.ScenarioId.DOUBLE_SLIT else "t"
    agent = (args.agent or default_agent).strip().capitalize()
    ref = args.reference or default_ref
    ref = REFERENCE_ALIASES.get(ref, ref)
    event = EVENT_ALIASES.get(args.event, args.event)
    return s, atlas.LabChoice(agent, ref, event)


def cmd_scenario(args: argparse.Namespace, cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    s, choice = _choice_from_args(args)
    params = cfg.params()
    try:
        if s is atlas.ScenarioId.DOUBLE_SLIT:
            if choice.reference != "x" or choice.event != "A":
                raise atlas.UnsupportedChoice(
                    "the double slit supports reference x and event A only; supported:\n  "
                    + "\n  ".join(atlas.supported_matrix()))
            report = atlas.double_slit(choice.agent, params, tolerance=cfg.tolerance, strict_local=cfg.strict_local)
            row = report.row
            extra = {"interference": {"without_intervention": list(report.without_intervention),
                                      "with_pi_intervention": list(report.with_intervention)}}
        else:
            row = atlas.analyze(s, choice, params, tolerance=cfg.tolerance, strict_local=cfg.strict_local)
            extra = {}
        if args.emit_file:
            lab, ctx, event = atlas.build_context(s, choice, params)
            with open(args.emit_file, "w", encoding="utf-8") as fh:
                fh.write(scenario_file.dumps(lab, ctx, event, name=f"{s.value} {choice}"))
    except atlas.OpenModelError as exc:
        print(f"no model for {s.value} {choice}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except atlas.UnsupportedChoice as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    body = {"scenario": s.value, "agent": choice.agent, "reference": choice.reference, "event": choice.event,
            "config": cfg.as_dict(), **_verdict_dict(row.measurability, row.localisation, row.localisation_label),
            **extra}
    if cfg.format == "markdown":
        print(_report_markdown(body), file=out)
    else:
        print(_dumps(body), file=out)
    return EXIT_OK


def _report_markdown(body: dict) -> str:
    meas, loc = body["measurability"], body["localisation"]
    lines = [
        "| field | value |",
        "|---|---|",
    ]
    for key in ("scenario", "agent", "reference", "lab", "file", "event"):
        if key in body:
            lines.append(f"| {key} | {_cell(body[key])} |")
    lines.append(f"| relative measurability | {meas['verdict']} (distance {_fmt(meas['distance'])}) |")
    lines.append(f"| localisation | {_cell(loc['verdict'])} |")
    for lab_name, dist in loc["distances"].items():
        lines.append(f"| distance with Π[{_cell(lab_name)}] | {_fmt(dist)} |")
    if "interference" in body:
        inter = body["interference"]
        lines.append(f"| readout without intervention | {', '.join(f'{p:.4f}' for p in inter['without_intervention'])} |")
        lines.append(f"| readout with π intervention | {', '.join(f'{p:.4f}' for p in inter['with_pi_intervention'])} |")
    cfg = body["config"]
    lines.append(f"| config | tolerance={cfg['tolerance']} seed={cfg['seed']} d={cfg['d']} "
                 f"strict_local={cfg['strict_local']} |")
    return "\n".join(lines)


# check


def cmd_check(path: str, cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        print(f"cannot read {path}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    try:
        lab, ctx, event = scenario_file.loads(text)
        meas = labcalc.check_relative_measurability(lab, ctx, event, tolerance=cfg.tolerance,
                                                    strict_local=cfg.strict_local)
        loc = labcalc.check_localisation(lab, ctx, event, tolerance=cfg.tolerance, strict_local=cfg.strict_local)
    except scenario_file.ScenarioFileError as exc:
        print(f"schema error at {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantError as exc:
        print(f"numeric invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    loc_label = "localised" if len(lab.info_set) == 1 and loc.status == "localised" else None
    body = {"file": path, "lab": lab.name, "event": event.name, "config": cfg.as_dict(),
            **_verdict_dict(meas, loc, loc_label)}
    if cfg.format == "markdown":
        print(_report_markdown(body), file=out)
    else:
        print(_dumps(body), file=out)
    return EXIT_OK


# verify


def cmd_verify(cfg: RunConfig, timings: bool = False, out=None) -> int:
    out = out or sys.stdout
    acfg = acceptance.Config(d=cfg.d, seed=cfg.seed, tolerance=cfg.tolerance, strict_local=cfg.strict_local)
    results, total = acceptance.run_all(acfg)
    ok = all(r.passed for r in results)
    if cfg.format == "markdown":
        print("| # | criterion | result | notes |", file=out)
        print("|---|---|---|---|", file=out)
        for r in results:
            note = "; ".join(r.failures)
            if timings:
                note = (note + "; " if note else "") + f"{r.elapsed_s:.3f} s"
            print(f"| {r.id} | {r.name} | {'pass' if r.passed else 'FAIL'} | {note} |", file=out)
        print(f"\ntolerance={cfg.tolerance} seed={cfg.seed} d={cfg.d} strict_local={cfg.strict_local}", file=out)
    else:
        report = {"suite": "acceptance", "config": cfg.as_dict(), "passed": ok,
                  "criteria": [r.as_dict(timings) for r in results]}
        if timings:
            report["total_s"] = round(total, 3)
        print(_dumps(report), file=out)
    return EXIT_OK if ok else EXIT_MISMATCH


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
    except UsageError as exc:
        print(f"labevents: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "table":
        return cmd_table(args.which, cfg)
    if args.command == "scenario":
        return cmd_scenario(args, cfg)
    if args.command == "check":
        return cmd_check(args.file, cfg)
    return cmd_verify(cfg, timings=args.timings)
