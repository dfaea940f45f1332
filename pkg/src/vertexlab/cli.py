"""Command-line front end.

Every rational crosses this boundary as a "p/q" string.  Flags and the
optional JSON config file are parsed and validated before any computation;
a malformed value exits with status 2 and names where it came from.

    vertexlab character --gram "[[2]]" --coset "0" --wmax 2
    vertexlab check axioms delta --report out.json
    vertexlab extend --gram "[[8]]" --h "1/2" --wmax 4
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

from .extension import build_extension, module_pair, sigma_isomorphism_check
from .lattice import EvenLattice, LatticeVOA
from .scalars import Q, parse_rational
from .suites import DEFAULTS
from .verifier import SUITES, CheckReport, Window, combine, run_suite, serialize

__all__ = ["main", "ConfigError", "parse_config"]

COMMANDS = ("check", "twist", "extend", "module-pair", "character", "contragredient")

# option name -> config key
_FIELDS = {
    "gram": "gram",
    "h": "h",
    "coset": "coset",
    "mu": "mu",
    "wmax": "wmax",
    "mode_bound": "mode_bound",
    "cocycle": "cocycle",
    "grading_h": "grading_h",
    "degree": "degree",
}


class ConfigError(ValueError):
    """A config value that failed to parse; ``where`` names its source."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass
class _Raw:
    value: Any
    where: str


def _json_value(text: Any, where: str) -> Any:
    if not isinstance(text, str):
        return text
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            return json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(where, f"bad JSON at column {exc.colno}: {exc.msg}") from None
    return stripped


def _rational(x: Any, where: str) -> Q:
    if isinstance(x, float):
        raise ConfigError(where, f"{x!r} is a float; write rationals as \"p/q\" strings")
    try:
        return Q(parse_rational(x))
    except (ValueError, TypeError):
        raise ConfigError(where, f"{x!r} is not a rational") from None


def _vector(raw: _Raw, rank: int) -> tuple[Q, ...]:
    val = _json_value(raw.value, raw.where)
    if isinstance(val, str) and "," in val:
        val = [p for p in val.split(",")]
    if not isinstance(val, list):
        val = [val]
    out = tuple(_rational(x, f"{raw.where}[{i}]") for i, x in enumerate(val))
    if len(out) != rank:
        raise ConfigError(raw.where, f"expected {rank} coordinates, got {len(out)}")
    return out


def _gram(raw: _Raw) -> list[list[Q]]:
    val = _json_value(raw.value, raw.where)
    if not isinstance(val, list) or not val or not all(isinstance(r, list) for r in val):
        raise ConfigError(raw.where, "expected a square matrix such as [[2]]")
    rows = [[_rational(x, f"{raw.where}[{i}][{j}]") for j, x in enumerate(row)]
            for i, row in enumerate(val)]
    n = len(rows)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ConfigError(f"{raw.where}[{i}]", f"row has {len(row)} entries, expected {n}")
        for j in range(i):
            if rows[i][j] != rows[j][i]:
                raise ConfigError(f"{raw.where}[{i}][{j}]", "matrix is not symmetric")
    try:
        EvenLattice(rows)
    except ValueError as exc:
        raise ConfigError(raw.where, str(exc)) from None
    return rows


def _cocycle(raw: _Raw, rank: int) -> str | list[list[int]]:
    val = _json_value(raw.value, raw.where)
    if val == "auto":
        return "auto"
    if not isinstance(val, list) or len(val) != rank \
            or not all(isinstance(r, list) and len(r) == rank for r in val):
        raise ConfigError(raw.where, f"expected \"auto\" or a {rank}x{rank} table of signs")
    for i, row in enumerate(val):
        for j, x in enumerate(row):
            if x not in (1, -1) or isinstance(x, bool):
                raise ConfigError(f"{raw.where}[{i}][{j}]", f"{x!r} is not +1 or -1")
    return val


def _load_file(path: str) -> dict[str, _Raw]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(path, exc.strerror or "cannot read file") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    if not isinstance(data, dict):
        raise ConfigError(path, "top level must be a JSON object")
    out = {}
    for key, value in data.items():
        name = key.replace("-", "_")
        if name not in _FIELDS:
            raise ConfigError(f"{path}: key {key!r}", "unknown config key")
        out[name] = _Raw(value, f"{path}: key {key!r}")
    return out


def parse_config(args: argparse.Namespace, defaults: dict[str, Any],
                 explicit_only: bool = False) -> dict[str, Any]:
    """Merge defaults < config file < explicit flags, then parse every value.

    With ``explicit_only`` the whole merge is still validated, but only the
    values that came from the file or the flags are returned.
    """
    raw: dict[str, _Raw] = {k: _Raw(v, f"default {k}") for k, v in defaults.items()
                            if k in _FIELDS}
    if args.config:
        raw.update(_load_file(args.config))
    for name in _FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            raw[name] = _Raw(value, "--" + name.replace("_", "-"))
    if "gram" not in raw:
        raise ConfigError("--gram", "a Gram matrix is required")
    cfg: dict[str, Any] = {"gram": _gram(raw["gram"])}
    rank = len(cfg["gram"])
    for name in ("h", "coset", "mu", "grading_h"):
        if name in raw:
            cfg[name] = _vector(raw[name], rank)
    for name in ("wmax", "mode_bound"):
        if name in raw:
            cfg[name] = _rational(_json_value(raw[name].value, raw[name].where), raw[name].where)
            if cfg[name] < 0:
                raise ConfigError(raw[name].where, "must be non-negative")
    if "degree" in raw:
        d = _rational(raw["degree"].value, raw["degree"].where)
        if d.denominator != 1 or d < 0:
            raise ConfigError(raw["degree"].where, "must be a non-negative integer")
        cfg["degree"] = int(d)
    cfg["cocycle"] = _cocycle(raw["cocycle"], rank) if "cocycle" in raw else "auto"
    if explicit_only:
        return {k: v for k, v in cfg.items()
                if k in raw and not raw[k].where.startswith("default")}
    return cfg


# commands ----------------------------------------------------------------------------

def _need(cfg: dict[str, Any], *names: str) -> None:
    for name in names:
        if name not in cfg:
            raise ConfigError("--" + name.replace("_", "-"), "required for this command")


def _suite_config(cfg: dict[str, Any]) -> dict[str, Any]:
    out = {k: v for k, v in cfg.items() if k != "mu"}
    if "mu" in cfg:
        out["mu_list"] = [cfg["mu"]]
    return out


def _character(cfg: dict[str, Any]) -> tuple[CheckReport, list[str]]:
    _need(cfg, "wmax")
    voa = LatticeVOA(cfg["gram"], cocycle=cfg["cocycle"])
    coset = cfg.get("coset", voa.space.zero)
    rows = voa.character(coset, cfg["wmax"])
    report = CheckReport("character", meta={"gram": cfg["gram"], "coset": coset,
                                            "wmax": cfg["wmax"], "character": rows})
    return report, [f"{w} {n}" for w, n in rows]


def _module_pair(cfg: dict[str, Any]) -> tuple[CheckReport, list[str]]:
    _need(cfg, "h", "mu")
    wmax = cfg.get("wmax", Q(3))
    E, build = build_extension(cfg["gram"], cfg["h"], cfg["cocycle"])
    M, report = module_pair(E, cfg["mu"], Window(wmax, cfg.get("mode_bound", Q(5, 2))))
    report.cases[:0] = build.cases
    report.cases += sigma_isomorphism_check(M, wmax).cases
    kind = "sigma-twisted" if M.twisted else "untwisted"
    return report, [f"module pair for mu = {_fmt(M.mu)}: {kind}"]


def _extend_lines(report: CheckReport) -> list[str]:
    meta = report.meta
    eq = meta.get("equivalence", {})
    lines = [f"parity: {meta.get('parity')}", f"gamma: {meta.get('gamma')}"]
    if "ambient_gram" in eq:
        lines.append(f"equivalent lattice Gram matrix: {_fmt(eq['ambient_gram'])}")
    if "character" in eq:
        lines.append(f"character: {_fmt(eq['character'])}")
    return lines


def _fmt(x: Any) -> str:
    return json.dumps(serialize(x))


_SHOWN = 8


def _summary(report: CheckReport) -> list[str]:
    cells = sum(c.cells for c in report.cases)
    status = "PASS" if report.passed else "FAIL"
    line = f"{report.suite}: {status} ({len(report.cases)} cases, {cells} cells"
    if report.timing:
        line += f", {report.timing['seconds']} s"
    out = [line + ")"]
    failures = report.failures()
    for case in failures[:_SHOWN]:
        witness = json.dumps(serialize(case.counterexample))
        if len(witness) > 240:
            witness = witness[:237] + "..."
        out.append(f"  FAIL {case.tag}: {witness}")
    if len(failures) > _SHOWN:
        out.append(f"  ... {len(failures) - _SHOWN} more failing cases in the report")
    return out


def _report_json(reports: Sequence[CheckReport]) -> dict[str, Any]:
    if len(reports) == 1:
        return reports[0].to_json()
    whole = combine(reports, "+".join(r.suite for r in reports))
    whole.meta = {r.suite: r.meta for r in reports if r.meta}
    return whole.to_json()


def _report_csv(reports: Sequence[CheckReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["suite", "tag", "pass", "cells", "inputs", "window", "counterexample"])
    for r in reports:
        for c in r.cases:
            d = c.to_json()
            writer.writerow([r.suite, c.tag, "true" if c.passed else "false", c.cells,
                             json.dumps(d["inputs"], sort_keys=True),
                             json.dumps(d["window"], sort_keys=True),
                             json.dumps(d["counterexample"], sort_keys=True)])
    return buf.getvalue()


def _write(reports: Sequence[CheckReport], path: str, fmt: str) -> None:
    if fmt == "csv":
        text = _report_csv(reports)
    else:
        text = json.dumps(_report_json(reports), indent=1, sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--gram", help='Gram matrix, e.g. "[[2]]"')
    common.add_argument("--h", help='coordinates of h, e.g. "1/2" or "[\\"1/2\\", 0]"')
    common.add_argument("--coset", help="coset label coordinates")
    common.add_argument("--wmax", help="weight cut")
    common.add_argument("--mode-bound", dest="mode_bound", help="largest |mode| checked")
    common.add_argument("--cocycle", help='"auto" or a table of signs')
    common.add_argument("--grading-h", dest="grading_h", help="grading shift for contragredient")
    common.add_argument("--degree", help="Laurent bidegree for the lemma checks")
    common.add_argument("--config", help="JSON config; explicit flags take precedence")
    common.add_argument("--report", help="write the full report here")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="vertexlab", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", parents=[common], help="run verification suites")
    p.add_argument("suites", nargs="+", choices=SUITES, metavar="SUITE",
                   help="one or more of " + ", ".join(SUITES))
    sub.add_parser("twist", parents=[common], help="twist a sector by Delta(h, z)")
    sub.add_parser("extend", parents=[common], help="build and check V + V~")
    p = sub.add_parser("module-pair", parents=[common], help="build and check W + W~")
    p.add_argument("--mu", help="label of the V-module W")
    sub.add_parser("character", parents=[common], help="graded dimensions of a lattice sector")
    sub.add_parser("contragredient", parents=[common], help="contragredient twisted modules")
    return parser


_SUITE_OF = {"twist": "twisted", "extend": "extension", "contragredient": "contragredient"}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    command = args.command
    try:
        if command == "check":
            # each suite keeps its own defaults; validate every merge up front
            for name in args.suites:
                parse_config(args, DEFAULTS[name])
            cfg = parse_config(args, DEFAULTS[args.suites[0]], explicit_only=True)
        else:
            cfg = parse_config(args, DEFAULTS.get(_SUITE_OF.get(command, ""), {"gram": [[2]]}))
        if command == "module-pair":
            defaults_e = DEFAULTS["extension"]
            cfg.setdefault("h", _vector(_Raw(defaults_e["h"], "default h"), len(cfg["gram"])))
            _need(cfg, "mu")
        if command == "character":
            _need(cfg, "wmax")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    lines: list[str] = []
    if command == "character":
        report, lines = _character(cfg)
        reports = [report]
    elif command == "module-pair":
        report, lines = _module_pair(cfg)
        reports = [report]
    else:
        names = args.suites if command == "check" else [_SUITE_OF[command]]
        reports = run_suite(names, _suite_config(cfg))
        if command == "extend":
            lines = _extend_lines(reports[0])
        elif command == "twist" and "target" in reports[0].meta:
            lines = [f"target sector: {_fmt(reports[0].meta['target'])}",
                     f"character: {_fmt(reports[0].meta['character'])}"]

    for line in lines:
        print(line)
    for r in reports:
        if r.cases:
            for line in _summary(r):
                print(line)
    if args.report:
        _write(reports, args.report, args.format)
    return 0 if all(r.passed for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
