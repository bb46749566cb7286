"""Static checks on (script, plan) pairs.

The inspection is lexical and structural: string literals are scanned for
asset references, the FIELDS spawn table is extracted and parsed as a
literal, and everything is cross-checked against the plan sidecar (and the
knowledge entries when available). Rules:

  R1  every asset string parses under the taxonomy grammar
  R2  script asset paths and plan asset paths agree (as sets and per index)
  R3  engine API usage: spawns take a loaded-asset variable, attach calls
      pass an AttachmentRule constant, editor singletons are never constructed
  R4  script scale equals plan scale, plan scale equals entry-derived scale
  R5  spawn table entry count (rows*cols and yaw lists) equals plan placements
  R6  spacing recovered from the table equals the entry spacing

Anything on that list is an error; style-level observations are warnings.
The validator never raises on bad input: arbitrary text produces findings.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .emitter import UNITS_PER_METER, ScriptText
from .errors import StageError
from .knowledge import KnowledgeEntry, SceneRecipe
from .planner import ScenePlan, reference_height
from .taxonomy import TaxonomyConfig, parse_path

TOLERANCE = 1e-6

_STRING_RE = re.compile(r'"([^"\\\n]*)"|\'([^\'\\\n]*)\'')
_FIELDS_RE = re.compile(r"^FIELDS\s*=\s*\[", re.MULTILINE)
_SPAWN_RE = re.compile(r"spawn_actor_from_object\s*\(\s*([^,)\s]+)")
_SINGLETON_CTOR_RE = re.compile(r"unreal\.(EditorAssetLibrary|EditorLevelLibrary)\s*\(")


@dataclass(frozen=True)
class Finding:
    rule_id: str
    severity: str  # "error" | "warning"
    message: str
    location: str = ""


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not any(f.severity == "error" for f in self.findings)

    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "findings": [
                {"rule_id": f.rule_id, "severity": f.severity, "message": f.message, "location": f.location}
                for f in self.findings
            ],
        }


def _string_literals(source: str) -> list[str]:
    return [a or b for a, b in _STRING_RE.findall(source)]


def _looks_like_asset_ref(text: str) -> bool:
    return "/Game/" in text or text.endswith(".fbx") or ".fbx" in text


def extract_spawn_table(source: str) -> Optional[list[dict]]:
    """Parse the FIELDS literal; None when absent or not a literal."""
    match = _FIELDS_RE.search(source)
    if not match:
        return None
    start = match.end() - 1
    depth = 0
    for i in range(start, len(source)):
        if source[i] == "[" or source[i] == "(" or source[i] == "{":
            depth += 1
        elif source[i] == "]" or source[i] == ")" or source[i] == "}":
            depth -= 1
            if depth == 0:
                try:
                    table = ast.literal_eval(source[start:i + 1])
                except (ValueError, SyntaxError):
                    return None
                return table if isinstance(table, list) else None
    return None


def validate(
    script: ScriptText | str,
    plan: ScenePlan,
    recipe: Optional[SceneRecipe] = None,
    *,
    config: TaxonomyConfig,
    entries_by_id: Optional[Mapping[str, KnowledgeEntry]] = None,
    reference_heights: Optional[Mapping[str, float]] = None,
) -> ValidationReport:
    source = script.source if isinstance(script, ScriptText) else script
    report = ValidationReport()

    def error(rule: str, message: str, location: str = "") -> None:
        report.findings.append(Finding(rule, "error", message, location))

    def warning(rule: str, message: str, location: str = "") -> None:
        report.findings.append(Finding(rule, "warning", message, location))

    # entry lookup: prefer the recipe, fall back to an id-keyed mapping (KB)
    entry_for_path: dict[str, KnowledgeEntry] = {}
    if recipe is not None:
        for line in recipe.fields:
            entry_for_path[line.path.raw] = line.entry

    def resolve_entry(field_plan) -> Optional[KnowledgeEntry]:
        entry = entry_for_path.get(field_plan.asset.raw)
        if entry is None and entries_by_id is not None:
            entry = entries_by_id.get(field_plan.entry_id)
        return entry

    # R1: every asset-looking string parses
    script_paths: set[str] = set()
    for literal in _string_literals(source):
        if not _looks_like_asset_ref(literal):
            continue
        try:
            parse_path(literal, config)
            script_paths.add(literal)
        except StageError as exc:
            error("R1", f"malformed asset path {literal!r}: {exc}")

    table = extract_spawn_table(source)
    table_fields: Sequence[dict] = table if table is not None else []
    if table is None:
        error("R5", "spawn table FIELDS missing or not a parseable literal")
    for row in table_fields:
        path = row.get("asset_path")
        if isinstance(path, str):
            script_paths.add(path)

    # R2: path sets agree in both directions and per field index
    plan_paths = {fp.asset.raw for fp in plan.fields}
    for raw in sorted(script_paths - plan_paths):
        error("R2", f"script references a path absent from the plan: {raw!r}")
    for raw in sorted(plan_paths - script_paths):
        error("R2", f"plan path missing from the script: {raw!r}")
    if table is not None and len(table_fields) == len(plan.fields):
        for i, (row, fp) in enumerate(zip(table_fields, plan.fields)):
            if row.get("asset_path") != fp.asset.raw:
                error("R2", f"field {i} spawns {row.get('asset_path')!r} but the plan has {fp.asset.raw!r}",
                      f"FIELDS[{i}]")

    # R3: engine API usage
    for lineno, line in enumerate(source.splitlines(), start=1):
        spawn = _SPAWN_RE.search(line)
        if spawn and spawn.group(1)[0] in "\"'":
            error("R3", "spawn_actor_from_object must receive a loaded-asset variable, not a string",
                  f"line {lineno}")
        if ".attach_to_actor(" in line and "AttachmentRule." not in line:
            error("R3", "attach call without an AttachmentRule constant", f"line {lineno}")
        if _SINGLETON_CTOR_RE.search(line):
            error("R3", "editor singleton constructed directly; call its class methods instead",
                  f"line {lineno}")

    # R4/R5/R6 need aligned table rows
    if table is not None:
        table_count = 0
        for i, row in enumerate(table_fields):
            rows, cols = row.get("rows", 0), row.get("cols", 0)
            table_count += rows * cols
            yaws = row.get("yaws", ())
            if len(yaws) != rows * cols:
                error("R5", f"field {i}: {len(yaws)} yaw values for a {rows}x{cols} grid", f"FIELDS[{i}]")
        if table_count != plan.placement_count():
            error("R5", f"script spawns {table_count} assets but the plan has {plan.placement_count()}")

        if len(table_fields) == len(plan.fields):
            for i, (row, fp) in enumerate(zip(table_fields, plan.fields)):
                loc = f"FIELDS[{i}]"
                scale = row.get("scale")
                if scale is None or abs(scale - fp.scale) > TOLERANCE:
                    error("R4", f"field {i}: script scale {scale!r} differs from plan scale {fp.scale!r}", loc)
                entry = resolve_entry(fp)
                if entry is not None:
                    derived = entry.plant_height_m / reference_height(entry.meta.crop, reference_heights)
                    if abs(fp.scale - derived) > TOLERANCE:
                        error("R4", f"field {i}: plan scale {fp.scale!r} differs from entry-derived {derived!r}", loc)
                    for key, expected in (("row_spacing", entry.row_spacing_m),
                                          ("plant_spacing", entry.plant_spacing_m)):
                        got = row.get(key)
                        if got is None or abs(got / UNITS_PER_METER - expected) > TOLERANCE:
                            error("R6", f"field {i}: {key} {got!r} (engine units) does not equal "
                                        f"entry spacing {expected!r} m", loc)
                else:
                    warning("R4", f"field {i}: no knowledge entry available to audit scale/spacing", loc)
        elif len(table_fields) != len(plan.fields):
            error("R5", f"script has {len(table_fields)} field tables, plan has {len(plan.fields)}")

    return report
