"""Mutation corpus for exercising the validator and the execution mock.

Each mutator takes a pristine (script, plan) pair and returns a broken script
while the plan stays authoritative. Text mutants edit the emitted source
directly; structural mutants rebuild the script from a modified spawn table.
Every mutant models a failure mode observed in practice for generated engine
scripts: mangled paths, wrong counts, wrong scale or spacing, API misuse.
"""

from __future__ import annotations

import copy
from typing import Callable

from .emitter import render_script, table_from_plan
from .planner import ScenePlan
from .taxonomy import TaxonomyConfig, format_path, parse_path

MUTANT_NAMES = (
    "prefix_strip",
    "suffix_strip",
    "path_typo",
    "dropped_spawn",
    "doubled_spawn",
    "scale_x2",
    "spacing_off",
    "missing_attachment_rule",
    "constructor_misuse",
    "foreign_path_injection",
    "swapped_field_tables",
    "empty_script",
)


def _rebuild(plan: ScenePlan, mutate_table: Callable[[list[dict]], list[dict]],
             extra_main_lines: tuple[str, ...] = ()) -> str:
    table = mutate_table(table_from_plan(plan))
    return render_script(table, plan_ref="scene.plan.json", extra_main_lines=extra_main_lines)


def build_mutants(script: str, plan: ScenePlan, config: TaxonomyConfig) -> dict[str, str]:
    """All named mutants for one emitted script. Needs a plan with >= 2 fields."""
    first_path = plan.fields[0].asset.raw
    meta = parse_path(first_path, config)

    def path_typo(table):
        broken = first_path.replace(f"/{meta.variety}/", f"/{meta.variety}x/", 1)
        table[0]["asset_path"] = broken
        return table

    def dropped_spawn(table):
        table[0]["rows"] -= 1
        table[0]["yaws"] = table[0]["yaws"][: table[0]["rows"] * table[0]["cols"]]
        return table

    def doubled_spawn(table):
        table.insert(1, copy.deepcopy(table[0]))
        return table

    def scale_x2(table):
        table[0]["scale"] *= 2.0
        return table

    def spacing_off(table):
        table[0]["plant_spacing"] += 1.0  # one engine unit = 1 cm
        return table

    def foreign_path_injection(table):
        flipped = meta.__class__(
            meta.category, meta.crop, meta.variety, meta.lifecycle, meta.season,
            "Ill" if meta.health == "Healthy" else "Healthy",
        )
        extra = copy.deepcopy(table[0])
        extra["asset_path"] = format_path(flipped, config).raw
        table.append(extra)
        return table

    def swapped_field_tables(table):
        table[0]["asset_path"], table[1]["asset_path"] = table[1]["asset_path"], table[0]["asset_path"]
        return table

    mutants = {
        "prefix_strip": script.replace("/Game/", "/", 1),
        "suffix_strip": script.replace(".fbx", "", 1),
        "path_typo": _rebuild(plan, path_typo),
        "dropped_spawn": _rebuild(plan, dropped_spawn),
        "doubled_spawn": _rebuild(plan, doubled_spawn),
        "scale_x2": _rebuild(plan, scale_x2),
        "spacing_off": _rebuild(plan, spacing_off),
        "missing_attachment_rule": _rebuild(
            plan, lambda t: t,
            extra_main_lines=('all_actors[0].attach_to_actor(all_actors[1], "anchor")',),
        ),
        "constructor_misuse": _rebuild(
            plan, lambda t: t,
            extra_main_lines=("library = unreal.EditorLevelLibrary()",),
        ),
        "foreign_path_injection": _rebuild(plan, foreign_path_injection),
        "swapped_field_tables": _rebuild(plan, swapped_field_tables),
        "empty_script": "",
    }
    assert set(mutants) == set(MUTANT_NAMES)
    return mutants
