"""Render a scene plan into an engine editor script plus its plan sidecar.

The script is data-driven: one FIELDS table with origin/spacing (engine
units), per-field uniform scale and the seeded yaw list, iterated by
spawn_field(). Emission is a pure function of the plan, so identical plans
produce byte-identical scripts. Distances convert at 1 m = 100 engine units.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import StageError
from .planner import PlanError, ScenePlan

UNITS_PER_METER = 100.0


class InvalidPlanError(StageError):
    stage = "emitter"


@dataclass(frozen=True)
class ScriptText:
    source: str
    plan_ref: str


def table_from_plan(plan: ScenePlan) -> list[dict]:
    """Engine-unit spawn table, one row per field."""
    rows = []
    for fp in plan.fields:
        rows.append({
            "asset_path": fp.asset.raw,
            "origin": (fp.origin[0] * UNITS_PER_METER, fp.origin[1] * UNITS_PER_METER),
            "rows": fp.rows,
            "cols": fp.cols,
            "row_spacing": fp.row_spacing_m * UNITS_PER_METER,
            "plant_spacing": fp.plant_spacing_m * UNITS_PER_METER,
            "scale": fp.scale,
            "yaws": tuple(p.yaw_deg for p in fp.placements),
        })
    return rows


def _render_yaws(yaws: Sequence[float], indent: str) -> str:
    if not yaws:
        return "()"
    chunks = []
    for start in range(0, len(yaws), 5):
        chunk = ", ".join(repr(v) for v in yaws[start:start + 5])
        chunks.append(f"{indent}    {chunk},")
    return "(\n" + "\n".join(chunks) + f"\n{indent})"


def _render_field(row: dict, indent: str = "    ") -> str:
    inner = indent + "    "
    ox, oy = row["origin"]
    lines = [
        f"{indent}{{",
        f'{inner}"asset_path": "{row["asset_path"]}",',
        f'{inner}"origin": ({ox!r}, {oy!r}),',
        f'{inner}"rows": {row["rows"]},',
        f'{inner}"cols": {row["cols"]},',
        f'{inner}"row_spacing": {row["row_spacing"]!r},',
        f'{inner}"plant_spacing": {row["plant_spacing"]!r},',
        f'{inner}"scale": {row["scale"]!r},',
        f'{inner}"yaws": {_render_yaws(row["yaws"], inner)},',
        f"{indent}}},",
    ]
    return "\n".join(lines)


def render_script(
    table: Iterable[dict],
    plan_ref: str,
    extra_main_lines: Sequence[str] = (),
) -> str:
    """Script text from a spawn table; mutation tooling reuses this hook."""
    field_blocks = "\n".join(_render_field(row) for row in table)
    extra = "".join(f"    {line}\n" for line in extra_main_lines)
    return f'''"""Generated scene script. Units: 1 meter = 100 engine units."""
# Plan sidecar: {plan_ref}

import unreal

FIELDS = [
{field_blocks}
]


def setup_scene():
    """Flat ground scene: nothing to prepare before spawning."""
    return []


def spawn_field(field_table):
    asset = unreal.EditorAssetLibrary.load_asset(field_table["asset_path"])
    actors = []
    index = 0
    for i in range(field_table["rows"]):
        for j in range(field_table["cols"]):
            x = field_table["origin"][0] + j * field_table["plant_spacing"]
            y = field_table["origin"][1] + i * field_table["row_spacing"]
            location = unreal.Vector(x, y, 0.0)
            rotation = unreal.Rotator(pitch=0.0, yaw=field_table["yaws"][index], roll=0.0)
            actor = unreal.EditorLevelLibrary.spawn_actor_from_object(asset, location, rotation)
            scale = field_table["scale"]
            actor.set_actor_scale3d(unreal.Vector(scale, scale, scale))
            actors.append(actor)
            index += 1
    return actors


def main():
    setup_scene()
    all_actors = []
    for field_table in FIELDS:
        all_actors.extend(spawn_field(field_table))
{extra}    return all_actors


if __name__ == "__main__":
    main()
'''


def emit_script(plan: ScenePlan, name: str = "scene") -> ScriptText:
    """Deterministic emission; rejects plans violating their own invariants."""
    try:
        plan.validate()
    except PlanError as exc:
        raise InvalidPlanError(str(exc)) from exc
    plan_ref = f"{name}.plan.json"
    return ScriptText(source=render_script(table_from_plan(plan), plan_ref), plan_ref=plan_ref)


def emit_script_via_provider(plan: ScenePlan, provider, name: str = "scene") -> ScriptText:
    """Ask a chat provider for the script; the validator judges the result.

    The provider sees the plan JSON and the API conventions; whatever comes
    back is returned verbatim so the caller can run the same validation pass
    as for deterministic emission.
    """
    messages = [
        {"role": "system", "content": (
            "Write an engine editor Python script for the given scene plan. "
            "Use a FIELDS data table (asset_path, origin, rows, cols, row_spacing, "
            "plant_spacing, scale, yaws in engine units; 1 m = 100 units) iterated "
            "by spawn_field(), plus setup_scene() and main(). Load assets with "
            "unreal.EditorAssetLibrary.load_asset and spawn with "
            "unreal.EditorLevelLibrary.spawn_actor_from_object."
        )},
        {"role": "user", "content": plan.to_json()},
    ]
    source = provider.chat(messages)
    return ScriptText(source=source, plan_ref=f"{name}.plan.json")
