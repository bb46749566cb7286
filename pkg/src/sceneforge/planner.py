"""Deterministic scene planning: grids, spacing, seeded rotation, layout offsets.

Fields are laid out left-to-right along +x with a mandatory gap between
bounding boxes, so multi-field scenes can never overlap. Yaw is the only
random quantity; it comes from SplitMix64 (Steele et al.'s 64-bit mix
generator), chosen because the whole sequence is reproducible from the seed
with ~10 lines of integer arithmetic in any language. Each field consumes an
independent substream derived from (seed, field index), so re-planning with
the same seed gives bitwise-identical yaws regardless of field concurrency.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import StageError
from .knowledge import KnowledgeEntry, SceneRecipe, load_crop_defaults
from .taxonomy import AssetPath

SCALE_MIN, SCALE_MAX = 0.05, 20.0
DEFAULT_ROWS, DEFAULT_COLS, DEFAULT_GAP_M = 10, 10, 10.0

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class InvalidDimensionError(StageError):
    stage = "planner"


class PlanError(StageError):
    stage = "planner"


def _mix64(value: int) -> int:
    """SplitMix64 finalizer."""
    value = (value ^ (value >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    value = (value ^ (value >> 27)) * 0x94D049BB133111EB & _MASK64
    return value ^ (value >> 31)


class SplitMix64:
    """Minimal portable 64-bit generator (state += golden; output = mix(state))."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        return _mix64(self.state)

    def next_float(self) -> float:
        # 53-bit mantissa, uniform in [0, 1)
        return (self.next_u64() >> 11) / float(1 << 53)

    def next_yaw(self) -> float:
        return self.next_float() * 360.0


def field_stream(seed: int, field_index: int) -> SplitMix64:
    """Independent per-field substream; decorrelated via the mix finalizer."""
    return SplitMix64(_mix64((seed ^ ((field_index + 1) * _GOLDEN)) & _MASK64))


@dataclass(frozen=True)
class Placement:
    asset: AssetPath
    position: tuple[float, float, float]
    yaw_deg: float
    scale: float


@dataclass(frozen=True)
class BBox:
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def intersects(self, other: "BBox") -> bool:
        return not (
            self.max_x <= other.min_x
            or other.max_x <= self.min_x
            or self.max_y <= other.min_y
            or other.max_y <= self.min_y
        )


@dataclass
class FieldPlan:
    asset: AssetPath
    entry_id: str
    rows: int
    cols: int
    origin: tuple[float, float]
    row_spacing_m: float
    plant_spacing_m: float
    scale: float
    placements: list[Placement]
    bbox: BBox


@dataclass
class ScenePlan:
    seed: int
    fields: list[FieldPlan] = field(default_factory=list)
    units: str = "m"

    def placement_count(self) -> int:
        return sum(len(f.placements) for f in self.fields)

    def validate(self) -> None:
        for fp in self.fields:
            if len(fp.placements) != fp.rows * fp.cols:
                raise PlanError(f"field {fp.asset.raw}: {len(fp.placements)} placements for {fp.rows}x{fp.cols}")
            for p in fp.placements:
                if p.position[2] != 0.0:
                    raise PlanError(f"placement off the ground plane: {p.position}")
                if not (SCALE_MIN <= p.scale <= SCALE_MAX):
                    raise PlanError(f"scale {p.scale} outside [{SCALE_MIN}, {SCALE_MAX}]")
                if not (0.0 <= p.yaw_deg < 360.0):
                    raise PlanError(f"yaw {p.yaw_deg} outside [0, 360)")
        for i in range(len(self.fields)):
            for j in range(i + 1, len(self.fields)):
                if self.fields[i].bbox.intersects(self.fields[j].bbox):
                    raise PlanError(f"field bboxes {i} and {j} overlap")

    # -- serialization -----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "units": self.units,
            "seed": self.seed,
            "fields": [
                {
                    "asset": fp.asset.raw,
                    "entry_id": fp.entry_id,
                    "rows": fp.rows,
                    "cols": fp.cols,
                    "origin": list(fp.origin),
                    "row_spacing_m": fp.row_spacing_m,
                    "plant_spacing_m": fp.plant_spacing_m,
                    "scale": fp.scale,
                    "bbox": [fp.bbox.min_x, fp.bbox.min_y, fp.bbox.max_x, fp.bbox.max_y],
                    "placements": [
                        {"position": list(p.position), "yaw_deg": p.yaw_deg, "scale": p.scale}
                        for p in fp.placements
                    ],
                }
                for fp in self.fields
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScenePlan":
        try:
            fields = []
            for fd in data["fields"]:
                asset = AssetPath(fd["asset"])
                placements = [
                    Placement(
                        asset,
                        tuple(p["position"]),
                        float(p["yaw_deg"]),
                        float(p["scale"]),
                    )
                    for p in fd["placements"]
                ]
                bbox = BBox(*fd["bbox"])
                fields.append(FieldPlan(
                    asset=asset,
                    entry_id=fd["entry_id"],
                    rows=int(fd["rows"]),
                    cols=int(fd["cols"]),
                    origin=tuple(fd["origin"]),
                    row_spacing_m=float(fd["row_spacing_m"]),
                    plant_spacing_m=float(fd["plant_spacing_m"]),
                    scale=float(fd["scale"]),
                    placements=placements,
                    bbox=bbox,
                ))
            return cls(seed=int(data["seed"]), fields=fields, units=data.get("units", "m"))
        except (KeyError, TypeError, ValueError) as exc:
            raise PlanError(f"malformed plan document: {exc}") from exc


def reference_height(crop: str, heights: Optional[Mapping[str, float]] = None) -> float:
    if heights is None:
        heights = {crop_name: values["plant_height_m"] for crop_name, values in load_crop_defaults().items()}
    try:
        return float(heights[crop])
    except KeyError:
        raise PlanError(f"no reference height configured for crop {crop!r}") from None


def plan_field(
    asset: AssetPath,
    entry: KnowledgeEntry,
    rows: int,
    cols: int,
    origin: tuple[float, float],
    stream: SplitMix64,
    reference_heights: Optional[Mapping[str, float]] = None,
) -> FieldPlan:
    """Grid placements at entry spacing, seeded yaw in row-major order."""
    if rows < 1 or cols < 1:
        raise InvalidDimensionError(f"rows and cols must be >= 1, got {rows}x{cols}")
    if entry.row_spacing_m <= 0 or entry.plant_spacing_m <= 0:
        raise InvalidDimensionError(f"entry {entry.id!r} has non-positive spacing")
    scale = entry.plant_height_m / reference_height(entry.meta.crop, reference_heights)
    if not (SCALE_MIN <= scale <= SCALE_MAX):
        raise PlanError(f"entry {entry.id!r} implies scale {scale:.4f} outside sanity bounds")
    ox, oy = origin
    rs, ps = entry.row_spacing_m, entry.plant_spacing_m
    placements = []
    for i in range(rows):
        for j in range(cols):
            placements.append(Placement(
                asset=asset,
                position=(ox + j * ps, oy + i * rs, 0.0),
                yaw_deg=stream.next_yaw(),
                scale=scale,
            ))
    margin = ps / 2.0
    bbox = BBox(
        min_x=ox - margin,
        min_y=oy - margin,
        max_x=ox + (cols - 1) * ps + margin,
        max_y=oy + (rows - 1) * rs + margin,
    )
    return FieldPlan(
        asset=asset,
        entry_id=entry.id,
        rows=rows,
        cols=cols,
        origin=origin,
        row_spacing_m=rs,
        plant_spacing_m=ps,
        scale=scale,
        placements=placements,
        bbox=bbox,
    )


def plan_scene(
    recipe: SceneRecipe,
    seed: int,
    gap_m: float = DEFAULT_GAP_M,
    reference_heights: Optional[Mapping[str, float]] = None,
) -> ScenePlan:
    """Lay fields left-to-right: each origin starts gap_m after the previous bbox.

    A recipe line with quantity q contributes q consecutive fields of that
    type. The per-field RNG substream index counts expanded fields, so adding
    a field never perturbs earlier ones.
    """
    if not recipe.fields:
        raise PlanError("recipe has no fields")
    plan = ScenePlan(seed=seed)
    next_origin_x = 0.0
    index = 0
    for line in recipe.fields:
        for _ in range(max(1, line.quantity)):
            fp = plan_field(
                asset=line.path,
                entry=line.entry,
                rows=line.rows,
                cols=line.cols,
                origin=(next_origin_x, 0.0),
                stream=field_stream(seed, index),
                reference_heights=reference_heights,
            )
            plan.fields.append(fp)
            next_origin_x = fp.bbox.max_x + gap_m
            index += 1
    plan.validate()
    return plan
