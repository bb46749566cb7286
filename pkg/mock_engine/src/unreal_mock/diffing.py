"""Round-trip oracle: does an execution dump realize its plan sidecar?

The plan stores meters; the dump stores engine units (1 m = 100 units).
Matching is by multiset: every planned placement must be realized by exactly
one actor with the same asset path, location within 1e-4 engine units, yaw
within 1e-6 degrees and scale within 1e-6; leftover actors are mismatches.
This module has no dependency on the scene compiler; it reads the plan JSON
directly.
"""

from __future__ import annotations

UNITS_PER_METER = 100.0
LOCATION_TOLERANCE = 1e-4
YAW_TOLERANCE = 1e-6
SCALE_TOLERANCE = 1e-6


class PlanFormatError(Exception):
    pass


def _expected_placements(plan: dict) -> list[dict]:
    try:
        expected = []
        for field in plan["fields"]:
            for placement in field["placements"]:
                x, y, z = placement["position"]
                expected.append({
                    "asset_path": field["asset"],
                    "location": (x * UNITS_PER_METER, y * UNITS_PER_METER, z * UNITS_PER_METER),
                    "yaw_deg": float(placement["yaw_deg"]),
                    "scale": float(placement["scale"]),
                })
        return expected
    except (KeyError, TypeError, ValueError) as exc:
        raise PlanFormatError(f"malformed plan document: {exc}") from exc


def _matches(actor: dict, want: dict) -> bool:
    if actor["asset_path"] != want["asset_path"]:
        return False
    dx, dy, dz = (abs(a - w) for a, w in zip(actor["location"], want["location"]))
    if max(dx, dy, dz) > LOCATION_TOLERANCE:
        return False
    if abs(actor["yaw_deg"] - want["yaw_deg"]) > YAW_TOLERANCE:
        return False
    return abs(actor["scale"] - want["scale"]) <= SCALE_TOLERANCE


def diff(dump: dict, plan: dict) -> tuple[bool, list[str]]:
    """True when the actor multiset realizes the plan; else mismatch strings."""
    try:
        actors = list(dump["actors"])
    except (KeyError, TypeError) as exc:
        raise PlanFormatError(f"malformed dump document: {exc}") from exc
    expected = _expected_placements(plan)

    mismatches: list[str] = []
    used = [False] * len(actors)
    for want in expected:
        found = None
        for i, actor in enumerate(actors):
            if not used[i] and _matches(actor, want):
                found = i
                break
        if found is None:
            mismatches.append(
                f"no actor realizes {want['asset_path']} at {want['location']} "
                f"yaw {want['yaw_deg']:.6f} scale {want['scale']:.6f}"
            )
        else:
            used[found] = True
    for i, actor in enumerate(actors):
        if not used[i]:
            mismatches.append(
                f"unplanned actor {actor['asset_path']} at {tuple(actor['location'])}"
            )
    return not mismatches, mismatches
