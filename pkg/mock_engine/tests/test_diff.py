import copy

import pytest

from unreal_mock.diffing import PlanFormatError, diff

PATH = "/Game/Fruits/Apple/Gala/Maturation/Summer/Healthy/Gala_Maturation_Summer_Healthy.fbx"

PLAN = {
    "units": "m",
    "seed": 0,
    "fields": [
        {
            "asset": PATH,
            "entry_id": "x",
            "rows": 1,
            "cols": 2,
            "origin": [0.0, 0.0],
            "row_spacing_m": 4.5,
            "plant_spacing_m": 3.0,
            "scale": 1.0,
            "bbox": [-1.5, -1.5, 4.5, 1.5],
            "placements": [
                {"position": [0.0, 0.0, 0.0], "yaw_deg": 10.0, "scale": 1.0},
                {"position": [3.0, 0.0, 0.0], "yaw_deg": 20.0, "scale": 1.0},
            ],
        }
    ],
}

DUMP = {
    "actors": [
        {"asset_path": PATH, "location": [0.0, 0.0, 0.0], "yaw_deg": 10.0, "scale": 1.0},
        {"asset_path": PATH, "location": [300.0, 0.0, 0.0], "yaw_deg": 20.0, "scale": 1.0},
    ],
    "load_calls": [PATH],
    "api_errors": [],
}


def test_matching_dump_passes():
    ok, mismatches = diff(DUMP, PLAN)
    assert ok and mismatches == []


def test_actor_order_does_not_matter():
    shuffled = copy.deepcopy(DUMP)
    shuffled["actors"].reverse()
    ok, _ = diff(shuffled, PLAN)
    assert ok


def test_deleted_actor_is_one_mismatch():
    broken = copy.deepcopy(DUMP)
    del broken["actors"][1]
    ok, mismatches = diff(broken, PLAN)
    assert not ok
    assert len(mismatches) == 1
    assert "no actor realizes" in mismatches[0]


def test_extra_actor_is_flagged():
    extra = copy.deepcopy(DUMP)
    extra["actors"].append(dict(extra["actors"][0], location=[900.0, 0.0, 0.0]))
    ok, mismatches = diff(extra, PLAN)
    assert not ok
    assert any("unplanned actor" in m for m in mismatches)


def test_location_off_by_one_engine_unit_fails():
    off = copy.deepcopy(DUMP)
    off["actors"][1]["location"][0] += 1.0
    ok, _ = diff(off, PLAN)
    assert not ok


def test_location_within_tolerance_passes():
    near = copy.deepcopy(DUMP)
    near["actors"][1]["location"][0] += 5e-5  # inside the 1e-4 engine unit band
    ok, _ = diff(near, PLAN)
    assert ok


def test_yaw_and_scale_tolerances():
    yaw_off = copy.deepcopy(DUMP)
    yaw_off["actors"][0]["yaw_deg"] += 1e-5
    assert not diff(yaw_off, PLAN)[0]

    scale_off = copy.deepcopy(DUMP)
    scale_off["actors"][0]["scale"] += 1e-5
    assert not diff(scale_off, PLAN)[0]


def test_malformed_plan_raises():
    with pytest.raises(PlanFormatError):
        diff(DUMP, {"fields": [{"oops": True}]})
    with pytest.raises(PlanFormatError):
        diff({"nope": []}, PLAN)
