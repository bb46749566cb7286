#!/usr/bin/env python3
"""Regenerate the bundled knowledge base (one entry per taxonomy tuple).

All values are authored fixtures derived from the per-crop bases in
crop_defaults.json: small deterministic per-variety jitter, lifecycle and
health height factors, season/health driven rendering effects. Run from the
repo root:

    python3 tools/gen_kb.py
"""

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "src" / "sceneforge" / "data"

LIFECYCLE_HEIGHT = {"Vegetative": 0.45, "Reproductive": 0.8, "Maturation": 1.0}
HEALTH_HEIGHT = {"Healthy": 1.0, "Ill": 0.92}
SEASON_EFFECTS = {
    "Spring": ["spring_flush"],
    "Summer": [],
    "Fall": ["autumn_tint"],
    "Winter": ["winter_dormancy"],
}


def main() -> None:
    taxonomy = json.loads((DATA / "taxonomy.json").read_text())
    defaults = json.loads((DATA / "crop_defaults.json").read_text())

    entries = []
    for category, crops in taxonomy["categories"].items():
        for crop in crops:
            base = defaults[crop]
            for idx, variety in enumerate(taxonomy["varieties"][crop]):
                variety_factor = 0.92 + 0.04 * idx
                row = round(base["row_spacing_m"] * (1 + 0.02 * idx), 3)
                plant = round(base["plant_spacing_m"] * (1 + 0.02 * idx), 3)
                for lifecycle in taxonomy["lifecycles"]:
                    for season in taxonomy["seasons"]:
                        for health in taxonomy["healths"]:
                            height = round(
                                base["plant_height_m"]
                                * variety_factor
                                * LIFECYCLE_HEIGHT[lifecycle]
                                * HEALTH_HEIGHT[health],
                                3,
                            )
                            effects = list(SEASON_EFFECTS[season])
                            if lifecycle == "Reproductive":
                                effects.append("flowering_bloom")
                            if health == "Ill":
                                effects.append("wilt")
                            entries.append({
                                "id": f"{crop}-{variety}-{lifecycle}-{season}-{health}".lower(),
                                "meta": {
                                    "category": category,
                                    "crop": crop,
                                    "variety": variety,
                                    "lifecycle": lifecycle,
                                    "season": season,
                                    "health": health,
                                },
                                "plant_height_m": height,
                                "row_spacing_m": row,
                                "plant_spacing_m": plant,
                                "density_per_ha": round(10000.0 / (row * plant), 1),
                                "disease_susceptibility": ["low", "medium", "high"][idx % 3],
                                "irrigation": base["irrigation"],
                                "rendering_effects": effects,
                            })

    out = DATA / "knowledge_base.json"
    out.write_text(json.dumps(entries, indent=1, sort_keys=True) + "\n")
    print(f"wrote {len(entries)} entries to {out}")


if __name__ == "__main__":
    main()
