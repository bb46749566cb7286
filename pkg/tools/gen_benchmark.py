#!/usr/bin/env python3
"""Author the bundled 100-prompt benchmark (JSON lines).

Prompts are constructed from known taxonomy tuples, so every expected path is
fixed at authoring time by the documented defaulting rules (variety -> first
in config order, lifecycle -> Maturation, season -> Summer, health ->
Healthy, plus the single-explicit-season consistency rewrite). Category mix:
40 single detailed, 30 single generic, 30 multi generic.

Run: python3 tools/gen_benchmark.py
"""

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from sceneforge.frontend import split_pascal  # noqa: E402
from sceneforge.taxonomy import AssetMetadata, default_config, format_path  # noqa: E402

DATA = ROOT / "src" / "sceneforge" / "data"

HEALTH_WORDS = {"Healthy": ["healthy", "thriving"], "Ill": ["diseased", "sick", "unhealthy"]}
LIFECYCLE_WORDS = {
    "Vegetative": ["young", "seedling"],
    "Reproductive": ["flowering", "blooming"],
    "Maturation": ["mature", "ripe"],
}
SEASON_WORDS = {
    "Spring": ["spring"],
    "Summer": ["summer"],
    "Fall": ["fall", "autumn"],
    "Winter": ["winter"],
}
NOUNS = ["field", "orchard", "plantation", "plot"]
PLURALS = {
    "Apple": "apples", "Banana": "bananas", "Cherry": "cherries",
    "Carrot": "carrots", "Lettuce": "lettuces", "Tomato": "tomatoes",
}


def defaulted_path(cfg, crop, variety=None, lifecycle=None, season=None, health=None):
    meta = AssetMetadata(
        category=cfg.category_of[crop],
        crop=crop,
        variety=variety or cfg.varieties[crop][0],
        lifecycle=lifecycle or "Maturation",
        season=season or "Summer",
        health=health or "Healthy",
    )
    return format_path(meta, cfg).raw


def pick_tuple(cfg, rng):
    crop = rng.choice(list(cfg.category_of))
    variety = rng.choice(cfg.varieties[crop])
    return crop, variety, rng.choice(cfg.lifecycles), rng.choice(cfg.seasons), rng.choice(cfg.healths)


def detailed_cases(cfg, rng):
    cases = [{
        "prompt": "Generate a healthy Pink Lady apple orchard in summer.",
        "category": "single_detailed",
        "expected_paths": [defaulted_path(cfg, "Apple", "PinkLady", season="Summer", health="Healthy")],
    }]
    while len(cases) < 40:
        crop, variety, lifecycle, season, health = pick_tuple(cfg, rng)
        vw = split_pascal(variety).lower()
        cl = crop.lower()
        hw = rng.choice(HEALTH_WORDS[health])
        lw = rng.choice(LIFECYCLE_WORDS[lifecycle])
        sw = rng.choice(SEASON_WORDS[season])
        noun = rng.choice(NOUNS)
        template = len(cases) % 5
        if template == 0:
            prompt = f"Generate a {hw} {vw} {cl} {noun} in {sw}."
            expected = defaulted_path(cfg, crop, variety, season=season, health=health)
        elif template == 1:
            prompt = f"Create a {lw} {vw} {cl} {noun} during {sw}."
            expected = defaulted_path(cfg, crop, variety, lifecycle=lifecycle, season=season)
        elif template == 2:
            prompt = f"Please set up a {hw} {lw} {vw} {cl} {noun} in {sw}."
            expected = defaulted_path(cfg, crop, variety, lifecycle=lifecycle, season=season, health=health)
        elif template == 3:
            prompt = f"I need a {vw} {cl} {noun} in {sw}, {hw} plants only."
            expected = defaulted_path(cfg, crop, variety, season=season, health=health)
        else:
            prompt = f"{vw} {cl} {noun}, {lw}, {sw}, {hw}."
            expected = defaulted_path(cfg, crop, variety, lifecycle=lifecycle, season=season, health=health)
        cases.append({"prompt": prompt, "category": "single_detailed", "expected_paths": [expected]})
    return cases


def generic_cases(cfg, rng):
    cases = [{
        "prompt": "Generate an apple field.",
        "category": "single_generic",
        "expected_paths": [defaulted_path(cfg, "Apple")],
    }]
    while len(cases) < 30:
        crop = rng.choice(list(cfg.category_of))
        noun = rng.choice(NOUNS)
        template = len(cases) % 5
        if template == 0:
            prompt = f"Generate a {crop.lower()} {noun}."
        elif template == 1:
            prompt = f"Create a {noun} of {PLURALS[crop]}."
        elif template == 2:
            prompt = f"I want a {crop.lower()} {noun}, please."
        elif template == 3:
            prompt = f"Set up some {PLURALS[crop]}."
        else:
            prompt = f"Make me a {crop.lower()} {noun} now."
        cases.append({
            "prompt": prompt,
            "category": "single_generic",
            "expected_paths": [defaulted_path(cfg, crop)],
        })
    return cases


def multi_cases(cfg, rng):
    cases = [{
        "prompt": "Generate some fruit and vegetable fields.",
        "category": "multi_generic",
        # category expansion: first crop of each category, fully defaulted
        "expected_paths": [defaulted_path(cfg, "Apple"), defaulted_path(cfg, "Carrot")],
    }]
    crops = list(cfg.category_of)
    while len(cases) < 30:
        template = len(cases) % 4
        a, b, c = rng.sample(crops, 3)
        noun = rng.choice(NOUNS)
        if template == 0:
            prompt = f"Generate a {a.lower()} {noun} and a {b.lower()} {noun}."
            expected = [defaulted_path(cfg, a), defaulted_path(cfg, b)]
        elif template == 1:
            prompt = f"Create {a.lower()}, {b.lower()} and {c.lower()} fields."
            expected = [defaulted_path(cfg, a), defaulted_path(cfg, b), defaulted_path(cfg, c)]
        elif template == 2:
            count = rng.choice(["two", "three"])
            prompt = f"Generate {count} {a.lower()} fields and a {b.lower()} field."
            expected = [defaulted_path(cfg, a), defaulted_path(cfg, b)]
        else:
            season = rng.choice(["winter", "fall", "spring"])
            canonical = {"winter": "Winter", "fall": "Fall", "spring": "Spring"}[season]
            article = "an" if a[0].lower() in "aeiou" else "a"
            prompt = f"Generate {article} {a.lower()} {noun} in {season} and a {b.lower()} {noun}."
            # single explicit season: the unspecified field is rewritten to it
            expected = [
                defaulted_path(cfg, a, season=canonical),
                defaulted_path(cfg, b, season=canonical),
            ]
        cases.append({"prompt": prompt, "category": "multi_generic", "expected_paths": expected})
    return cases


def main() -> None:
    cfg = default_config()
    rng = random.Random(20240901)
    cases = detailed_cases(cfg, rng) + generic_cases(cfg, rng) + multi_cases(cfg, rng)
    assert len(cases) == 100
    out = DATA / "benchmark_100.jsonl"
    with open(out, "w", encoding="utf-8") as fh:
        for case in cases:
            fh.write(json.dumps(case, sort_keys=True) + "\n")
    print(f"wrote {len(cases)} cases to {out}")


if __name__ == "__main__":
    main()
