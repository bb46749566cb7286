#!/usr/bin/env python3
"""Build the adversarial knowledge fixture and verify its rank structure.

The fixture stresses the strict post-filter: two query tuples have their
correct entry stored under a separator-mangled variety spelling (still equal
after fuzzy normalization) while plausible distractors with one wrong field
sit closer in embedding space. Target structure over the 10 bundled queries:

  - 8 queries resolve at pre-filter rank 1
  - 1 query at rank 2, 1 query at rank 3  ->  Top-1/2/3 = 0.8/0.9/1.0
  - plain RAG (raw-path embedding, top-1, no filter) picks at least one
    entry that fails the strict filter

The script asserts all of that against the real embedder before writing, so
the committed fixture is self-verified. Run: python3 tools/gen_adversarial.py
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from sceneforge.knowledge import (  # noqa: E402
    KnowledgeBase,
    KnowledgeEntry,
    descriptor_for,
    strict_match,
)
from sceneforge.taxonomy import AssetMetadata, default_config, format_path  # noqa: E402

DATA = ROOT / "src" / "sceneforge" / "data"


def entry_values(crop: str) -> dict:
    defaults = json.loads((DATA / "crop_defaults.json").read_text())[crop]
    row, plant = defaults["row_spacing_m"], defaults["plant_spacing_m"]
    return {
        "plant_height_m": defaults["plant_height_m"],
        "row_spacing_m": row,
        "plant_spacing_m": plant,
        "density_per_ha": round(10000.0 / (row * plant), 1),
        "disease_susceptibility": defaults["disease_susceptibility"],
        "irrigation": defaults["irrigation"],
        "rendering_effects": [],
    }


def make_entry(meta: AssetMetadata, tag: str) -> dict:
    return {
        "id": f"adv-{tag}",
        "meta": {
            "category": meta.category,
            "crop": meta.crop,
            "variety": meta.variety,
            "lifecycle": meta.lifecycle,
            "season": meta.season,
            "health": meta.health,
        },
        **entry_values(meta.crop),
    }


def dotted(variety: str) -> str:
    return ".".join(variety)


def main() -> None:
    cfg = default_config()
    meta = AssetMetadata

    queries = [
        meta("Fruits", "Apple", "PinkLady", "Maturation", "Summer", "Healthy"),
        meta("Vegetables", "Tomato", "SanMarzano", "Maturation", "Winter", "Healthy"),
        meta("Fruits", "Banana", "Cavendish", "Vegetative", "Spring", "Healthy"),
        meta("Fruits", "Cherry", "Bing", "Reproductive", "Spring", "Healthy"),
        meta("Vegetables", "Carrot", "Nantes", "Maturation", "Fall", "Ill"),
        meta("Vegetables", "Lettuce", "Romaine", "Vegetative", "Summer", "Healthy"),
        meta("Fruits", "Apple", "Gala", "Maturation", "Fall", "Healthy"),
        meta("Vegetables", "Tomato", "Beefsteak", "Reproductive", "Summer", "Ill"),
        meta("Fruits", "Cherry", "Rainier", "Maturation", "Summer", "Healthy"),
        meta("Vegetables", "Carrot", "Danvers", "Vegetative", "Winter", "Healthy"),
    ]

    rank2_query = queries[0]   # correct entry mangled, one closer distractor
    rank3_query = queries[1]   # correct entry mangled, two closer distractors

    entries = []
    for i, q in enumerate(queries):
        if q == rank2_query:
            entries.append(make_entry(
                meta(q.category, q.crop, dotted(q.variety), q.lifecycle, q.season, q.health),
                f"q{i}-correct-mangled",
            ))
            entries.append(make_entry(
                meta(q.category, q.crop, q.variety, "Reproductive", q.season, q.health),
                f"q{i}-distractor-lifecycle",
            ))
        elif q == rank3_query:
            entries.append(make_entry(
                meta(q.category, q.crop, dotted(q.variety), q.lifecycle, q.season, q.health),
                f"q{i}-correct-mangled",
            ))
            entries.append(make_entry(
                meta(q.category, q.crop, q.variety, q.lifecycle, "Summer", q.health),
                f"q{i}-distractor-season",
            ))
            entries.append(make_entry(
                meta(q.category, q.crop, q.variety, q.lifecycle, q.season, "Ill"),
                f"q{i}-distractor-health",
            ))
        else:
            entries.append(make_entry(q, f"q{i}-correct"))

    kb = KnowledgeBase(KnowledgeEntry.from_dict(e) for e in entries)

    # verify hybrid pre-filter ranks
    ranks = []
    for q in queries:
        candidates = kb.ranked_candidates(descriptor_for(q), len(kb))
        rank = next(i + 1 for i, (e, _) in enumerate(candidates) if strict_match(e, q))
        ranks.append(rank)
    expected = {rank2_query: 2, rank3_query: 3}
    for q, rank in zip(queries, ranks):
        want = expected.get(q, 1)
        assert rank == want, f"{descriptor_for(q)!r}: rank {rank}, wanted {want}"
    assert max(ranks) <= 3, f"top-3 coverage broken: {ranks}"

    # verify the unfiltered baseline mismatches at least once
    rag_mismatches = 0
    for q in queries:
        path = format_path(meta(q.category, q.crop, q.variety, q.lifecycle, q.season, q.health), cfg)
        top1 = kb.ranked_candidates(path.raw, 1)[0][0]
        if not strict_match(top1, q):
            rag_mismatches += 1
    assert rag_mismatches >= 1, "raw-path top-1 never mismatched; fixture too easy"

    (DATA / "adversarial_kb.json").write_text(json.dumps(entries, indent=1, sort_keys=True) + "\n")
    query_paths = [format_path(q, cfg).raw for q in queries]
    (DATA / "adversarial_queries.json").write_text(json.dumps(query_paths, indent=1) + "\n")
    print(f"wrote {len(entries)} entries; ranks={ranks}; rag mismatches={rag_mismatches}")


if __name__ == "__main__":
    main()
