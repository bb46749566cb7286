#!/usr/bin/env python3
"""Build canned chat replies for the mock provider.

For every benchmark prompt (plus a few extras) the fixture maps the hash of
the decomposition chat request to a reply carrying the same subqueries the
rules engine produces, so provider mode and rules mode agree on the bundled
set. Run: python3 tools/gen_provider_fixtures.py
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from sceneforge.frontend import FIELD_CLASSES, Frontend  # noqa: E402
from sceneforge.providers import request_hash  # noqa: E402
from sceneforge.taxonomy import default_config  # noqa: E402

DATA = ROOT / "src" / "sceneforge" / "data"

EXTRA_PROMPTS = [
    "Generate a tomato field and a carrot field.",
    "Generate a cherry tomato field.",
    "Generate a diseased flowering Nantes carrot field in autumn.",
]


def reply_for(frontend: Frontend, prompt: str) -> str:
    queries = frontend.decompose(prompt, mode="rules")
    items = []
    for q in queries:
        item = {field: getattr(q, field) for field in FIELD_CLASSES}
        item["quantity"] = q.quantity
        item["residual_text"] = q.residual_text
        items.append(item)
    return json.dumps(items, sort_keys=True)


def main() -> None:
    cfg = default_config()
    frontend = Frontend(cfg)
    prompts = []
    with open(DATA / "benchmark_100.jsonl", encoding="utf-8") as fh:
        prompts.extend(json.loads(line)["prompt"] for line in fh)
    prompts.extend(EXTRA_PROMPTS)

    fixtures = {}
    for prompt in prompts:
        key = request_hash({"kind": "chat", "messages": frontend.decompose_messages(prompt)})
        fixtures[key] = reply_for(frontend, prompt)

    out = DATA / "provider_fixtures.json"
    out.write_text(json.dumps(fixtures, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {len(fixtures)} fixtures to {out}")


if __name__ == "__main__":
    main()
