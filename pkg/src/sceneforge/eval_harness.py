"""Benchmark runner and metric definitions.

Aggregation choices (also embedded in every report header): accuracy is exact
set equality between predicted and expected paths; precision/recall/F1 are
micro-averaged (counts summed over prompts before dividing); multi-field
cases report accuracy only, because the pipeline returns the minimal path set
rather than an exhaustive list, which makes precision/recall uninformative
there. Per-case pipeline failures count as incorrect and never abort a run.
"""

from __future__ import annotations

import json
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import ConfigurationError
from .knowledge import KnowledgeBase, descriptor_for, strict_match
from .pipeline import Pipeline
from .taxonomy import AssetPath, TaxonomyConfig, parse_path

CATEGORIES = ("single_detailed", "single_generic", "multi_generic")

DEFINITIONS = {
    "accuracy": "exact set equality between predicted and expected paths",
    "precision_recall": "micro-averaged over prompts; omitted for multi-field cases "
                        "because retrieval returns the minimal necessary set",
    "correct_paths": "validator rules R1+R2 clean",
    "domain_match": "validator rules R4+R6 clean",
    "executability": "clean exit of the engine mock (only with execution enabled)",
}


class BenchmarkFormatError(ConfigurationError):
    pass


@dataclass(frozen=True)
class BenchmarkCase:
    prompt: str
    category: str
    expected_paths: tuple[str, ...]


@dataclass
class MetricReport:
    categories: dict = field(default_factory=dict)
    topk_recall: dict = field(default_factory=dict)
    codegen: dict = field(default_factory=dict)
    cases: list = field(default_factory=list)

    def to_json(self) -> str:
        document = {
            "definitions": DEFINITIONS,
            "categories": self.categories,
            "topk_recall": {str(k): v for k, v in sorted(self.topk_recall.items())},
            "codegen": self.codegen,
            "cases": self.cases,
        }
        return json.dumps(document, sort_keys=True, indent=1) + "\n"


def set_metrics(predicted: set, expected: set) -> tuple[float, float, float]:
    """(precision, recall, f1); empty predictions count as precision 1.0."""
    if not expected:
        raise ValueError("expected set must be non-empty")
    hits = len(predicted & expected)
    precision = 1.0 if not predicted else hits / len(predicted)
    recall = hits / len(expected)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def accuracy(outcomes: Sequence[tuple[set, set]]) -> float:
    """Fraction of (predicted, expected) pairs that match exactly."""
    if not outcomes:
        return 0.0
    return sum(1 for predicted, expected in outcomes if predicted == expected) / len(outcomes)


def topk_recall(
    queries: Sequence[AssetPath],
    kb: KnowledgeBase,
    ks: Iterable[int] = (1, 2, 3),
    *,
    config: TaxonomyConfig,
) -> dict[int, float]:
    """Fraction of queries whose strict-matching entry sits within the first k
    semantic candidates (pre-filter rank)."""
    ks = sorted(ks)
    if not queries:
        return {k: 0.0 for k in ks}
    ranks = []
    for path in queries:
        meta = parse_path(path, config)
        candidates = kb.ranked_candidates(descriptor_for(meta), max(ks))
        rank = next(
            (i + 1 for i, (entry, _score) in enumerate(candidates) if strict_match(entry, meta)),
            None,
        )
        ranks.append(rank)
    return {
        k: sum(1 for r in ranks if r is not None and r <= k) / len(ranks)
        for k in ks
    }


def load_cases(path: str | Path, config: Optional[TaxonomyConfig] = None) -> list[BenchmarkCase]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise BenchmarkFormatError(f"cannot read benchmark file: {exc}") from exc
    cases = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
            case = BenchmarkCase(
                prompt=data["prompt"],
                category=data["category"],
                expected_paths=tuple(data["expected_paths"]),
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise BenchmarkFormatError(f"line {lineno}: {exc}") from exc
        if case.category not in CATEGORIES:
            raise BenchmarkFormatError(f"line {lineno}: unknown category {case.category!r}")
        if not case.expected_paths:
            raise BenchmarkFormatError(f"line {lineno}: empty expected_paths")
        if config is not None:
            for raw in case.expected_paths:
                try:
                    parse_path(raw, config)
                except Exception as exc:
                    raise BenchmarkFormatError(f"line {lineno}: expected path {raw!r}: {exc}") from exc
        cases.append(case)
    if not cases:
        raise BenchmarkFormatError(f"benchmark file {path} contains no cases")
    return cases


def _execute_in_mock(script_source: str, plan_json: str, manifest: str, runner: str) -> bool:
    with tempfile.TemporaryDirectory(prefix="sceneforge-exec-") as tmp:
        tmp_path = Path(tmp)
        script_file = tmp_path / "scene.py"
        script_file.write_text(script_source, encoding="utf-8")
        (tmp_path / "scene.plan.json").write_text(plan_json, encoding="utf-8")
        manifest_file = tmp_path / "paths.txt"
        manifest_file.write_text(manifest, encoding="utf-8")
        proc = subprocess.run(
            [runner, str(script_file), "--manifest", str(manifest_file),
             "--dump", str(tmp_path / "dump.json")],
            capture_output=True,
            text=True,
        )
        return proc.returncode == 0


def run_benchmark(
    cases: Sequence[BenchmarkCase],
    pipeline: Pipeline,
    *,
    with_execution: bool = False,
    mock_runner: str = "mock-runner",
    asset_manifest: Optional[str] = None,
) -> MetricReport:
    report = MetricReport()
    per_category: dict[str, list[dict]] = {c: [] for c in CATEGORIES}

    for index, case in enumerate(cases):
        outcome = {
            "index": index,
            "category": case.category,
            "prompt": case.prompt,
            "expected": sorted(case.expected_paths),
        }
        try:
            run = pipeline.run(case.prompt, name=f"case{index:03d}")
            predicted = {p.raw for p in run.retrieval.paths}
            errors = {f.rule_id for f in run.report.errors()}
            outcome.update({
                "predicted": sorted(predicted),
                "correct": predicted == set(case.expected_paths),
                "correct_paths": not (errors & {"R1", "R2"}),
                "domain_match": not (errors & {"R4", "R6"}),
                "validator_passed": run.report.passed,
            })
            if with_execution:
                outcome["executable"] = _execute_in_mock(
                    run.script.source, run.plan.to_json(), asset_manifest or "", mock_runner
                )
        except Exception as exc:  # noqa: BLE001 -- per-case failures never abort the run
            outcome.update({
                "predicted": [],
                "correct": False,
                "correct_paths": False,
                "domain_match": False,
                "validator_passed": False,
                "error": f"{type(exc).__name__}: {exc}",
            })
        per_category[case.category].append(outcome)
        report.cases.append(outcome)

    for category, outcomes in per_category.items():
        if not outcomes:
            continue
        stats = {
            "count": len(outcomes),
            "accuracy": sum(1 for o in outcomes if o["correct"]) / len(outcomes),
        }
        if category != "multi_generic":
            predicted_sets = [(set(o["predicted"]), set(o["expected"])) for o in outcomes]
            total_hits = sum(len(p & e) for p, e in predicted_sets)
            total_predicted = sum(len(p) for p, _ in predicted_sets)
            total_expected = sum(len(e) for _, e in predicted_sets)
            precision = 1.0 if total_predicted == 0 else total_hits / total_predicted
            recall = total_hits / total_expected
            stats["precision"] = precision
            stats["recall"] = recall
            stats["f1"] = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        else:
            stats["precision"] = stats["recall"] = stats["f1"] = None
        report.categories[category] = stats

    unique_expected = sorted({raw for case in cases for raw in case.expected_paths})
    parseable = []
    for raw in unique_expected:
        try:
            parse_path(raw, pipeline.config)
            parseable.append(AssetPath(raw))
        except Exception:  # unparseable ground truth already surfaced per case
            continue
    report.topk_recall = topk_recall(parseable, pipeline.kb, config=pipeline.config)

    evaluated = [o for o in report.cases]
    report.codegen = {
        "correct_paths": sum(1 for o in evaluated if o["correct_paths"]) / len(evaluated),
        "domain_match": sum(1 for o in evaluated if o["domain_match"]) / len(evaluated),
        "executability": (
            sum(1 for o in evaluated if o.get("executable")) / len(evaluated)
            if with_execution else None
        ),
    }
    return report
