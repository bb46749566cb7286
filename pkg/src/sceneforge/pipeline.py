"""End-to-end orchestration: prompt -> subqueries -> paths -> recipe -> plan
-> script -> validation report.

Both the CLI and the benchmark harness drive this one object, so a prompt
runs through exactly the same code whichever entry point is used. In
rules+mock mode every stage is a pure function of (prompt, seed, config
files), which is what makes byte-identical reruns possible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dataclass_field
from typing import Optional

from .emitter import ScriptText, emit_script, emit_script_via_provider
from .frontend import Frontend, NormalizationTable, SubQuery
from .knowledge import (
    DEFAULT_K as KB_DEFAULT_K,
    FallbackLog,
    KnowledgeBase,
    SceneRecipe,
    retrieve_entries,
)
from .planner import DEFAULT_COLS, DEFAULT_GAP_M, DEFAULT_ROWS, ScenePlan, plan_scene
from .retrieval import DEFAULT_K as PATH_DEFAULT_K, PathRetriever, RetrievalResult
from .taxonomy import TaxonomyConfig
from .validator import ValidationReport, validate


@dataclass
class PipelineSettings:
    seed: int = 0
    rows: int = DEFAULT_ROWS
    cols: int = DEFAULT_COLS
    gap_m: float = DEFAULT_GAP_M
    k_paths: int = PATH_DEFAULT_K
    k_kb: int = KB_DEFAULT_K
    frontend_mode: str = "rules"
    kb_mode: str = "hybrid"
    emit_mode: str = "deterministic"


@dataclass
class PipelineRun:
    prompt: str
    subqueries: list[SubQuery]
    retrieval: RetrievalResult
    recipe: SceneRecipe
    plan: ScenePlan
    script: ScriptText
    report: ValidationReport
    timings_ms: dict[str, float] = dataclass_field(default_factory=dict)


class Pipeline:
    def __init__(
        self,
        config: TaxonomyConfig,
        kb: KnowledgeBase,
        settings: Optional[PipelineSettings] = None,
        tables: Optional[NormalizationTable] = None,
        provider=None,
        retriever: Optional[PathRetriever] = None,
        fallback_log: Optional[FallbackLog] = None,
    ):
        self.config = config
        self.kb = kb
        self.settings = settings or PipelineSettings()
        self.frontend = Frontend(config, tables, provider=provider)
        self.retriever = retriever or PathRetriever(config)
        self.provider = provider
        self.fallback_log = fallback_log

    def run(self, prompt: str, name: str = "scene") -> PipelineRun:
        timings: dict[str, float] = {}

        def timed(stage, fn):
            start = time.perf_counter()
            value = fn()
            timings[stage] = (time.perf_counter() - start) * 1000.0
            return value

        settings = self.settings
        subqueries = timed("frontend", lambda: self.frontend.decompose(prompt, settings.frontend_mode))
        retrieval = timed("retrieval", lambda: self.retriever.validate_consistency(
            self.retriever.retrieve_paths(subqueries, settings.k_paths), settings.k_paths
        ))
        recipe = timed("knowledge", lambda: retrieve_entries(
            retrieval.paths,
            self.kb,
            settings.k_kb,
            config=self.config,
            mode=settings.kb_mode,
            quantities=retrieval.quantities(),
            dimensions=(settings.rows, settings.cols),
            fallback_log=self.fallback_log,
        ))
        plan = timed("planner", lambda: plan_scene(recipe, settings.seed, settings.gap_m))
        if settings.emit_mode == "provider":
            if self.provider is None:
                raise ValueError("emit_mode=provider requires a configured provider")
            script = timed("emitter", lambda: emit_script_via_provider(plan, self.provider, name))
        else:
            script = timed("emitter", lambda: emit_script(plan, name))
        report = timed("validator", lambda: validate(
            script, plan, recipe, config=self.config, entries_by_id=self.kb.by_id
        ))
        return PipelineRun(prompt, subqueries, retrieval, recipe, plan, script, report, timings)
