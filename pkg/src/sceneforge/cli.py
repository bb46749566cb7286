"""Command-line entry point exposing the pipeline stages.

Exit codes: 0 success, 1 pipeline stage error, 2 validation failure,
3 configuration error, 4 provider error. Machine-readable output goes to
stdout as JSON when --json is set; human summaries otherwise.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .config import RunConfig
from .emitter import emit_script
from .errors import ConfigurationError, StageError
from .eval_harness import load_cases, run_benchmark
from .knowledge import FallbackLog, retrieve_entries
from .pipeline import Pipeline, PipelineSettings
from .planner import plan_scene
from .providers import HttpProvider, MockProvider, ProviderError, RecordingProvider, ReplayProvider
from .retrieval import (
    KB_INDEX_FILENAME,
    PATH_INDEX_FILENAME,
    PathRetriever,
    build_path_index,
    load_index,
)
from .taxonomy import enumerate_paths
from .validator import validate

EXIT_OK = 0
EXIT_STAGE_ERROR = 1
EXIT_VALIDATION = 2
EXIT_CONFIG = 3
EXIT_PROVIDER = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are configuration errors
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sceneforge", description="Prompt-to-scene compiler for engine scripts.")
    parser.add_argument("--version", action="version", version=f"sceneforge {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--taxonomy", help="taxonomy JSON file (overrides config)")
    common.add_argument("--synonyms", help="synonym table JSON file")
    common.add_argument("--kb", help="knowledge base JSON file")
    common.add_argument("--seed", type=int, default=0, help="plan RNG seed (default 0)")
    common.add_argument("--json", action="store_true", help="machine-readable stdout")
    common.add_argument("--frontend-mode", choices=["rules", "provider"], default="rules")
    common.add_argument("--kb-mode", choices=["hybrid", "rag"], default="hybrid")
    common.add_argument("--emit-mode", choices=["deterministic", "provider"], default="deterministic")
    common.add_argument("--k", type=int, help="path search top-k")
    common.add_argument("--kb-k", type=int, help="knowledge search top-k")
    common.add_argument("--rows", type=int, help="grid rows per field")
    common.add_argument("--cols", type=int, help="grid columns per field")
    common.add_argument("--gap", type=float, help="gap between field bboxes (m)")
    common.add_argument("--index-dir", help="directory with persisted indexes")
    common.add_argument("--record", help="record provider exchanges into this directory")
    common.add_argument("--replay", help="replay provider exchanges from this directory")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="full prompt-to-script run")
    p.add_argument("--prompt", required=True)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--name", default="scene", help="output file stem")
    p.add_argument("--keep-partial", action="store_true")

    p = sub.add_parser("retrieve", parents=[common], help="prompt -> asset paths")
    p.add_argument("--prompt", required=True)

    p = sub.add_parser("enrich", parents=[common], help="prompt -> scene recipe")
    p.add_argument("--prompt", required=True)

    p = sub.add_parser("plan", parents=[common], help="prompt -> scene plan")
    p.add_argument("--prompt", required=True)

    p = sub.add_parser("emit", parents=[common], help="prompt -> script + plan files")
    p.add_argument("--prompt", required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--name", default="scene")

    p = sub.add_parser("validate", parents=[common], help="check a script against its plan")
    p.add_argument("--script", required=True)
    p.add_argument("--plan", required=True)

    p = sub.add_parser("eval", parents=[common], help="run a benchmark file")
    p.add_argument("--cases", required=True)
    p.add_argument("--out", default="report.json")
    p.add_argument("--with-execution", action="store_true",
                   help="also execute each script in the engine mock")
    p.add_argument("--mock-runner", default="mock-runner")

    p = sub.add_parser("index", parents=[common], help="build and persist the indexes")
    p.add_argument("--manifest-out", help="also write the plain-text asset path manifest")

    return parser


def _provider(args, run_config: RunConfig):
    if args.replay:
        return ReplayProvider(args.replay)
    if run_config.provider_kind == "http":
        provider = HttpProvider(run_config.provider)
    else:
        provider = MockProvider()
    if args.record:
        provider = RecordingProvider(provider, args.record)
    return provider


def _settings(args, run_config: RunConfig) -> PipelineSettings:
    return PipelineSettings(
        seed=args.seed,
        rows=args.rows or run_config.rows,
        cols=args.cols or run_config.cols,
        gap_m=args.gap if args.gap is not None else run_config.gap_m,
        k_paths=args.k or run_config.k_paths,
        k_kb=args.kb_k or run_config.k_kb,
        frontend_mode=args.frontend_mode,
        kb_mode=args.kb_mode,
        emit_mode=args.emit_mode,
    )


def _run_config(args) -> RunConfig:
    run_config = RunConfig.load(args.config)
    if args.taxonomy:
        run_config.taxonomy_path = Path(args.taxonomy)
    if args.synonyms:
        run_config.synonyms_path = Path(args.synonyms)
    if args.kb:
        run_config.kb_path = Path(args.kb)
    return run_config


def _retriever(args, taxonomy, audit_provider=None) -> PathRetriever:
    index = None
    if args.index_dir:
        index_file = Path(args.index_dir) / PATH_INDEX_FILENAME
        if index_file.exists():
            index = load_index(index_file)
    return PathRetriever(taxonomy, index=index, audit_provider=audit_provider)


def _pipeline(args, run_config: RunConfig, fallback_log=None) -> Pipeline:
    taxonomy = run_config.taxonomy()
    tables = run_config.tables(taxonomy)
    kb = run_config.knowledge_base()
    provider = None
    wants_provider = (
        args.frontend_mode == "provider" or args.emit_mode == "provider"
        or args.record or args.replay or run_config.audit_retrieval
    )
    if wants_provider:
        provider = _provider(args, run_config)
    audit = provider if run_config.audit_retrieval else None
    return Pipeline(
        taxonomy, kb,
        settings=_settings(args, run_config),
        tables=tables,
        provider=provider,
        retriever=_retriever(args, taxonomy, audit_provider=audit),
        fallback_log=fallback_log,
    )


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def _emit_outputs(run, out_dir: Path, name: str) -> dict[str, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {
        "script": out_dir / f"{name}.py",
        "plan": out_dir / f"{name}.plan.json",
        "report": out_dir / f"{name}.report.json",
    }
    _atomic_write(outputs["script"], run.script.source)
    _atomic_write(outputs["plan"], run.plan.to_json())
    _atomic_write(outputs["report"], json.dumps(run.report.to_dict(), sort_keys=True, indent=1) + "\n")
    return outputs


def cmd_generate(args) -> int:
    run_config = _run_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    fallback_path = out_dir / f"{args.name}.fallbacks.jsonl"
    fallback_path.unlink(missing_ok=True)  # the log is per run, not cumulative
    fallback_log = FallbackLog(fallback_path)
    started = time.perf_counter()
    outputs: dict[str, Path] = {}
    try:
        pipeline = _pipeline(args, run_config, fallback_log=fallback_log)
        run = pipeline.run(args.prompt, name=args.name)
        outputs = _emit_outputs(run, out_dir, args.name)
    except Exception:
        if not args.keep_partial:
            for path in outputs.values():
                path.unlink(missing_ok=True)
            fallback_path.unlink(missing_ok=True)
        raise
    manifest = {
        "prompt": args.prompt,
        "seed": args.seed,
        "config_hashes": run_config.data_hashes(),
        "timings_ms": {k: round(v, 3) for k, v in run.timings_ms.items()},
        "total_ms": round((time.perf_counter() - started) * 1000.0, 3),
        "outputs": sorted(str(p) for p in outputs.values()),
        "validator_passed": run.report.passed,
        "warnings": run.retrieval.warnings,
        "fallbacks": [p.raw for p in run.recipe.fallbacks],
    }
    manifest_path = out_dir / f"{args.name}.manifest.json"
    _atomic_write(manifest_path, json.dumps(manifest, sort_keys=True, indent=1) + "\n")

    if args.json:
        print(json.dumps({"manifest": str(manifest_path), **manifest}, sort_keys=True))
    else:
        findings = run.report.findings
        status = "passed" if run.report.passed else "FAILED"
        print(f"validation {status}: {len(run.report.errors())} error(s), "
              f"{len(findings) - len(run.report.errors())} warning(s)")
        for finding in findings:
            print(f"  [{finding.severity}] {finding.rule_id} {finding.message}")
        print(f"wrote {', '.join(sorted(str(p) for p in outputs.values()))}")
    return EXIT_OK if run.report.passed else EXIT_VALIDATION


def cmd_retrieve(args) -> int:
    run_config = _run_config(args)
    pipeline = _pipeline(args, run_config)
    subqueries = pipeline.frontend.decompose(args.prompt, args.frontend_mode)
    result = pipeline.retriever.retrieve_paths(subqueries, pipeline.settings.k_paths)
    result = pipeline.retriever.validate_consistency(result, pipeline.settings.k_paths)
    if args.json:
        print(json.dumps(result.to_dict(), sort_keys=True))
    else:
        for path in result.paths:
            print(path.raw)
        for warning in result.warnings:
            print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK


def _recipe_for(args, pipeline):
    subqueries = pipeline.frontend.decompose(args.prompt, args.frontend_mode)
    result = pipeline.retriever.retrieve_paths(subqueries, pipeline.settings.k_paths)
    result = pipeline.retriever.validate_consistency(result, pipeline.settings.k_paths)
    recipe = retrieve_entries(
        result.paths,
        pipeline.kb,
        pipeline.settings.k_kb,
        config=pipeline.config,
        mode=pipeline.settings.kb_mode,
        quantities=result.quantities(),
        dimensions=(pipeline.settings.rows, pipeline.settings.cols),
        fallback_log=pipeline.fallback_log,
    )
    return result, recipe


def cmd_enrich(args) -> int:
    pipeline = _pipeline(args, _run_config(args))
    _result, recipe = _recipe_for(args, pipeline)
    document = {
        "fields": [
            {
                "path": line.path.raw,
                "entry": line.entry.to_dict(),
                "quantity": line.quantity,
                "rows": line.rows,
                "cols": line.cols,
                "source": line.source,
            }
            for line in recipe.fields
        ],
        "fallbacks": [p.raw for p in recipe.fallbacks],
    }
    print(json.dumps(document, sort_keys=True) if args.json else json.dumps(document, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_plan(args) -> int:
    pipeline = _pipeline(args, _run_config(args))
    _result, recipe = _recipe_for(args, pipeline)
    plan = plan_scene(recipe, pipeline.settings.seed, pipeline.settings.gap_m)
    print(plan.to_json(), end="")
    return EXIT_OK


def cmd_emit(args) -> int:
    pipeline = _pipeline(args, _run_config(args))
    run = pipeline.run(args.prompt, name=args.name)
    outputs = _emit_outputs(run, Path(args.out), args.name)
    print("\n".join(sorted(str(p) for p in outputs.values())))
    return EXIT_OK


def cmd_validate(args) -> int:
    from .planner import ScenePlan

    run_config = _run_config(args)
    taxonomy = run_config.taxonomy()
    kb = run_config.knowledge_base()
    try:
        source = Path(args.script).read_text(encoding="utf-8")
        plan = ScenePlan.from_dict(json.loads(Path(args.plan).read_text(encoding="utf-8")))
    except OSError as exc:
        raise ConfigurationError(f"cannot read input: {exc}") from exc
    report = validate(source, plan, None, config=taxonomy, entries_by_id=kb.by_id)
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
    else:
        for finding in report.findings:
            print(f"[{finding.severity}] {finding.rule_id} {finding.message} {finding.location}")
        print("passed" if report.passed else "failed")
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_eval(args) -> int:
    run_config = _run_config(args)
    pipeline = _pipeline(args, run_config)
    cases = load_cases(args.cases, pipeline.config)
    manifest_text = "\n".join(p.raw for p in enumerate_paths(pipeline.config)) + "\n"
    report = run_benchmark(
        cases, pipeline,
        with_execution=args.with_execution,
        mock_runner=args.mock_runner,
        asset_manifest=manifest_text,
    )
    _atomic_write(Path(args.out), report.to_json())
    summary = {
        "out": args.out,
        "categories": report.categories,
        "topk_recall": {str(k): v for k, v in report.topk_recall.items()},
        "codegen": report.codegen,
    }
    print(json.dumps(summary, sort_keys=True) if args.json else json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_index(args) -> int:
    run_config = _run_config(args)
    taxonomy = run_config.taxonomy()
    kb = run_config.knowledge_base()
    index_dir = Path(args.index_dir or ".sceneforge")
    index_dir.mkdir(parents=True, exist_ok=True)
    path_index = build_path_index(taxonomy)
    (index_dir / PATH_INDEX_FILENAME).write_bytes(path_index.save())
    (index_dir / KB_INDEX_FILENAME).write_bytes(kb.index().save())
    if args.manifest_out:
        _atomic_write(Path(args.manifest_out),
                      "\n".join(p.raw for p in enumerate_paths(taxonomy)) + "\n")
    summary = {
        "index_dir": str(index_dir),
        "path_records": len(path_index),
        "kb_records": len(kb.index()),
    }
    print(json.dumps(summary, sort_keys=True) if args.json else
          f"indexed {len(path_index)} paths and {len(kb.index())} knowledge entries into {index_dir}")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "retrieve": cmd_retrieve,
    "enrich": cmd_enrich,
    "plan": cmd_plan,
    "emit": cmd_emit,
    "validate": cmd_validate,
    "eval": cmd_eval,
    "index": cmd_index,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        print(f"stage error: {exc}", file=sys.stderr)
        return EXIT_STAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
