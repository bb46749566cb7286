"""Hybrid asset-path retrieval: defaults, semantic search, exact post-filter.

Each subquery is defaulted to a full six-field tuple, rendered as a
descriptor, and searched against the embedded taxonomy. Only candidates whose
parsed metadata equals every populated subquery field survive; semantic rank
just orders the candidates, it never overrides the filter. That makes
hallucinated paths impossible by construction: everything returned comes out
of enumerate_paths.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from .embed_index import VectorIndex, embed_local
from .errors import ConfigurationError, StageError
from .frontend import SubQuery, apply_defaults
from .knowledge import descriptor_for
from .taxonomy import AssetMetadata, AssetPath, TaxonomyConfig, enumerate_paths, parse_path

log = logging.getLogger(__name__)

DEFAULT_K = 5


class NoMatchError(StageError):
    stage = "retrieval"


class IndexMissingError(ConfigurationError):
    """A persisted index was required but is not on disk."""


PATH_INDEX_FILENAME = "paths.vidx"
KB_INDEX_FILENAME = "kb.vidx"


def build_path_index(config: TaxonomyConfig) -> VectorIndex:
    """Embed every enumerable path under its descriptor rendering."""
    return VectorIndex.build(
        (path.raw, descriptor_for(parse_path(path, config)))
        for path in enumerate_paths(config)
    )


def load_index(path: str | Path) -> VectorIndex:
    path = Path(path)
    if not path.exists():
        raise IndexMissingError(f"index file {path} does not exist; run `sceneforge index` first")
    return VectorIndex.load(path.read_bytes())


@dataclass
class RetrievalResult:
    """Unique retrieved paths plus where each one came from."""

    paths: list[AssetPath] = field(default_factory=list)
    # aligned with paths: [(subquery_index, similarity_score), ...] per path
    per_path_provenance: list[list[tuple[int, float]]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    subqueries: tuple[SubQuery, ...] = ()

    def add(self, path: AssetPath, subquery_index: int, score: float) -> None:
        for i, existing in enumerate(self.paths):
            if existing.raw == path.raw:
                self.per_path_provenance[i].append((subquery_index, score))
                return
        self.paths.append(path)
        self.per_path_provenance.append([(subquery_index, score)])

    def quantities(self) -> dict[str, int]:
        """Requested field count per path (quantities summed over subqueries)."""
        out: dict[str, int] = {}
        for path, provenance in zip(self.paths, self.per_path_provenance):
            total = 0
            for subquery_index, _score in provenance:
                total += self.subqueries[subquery_index].quantity or 1
            out[path.raw] = total
        return out

    def to_dict(self) -> dict:
        return {
            "paths": [p.raw for p in self.paths],
            "provenance": [
                [{"subquery": i, "score": round(score, 6)} for i, score in entries]
                for entries in self.per_path_provenance
            ],
            "warnings": list(self.warnings),
        }


class PathRetriever:
    """Stateless retrieval over an immutable taxonomy index."""

    def __init__(
        self,
        config: TaxonomyConfig,
        index: Optional[VectorIndex] = None,
        audit_provider=None,
    ):
        self.config = config
        self.index = index if index is not None else build_path_index(config)
        self.audit_provider = audit_provider

    # -- single subquery ------------------------------------------------------

    def _expand(self, query: SubQuery, warnings: list[str]) -> SubQuery:
        query = apply_defaults(query, self.config)
        if query.crop is not None:
            return query
        if query.category is not None:
            crop = self.config.categories[query.category][0]
            warnings.append(
                f"generic category {query.category!r} expanded to its first crop {crop!r}"
            )
            return apply_defaults(replace(query, crop=crop), self.config)
        raise NoMatchError(f"subquery {query.residual_text!r} names no crop or category")

    def _exact_match(self, candidate_meta: AssetMetadata, query: SubQuery) -> bool:
        for name, value in query.populated().items():
            if getattr(candidate_meta, name).lower() != value.lower():
                return False
        return True

    def _retrieve_one(self, query: SubQuery, k: int, warnings: list[str]) -> tuple[AssetPath, float]:
        full = self._expand(query, warnings)
        meta = AssetMetadata(
            full.category, full.crop, full.variety, full.lifecycle, full.season, full.health
        )
        vector = embed_local(descriptor_for(meta))
        for attempt_k in (k, 2 * k):
            survivors = []
            for raw, score in self.index.search(vector, attempt_k):
                try:
                    candidate = parse_path(raw, self.config)
                except StageError:
                    continue
                # the filter enforces what the user actually said; the defaulted
                # tuple only ranks candidates (its own path scores 1.0, so it
                # wins unless the audit pass rejects it)
                if self._exact_match(candidate, query):
                    survivors.append((AssetPath(raw), score))
            for path, score in survivors:
                if self._audit_accepts(query, path, warnings):
                    return path, score
            if survivors:
                raise NoMatchError(
                    f"all exact-match candidates rejected by the audit pass for {query.residual_text!r}"
                )
        raise NoMatchError(
            f"no candidate within top-{2 * k} matches every populated field of {query.residual_text!r}"
        )

    def _audit_accepts(self, query: SubQuery, path: AssetPath, warnings: list[str]) -> bool:
        if self.audit_provider is None:
            return True
        messages = [
            {"role": "system", "content": (
                "Answer APPROVE or REJECT: does the asset path satisfy the request? "
                "Judge variety, lifecycle, season and health."
            )},
            {"role": "user", "content": json.dumps(
                {"request": query.residual_text, "path": path.raw}, sort_keys=True
            )},
        ]
        try:
            verdict = self.audit_provider.chat(messages).strip().upper()
        except StageError as exc:
            warnings.append(f"audit provider unavailable ({exc}); accepting {path.raw}")
            return True
        if verdict.startswith("REJECT"):
            warnings.append(f"audit rejected {path.raw}")
            return False
        return True

    # -- batch ------------------------------------------------------------------

    def retrieve_paths(self, subqueries: Sequence[SubQuery], k: int = DEFAULT_K) -> RetrievalResult:
        if not subqueries:
            raise NoMatchError("no subqueries to retrieve")
        result = RetrievalResult(subqueries=tuple(subqueries))
        for i, query in enumerate(subqueries):
            path, score = self._retrieve_one(query, k, result.warnings)
            result.add(path, i, score)
        return result

    def validate_consistency(self, result: RetrievalResult, k: int = DEFAULT_K) -> RetrievalResult:
        """Align unspecified seasons with the single explicitly requested one."""
        explicit = {q.season for q in result.subqueries if q.season is not None}
        unspecified = [i for i, q in enumerate(result.subqueries) if q.season is None]
        if len(explicit) > 1:
            result.warnings.append(
                "mixed explicit seasons requested (" + ", ".join(sorted(explicit)) + "); left as-is"
            )
            return result
        if len(explicit) != 1 or not unspecified:
            return result
        season = next(iter(explicit))
        rewritten = tuple(
            replace(q, season=season) if q.season is None else q for q in result.subqueries
        )
        out = RetrievalResult(subqueries=rewritten, warnings=list(result.warnings))
        out.warnings.append(
            f"season rewritten to {season!r} for {len(unspecified)} unspecified field(s)"
        )
        for i, query in enumerate(rewritten):
            path, score = self._retrieve_one(query, k, out.warnings)
            out.add(path, i, score)
        return out
