"""Agronomic knowledge base and hybrid entry retrieval.

Entries are keyed by the same six-field metadata as asset paths. Retrieval
renders the metadata as a human descriptor ("healthy young Pink Lady apple in
fall"), embeds it, collects the top-k semantically closest entries and keeps
only candidates whose metadata matches exactly (with fuzzy variety
comparison). Paths with no surviving candidate are logged and resolved via an
exact dictionary lookup, falling back to a per-crop default entry.

The plain-RAG baseline (embed the raw path text, take top-1, no filter) stays
available behind mode="rag" so the two strategies can be compared on the
same data.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .embed_index import VectorIndex, embed_local
from .errors import ConfigurationError, StageError
from .frontend import split_pascal
from .taxonomy import AssetMetadata, AssetPath, TaxonomyConfig, parse_path

log = logging.getLogger(__name__)

LIFECYCLE_ADJECTIVES = {"Vegetative": "young", "Reproductive": "flowering", "Maturation": "mature"}
HEALTH_ADJECTIVES = {"Healthy": "healthy", "Ill": "diseased"}

SUSCEPTIBILITY_LEVELS = ("low", "medium", "high")
IRRIGATION_KINDS = ("drip", "sprinkler", "rainfed")

DEFAULT_K = 3

_NON_ALNUM_RE = re.compile(r"[^a-z0-9]+")


class EmptyKnowledgeBaseError(StageError):
    stage = "knowledge"


class KnowledgeFormatError(ConfigurationError):
    """Knowledge base file is malformed or an entry violates its invariants."""


def descriptor_for(meta: AssetMetadata) -> str:
    """Render metadata as the canonical descriptor string."""
    return (
        f"{HEALTH_ADJECTIVES[meta.health]} {LIFECYCLE_ADJECTIVES[meta.lifecycle]} "
        f"{split_pascal(meta.variety)} {meta.crop.lower()} in {meta.season.lower()}"
    )


def normalize_variety(name: str) -> str:
    return _NON_ALNUM_RE.sub("", name.lower())


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    return previous[-1]


@dataclass(frozen=True)
class KnowledgeEntry:
    id: str
    meta: AssetMetadata
    plant_height_m: float
    row_spacing_m: float
    plant_spacing_m: float
    density_per_ha: float
    disease_susceptibility: str
    irrigation: str
    rendering_effects: tuple[str, ...] = ()

    def validate(self) -> None:
        for name in ("plant_height_m", "row_spacing_m", "plant_spacing_m", "density_per_ha"):
            if getattr(self, name) <= 0:
                raise KnowledgeFormatError(f"entry {self.id!r}: {name} must be positive")
        if self.disease_susceptibility not in SUSCEPTIBILITY_LEVELS:
            raise KnowledgeFormatError(f"entry {self.id!r}: bad susceptibility {self.disease_susceptibility!r}")
        if self.irrigation not in IRRIGATION_KINDS:
            raise KnowledgeFormatError(f"entry {self.id!r}: bad irrigation {self.irrigation!r}")
        implied = 10000.0 / (self.row_spacing_m * self.plant_spacing_m)
        if abs(self.density_per_ha - implied) / self.density_per_ha > 0.10:
            raise KnowledgeFormatError(
                f"entry {self.id!r}: density {self.density_per_ha} is more than 10% away "
                f"from 10000/(row*plant) = {implied:.1f}"
            )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "meta": {
                "category": self.meta.category,
                "crop": self.meta.crop,
                "variety": self.meta.variety,
                "lifecycle": self.meta.lifecycle,
                "season": self.meta.season,
                "health": self.meta.health,
            },
            "plant_height_m": self.plant_height_m,
            "row_spacing_m": self.row_spacing_m,
            "plant_spacing_m": self.plant_spacing_m,
            "density_per_ha": self.density_per_ha,
            "disease_susceptibility": self.disease_susceptibility,
            "irrigation": self.irrigation,
            "rendering_effects": list(self.rendering_effects),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "KnowledgeEntry":
        try:
            meta = AssetMetadata(**data["meta"])
            entry = cls(
                id=data["id"],
                meta=meta,
                plant_height_m=float(data["plant_height_m"]),
                row_spacing_m=float(data["row_spacing_m"]),
                plant_spacing_m=float(data["plant_spacing_m"]),
                density_per_ha=float(data["density_per_ha"]),
                disease_susceptibility=data["disease_susceptibility"],
                irrigation=data["irrigation"],
                rendering_effects=tuple(data.get("rendering_effects", ())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise KnowledgeFormatError(f"malformed knowledge entry: {exc}") from exc
        entry.validate()
        return entry


def strict_match(entry: KnowledgeEntry, meta: AssetMetadata) -> bool:
    """True iff all fields match exactly, with fuzzy variety comparison.

    Varieties match when their normalized forms (lowercase, non-alphanumerics
    stripped) are equal or within Levenshtein distance 1.
    """
    em = entry.meta
    for a, b in (
        (em.category, meta.category),
        (em.crop, meta.crop),
        (em.lifecycle, meta.lifecycle),
        (em.season, meta.season),
        (em.health, meta.health),
    ):
        if a.lower() != b.lower():
            return False
    va, vb = normalize_variety(em.variety), normalize_variety(meta.variety)
    return va == vb or levenshtein(va, vb) <= 1


def _meta_key(meta: AssetMetadata) -> tuple[str, ...]:
    return (
        meta.category.lower(),
        meta.crop.lower(),
        normalize_variety(meta.variety),
        meta.lifecycle.lower(),
        meta.season.lower(),
        meta.health.lower(),
    )


def load_crop_defaults() -> dict[str, dict]:
    text = resources.files("sceneforge.data").joinpath("crop_defaults.json").read_text("utf-8")
    return json.loads(text)


class KnowledgeBase:
    """Immutable collection of entries plus its semantic index."""

    def __init__(self, entries: Iterable[KnowledgeEntry]):
        self.entries = tuple(entries)
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise KnowledgeFormatError("duplicate entry ids in knowledge base")
        self.by_id = {e.id: e for e in self.entries}
        self._exact = {_meta_key(e.meta): e for e in self.entries}
        self._index: Optional[VectorIndex] = None
        self._index_lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_file(cls, path: str | Path) -> "KnowledgeBase":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise KnowledgeFormatError(f"cannot read knowledge base: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise KnowledgeFormatError(f"knowledge base is not valid JSON: {exc}") from exc
        if not isinstance(data, list):
            raise KnowledgeFormatError("knowledge base must be a JSON array of entries")
        return cls(KnowledgeEntry.from_dict(item) for item in data)

    @classmethod
    def bundled(cls) -> "KnowledgeBase":
        text = resources.files("sceneforge.data").joinpath("knowledge_base.json").read_text("utf-8")
        return cls(KnowledgeEntry.from_dict(item) for item in json.loads(text))

    def index(self) -> VectorIndex:
        with self._index_lock:
            if self._index is None:
                self._index = VectorIndex.build(
                    (e.id, descriptor_for(e.meta)) for e in self.entries
                )
            return self._index

    def exact_lookup(self, meta: AssetMetadata) -> Optional[KnowledgeEntry]:
        return self._exact.get(_meta_key(meta))

    def ranked_candidates(self, query_text: str, k: int) -> list[tuple[KnowledgeEntry, float]]:
        """Top-k entries by embedding similarity of query_text (pre-filter)."""
        hits = self.index().search(embed_local(query_text), k)
        return [(self.by_id[entry_id], score) for entry_id, score in hits]


@dataclass(frozen=True)
class RecipeField:
    """One enriched field line: where the entry came from is kept for audits."""

    path: AssetPath
    entry: KnowledgeEntry
    quantity: int = 1
    rows: int = 10
    cols: int = 10
    source: str = "semantic"  # semantic | exact_lookup | crop_default | rag


@dataclass
class SceneRecipe:
    fields: list[RecipeField] = field(default_factory=list)
    fallbacks: list[AssetPath] = field(default_factory=list)


class FallbackLog:
    """Append-only JSON-lines sink for strict-filter misses."""

    def __init__(self, path: Optional[str | Path] = None):
        self.path = Path(path) if path else None
        self.records: list[dict] = []
        self._lock = threading.Lock()

    def write(self, record: dict) -> None:
        with self._lock:
            self.records.append(record)
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record, sort_keys=True) + "\n")


def _default_entry(meta: AssetMetadata, defaults: Mapping[str, Mapping]) -> KnowledgeEntry:
    base = defaults.get(meta.crop)
    if base is None:
        raise EmptyKnowledgeBaseError(f"no crop default available for {meta.crop!r}")
    row, plant = float(base["row_spacing_m"]), float(base["plant_spacing_m"])
    return KnowledgeEntry(
        id=f"default-{meta.crop.lower()}",
        meta=meta,
        plant_height_m=float(base["plant_height_m"]),
        row_spacing_m=row,
        plant_spacing_m=plant,
        density_per_ha=round(10000.0 / (row * plant), 1),
        disease_susceptibility=base["disease_susceptibility"],
        irrigation=base["irrigation"],
        rendering_effects=("crop_default",),
    )


def retrieve_entries(
    paths: Sequence[AssetPath],
    kb: KnowledgeBase,
    k: int = DEFAULT_K,
    *,
    config: TaxonomyConfig,
    mode: str = "hybrid",
    quantities: Optional[Mapping[str, int]] = None,
    dimensions: tuple[int, int] = (10, 10),
    fallback_log: Optional[FallbackLog] = None,
    crop_defaults: Optional[Mapping[str, Mapping]] = None,
) -> SceneRecipe:
    """Enrich each path with its knowledge entry.

    Hybrid mode guarantees zero mismatched pairings: a field line is only ever
    paired with an entry passing strict_match, falling back to exact lookup or
    the crop default (both strict by construction) when the top-k candidates
    all fail. RAG mode pairs each path with the raw top-1 neighbor, mismatches
    included; it exists as the comparison baseline.
    """
    if len(kb) == 0:
        raise EmptyKnowledgeBaseError("knowledge base has no entries")
    if mode not in ("hybrid", "rag"):
        raise ValueError(f"unknown kb mode {mode!r}")
    rows, cols = dimensions
    recipe = SceneRecipe()
    for path in paths:
        meta = parse_path(path, config)
        quantity = (quantities or {}).get(path.raw, 1)

        if mode == "rag":
            candidates = kb.ranked_candidates(path.raw, 1)
            entry = candidates[0][0]
            recipe.fields.append(RecipeField(path, entry, quantity, rows, cols, source="rag"))
            continue

        chosen: Optional[KnowledgeEntry] = None
        for candidate, _score in kb.ranked_candidates(descriptor_for(meta), k):
            if strict_match(candidate, meta):
                chosen = candidate
                break
        if chosen is not None:
            recipe.fields.append(RecipeField(path, chosen, quantity, rows, cols, source="semantic"))
            continue

        # strict filter rejected every candidate: log and fall back
        recipe.fallbacks.append(path)
        exact = kb.exact_lookup(meta)
        resolution = "exact_lookup" if exact is not None else "crop_default"
        record = {"path": path.raw, "reason": f"no strict match in top-{k}", "resolution": resolution}
        log.warning("knowledge fallback for %s (%s)", path.raw, resolution)
        if fallback_log is not None:
            fallback_log.write(record)
        if exact is not None:
            recipe.fields.append(RecipeField(path, exact, quantity, rows, cols, source="exact_lookup"))
        else:
            entry = _default_entry(meta, crop_defaults or load_crop_defaults())
            recipe.fields.append(RecipeField(path, entry, quantity, rows, cols, source="crop_default"))
    return recipe
