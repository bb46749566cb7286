"""Prompt decomposition into per-field subqueries with normalized vocabulary.

The default engine is a deterministic longest-match scanner over a lowercased
prompt: segments are split at conjunctions/commas, each segment is scanned
against the taxonomy vocabulary plus a synonym table, and segments that carry
no crop or category merge into their neighbor (adjectives usually precede the
noun they modify). An optional chat-provider pass can replace the rules
engine; any provider failure falls back to the rules result with a logged
warning, so the pipeline never depends on a network service.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .errors import ConfigurationError, StageError
from .taxonomy import TaxonomyConfig, UnknownTaxonError

log = logging.getLogger(__name__)

FIELD_CLASSES = ("category", "crop", "variety", "lifecycle", "season", "health")

_NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11, "twelve": 12,
}

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+(?:-[A-Za-z0-9]+)*")
_SPLIT_RE = re.compile(r",|;|\band\b|\bplus\b|\balongside\b", re.IGNORECASE)
_PASCAL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")


class EmptyPromptError(StageError):
    stage = "frontend"


class UnknownTermError(StageError):
    stage = "frontend"


class ProviderError(StageError):
    stage = "provider"


def split_pascal(identifier: str) -> str:
    """PinkLady -> "Pink Lady"; single-word identifiers pass through."""
    return _PASCAL_RE.sub(" ", identifier)


@dataclass(frozen=True)
class SubQuery:
    """Structured partial description of one requested field."""

    category: Optional[str] = None
    crop: Optional[str] = None
    variety: Optional[str] = None
    lifecycle: Optional[str] = None
    season: Optional[str] = None
    health: Optional[str] = None
    quantity: Optional[int] = None
    residual_text: str = ""

    def populated(self) -> dict[str, str]:
        return {
            name: value
            for name in FIELD_CLASSES
            if (value := getattr(self, name)) is not None
        }


class NormalizationTable:
    """Synonym -> canonical identifier mappings per field class.

    The canonical side of every entry must exist in the taxonomy; entries
    violating that are rejected at load so downstream closure holds by
    construction.
    """

    def __init__(self, data: Mapping, config: TaxonomyConfig):
        self.config = config
        self.tables: dict[str, dict[str, str]] = {}
        for field in FIELD_CLASSES:
            table: dict[str, str] = {}
            for raw, canonical in (data.get(field) or {}).items():
                try:
                    table[raw.lower()] = config.resolve(field, canonical)
                except UnknownTaxonError as exc:
                    raise ConfigurationError(
                        f"synonym {raw!r} maps to unknown {field} {canonical!r}"
                    ) from exc
            # canonical identifiers always map to themselves
            for low, canonical in config._ci[field].items():
                table.setdefault(low, canonical)
            self.tables[field] = table
        # multi-word variety spellings ("pink lady") and PascalCase joins
        for vs in config.varieties.values():
            for variety in vs:
                spaced = split_pascal(variety).lower()
                self.tables["variety"].setdefault(spaced, variety)
        self.ignore = {w.lower() for w in data.get("ignore", ())}

    @classmethod
    def from_file(cls, path: str | Path, config: TaxonomyConfig) -> "NormalizationTable":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls(json.load(fh), config)
        except OSError as exc:
            raise ConfigurationError(f"cannot read synonym table: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"synonym table is not valid JSON: {exc}") from exc

    @classmethod
    def bundled(cls, config: TaxonomyConfig) -> "NormalizationTable":
        text = resources.files("sceneforge.data").joinpath("synonyms.json").read_text("utf-8")
        return cls(json.loads(text), config)

    def normalize(self, raw: str, field_class: str) -> str:
        if field_class not in self.tables:
            raise UnknownTermError(f"no normalization table for field class {field_class!r}")
        canonical = self.tables[field_class].get(raw.strip().lower())
        if canonical is None:
            raise UnknownTermError(f"cannot normalize {raw!r} as a {field_class}")
        return canonical


def normalize_term(raw: str, field_class: str, tables: NormalizationTable) -> str:
    """Map a free-form term to its canonical identifier (case-insensitive)."""
    return tables.normalize(raw, field_class)


def apply_defaults(query: SubQuery, config: TaxonomyConfig) -> SubQuery:
    """Fill unspecified fields with the documented defaults.

    Unspecified lifecycle -> Maturation, season -> Summer, health -> Healthy,
    variety -> first variety in config order, quantity -> 1. Queries without
    a crop pass through untouched (retrieval expands category-only queries).
    """
    if query.crop is None:
        return query
    return replace(
        query,
        category=query.category or config.category_of[query.crop],
        variety=query.variety or config.varieties[query.crop][0],
        lifecycle=query.lifecycle or "Maturation",
        season=query.season or "Summer",
        health=query.health or "Healthy",
        quantity=query.quantity or 1,
    )


# -- rules engine ---------------------------------------------------------------


@dataclass
class _Match:
    kind: str  # field class, "ignore" or "number"
    value: object
    start: int
    end: int


class _Scanner:
    def __init__(self, config: TaxonomyConfig, tables: NormalizationTable):
        self.config = config
        self.tables = tables
        # phrase tuple -> (kind, canonical); longer phrases win
        self.vocab: dict[tuple[str, ...], tuple[str, str]] = {}
        # first insertion wins: FIELD_CLASSES order puts crop ahead of variety,
        # so ambiguous words like "cherry" read as crop unless context demotes
        for field in FIELD_CLASSES:
            for raw, canonical in tables.tables[field].items():
                self.vocab.setdefault(tuple(raw.split()), (field, canonical))
        for word in tables.ignore:
            self.vocab.setdefault(tuple(word.split()), ("ignore", word))
        self.max_phrase = max(len(k) for k in self.vocab)
        self.variety_owner = {
            v.lower(): crop for crop, vs in config.varieties.items() for v in vs
        }

    def scan(self, text: str, offset: int) -> list[_Match]:
        tokens = [(m.group(0).lower(), offset + m.start(), offset + m.end())
                  for m in _TOKEN_RE.finditer(text)]
        matches: list[_Match] = []
        i = 0
        while i < len(tokens):
            hit = None
            for width in range(min(self.max_phrase, len(tokens) - i), 0, -1):
                phrase = tuple(t[0] for t in tokens[i:i + width])
                if phrase in self.vocab:
                    kind, canonical = self.vocab[phrase]
                    hit = _Match(kind, canonical, tokens[i][1], tokens[i + width - 1][2])
                    i += width
                    break
            if hit is None:
                word = tokens[i][0]
                if word.isdigit():
                    hit = _Match("number", int(word), tokens[i][1], tokens[i][2])
                elif word in _NUMBER_WORDS:
                    hit = _Match("number", _NUMBER_WORDS[word], tokens[i][1], tokens[i][2])
                i += 1
            if hit is not None:
                matches.append(hit)
        return self._demote_crop_varieties(matches)

    def _demote_crop_varieties(self, matches: list[_Match]) -> list[_Match]:
        # "cherry tomato": a crop token immediately followed by another crop
        # whose variety list contains it is actually a variety mention.
        out = list(matches)
        for pos, match in enumerate(out[:-1]):
            nxt = out[pos + 1]
            if match.kind == "crop" and nxt.kind == "crop":
                as_variety = self.tables.tables["variety"].get(match.value.lower())
                if as_variety and as_variety in self.config.varieties.get(nxt.value, ()):
                    out[pos] = _Match("variety", as_variety, match.start, match.end)
        return out


def _subqueries_from_matches(
    matches: Sequence[_Match], span: tuple[int, int], prompt: str, config: TaxonomyConfig
) -> list[SubQuery]:
    residual = prompt[span[0]:span[1]].strip()
    attrs: dict[str, Optional[str]] = {f: None for f in FIELD_CLASSES}
    quantity: Optional[int] = None
    crops: list[str] = []
    categories: list[str] = []
    for match in matches:
        if match.kind == "number":
            quantity = quantity or int(match.value)
        elif match.kind == "crop":
            crops.append(match.value)
        elif match.kind == "category":
            categories.append(match.value)
        elif match.kind in FIELD_CLASSES and attrs[match.kind] is None:
            attrs[match.kind] = match.value
    del attrs["crop"], attrs["category"]

    def build(crop: Optional[str], category: Optional[str]) -> SubQuery:
        variety = attrs.get("variety")
        if crop is not None and variety is not None and variety not in config.varieties.get(crop, ()):
            variety = None  # variety belongs to a different crop in this segment
        if crop is None and variety is not None:
            # infer the owning crop from a bare variety mention
            for owner, vs in config.varieties.items():
                if variety in vs:
                    crop = owner
                    break
        if crop is not None and category is None:
            category = config.category_of[crop]
        return SubQuery(
            category=category,
            crop=crop,
            variety=variety,
            lifecycle=attrs.get("lifecycle"),
            season=attrs.get("season"),
            health=attrs.get("health"),
            quantity=quantity,
            residual_text=residual,
        )

    if crops:
        seen: list[str] = []
        for crop in crops:
            if crop not in seen:
                seen.append(crop)
        return [build(crop, None) for crop in seen]
    if categories:
        seen = []
        for cat in categories:
            if cat not in seen:
                seen.append(cat)
        return [build(None, cat) for cat in seen]
    return [build(None, None)]


class Frontend:
    """Decomposes prompts; owns the taxonomy, synonym tables and provider."""

    def __init__(self, config: TaxonomyConfig, tables: Optional[NormalizationTable] = None, provider=None):
        self.config = config
        self.tables = tables or NormalizationTable.bundled(config)
        self.provider = provider
        self._scanner = _Scanner(self.config, self.tables)

    def decompose(self, prompt: str, mode: str = "rules") -> list[SubQuery]:
        if not prompt or not prompt.strip():
            raise EmptyPromptError("prompt is empty")
        if mode == "provider":
            try:
                return self._decompose_via_provider(prompt)
            except (ProviderError, StageError) as exc:
                log.warning("provider decomposition failed (%s); falling back to rules", exc)
        elif mode != "rules":
            raise ValueError(f"unknown frontend mode {mode!r}")
        return self._decompose_rules(prompt)

    def _decompose_rules(self, prompt: str) -> list[SubQuery]:
        spans: list[tuple[int, int]] = []
        last = 0
        for boundary in _SPLIT_RE.finditer(prompt):
            spans.append((last, boundary.start()))
            last = boundary.end()
        spans.append((last, len(prompt)))
        scanned = [
            (span, self._scanner.scan(prompt[span[0]:span[1]], span[0]))
            for span in spans
            if prompt[span[0]:span[1]].strip()
        ]

        def anchored(item) -> bool:
            return any(m.kind in ("crop", "category", "variety") for m in item[1])

        merged: list[tuple[tuple[int, int], list[_Match]]] = []
        pending: Optional[tuple[tuple[int, int], list[_Match]]] = None
        for span, matches in scanned:
            if anchored(((span), matches)):
                if pending is not None:
                    span = (pending[0][0], span[1])
                    matches = pending[1] + matches
                    pending = None
                merged.append((span, matches))
            else:
                pending = ((pending[0][0], span[1]), pending[1] + matches) if pending else (span, matches)
        if pending is not None:
            if merged:
                span, matches = merged[-1]
                merged[-1] = ((span[0], pending[0][1]), matches + pending[1])
            else:
                merged.append(pending)

        queries: list[SubQuery] = []
        for span, matches in merged:
            queries.extend(_subqueries_from_matches(matches, span, prompt, self.config))
        return queries

    # -- provider refinement ------------------------------------------------

    PROVIDER_INSTRUCTIONS = (
        "Split the scene request into one JSON object per requested field. "
        "Reply with a JSON array; each object may set category, crop, variety, "
        "lifecycle, season, health (canonical identifiers), quantity (integer) "
        "and residual_text (the source fragment). Use null for unknown fields."
    )

    def decompose_messages(self, prompt: str) -> list[dict[str, str]]:
        return [
            {"role": "system", "content": self.PROVIDER_INSTRUCTIONS},
            {"role": "user", "content": prompt},
        ]

    def _decompose_via_provider(self, prompt: str) -> list[SubQuery]:
        if self.provider is None:
            raise ProviderError("no chat provider configured")
        reply = self.provider.chat(self.decompose_messages(prompt))
        try:
            items = json.loads(reply)
        except json.JSONDecodeError as exc:
            raise ProviderError(f"provider reply is not JSON: {exc}") from exc
        if not isinstance(items, list) or not items:
            raise ProviderError("provider reply must be a non-empty JSON array")
        queries = []
        for item in items:
            if not isinstance(item, dict):
                raise ProviderError("provider reply items must be objects")
            fields = {}
            for field in FIELD_CLASSES:
                value = item.get(field)
                fields[field] = self.config.resolve(field, value) if value else None
            quantity = item.get("quantity")
            if quantity is not None and (not isinstance(quantity, int) or quantity < 1):
                raise ProviderError(f"bad quantity {quantity!r} in provider reply")
            residual = item.get("residual_text") or prompt
            if residual not in prompt:
                residual = prompt
            queries.append(SubQuery(quantity=quantity, residual_text=residual, **fields))
        return queries
