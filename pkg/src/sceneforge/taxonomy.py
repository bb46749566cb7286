"""Asset-path grammar and the enumerable crop taxonomy.

The content tree is organised as

    /Game/<Category>/<Crop>/<Variety>/<Lifecycle>/<Season>/<Health>/
        <Variety>_<Lifecycle>_<Season>_<Health>.fbx

Every identifier is case-sensitive PascalCase inside a path; matching in the
rest of the pipeline is case-insensitive. A TaxonomyConfig is immutable after
load and all operations here are pure.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigurationError, StageError

LIFECYCLES = ("Vegetative", "Reproductive", "Maturation")
SEASONS = ("Spring", "Summer", "Fall", "Winter")
HEALTHS = ("Healthy", "Ill")

PATH_PREFIX = "/Game/"
PATH_SUFFIX = ".fbx"

_IDENT_RE = re.compile(r"^[A-Z][A-Za-z0-9]*$")


class ConfigError(ConfigurationError):
    """Taxonomy config file is malformed (duplicates, empty lists, bad identifiers)."""


class UnknownTaxonError(StageError):
    """An identifier is not part of the active taxonomy."""

    stage = "taxonomy"


class MalformedPathError(StageError):
    """A path string does not follow the canonical grammar."""

    stage = "taxonomy"


@dataclass(frozen=True)
class AssetMetadata:
    """The six fields that fully determine one asset variant."""

    category: str
    crop: str
    variety: str
    lifecycle: str
    season: str
    health: str

    def as_tuple(self) -> tuple[str, str, str, str, str, str]:
        return (self.category, self.crop, self.variety, self.lifecycle, self.season, self.health)


@dataclass(frozen=True)
class AssetPath:
    """Canonical engine content path identifying one asset variant."""

    raw: str

    def __str__(self) -> str:
        return self.raw


class TaxonomyConfig:
    """Validated, immutable crop hierarchy.

    `categories` maps category -> crops, `varieties` maps crop -> varieties;
    list order in the config file is meaningful (defaults pick the first
    entry), while enumeration output is sorted lexicographically.
    """

    def __init__(
        self,
        categories: Mapping[str, Sequence[str]],
        varieties: Mapping[str, Sequence[str]],
        lifecycles: Sequence[str] = LIFECYCLES,
        seasons: Sequence[str] = SEASONS,
        healths: Sequence[str] = HEALTHS,
    ):
        self.categories = {cat: tuple(crops) for cat, crops in categories.items()}
        self.varieties = {crop: tuple(vs) for crop, vs in varieties.items()}
        self.lifecycles = tuple(lifecycles)
        self.seasons = tuple(seasons)
        self.healths = tuple(healths)
        self._validate()
        self.category_of = {crop: cat for cat, crops in self.categories.items() for crop in crops}
        # case-insensitive lookup tables
        self._ci = {
            "category": {c.lower(): c for c in self.categories},
            "crop": {c.lower(): c for c in self.category_of},
            "variety": {v.lower(): v for vs in self.varieties.values() for v in vs},
            "lifecycle": {v.lower(): v for v in self.lifecycles},
            "season": {v.lower(): v for v in self.seasons},
            "health": {v.lower(): v for v in self.healths},
        }

    def _validate(self) -> None:
        def check_idents(names: Iterable[str], what: str) -> None:
            seen = set()
            for name in names:
                if not _IDENT_RE.match(name):
                    raise ConfigError(f"{what} identifier {name!r} is not PascalCase alphanumeric")
                low = name.lower()
                if low in seen:
                    raise ConfigError(f"duplicate {what} identifier {name!r}")
                seen.add(low)

        if not self.categories:
            raise ConfigError("no categories defined")
        check_idents(self.categories, "category")
        all_crops: list[str] = []
        for cat, crops in self.categories.items():
            if not crops:
                raise ConfigError(f"category {cat!r} has an empty crop list")
            all_crops.extend(crops)
        check_idents(all_crops, "crop")
        for crop in all_crops:
            if crop not in self.varieties:
                raise ConfigError(f"crop {crop!r} has no variety list")
        for crop, vs in self.varieties.items():
            if crop not in all_crops:
                raise ConfigError(f"varieties defined for unknown crop {crop!r}")
            if not vs:
                raise ConfigError(f"crop {crop!r} has an empty variety list")
        check_idents((v for vs in self.varieties.values() for v in vs), "variety")
        for got, want, what in (
            (self.lifecycles, LIFECYCLES, "lifecycles"),
            (self.seasons, SEASONS, "seasons"),
            (self.healths, HEALTHS, "healths"),
        ):
            if sorted(got) != sorted(want):
                raise ConfigError(f"{what} must be exactly {sorted(want)}, got {sorted(got)}")

    # -- lookups -------------------------------------------------------------

    def resolve(self, field: str, value: str) -> str:
        """Case-insensitive identifier lookup; returns the canonical spelling."""
        table = self._ci[field]
        try:
            return table[value.lower()]
        except KeyError:
            raise UnknownTaxonError(f"unknown {field} {value!r}") from None

    def crops(self) -> tuple[str, ...]:
        return tuple(self.category_of)

    def combination_count(self) -> int:
        n_varieties = sum(len(vs) for vs in self.varieties.values())
        return n_varieties * len(self.lifecycles) * len(self.seasons) * len(self.healths)

    def validate_metadata(self, meta: AssetMetadata) -> None:
        """Raise UnknownTaxonError unless every field belongs to this config."""
        if meta.category not in self.categories:
            raise UnknownTaxonError(f"unknown category {meta.category!r}")
        if meta.crop not in self.categories[meta.category]:
            raise UnknownTaxonError(f"crop {meta.crop!r} not in category {meta.category!r}")
        if meta.variety not in self.varieties.get(meta.crop, ()):
            raise UnknownTaxonError(f"variety {meta.variety!r} not a {meta.crop!r} variety")
        for field, value, allowed in (
            ("lifecycle", meta.lifecycle, self.lifecycles),
            ("season", meta.season, self.seasons),
            ("health", meta.health, self.healths),
        ):
            if value not in allowed:
                raise UnknownTaxonError(f"unknown {field} {value!r}")

    # -- loading ---------------------------------------------------------------

    @classmethod
    def from_dict(cls, data: Mapping) -> "TaxonomyConfig":
        try:
            return cls(
                categories=data["categories"],
                varieties=data["varieties"],
                lifecycles=data.get("lifecycles", LIFECYCLES),
                seasons=data.get("seasons", SEASONS),
                healths=data.get("healths", HEALTHS),
            )
        except KeyError as exc:
            raise ConfigError(f"taxonomy config missing key {exc}") from None

    @classmethod
    def from_file(cls, path: str | Path) -> "TaxonomyConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read taxonomy config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"taxonomy config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


def default_config() -> TaxonomyConfig:
    """The bundled taxonomy (28 varieties over 6 crops; 672 combinations)."""
    text = resources.files("sceneforge.data").joinpath("taxonomy.json").read_text("utf-8")
    return TaxonomyConfig.from_dict(json.loads(text))


def format_path(meta: AssetMetadata, config: TaxonomyConfig) -> AssetPath:
    """Render metadata as its canonical content path."""
    config.validate_metadata(meta)
    filename = f"{meta.variety}_{meta.lifecycle}_{meta.season}_{meta.health}{PATH_SUFFIX}"
    raw = (
        f"{PATH_PREFIX}{meta.category}/{meta.crop}/{meta.variety}/"
        f"{meta.lifecycle}/{meta.season}/{meta.health}/{filename}"
    )
    return AssetPath(raw)


def parse_path(path: AssetPath | str, config: TaxonomyConfig) -> AssetMetadata:
    """Inverse of format_path; rejects anything off-grammar.

    MalformedPathError covers structural problems (prefix, suffix, segment
    count, filename/directory disagreement); UnknownTaxonError covers
    well-formed paths using identifiers outside the config.
    """
    raw = path.raw if isinstance(path, AssetPath) else path
    if not raw.startswith(PATH_PREFIX):
        raise MalformedPathError(f"path does not start with {PATH_PREFIX!r}: {raw!r}")
    if not raw.endswith(PATH_SUFFIX):
        raise MalformedPathError(f"path does not end with {PATH_SUFFIX!r}: {raw!r}")
    segments = raw[len(PATH_PREFIX):].split("/")
    if len(segments) != 7:
        raise MalformedPathError(f"expected 7 segments after {PATH_PREFIX!r}, got {len(segments)}: {raw!r}")
    category, crop, variety, lifecycle, season, health, filename = segments
    stem = filename[: -len(PATH_SUFFIX)]
    if stem.split("_") != [variety, lifecycle, season, health]:
        raise MalformedPathError(f"filename {filename!r} disagrees with directory segments: {raw!r}")
    meta = AssetMetadata(category, crop, variety, lifecycle, season, health)
    config.validate_metadata(meta)
    return meta


def enumerate_paths(config: TaxonomyConfig) -> list[AssetPath]:
    """All valid paths under the config, sorted lexicographically, no duplicates."""
    paths = []
    for category, crops in config.categories.items():
        for crop in crops:
            for variety in config.varieties[crop]:
                for lifecycle in config.lifecycles:
                    for season in config.seasons:
                        for health in config.healths:
                            meta = AssetMetadata(category, crop, variety, lifecycle, season, health)
                            paths.append(format_path(meta, config))
    paths.sort(key=lambda p: p.raw)
    return paths
