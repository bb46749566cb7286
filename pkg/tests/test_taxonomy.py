import itertools

import pytest
from hypothesis import given, strategies as st

from sceneforge.taxonomy import (
    AssetMetadata,
    AssetPath,
    ConfigError,
    MalformedPathError,
    TaxonomyConfig,
    UnknownTaxonError,
    default_config,
    enumerate_paths,
    format_path,
    parse_path,
)


@pytest.fixture(scope="module")
def cfg():
    return default_config()


def brute_force_count(cfg):
    # independent oracle: count tuples by explicit product enumeration
    tuples = [
        (cat, crop, var, lc, se, he)
        for cat, crops in cfg.categories.items()
        for crop in crops
        for var in cfg.varieties[crop]
        for lc, se, he in itertools.product(cfg.lifecycles, cfg.seasons, cfg.healths)
    ]
    return len(tuples)


def test_default_config_has_672_combinations(cfg):
    assert brute_force_count(cfg) == 672
    paths = enumerate_paths(cfg)
    assert len(paths) == 672
    assert len({p.raw for p in paths}) == 672


def test_enumerate_order_is_lexicographic(cfg):
    raws = [p.raw for p in enumerate_paths(cfg)]
    assert raws == sorted(raws)


def test_single_variety_config_yields_24_paths():
    cfg = TaxonomyConfig(categories={"Fruits": ["Apple"]}, varieties={"Apple": ["Gala"]})
    assert len(enumerate_paths(cfg)) == 24


def test_apple_restriction_yields_120_paths(cfg):
    restricted = TaxonomyConfig(
        categories={"Fruits": ["Apple"]},
        varieties={"Apple": list(cfg.varieties["Apple"])},
    )
    assert len(cfg.varieties["Apple"]) == 5
    assert len(enumerate_paths(restricted)) == 120


def test_format_path_examples(cfg):
    meta = AssetMetadata("Fruits", "Apple", "PinkLady", "Maturation", "Summer", "Healthy")
    assert format_path(meta, cfg).raw == (
        "/Game/Fruits/Apple/PinkLady/Maturation/Summer/Healthy/"
        "PinkLady_Maturation_Summer_Healthy.fbx"
    )
    meta = AssetMetadata("Vegetables", "Carrot", "Nantes", "Vegetative", "Spring", "Ill")
    assert format_path(meta, cfg).raw == (
        "/Game/Vegetables/Carrot/Nantes/Vegetative/Spring/Ill/"
        "Nantes_Vegetative_Spring_Ill.fbx"
    )


def test_round_trip_over_all_672(cfg):
    for path in enumerate_paths(cfg):
        meta = parse_path(path, cfg)
        assert format_path(meta, cfg) == path


def test_parse_path_example(cfg):
    meta = parse_path(
        "/Game/Fruits/Apple/PinkLady/Maturation/Summer/Healthy/"
        "PinkLady_Maturation_Summer_Healthy.fbx",
        cfg,
    )
    assert meta == AssetMetadata("Fruits", "Apple", "PinkLady", "Maturation", "Summer", "Healthy")


def test_parse_rejects_missing_prefix(cfg):
    with pytest.raises(MalformedPathError):
        parse_path("Fruits/Apple/PinkLady/Maturation/Summer/Healthy/PinkLady_Maturation_Summer_Healthy.fbx", cfg)


def test_parse_rejects_filename_directory_disagreement(cfg):
    # mutate the directory season so it disagrees with the filename
    good = "/Game/Fruits/Apple/PinkLady/Maturation/Summer/Healthy/PinkLady_Maturation_Summer_Healthy.fbx"
    bad = good.replace("/Summer/", "/Fall/", 1)
    with pytest.raises(MalformedPathError):
        parse_path(bad, cfg)


def test_parse_rejects_unknown_identifiers(cfg):
    bad = "/Game/Fruits/Apple/Durian/Maturation/Summer/Healthy/Durian_Maturation_Summer_Healthy.fbx"
    with pytest.raises(UnknownTaxonError):
        parse_path(bad, cfg)


def test_format_rejects_unknown_identifiers(cfg):
    with pytest.raises(UnknownTaxonError):
        format_path(AssetMetadata("Fruits", "Apple", "Durian", "Maturation", "Summer", "Healthy"), cfg)
    with pytest.raises(UnknownTaxonError):
        format_path(AssetMetadata("Vegetables", "Apple", "Gala", "Maturation", "Summer", "Healthy"), cfg)


@given(st.integers(min_value=0, max_value=5))
def test_prefix_single_char_deletions_rejected(i):
    cfg = default_config()
    good = "/Game/Fruits/Apple/PinkLady/Maturation/Summer/Healthy/PinkLady_Maturation_Summer_Healthy.fbx"
    mutated = good[:i] + good[i + 1:]
    with pytest.raises((MalformedPathError, UnknownTaxonError)):
        parse_path(mutated, cfg)


@given(st.integers(min_value=1, max_value=4))
def test_suffix_single_char_deletions_rejected(k):
    cfg = default_config()
    good = "/Game/Fruits/Apple/PinkLady/Maturation/Summer/Healthy/PinkLady_Maturation_Summer_Healthy.fbx"
    i = len(good) - k
    mutated = good[:i] + good[i + 1:]
    with pytest.raises((MalformedPathError, UnknownTaxonError)):
        parse_path(mutated, cfg)


def test_config_error_on_duplicates_and_empties():
    with pytest.raises(ConfigError):
        TaxonomyConfig(categories={"Fruits": ["Apple", "Apple"]}, varieties={"Apple": ["Gala"]})
    with pytest.raises(ConfigError):
        TaxonomyConfig(categories={"Fruits": ["Apple"]}, varieties={"Apple": []})
    with pytest.raises(ConfigError):
        TaxonomyConfig(categories={"Fruits": []}, varieties={})
    with pytest.raises(ConfigError):
        TaxonomyConfig(categories={"Fruits": ["Apple"]}, varieties={"Apple": ["bad ident"]})


def test_resolve_is_case_insensitive(cfg):
    assert cfg.resolve("crop", "aPPle") == "Apple"
    assert cfg.resolve("variety", "pinklady") == "PinkLady"
    with pytest.raises(UnknownTaxonError):
        cfg.resolve("crop", "durian")
