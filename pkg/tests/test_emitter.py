import pytest

from sceneforge.emitter import InvalidPlanError, emit_script, table_from_plan
from sceneforge.knowledge import KnowledgeBase, KnowledgeEntry, RecipeField, SceneRecipe
from sceneforge.planner import plan_scene
from sceneforge.taxonomy import AssetMetadata, default_config, format_path


@pytest.fixture(scope="module")
def cfg():
    return default_config()


@pytest.fixture(scope="module")
def kb():
    return KnowledgeBase.bundled()


def recipe_for(kb, cfg, keys, rows=2, cols=2, quantity=1):
    fields = []
    for key in keys:
        entry = kb.by_id[key]
        fields.append(RecipeField(format_path(entry.meta, cfg), entry, quantity, rows, cols))
    return SceneRecipe(fields=fields)


def test_emit_is_deterministic(kb, cfg):
    recipe = recipe_for(kb, cfg, ["apple-gala-maturation-summer-healthy"])
    plan = plan_scene(recipe, seed=11)
    assert emit_script(plan).source == emit_script(plan).source


def test_emitted_script_structure(kb, cfg):
    recipe = recipe_for(kb, cfg, ["apple-gala-maturation-summer-healthy"])
    plan = plan_scene(recipe, seed=11)
    script = emit_script(plan, name="orchard")
    assert script.plan_ref == "orchard.plan.json"
    src = script.source
    assert src.count("import unreal") == 1
    for name in ("def setup_scene", "def spawn_field", "def main"):
        assert name in src
    assert plan.fields[0].asset.raw in src


def test_unit_conversion_meters_to_engine_units(kb, cfg):
    entry = kb.by_id["apple-fuji-maturation-summer-healthy"]
    recipe = SceneRecipe(fields=[RecipeField(format_path(entry.meta, cfg), entry, 1, 1, 1)])
    plan = plan_scene(recipe, seed=0)
    table = table_from_plan(plan)
    assert table[0]["origin"] == (0.0, 0.0)
    assert table[0]["row_spacing"] == pytest.approx(entry.row_spacing_m * 100.0)
    assert table[0]["plant_spacing"] == pytest.approx(entry.plant_spacing_m * 100.0)
    src = emit_script(plan).source
    assert '"origin": (0.0, 0.0)' in src
    assert '"scale": 1.0' in src  # fuji sits at variety factor 1.0, so height == reference


def test_offset_origin_appears_in_engine_units(kb, cfg):
    # second field origin lands at prev bbox max + gap, rendered x100
    recipe = recipe_for(
        kb, cfg,
        ["apple-gala-maturation-summer-healthy", "carrot-nantes-maturation-summer-healthy"],
        rows=1, cols=1,
    )
    plan = plan_scene(recipe, seed=0, gap_m=10.0)
    expected_x = plan.fields[1].origin[0] * 100.0
    assert f'"origin": ({expected_x!r}, 0.0)' in emit_script(plan).source


def test_path_closure_and_count_closure(kb, cfg):
    recipe = recipe_for(
        kb, cfg,
        ["tomato-roma-maturation-summer-healthy", "lettuce-romaine-vegetative-spring-healthy"],
        rows=3, cols=2,
    )
    plan = plan_scene(recipe, seed=5)
    table = table_from_plan(plan)
    assert {row["asset_path"] for row in table} == {fp.asset.raw for fp in plan.fields}
    assert sum(r["rows"] * r["cols"] for r in table) == plan.placement_count()
    assert all(len(r["yaws"]) == r["rows"] * r["cols"] for r in table)


def test_emit_rejects_invalid_plan(kb, cfg):
    recipe = recipe_for(kb, cfg, ["apple-gala-maturation-summer-healthy"])
    plan = plan_scene(recipe, seed=11)
    plan.fields[0].placements.pop()  # break the rows*cols invariant
    with pytest.raises(InvalidPlanError):
        emit_script(plan)


def test_emitted_script_is_valid_python(kb, cfg):
    import ast

    recipe = recipe_for(kb, cfg, ["banana-cavendish-reproductive-fall-ill"], rows=2, cols=3)
    plan = plan_scene(recipe, seed=2)
    ast.parse(emit_script(plan).source)
