import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sceneforge.embed_index import (
    DegenerateTextError,
    DimensionMismatchError,
    EmptyIndexError,
    FormatError,
    IndexRecord,
    VectorIndex,
    cosine,
    embed_local,
)
from sceneforge.taxonomy import default_config, enumerate_paths


def test_embed_local_is_deterministic():
    a = embed_local("apple")
    b = embed_local("apple")
    assert a.tobytes() == b.tobytes()


def test_embed_local_unit_norm():
    vec = embed_local("healthy young Pink Lady apple in fall")
    assert math.isclose(float(np.linalg.norm(vec)), 1.0, abs_tol=1e-6)


def test_embed_local_similarity_ordering():
    q = embed_local("pink lady apple")
    near = cosine(q, embed_local("pink lady apple tree"))
    far = cosine(q, embed_local("winter carrot"))
    assert near > far


def test_embed_local_rejects_degenerate_text():
    with pytest.raises(DegenerateTextError):
        embed_local("")
    with pytest.raises(DegenerateTextError):
        embed_local("ab")


def test_search_self_similarity():
    index = VectorIndex.build([("a", "pink lady apple"), ("b", "roma tomato"), ("c", "nantes carrot")])
    hits = index.search(embed_local("roma tomato"), k=1)
    assert hits[0][0] == "b"
    assert math.isclose(hits[0][1], 1.0, abs_tol=1e-6)


def test_search_k_larger_than_index():
    index = VectorIndex.build([("a", "apple"), ("b", "tomato")])
    assert len(index.search(embed_local("apple"), k=10)) == 2


def test_search_three_record_hand_ranking():
    # hand-built unit vectors with cosines against q computed by hand:
    # q = (1, 0); a = (1, 0) -> 1.0; b = (0.6, 0.8) -> 0.6; c = (0, 1) -> 0.0
    records = [
        IndexRecord("c", np.array([0.0, 1.0], dtype=np.float32)),
        IndexRecord("a", np.array([1.0, 0.0], dtype=np.float32)),
        IndexRecord("b", np.array([0.6, 0.8], dtype=np.float32)),
    ]
    index = VectorIndex(records)
    hits = index.search(np.array([1.0, 0.0], dtype=np.float32), k=3)
    assert [h[0] for h in hits] == ["a", "b", "c"]
    assert hits[0][1] == pytest.approx(1.0)
    assert hits[1][1] == pytest.approx(0.6)
    assert hits[2][1] == pytest.approx(0.0)


def test_search_tie_break_by_insertion_order():
    v = np.array([1.0, 0.0], dtype=np.float32)
    index = VectorIndex([IndexRecord("first", v), IndexRecord("second", v.copy())])
    hits = index.search(v, k=2)
    assert [h[0] for h in hits] == ["first", "second"]


def test_search_errors():
    empty = VectorIndex([])
    with pytest.raises(EmptyIndexError):
        empty.search(np.zeros(4, dtype=np.float32), k=1)
    index = VectorIndex.build([("a", "apple")])
    with pytest.raises(DimensionMismatchError):
        index.search(np.zeros(8, dtype=np.float32), k=1)


@settings(max_examples=50, deadline=None)
@given(
    st.integers(min_value=1, max_value=20),
    st.integers(min_value=2, max_value=8),
    st.integers(min_value=1, max_value=25),
    st.integers(min_value=0, max_value=2**31),
)
def test_search_matches_naive_argsort_oracle(n, dim, k, seed):
    rng = np.random.default_rng(seed)
    vectors = rng.normal(size=(n, dim))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    vectors = vectors.astype(np.float32)
    index = VectorIndex([IndexRecord(str(i), vectors[i]) for i in range(n)])
    query = rng.normal(size=dim)
    query = (query / np.linalg.norm(query)).astype(np.float32)

    hits = index.search(query, k=k)

    scores = vectors @ query
    naive = sorted(range(n), key=lambda i: (-scores[i], i))[:k]
    assert [h[0] for h in hits] == [str(i) for i in naive]


def test_ranking_scale_invariance():
    rng = np.random.default_rng(7)
    vectors = rng.normal(size=(12, 16))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    index = VectorIndex([IndexRecord(str(i), vectors[i].astype(np.float32)) for i in range(12)])
    raw = rng.normal(size=16)
    base = (raw / np.linalg.norm(raw)).astype(np.float32)
    scaled = (5.0 * raw / np.linalg.norm(5.0 * raw)).astype(np.float32)
    assert [h[0] for h in index.search(base, 12)] == [h[0] for h in index.search(scaled, 12)]


def descriptor_texts():
    cfg = default_config()
    return [(p.raw, p.raw) for p in enumerate_paths(cfg)]


def test_save_load_round_trip_on_672_paths():
    index = VectorIndex.build(descriptor_texts())
    blob = index.save()
    loaded = VectorIndex.load(blob)
    assert loaded.ids == index.ids
    assert loaded.dimension == index.dimension
    for i in range(len(index)):
        assert loaded.vector_for(i).tobytes() == index.vector_for(i).tobytes()
    assert loaded.save() == blob


def test_save_is_deterministic():
    items = [("a", "apple"), ("b", "banana")]
    assert VectorIndex.build(items).save() == VectorIndex.build(items).save()


def test_empty_index_round_trip():
    blob = VectorIndex([]).save()
    assert len(VectorIndex.load(blob)) == 0


def test_load_rejects_bad_magic_and_truncation():
    blob = VectorIndex.build([("a", "apple")]).save()
    with pytest.raises(FormatError):
        VectorIndex.load(b"XXXX" + blob[4:])
    with pytest.raises(FormatError):
        VectorIndex.load(blob[:-3])
