"""Tests for wotify.search: tokenizer, query/hit types, inverted index.

The from-scratch linear scorer in oracles.py is the reference; the index
route must agree with it on every record and term list.
"""

from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import reference_score, reference_tokens
from wotify.model import ProjectRecord, utc_now_iso
from wotify.search import (
    DEFAULT_LIMIT,
    DEFAULT_WEIGHTS,
    MAX_LIMIT,
    FieldWeights,
    InvertedIndex,
    SearchHit,
    SearchQuery,
    field_terms,
    tokenize,
)

_seq = itertools.count()


def make_record(**overrides) -> ProjectRecord:
    n = next(_seq)
    fields = dict(
        id=f"proj-{n:04d}",
        name=f"Project {n}",
        short_description="a short summary",
        long_description="a longer body of text",
        implementation_type="code",
        topic=("sensor",),
        platform="raspberry",
        tags=("demo",),
        complexity="simple",
        version_instance="1.0.0",
        td={"title": f"Project {n}"},
        owner="user-1",
        created_at=utc_now_iso(),
        updated_at=utc_now_iso(),
        github="https://github.com/example/demo",
    )
    fields.update(overrides)
    return ProjectRecord(**fields)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("Sense HAT", ["sense", "hat"]),
        ("wot-sense-hat_2", ["wot", "sense", "hat", "2"]),
        ("", []),
        ("--- ///", []),
        ("ESP32/C3 gateway", ["esp32", "c3", "gateway"]),
        ("Überwachung läuft", ["überwachung", "läuft"]),
        ("a_b__c", ["a", "b", "c"]),
        ("  spaced   out  ", ["spaced", "out"]),
    ],
)
def test_tokenize_cases(text, expected):
    assert tokenize(text) == expected


@settings(max_examples=200)
@given(st.text(max_size=40))
def test_tokenize_agrees_with_reference_tokens(text):
    tokens = tokenize(text)
    assert set(tokens) == reference_tokens(text)
    for tok in tokens:
        assert tok, "empty token leaked"
        assert tok == tok.lower()


def test_search_query_defaults_and_bounds():
    q = SearchQuery()
    assert q.limit == DEFAULT_LIMIT == 20
    assert q.offset == 0
    assert SearchQuery(limit=MAX_LIMIT).limit == 100
    for bad in ({"limit": 0}, {"limit": -1}, {"limit": MAX_LIMIT + 1}, {"offset": -1}):
        with pytest.raises(ValueError):
            SearchQuery(**bad)


def test_search_hit_wire_shape():
    hit = SearchHit(
        project_id="p-1",
        name="Sense HAT server",
        short_description="expose the HAT",
        implementation_type="code",
        platform="raspberry",
        score=6.0,
        downloads=3,
        average_rating=None,
    )
    doc = hit.to_dict()
    assert doc == {
        "projectId": "p-1",
        "name": "Sense HAT server",
        "shortDescription": "expose the HAT",
        "implementationType": "code",
        "platform": "raspberry",
        "score": 6.0,
        "downloads": 3,
    }
    rated = SearchHit(**{**hit.__dict__, "average_rating": 4.5})
    assert rated.to_dict()["averageRating"] == 4.5


def test_field_terms_tags_are_exact_not_tokenized():
    record = make_record(
        name="Sense HAT server",
        tags=("SenseHAT", "Wot Demo"),
        short_description="LED matrix demo",
        long_description="drives the sense hat",
    )
    terms = field_terms(record)
    assert terms["name"] == {"sense", "hat", "server"}
    assert terms["tags"] == {"sensehat", "wot demo"}
    assert terms["short_description"] == {"led", "matrix", "demo"}
    assert terms["long_description"] == {"drives", "the", "sense", "hat"}


def fixture_corpus() -> list[ProjectRecord]:
    a = make_record(
        id="p-a",
        name="Sense HAT server",
        short_description="expose the LED matrix",
        long_description="a web thing wrapping the add-on board",
        tags=("led",),
    )
    b = make_record(
        id="p-b",
        name="hue bridge",
        short_description="control hue lights",
        long_description="pairing and scenes for the bridge",
        tags=("lighting",),
    )
    c = make_record(
        id="p-c",
        name="dashboard widgets",
        short_description="Sense HAT dashboard",
        long_description="graphs for the raspberry add-on",
        tags=("sensehat",),
    )
    return [a, b, c]


def test_fixture_scores_match_oracle_and_frozen_values():
    index = InvertedIndex()
    corpus = fixture_corpus()
    for record in corpus:
        index.add(record)
    terms = ["sense", "hat"]
    scores = index.score(terms)
    for record in corpus:
        expected = reference_score(record.to_dict(), terms, (3, 2, 1, 1))
        assert scores.get(record.id, 0.0) == expected
    # Frozen: name hits at weight 3 each; description hits at 1 each; the
    # "sensehat" tag matches neither term, so C scores on its short text only.
    assert scores["p-a"] == 6.0
    assert scores["p-c"] == 2.0
    assert "p-b" not in scores


def test_exact_tag_term_scores_tag_weight():
    index = InvertedIndex()
    for record in fixture_corpus():
        index.add(record)
    scores = index.score(["sensehat"])
    assert scores == {"p-c": 2.0}


def test_presence_not_frequency():
    index = InvertedIndex()
    index.add(make_record(id="p-rep", name="sense sense sense hat"))
    assert index.score(["sense"]) == {"p-rep": 3}


def test_duplicate_query_terms_accumulate_on_both_routes():
    record = make_record(id="p-dup", name="sense hat")
    index = InvertedIndex()
    index.add(record)
    terms = ["sense", "sense"]
    assert index.score(terms)["p-dup"] == 6
    assert reference_score(record.to_dict(), terms, (3, 2, 1, 1)) == 6.0


def test_remove_then_rescore():
    index = InvertedIndex()
    a, b, c = fixture_corpus()
    for record in (a, b, c):
        index.add(record)
    index.remove("p-c")
    assert index.score(["sense", "hat"]) == {"p-a": 6}
    index.remove("p-a")
    index.remove("p-b")
    assert index._postings == {}
    assert index._doc_terms == {}
    index.remove("p-a")  # idempotent on absent ids


def test_re_add_replaces_previous_terms():
    index = InvertedIndex()
    index.add(make_record(id="p-x", name="old name"))
    index.add(make_record(id="p-x", name="fresh title"))
    assert index.score(["old"]) == {}
    assert index.score(["fresh"]) == {"p-x": 3}


def test_custom_weights_flow_through():
    weights = FieldWeights(name=5, tags=4, short_description=2, long_description=1)
    index = InvertedIndex(weights)
    record = make_record(
        id="p-w",
        name="alpha",
        tags=("alpha",),
        short_description="alpha beta",
        long_description="alpha gamma",
    )
    index.add(record)
    assert index.score(["alpha"]) == {"p-w": 12}
    assert reference_score(record.to_dict(), ["alpha"], (5, 4, 2, 1)) == 12.0


_WORDS = ("sense", "hat", "hue", "bridge", "robot", "arm", "LED", "wot", "server", "ESP32")
_PHRASES = st.lists(st.sampled_from(_WORDS), max_size=6).map(" ".join)


@st.composite
def corpora_with_terms(draw):
    records = []
    for i in range(draw(st.integers(1, 8))):
        records.append(
            make_record(
                id=f"p-gen-{i}",
                name=draw(_PHRASES) or "untitled",
                short_description=draw(_PHRASES),
                long_description=draw(_PHRASES),
                tags=tuple(draw(st.lists(st.sampled_from(_WORDS), max_size=3, unique=True))),
            )
        )
    terms = draw(st.lists(st.sampled_from([w.lower() for w in _WORDS]), max_size=4))
    return records, terms


@settings(max_examples=150)
@given(corpora_with_terms())
def test_index_scores_equal_linear_scan(case):
    records, terms = case
    index = InvertedIndex(DEFAULT_WEIGHTS)
    for record in records:
        index.add(record)
    scores = index.score(terms)
    for record in records:
        expected = reference_score(record.to_dict(), terms, (3, 2, 1, 1))
        assert scores.get(record.id, 0.0) == expected
    assert set(scores) <= {r.id for r in records}
    for value in scores.values():
        assert value > 0
