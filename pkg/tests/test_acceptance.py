"""Acceptance gate: the seven release criteria, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as the
criteria execute; without ``-s`` they appear in the captured output.
"""

from __future__ import annotations

import json
import random
import threading
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Optional

import httpx
from click.testing import CliRunner

from conftest import LiveServer, make_source_archive
from oracles import project_schema_validator, reference_search
from wotify.cli import EXIT_PROBE_FAILED, main
from wotify.model import ProjectRecord, utc_now_iso
from wotify.readme_fetch import ReadmeFetcher
from wotify.search import SearchQuery
from wotify.store import RegistryStore
from wotify.validation import (
    instantiate_template,
    validate_project_submission,
    validate_td_structure,
)


@contextmanager
def criterion(number: int, label: str):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[acceptance {number}] {label}: FAIL")
        raise
    print(f"[acceptance {number}] {label}: PASS ({time.perf_counter() - start:.2f}s)")


# ----------------------------------------------------------------------
# 1. schema oracle equivalence

_TEXT_FIELDS = (
    ("name", (4, 5, 180, 181)),
    ("shortDescription", (4, 5, 180, 181)),
    ("longDescription", (4, 5, 499, 500, 501)),
)

_ENUM_MISSPELLINGS = (
    ("platform", ("Raspberry", "raspberri", "esp", "ESP ", "", "other", "arduino")),
    ("implementationType", ("Code", "template ", "codez", "", "template")),
    ("complexity", ("Simple", "hard", "", "medium ", "expert")),
)

_LIST_VARIANTS = (
    ("topic", (["Sensor"], ["sensors"], [""], [], ["sensor", "sensor"], ["sensor", "actuator"], "sensor", [1])),
    ("tags", ([], [""], ["a", "a"], ["x", "X"], ["x", "x "], ["ok"], "tags", [2], ["fine", "also fine"])),
)

_VERSION_VARIANTS = ({}, {"instance": ""}, {"instance": "2.1"}, {"instance": 2}, "1.0.0", {"instance": "1", "x": 1}, None)

_LINK_VARIANTS = ("ftp://example.com/x", "http://", "not a url", "https://ok.example/x", "http://a b/", 42, "")

_TD_VARIANTS = ({}, {"title": "t"}, [], "td", None, {"title": "t", "properties": {"p": {}}})


def _mutation_pool(make_submission) -> list[dict[str, Any]]:
    docs: list[dict[str, Any]] = [
        make_submission(),
        make_submission(implementationType="template", github=None),
        make_submission(github=None),  # code without github
        make_submission(readme="https://example.com/readme.md"),
    ]
    for field, lengths in _TEXT_FIELDS:
        for n in lengths:
            docs.append(make_submission(**{field: "x" * n}))
    for field, values in _ENUM_MISSPELLINGS:
        for value in values:
            docs.append(make_submission(**{field: value}))
    for field, values in _LIST_VARIANTS:
        for value in values:
            docs.append(make_submission(**{field: value}))
    for value in _VERSION_VARIANTS:
        docs.append(make_submission(version=value))
    for value in _LINK_VARIANTS:
        docs.append(make_submission(github=value))
        docs.append(make_submission(readme=value))
    for value in _TD_VARIANTS:
        docs.append(make_submission(td=value))
    base = make_submission()
    for key in list(base):  # drop each field in turn
        clone = make_submission()
        clone.pop(key)
        docs.append(clone)
    for key in ("id", "owner", "stats", "createdAt", "zzz"):  # server-managed / unknown
        docs.append(make_submission(**{key: "x"}))
    return docs


def test_criterion_1_schema_oracle_equivalence(make_submission):
    with criterion(1, "schema oracle equivalence"):
        start = time.perf_counter()
        rng = random.Random(20260815)
        corpus = _mutation_pool(make_submission)
        pool = list(corpus)
        while len(corpus) < 240:  # compound mutations
            merged = make_submission()
            for donor in rng.sample(pool, rng.randint(1, 3)):
                keys = [k for k in donor if k in merged or k not in ("github", "readme")]
                key = rng.choice(keys or list(donor))
                if key in donor:
                    merged[key] = donor[key]
                elif key in merged:
                    del merged[key]
            corpus.append(merged)
        assert len(corpus) >= 200

        oracle = project_schema_validator()
        disagreements = []
        for i, doc in enumerate(corpus):
            ours = validate_project_submission(doc).valid
            theirs = oracle.is_valid(doc)
            if ours != theirs:
                disagreements.append((i, ours, theirs, doc))
        elapsed = time.perf_counter() - start
        assert not disagreements, disagreements[:3]
        assert elapsed < 5.0, f"criterion 1 took {elapsed:.2f}s"


# ----------------------------------------------------------------------
# 2. search oracle equivalence

_WORDS = (
    "sense hat bridge robot arm led matrix hue light camera motion relay "
    "gpio thing wot demo server pi esp node lamp plug probe farm"
).split()

_PLATFORMS = ("raspberry", "arduino", "ESP", "other")
_TOPICS = ("sensor", "actuator", "robotics", "lighting", "other")
_TYPES = ("code", "template")
_COMPLEXITIES = ("simple", "medium", "expert")


def _random_record(rng: random.Random, n: int) -> ProjectRecord:
    words = lambda k: " ".join(rng.choices(_WORDS, k=k))
    now = utc_now_iso()
    return ProjectRecord(
        id="",
        name=f"{words(rng.randint(1, 3))} {n}",
        short_description=words(rng.randint(2, 6)),
        long_description=words(rng.randint(3, 10)),
        implementation_type=rng.choice(_TYPES),
        topic=tuple(rng.sample(_TOPICS, rng.randint(1, 2))),
        platform=rng.choice(_PLATFORMS),
        tags=tuple(rng.sample(_WORDS + ["SenseHAT", "Wot Demo"], rng.randint(1, 3))),
        complexity=rng.choice(_COMPLEXITIES),
        version_instance="1.0.0",
        td={"title": "t"},
        owner="user-1",
        created_at=now,
        updated_at=now,
    )


def test_criterion_2_search_oracle_equivalence(tmp_path: Path):
    with criterion(2, "search oracle equivalence"):
        start = time.perf_counter()
        rng = random.Random(4242)
        for corpus_index in range(100):
            store = RegistryStore(tmp_path / f"c{corpus_index}", fsync=False)
            try:
                ids = [
                    store.put_project(_random_record(rng, n))
                    for n in range(rng.randint(1, 50))
                ]
                for project_id in ids:
                    for _ in range(rng.randint(0, 3)):
                        store.record_download(project_id)
                docs = [store.get_project(project_id).to_dict() for project_id in ids]
                for _ in range(20):
                    terms = tuple(rng.choices(_WORDS + ["zzz", "qqq"], k=rng.randint(0, 3)))
                    platform = rng.choice(_PLATFORMS) if rng.random() < 0.3 else None
                    topic = rng.choice(_TOPICS) if rng.random() < 0.3 else None
                    impl = rng.choice(_TYPES) if rng.random() < 0.3 else None
                    complexity = rng.choice(_COMPLEXITIES) if rng.random() < 0.3 else None
                    limit = rng.randint(1, 25)
                    offset = rng.randint(0, 10)
                    hits, total = store.search(
                        SearchQuery(
                            terms=terms,
                            platform=platform,
                            topic=topic,
                            implementation_type=impl,
                            complexity=complexity,
                            limit=limit,
                            offset=offset,
                        )
                    )
                    expected_hits, expected_total = reference_search(
                        docs,
                        list(terms),
                        platform=platform,
                        topic=topic,
                        implementation_type=impl,
                        complexity=complexity,
                        limit=limit,
                        offset=offset,
                    )
                    assert [(h.project_id, h.score) for h in hits] == expected_hits
                    assert total == expected_total
            finally:
                store.close()
        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, f"criterion 2 took {elapsed:.2f}s"


# ----------------------------------------------------------------------
# 3. end-to-end flow over the live API

def _register(base_url: str, username: str) -> str:
    with httpx.Client(base_url=base_url) as client:
        client.post("/api/users", json={"username": username, "password": "longenough"}).raise_for_status()
        response = client.post("/api/tokens", json={"username": username, "password": "longenough"})
        response.raise_for_status()
        return response.json()["token"]


def test_criterion_3_end_to_end_flow(live_server: LiveServer, make_submission):
    with criterion(3, "end-to-end publish/search/download/rate"):
        base = live_server.base_url
        alice = _register(base, "alice")
        bob = _register(base, "bob")

        def publish(doc: dict[str, Any], token: str) -> str:
            response = httpx.post(
                f"{base}/api/projects", json=doc, headers={"Authorization": f"Bearer {token}"}
            )
            assert response.status_code == 201, response.text
            return response.json()["id"]

        code_id = publish(make_submission(name="acceptance probe code"), alice)
        template_id = publish(
            make_submission(
                name="acceptance probe template",
                implementationType="template",
                github=None,
                td={"title": "T", "properties": {"p": {"forms": [{"href": "{{BASE_URL}}/p"}]}}},
            ),
            bob,
        )

        found = httpx.get(f"{base}/api/projects", params={"q": "acceptance probe"}).json()
        assert found["total"] == 2
        assert {hit["projectId"] for hit in found["hits"]} == {code_id, template_id}

        barrier = threading.Barrier(32)
        statuses: list[int] = []

        def download() -> None:
            barrier.wait()
            statuses.append(httpx.get(f"{base}/api/projects/{code_id}/td").status_code)

        threads = [threading.Thread(target=download) for _ in range(32)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        assert statuses == [200] * 32
        detail = httpx.get(f"{base}/api/projects/{code_id}").json()
        assert detail["stats"]["downloads"] == 32

        def rate(token: str, stars: int) -> dict[str, Any]:
            response = httpx.post(
                f"{base}/api/projects/{code_id}/rating",
                json={"stars": stars},
                headers={"Authorization": f"Bearer {token}"},
            )
            assert response.status_code == 200, response.text
            return response.json()

        assert rate(alice, 4) == {"average": 4.0, "count": 1}
        assert rate(bob, 5) == {"average": 4.5, "count": 2}
        assert rate(alice, 2) == {"average": 3.5, "count": 2}  # update, not append
        detail = httpx.get(f"{base}/api/projects/{code_id}").json()
        assert detail["stats"]["averageRating"] == 3.5
        assert detail["stats"]["ratingCount"] == 2


# ----------------------------------------------------------------------
# 4. CLI install contract

class StubRunner:
    def __init__(self) -> None:
        self.calls: list[tuple[str, Path]] = []

    def run(self, command: str, cwd: Path, env: dict[str, str]) -> int:
        self.calls.append((command, Path(cwd)))
        return 0


def test_criterion_4_cli_install_contract(
    live_server: LiveServer, file_server, make_submission, tmp_path: Path
):
    base = live_server.base_url
    token = _register(base, "carol")

    def publish_with_archive(name: str, manifest: Optional[dict], extra: Optional[dict] = None) -> str:
        files = dict(extra or {})
        if manifest is not None:
            files["wotify.json"] = json.dumps(manifest)
        archive = f"{name}.tar.gz"
        make_source_archive(file_server.root / archive, files)
        doc = make_submission(name=name, github=f"{file_server.base_url}/{archive}")
        response = httpx.post(
            f"{base}/api/projects", json=doc, headers={"Authorization": f"Bearer {token}"}
        )
        assert response.status_code == 201, response.text
        return response.json()["id"]

    def run_cli(args: list[str], **kwargs: Any):
        return CliRunner().invoke(
            main, [*args, "--registry", base], catch_exceptions=False, **kwargs
        )

    with criterion(4, "CLI install contract"):
        sentinel = tmp_path / "sentinel"
        happy = publish_with_archive(
            "wot-sentinel",
            {
                "manifestVersion": 1,
                "name": "wot-sentinel",
                "scripts": {"install": f"touch {sentinel}"},
            },
        )
        result = run_cli(["install", happy, "--yes"])
        assert result.exit_code == 0, result.output
        assert sentinel.exists()

        stub = StubRunner()
        result = run_cli(["install", happy, "--dry-run"], obj={"runner": stub})
        assert result.exit_code == 0, result.output
        assert stub.calls == []  # zero subprocess executions

        probe_sentinel = tmp_path / "probe-sentinel"
        probed = publish_with_archive(
            "wot-probed",
            {
                "manifestVersion": 1,
                "name": "wot-probed",
                "scripts": {"install": f"touch {probe_sentinel}"},
                "prerequisites": [{"tool": "nope", "probe": "false", "hint": "install nope"}],
            },
        )
        result = run_cli(["install", probed, "--yes"])
        assert result.exit_code == EXIT_PROBE_FAILED
        assert not probe_sentinel.exists()

        listing = publish_with_archive(
            "wot-mearmpi",
            {
                "manifestVersion": 1,
                "name": "wot-mearmpi",
                "scripts": {"install": "pip install -r requirements.txt"},
            },
            extra={"requirements.txt": "flask\n"},
        )
        stub = StubRunner()
        result = run_cli(["install", listing, "--yes"], obj={"runner": stub})
        assert result.exit_code == 0, result.output
        assert [command for command, _ in stub.calls] == ["pip install -r requirements.txt"]


# ----------------------------------------------------------------------
# 5. template instantiation

def test_criterion_5_template_instantiation():
    with criterion(5, "template instantiation"):
        template = {
            "title": "Sense HAT remote",
            "properties": {
                "temperature": {"forms": [{"href": "{{BASE_URL}}/temp"}]},
                "humidity": {"forms": [{"href": "{{BASE_URL}}/humidity"}]},
            },
        }
        concrete = instantiate_template(template, {"BASE_URL": "http://10.0.0.2:8080"})
        report = validate_td_structure(concrete, allow_placeholders=False)
        assert report.issues == ()
        assert "{{" not in json.dumps(concrete)
        assert concrete["properties"]["temperature"]["forms"][0]["href"] == "http://10.0.0.2:8080/temp"

        plain = {
            "title": "Static thing",
            "properties": {"state": {"forms": [{"href": "http://device.local/state"}]}},
        }
        identical = instantiate_template(plain, {"UNUSED": "x"})
        serialize = lambda doc: json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
        assert serialize(identical) == serialize(plain)  # byte equality


# ----------------------------------------------------------------------
# 6. readme fallback chain

def _record_with_links(readme: Optional[str], github: Optional[str]) -> ProjectRecord:
    now = utc_now_iso()
    return ProjectRecord(
        id="p-acc",
        name="acceptance readme probe",
        short_description="short text",
        long_description="the long description body",
        implementation_type="code",
        topic=("sensor",),
        platform="raspberry",
        tags=("probe",),
        complexity="simple",
        version_instance="1.0.0",
        td={"title": "t"},
        owner="user-1",
        created_at=now,
        updated_at=now,
        github=github,
        readme=readme,
    )


def test_criterion_6_readme_fallback_chain():
    with criterion(6, "readme fallback chain"):
        calls: list[str] = []

        def handler(request: httpx.Request) -> httpx.Response:
            url = str(request.url)
            calls.append(url)
            if url == "https://example.com/readme.md":
                return httpx.Response(200, text="# direct readme")
            if url == "https://raw.githubusercontent.com/acme/guessed/main/README.md":
                return httpx.Response(200, text="# guessed readme")
            return httpx.Response(404)

        with ReadmeFetcher(transport=httpx.MockTransport(handler)) as fetcher:
            direct = fetcher.fetch_readme(
                _record_with_links("https://example.com/readme.md", "https://github.com/acme/ignored")
            )
            assert (direct.source, direct.body) == ("readmeUri", "# direct readme")

            guessed = fetcher.fetch_readme(
                _record_with_links(None, "https://github.com/acme/guessed")
            )
            assert (guessed.source, guessed.body) == ("repoGuess", "# guessed readme")

            dark = fetcher.fetch_readme(
                _record_with_links("https://example.com/missing.md", "https://github.com/acme/dark")
            )
            assert dark.source == "fallbackDescription"
            assert dark.body == "the long description body"

            before = len(calls)  # warm cache: zero upstream requests
            warm = fetcher.fetch_readme(
                _record_with_links("https://example.com/readme.md", "https://github.com/acme/ignored")
            )
            assert (warm.source, warm.body) == ("readmeUri", "# direct readme")
            assert len(calls) == before


# ----------------------------------------------------------------------
# 7. durability

def test_criterion_7_durability(tmp_path: Path):
    with criterion(7, "durability across reopen"):
        rng = random.Random(7)
        data_dir = tmp_path / "registry"
        store = RegistryStore(data_dir)
        ids = [store.put_project(_random_record(rng, n)) for n in range(25)]
        for project_id in ids[::3]:
            store.record_download(project_id)

        queries = [SearchQuery(terms=(), limit=100)]
        queries += [SearchQuery(terms=(word,), limit=100) for word in _WORDS]
        queries += [
            SearchQuery(terms=(), platform="raspberry", limit=100),
            SearchQuery(terms=("sense", "hat"), limit=100),
        ]

        def snapshot(live: RegistryStore):
            records = {project_id: live.get_project(project_id).to_dict() for project_id in ids}
            results = []
            for query in queries:
                hits, total = live.search(query)
                results.append(([(h.project_id, h.score) for h in hits], total))
            return records, results

        before = snapshot(store)
        store.close()

        reopened = RegistryStore(data_dir)
        try:
            assert all(reopened.get_project(project_id) is not None for project_id in ids)
            assert snapshot(reopened) == before
        finally:
            reopened.close()
