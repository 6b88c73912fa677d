#!/usr/bin/env python3
"""Regenerate fixtures/submission-corpus.json.

The corpus pairs project submissions with their expected accept/reject
verdict: systematic boundary cases (string lengths 4/5/180/181 and
499/500/501, enum misspellings, duplicate tags, missing required fields,
unexpected server-managed fields, URI edge cases) plus seeded random
valid and invalid submissions.

Every verdict is fixed by construction and cross-checked here against
the generic jsonschema evaluator loaded with
schema/wotify-project.schema.json, so the file can serve as a neutral
parity fixture for every validator implementation (server and browser).
This script intentionally imports no wotify code.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path
from typing import Any
from urllib.parse import urlparse

import jsonschema

REPO_ROOT = Path(__file__).resolve().parent.parent
SCHEMA_PATH = REPO_ROOT / "schema" / "wotify-project.schema.json"
OUT_PATH = REPO_ROOT / "fixtures" / "submission-corpus.json"

SEED = 20260815

TOPICS = ["sensor", "actuator", "robotics", "lighting", "other"]
PLATFORMS = ["raspberry", "arduino", "ESP", "other"]
COMPLEXITIES = ["simple", "medium", "expert"]

WORDS = [
    "sensor", "gateway", "bridge", "matrix", "camera", "relay", "motor",
    "climate", "garden", "kitchen", "lamp", "thermostat", "valve", "meter",
    "weather", "station", "door", "window", "alarm", "hub",
]

TDS: list[dict[str, Any]] = [
    {
        "title": "Sense HAT",
        "properties": {"temperature": {"forms": [{"href": "http://device.local/temp"}]}},
    },
    {
        "title": "LED Matrix",
        "properties": {"color": {"forms": [{"href": "{{BASE_URL}}/color"}]}},
        "actions": {"blink": {"forms": [{"href": "{{BASE_URL}}/blink"}]}},
    },
    {
        "title": "Door Monitor",
        "properties": {"open": {"forms": [{"href": "http://{{HOST}}:{{PORT}}/open"}]}},
        "events": {"opened": {"forms": [{"href": "http://{{HOST}}:{{PORT}}/events"}]}},
    },
]


def base_submission() -> dict[str, Any]:
    return {
        "name": "wot-sense-hat",
        "shortDescription": "Expose a Sense HAT over the Web of Things.",
        "longDescription": (
            "Runs a Thing on a Raspberry Pi that publishes the Sense HAT "
            "sensors and LED matrix as WoT properties and actions."
        ),
        "github": "https://github.com/example/wot-sense-hat",
        "implementationType": "code",
        "topic": ["sensor"],
        "platform": "raspberry",
        "tags": ["sensehat", "raspberry"],
        "complexity": "simple",
        "version": {"instance": "1.0.0"},
        "td": json.loads(json.dumps(TDS[0])),
    }


def build_cases() -> list[dict[str, Any]]:
    cases: list[dict[str, Any]] = []

    def add(label: str, valid: bool, **changes: Any) -> None:
        doc = base_submission()
        for key, value in changes.items():
            if value is _ABSENT:
                doc.pop(key, None)
            else:
                doc[key] = value
        cases.append({"label": label, "expectedValid": valid, "submission": doc})

    _ABSENT = object()

    add("base-valid", True)
    template = base_submission()
    template["implementationType"] = "template"
    del template["github"]
    template["td"] = json.loads(json.dumps(TDS[1]))
    cases.append({"label": "template-valid-no-github", "expectedValid": True, "submission": template})

    # name boundaries
    add("name-length-4", False, name="abcd")
    add("name-length-5", True, name="abcde")
    add("name-long", True, name="w" * 64)
    add("name-not-string", False, name=123)
    add("name-empty", False, name="")
    add("name-unicode-5", True, name="püree")

    # shortDescription boundaries
    add("short-length-4", False, shortDescription="abcd")
    add("short-length-5", True, shortDescription="abcde")
    add("short-length-180", True, shortDescription="s" * 180)
    add("short-length-181", False, shortDescription="s" * 181)
    add("short-not-string", False, shortDescription=["x"])
    add("short-emoji-5", True, shortDescription="\U0001f389" * 5)
    add("short-emoji-4", False, shortDescription="\U0001f389" * 4)

    # longDescription boundaries
    add("long-length-4", False, longDescription="abcd")
    add("long-length-5", True, longDescription="abcde")
    add("long-length-499", True, longDescription="l" * 499)
    add("long-length-500", True, longDescription="l" * 500)
    add("long-length-501", False, longDescription="l" * 501)
    add("long-not-string", False, longDescription=42)

    # implementationType
    add("impl-code", True)
    add("impl-capitalized", False, implementationType="Code")
    add("impl-misspelled", False, implementationType="tempalte")
    add("impl-firmware", False, implementationType="firmware")
    add("impl-number", False, implementationType=5)

    # topic
    for value in TOPICS:
        add(f"topic-{value}", True, topic=[value])
    add("topic-two-values", True, topic=["sensor", "actuator"])
    add("topic-all-values", True, topic=list(TOPICS))
    add("topic-empty", False, topic=[])
    add("topic-duplicate", False, topic=["sensor", "sensor"])
    add("topic-capitalized", False, topic=["Sensor"])
    add("topic-unknown", False, topic=["iot"])
    add("topic-not-array", False, topic="sensor")
    add("topic-number-item", False, topic=[42])

    # platform
    for value in PLATFORMS:
        add(f"platform-{value}", True, platform=value)
    add("platform-capitalized", False, platform="Raspberry")
    add("platform-esp-lowercase", False, platform="esp")
    add("platform-misspelled", False, platform="raspberyy")

    # tags
    add("tags-single", True, tags=["a"])
    add("tags-empty-string-item", False, tags=[""])
    add("tags-blank-item", True, tags=[" "])
    add("tags-duplicate", False, tags=["dup", "dup"])
    add("tags-empty", False, tags=[])
    add("tags-number-item", False, tags=[7])
    add("tags-not-array", False, tags="sensehat")

    # complexity
    for value in COMPLEXITIES:
        add(f"complexity-{value}", True, complexity=value)
    add("complexity-capitalized", False, complexity="Simple")
    add("complexity-unknown", False, complexity="hard")

    # missing required fields
    for field in [
        "name",
        "shortDescription",
        "longDescription",
        "implementationType",
        "topic",
        "platform",
        "tags",
        "complexity",
        "version",
        "td",
    ]:
        add(f"missing-{field}", False, **{field: _ABSENT})

    # github / readme URIs
    add("github-missing-for-template", True, implementationType="template", github=_ABSENT)
    add("github-missing-for-code", False, github=_ABSENT)
    add("github-present-for-template", True, implementationType="template")
    add("github-http", True, github="http://example.com/repo")
    add("github-ftp", False, github="ftp://example.com/repo")
    add("github-relative", False, github="example.com/repo")
    add("github-no-host", False, github="https://")
    add("github-empty", False, github="")
    add("github-whitespace", False, github="https://github.com/a b")
    add("github-not-string", False, github=77)
    add("readme-valid", True, readme="https://example.com/README.md")
    add("readme-relative", False, readme="docs/README.md")

    # version
    add("version-missing-instance", False, version={})
    add("version-instance-number", False, version={"instance": 2})
    add("version-extra-member", True, version={"instance": "2.0", "codename": "aurora"})
    add("version-not-object", False, version="1.0")

    # td
    add("td-empty-object", True, td={})
    add("td-string", False, td="{\"title\": \"x\"}")
    add("td-number", False, td=3)
    add("td-with-placeholders", True, td=json.loads(json.dumps(TDS[2])))

    # server-managed / unknown fields
    for field, value in [
        ("id", "abc-123"),
        ("stats", {"downloads": 0}),
        ("owner", "u-1"),
        ("createdAt", "2026-01-01T00:00:00.000Z"),
        ("downloads", 3),
    ]:
        add(f"unexpected-{field}", False, **{field: value})

    return cases


def random_valid(rng: random.Random) -> dict[str, Any]:
    name_words = rng.sample(WORDS, rng.randint(1, 3))
    name = "wot-" + "-".join(name_words)
    short = " ".join(rng.sample(WORDS, rng.randint(2, 8))).capitalize() + "."
    long_words = [rng.choice(WORDS) for _ in range(rng.randint(4, 60))]
    long = ("Provides " + " ".join(long_words) + ".")[:500]
    implementation_type = rng.choice(["template", "code"])
    doc: dict[str, Any] = {
        "name": name,
        "shortDescription": short,
        "longDescription": long,
        "implementationType": implementation_type,
        "topic": sorted(rng.sample(TOPICS, rng.randint(1, 3))),
        "platform": rng.choice(PLATFORMS),
        "tags": sorted({rng.choice(WORDS) + str(rng.randint(0, 99)) for _ in range(rng.randint(1, 4))}),
        "complexity": rng.choice(COMPLEXITIES),
        "version": {"instance": f"{rng.randint(0, 3)}.{rng.randint(0, 9)}.{rng.randint(0, 9)}"},
        "td": json.loads(json.dumps(rng.choice(TDS))),
    }
    if implementation_type == "code" or rng.random() < 0.5:
        doc["github"] = f"https://github.com/acme/{name}"
    if rng.random() < 0.3:
        doc["readme"] = f"https://example.com/{name}/README.md"
    return doc


MUTATIONS: list[tuple[str, Any]] = [
    ("name-too-short", lambda d, r: d.update(name=d["name"][:4])),
    ("short-too-long", lambda d, r: d.update(shortDescription="s" * 181)),
    ("short-too-short", lambda d, r: d.update(shortDescription="abc")),
    ("long-too-long", lambda d, r: d.update(longDescription="l" * 501)),
    ("bad-impl", lambda d, r: d.update(implementationType=r.choice(["Code", "script", "TEMPLATE"]))),
    ("bad-platform", lambda d, r: d.update(platform=r.choice(["Raspberry", "esp32", "pi"]))),
    ("bad-complexity", lambda d, r: d.update(complexity=r.choice(["easy", "Medium", "pro"]))),
    ("bad-topic-member", lambda d, r: d.update(topic=[r.choice(["IoT", "Sensors", "home"])])),
    ("dup-topic", lambda d, r: d.update(topic=["other", "other"])),
    ("empty-topic", lambda d, r: d.update(topic=[])),
    ("dup-tags", lambda d, r: d.update(tags=["twin", "twin"])),
    ("empty-tags", lambda d, r: d.update(tags=[])),
    ("empty-tag-item", lambda d, r: d.update(tags=["ok", ""])),
    ("tag-not-string", lambda d, r: d.update(tags=["ok", 5])),
    ("drop-name", lambda d, r: d.pop("name")),
    ("drop-version", lambda d, r: d.pop("version")),
    ("drop-td", lambda d, r: d.pop("td")),
    ("drop-platform", lambda d, r: d.pop("platform")),
    ("bad-github", lambda d, r: d.update(github=r.choice(["not a url", "github.com/a/b", "ftp://x/y"]))),
    ("version-no-instance", lambda d, r: d.update(version={"label": "one"})),
    ("version-bad-type", lambda d, r: d.update(version=[1, 0, 0])),
    ("td-not-object", lambda d, r: d.update(td="nope")),
    ("extra-stats", lambda d, r: d.update(stats={"downloads": 1})),
    ("extra-owner", lambda d, r: d.update(owner="u-2")),
    ("extra-field", lambda d, r: d.update(color="blue")),
]


def uri_policy_checker() -> jsonschema.FormatChecker:
    checker = jsonschema.FormatChecker()

    @checker.checks("uri")
    def check_uri(value: object) -> bool:
        if not isinstance(value, str):
            return True
        if any(c.isspace() for c in value):
            return False
        try:
            parsed = urlparse(value)
        except ValueError:
            return False
        return parsed.scheme in ("http", "https") and bool(parsed.netloc)

    return checker


def main() -> int:
    with open(SCHEMA_PATH, encoding="utf-8") as fh:
        schema = json.load(fh)
    evaluator = jsonschema.Draft202012Validator(schema, format_checker=uri_policy_checker())

    cases = build_cases()
    rng = random.Random(SEED)
    for i in range(70):
        cases.append(
            {"label": f"rand-valid-{i:03d}", "expectedValid": True, "submission": random_valid(rng)}
        )
    for i in range(70):
        doc = random_valid(rng)
        label, mutate = rng.choice(MUTATIONS)
        mutate(doc, rng)
        cases.append(
            {"label": f"rand-invalid-{i:03d}-{label}", "expectedValid": False, "submission": doc}
        )

    disagreements = []
    for case in cases:
        verdict = evaluator.is_valid(case["submission"])
        if verdict != case["expectedValid"]:
            disagreements.append((case["label"], case["expectedValid"], verdict))
    if disagreements:
        for label, expected, got in disagreements:
            print(f"DISAGREE {label}: constructed {expected}, schema says {got}", file=sys.stderr)
        return 1

    assert len(cases) >= 200, len(cases)
    OUT_PATH.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT_PATH, "w", encoding="utf-8") as fh:
        json.dump(cases, fh, indent=1, ensure_ascii=False)
        fh.write("\n")
    valid_count = sum(1 for c in cases if c["expectedValid"])
    print(f"wrote {len(cases)} cases ({valid_count} valid, {len(cases) - valid_count} invalid) to {OUT_PATH}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
