"""Submission and Thing Description validation, and TD template mechanics.

Two validators live here, both pure and total over parsed JSON:

* :func:`validate_project_submission` checks a client submission against the
  project schema (the same contract shipped as
  ``schema/wotify-project.schema.json``); every violation is reported as an
  issue with a JSON-pointer path, never raised.
* :func:`validate_td_structure` checks the structural TD subset: an object
  with a non-empty string ``title``, interaction maps whose members are
  objects, ``forms`` entries carrying a string ``href``, and no unresolved
  ``{{NAME}}`` placeholders (unless tolerated).

Issue codes: ``type``, ``required``, ``minLength``, ``maxLength``, ``enum``,
``minItems``, ``uniqueItems``, ``format``, ``unexpectedField``,
``placeholder``, ``malformedPlaceholder``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Optional, Union
from urllib.parse import urlparse

from .model import COMPLEXITIES, IMPLEMENTATION_TYPES, PLATFORMS, TOPICS

NAME_MIN = 5
SHORT_DESCRIPTION_MIN = 5
SHORT_DESCRIPTION_MAX = 180
LONG_DESCRIPTION_MIN = 5
LONG_DESCRIPTION_MAX = 500

#: Members a client may submit; everything else is rejected so that
#: server-managed fields (id, stats, owner, timestamps) stay server-managed.
SUBMISSION_FIELDS = (
    "name",
    "shortDescription",
    "longDescription",
    "github",
    "readme",
    "implementationType",
    "topic",
    "platform",
    "tags",
    "complexity",
    "version",
    "td",
)

#: Required in every submission.  ``github`` is additionally required when
#: implementationType is "code"; ``readme`` is always optional.
REQUIRED_FIELDS = (
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
)

PLACEHOLDER_RE = re.compile(r"\{\{([A-Z0-9_]+)\}\}")

_INTERACTION_KINDS = ("properties", "actions", "events")


@dataclass(frozen=True)
class Issue:
    """One constraint violation, addressed by a JSON-pointer path."""

    path: str
    code: str
    message: str

    def to_dict(self) -> dict[str, str]:
        return {"path": self.path, "code": self.code, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.issues

    def to_dict(self) -> dict[str, Any]:
        return {"valid": self.valid, "issues": [i.to_dict() for i in self.issues]}


@dataclass(frozen=True)
class TdTemplate:
    """A TD document, possibly holding ``{{NAME}}`` placeholders."""

    document: dict[str, Any]

    @property
    def placeholders(self) -> frozenset[str]:
        return frozenset(extract_placeholders(self))


class MalformedPlaceholderError(ValueError):
    """A string value contains braces that do not form a valid token."""

    def __init__(self, path: str, text: str):
        super().__init__(f"malformed placeholder at {path or '/'}: {text!r}")
        self.path = path
        self.text = text


class MissingBindingError(ValueError):
    """Instantiation was asked to proceed without bindings for some names."""

    def __init__(self, names: set[str]):
        ordered = sorted(names)
        super().__init__("missing binding: " + ", ".join(ordered))
        self.names = ordered


class TdStructureError(ValueError):
    """An instantiated template failed TD structure validation."""

    def __init__(self, report: ValidationReport):
        super().__init__(
            "instantiated document fails TD structure validation: "
            + "; ".join(f"{i.path} {i.code}" for i in report.issues)
        )
        self.report = report


def pointer(*tokens: Union[str, int]) -> str:
    """RFC 6901 JSON pointer from path tokens."""
    out = []
    for tok in tokens:
        tok = str(tok).replace("~", "~0").replace("/", "~1")
        out.append("/" + tok)
    return "".join(out)


def is_http_uri(value: str) -> bool:
    """Absolute http(s) URI: scheme + non-empty host, no whitespace."""
    if any(c.isspace() for c in value):
        return False
    try:
        parsed = urlparse(value)
    except ValueError:
        return False
    return parsed.scheme in ("http", "https") and bool(parsed.netloc)


def validate_project_submission(doc: Any) -> ValidationReport:
    """Check a parsed submission against every project-schema constraint.

    Violations are data: the report lists each one with its path and the
    result is never an exception.
    """
    if not isinstance(doc, dict):
        return ValidationReport((Issue("", "type", "submission must be a JSON object"),))

    issues: list[Issue] = []

    for key in doc:
        if key not in SUBMISSION_FIELDS:
            issues.append(
                Issue(pointer(key), "unexpectedField", f"unexpected field {key!r}")
            )

    required = list(REQUIRED_FIELDS)
    if doc.get("implementationType") == "code":
        required.insert(4, "github")
    for key in required:
        if key not in doc:
            issues.append(Issue(pointer(key), "required", f"missing required field {key!r}"))

    issues.extend(_check_string(doc, "name", NAME_MIN, None))
    issues.extend(
        _check_string(doc, "shortDescription", SHORT_DESCRIPTION_MIN, SHORT_DESCRIPTION_MAX)
    )
    issues.extend(
        _check_string(doc, "longDescription", LONG_DESCRIPTION_MIN, LONG_DESCRIPTION_MAX)
    )
    issues.extend(_check_uri(doc, "github"))
    issues.extend(_check_uri(doc, "readme"))
    issues.extend(_check_enum(doc, "implementationType", IMPLEMENTATION_TYPES))
    issues.extend(_check_array(doc, "topic", item_enum=TOPICS))
    issues.extend(_check_enum(doc, "platform", PLATFORMS))
    issues.extend(_check_array(doc, "tags", item_min_length=1))
    issues.extend(_check_enum(doc, "complexity", COMPLEXITIES))

    if "version" in doc:
        version = doc["version"]
        if not isinstance(version, dict):
            issues.append(Issue(pointer("version"), "type", "version must be an object"))
        elif "instance" not in version:
            issues.append(
                Issue(pointer("version", "instance"), "required", "missing required field 'instance'")
            )
        elif not isinstance(version["instance"], str):
            issues.append(
                Issue(pointer("version", "instance"), "type", "version.instance must be a string")
            )

    if "td" in doc and not isinstance(doc["td"], dict):
        issues.append(Issue(pointer("td"), "type", "td must be a JSON object"))

    return ValidationReport(tuple(issues))


def _check_string(
    doc: dict, key: str, min_len: Optional[int], max_len: Optional[int]
) -> Iterator[Issue]:
    if key not in doc:
        return
    value = doc[key]
    path = pointer(key)
    if not isinstance(value, str):
        yield Issue(path, "type", f"{key} must be a string")
        return
    # Bounds count Unicode scalar values, not bytes.
    if min_len is not None and len(value) < min_len:
        yield Issue(path, "minLength", f"{key} must be at least {min_len} characters")
    if max_len is not None and len(value) > max_len:
        yield Issue(path, "maxLength", f"{key} must be at most {max_len} characters")


def _check_uri(doc: dict, key: str) -> Iterator[Issue]:
    if key not in doc:
        return
    value = doc[key]
    path = pointer(key)
    if not isinstance(value, str):
        yield Issue(path, "type", f"{key} must be a string")
    elif not is_http_uri(value):
        yield Issue(path, "format", f"{key} must be an absolute http(s) URI")


def _check_enum(doc: dict, key: str, allowed: tuple[str, ...]) -> Iterator[Issue]:
    if key not in doc:
        return
    if doc[key] not in allowed:
        yield Issue(
            pointer(key), "enum", f"{key} must be one of: " + ", ".join(allowed)
        )


def _check_array(
    doc: dict,
    key: str,
    item_enum: Optional[tuple[str, ...]] = None,
    item_min_length: Optional[int] = None,
) -> Iterator[Issue]:
    if key not in doc:
        return
    value = doc[key]
    path = pointer(key)
    if not isinstance(value, list):
        yield Issue(path, "type", f"{key} must be an array")
        return
    if len(value) < 1:
        yield Issue(path, "minItems", f"{key} must contain at least 1 item")
    seen: list[Any] = []
    duplicated = False
    for item in value:
        if item in seen:
            duplicated = True
        seen.append(item)
    if duplicated:
        yield Issue(path, "uniqueItems", f"{key} items must be unique")
    for i, item in enumerate(value):
        item_path = pointer(key, i)
        if item_enum is not None and item not in item_enum:
            yield Issue(
                item_path, "enum", f"{key} items must be one of: " + ", ".join(item_enum)
            )
        if item_min_length is not None:
            if not isinstance(item, str):
                yield Issue(item_path, "type", f"{key} items must be strings")
            elif len(item) < item_min_length:
                yield Issue(item_path, "minLength", f"{key} items must be non-empty")


def _scan_strings(node: Any, path: str = "") -> Iterator[tuple[str, str]]:
    """Yield (json-pointer, value) for every string value; keys are not scanned."""
    if isinstance(node, str):
        yield path, node
    elif isinstance(node, dict):
        for key, value in node.items():
            yield from _scan_strings(value, path + pointer(key))
    elif isinstance(node, list):
        for i, value in enumerate(node):
            yield from _scan_strings(value, path + pointer(i))


def _placeholder_names(text: str) -> tuple[list[str], bool]:
    """Valid token names in ``text`` plus a flag for leftover broken braces."""
    names = PLACEHOLDER_RE.findall(text)
    remainder = PLACEHOLDER_RE.sub("", text)
    malformed = "{{" in remainder or "}}" in remainder
    return names, malformed


def extract_placeholders(template: Union[TdTemplate, dict[str, Any]]) -> set[str]:
    """Distinct ``{{NAME}}`` tokens across all string values of the document.

    Raises :class:`MalformedPlaceholderError` on unbalanced braces or illegal
    characters inside a ``{{...}}`` token.
    """
    document = template.document if isinstance(template, TdTemplate) else template
    found: set[str] = set()
    for path, text in _scan_strings(document):
        names, malformed = _placeholder_names(text)
        if malformed:
            raise MalformedPlaceholderError(path, text)
        found.update(names)
    return found


def instantiate_template(
    template: Union[TdTemplate, dict[str, Any]], bindings: Mapping[str, str]
) -> dict[str, Any]:
    """Replace every placeholder with its binding and return the concrete TD.

    The input document is never mutated.  Raises
    :class:`MissingBindingError` if any placeholder lacks a binding (extra
    bindings are tolerated) and :class:`TdStructureError` if the result does
    not pass :func:`validate_td_structure`.
    """
    document = template.document if isinstance(template, TdTemplate) else template
    needed = extract_placeholders(document)
    missing = needed - set(bindings)
    if missing:
        raise MissingBindingError(missing)

    def substitute(node: Any) -> Any:
        if isinstance(node, str):
            return PLACEHOLDER_RE.sub(lambda m: bindings[m.group(1)], node)
        if isinstance(node, dict):
            return {key: substitute(value) for key, value in node.items()}
        if isinstance(node, list):
            return [substitute(value) for value in node]
        return node

    result = substitute(document)
    report = validate_td_structure(result)
    if not report.valid:
        raise TdStructureError(report)
    return result


def validate_td_structure(doc: Any, allow_placeholders: bool = False) -> ValidationReport:
    """Check the structural TD subset; the input is never mutated.

    With ``allow_placeholders`` set, unresolved ``{{NAME}}`` tokens are
    tolerated (templates awaiting instantiation); malformed brace syntax is
    always reported.
    """
    if not isinstance(doc, dict):
        return ValidationReport((Issue("", "type", "TD must be a JSON object"),))

    issues: list[Issue] = []

    title = doc.get("title")
    if "title" not in doc:
        issues.append(Issue(pointer("title"), "required", "TD must have a title"))
    elif not isinstance(title, str):
        issues.append(Issue(pointer("title"), "type", "title must be a string"))
    elif not title:
        issues.append(Issue(pointer("title"), "minLength", "title must be non-empty"))

    for kind in _INTERACTION_KINDS:
        if kind not in doc:
            continue
        interactions = doc[kind]
        kind_path = pointer(kind)
        if not isinstance(interactions, dict):
            issues.append(Issue(kind_path, "type", f"{kind} must be an object"))
            continue
        for name, interaction in interactions.items():
            member_path = kind_path + pointer(name)
            if not isinstance(interaction, dict):
                issues.append(
                    Issue(member_path, "type", f"{kind} members must be objects")
                )
                continue
            issues.extend(_check_forms(interaction, member_path))

    for path, text in _scan_strings(doc):
        names, malformed = _placeholder_names(text)
        if malformed:
            issues.append(
                Issue(path, "malformedPlaceholder", f"malformed placeholder in {text!r}")
            )
        if names and not allow_placeholders:
            issues.append(
                Issue(
                    path,
                    "placeholder",
                    "unresolved placeholder(s): " + ", ".join(sorted(set(names))),
                )
            )

    return ValidationReport(tuple(issues))


def _check_forms(node: Any, path: str) -> Iterator[Issue]:
    """Every member of a ``forms`` array, at any depth, needs a string href."""
    if isinstance(node, dict):
        for key, value in node.items():
            child_path = path + pointer(key)
            if key == "forms" and isinstance(value, list):
                for i, form in enumerate(value):
                    form_path = child_path + pointer(i)
                    if not isinstance(form, dict):
                        yield Issue(form_path, "type", "forms entries must be objects")
                    elif not isinstance(form.get("href"), str):
                        yield Issue(
                            form_path + pointer("href"),
                            "required" if "href" not in form else "type",
                            "forms entries must have a string href",
                        )
            yield from _check_forms(value, child_path)
    elif isinstance(node, list):
        for i, value in enumerate(node):
            yield from _check_forms(value, path + pointer(i))
