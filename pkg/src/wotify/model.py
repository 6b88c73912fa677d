"""Core data model: project records, stats, accounts and tokens.

A project travels through the system as a JSON document whose member names
are fixed by the canonical interchange format (camelCase, see
``docs/api.md``).  :class:`ProjectRecord` is the typed in-process view of
that document; ``to_dict``/``from_dict`` convert between the two without
loss, so ``from_dict(to_dict(r)) == r`` holds field for field.
"""

from __future__ import annotations

import re
import secrets
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Any, Optional

IMPLEMENTATION_TYPES = ("template", "code")
TOPICS = ("sensor", "actuator", "robotics", "lighting", "other")
PLATFORMS = ("raspberry", "arduino", "ESP", "other")
COMPLEXITIES = ("simple", "medium", "expert")

_ID_SUFFIX_ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789"
_ID_SUFFIX_LENGTH = 6


def utc_now_iso() -> str:
    """Current UTC time as an ISO-8601 string with millisecond precision."""
    now = datetime.now(timezone.utc)
    return now.strftime("%Y-%m-%dT%H:%M:%S.") + f"{now.microsecond // 1000:03d}Z"


def slugify(name: str) -> str:
    """Lowercase ``name`` and squeeze every non-alphanumeric run into one dash."""
    slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    return slug or "project"


def new_project_id(name: str) -> str:
    """Server-assigned, URL-safe project id: ``<slug(name)>-<6 random chars>``."""
    suffix = "".join(secrets.choice(_ID_SUFFIX_ALPHABET) for _ in range(_ID_SUFFIX_LENGTH))
    return f"{slugify(name)}-{suffix}"


def new_token_value() -> str:
    """256-bit random token, URL-safe encoded."""
    return secrets.token_urlsafe(32)


@dataclass(frozen=True)
class Stats:
    """Server-managed usage counters.

    ``rating_sum`` accumulates stars (1-5 each), so
    ``rating_sum <= 5 * rating_count`` always holds; ``downloads`` and
    ``rating_count`` never decrease.
    """

    downloads: int = 0
    rating_count: int = 0
    rating_sum: int = 0

    @property
    def average_rating(self) -> Optional[float]:
        """Mean stars in [0, 5], or None while the project is unrated."""
        if self.rating_count == 0:
            return None
        return self.rating_sum / self.rating_count

    def to_dict(self) -> dict[str, int]:
        return {
            "downloads": self.downloads,
            "ratingCount": self.rating_count,
            "ratingSum": self.rating_sum,
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "Stats":
        return cls(
            downloads=doc.get("downloads", 0),
            rating_count=doc.get("ratingCount", 0),
            rating_sum=doc.get("ratingSum", 0),
        )


@dataclass(frozen=True)
class UserAccount:
    id: str
    username: str
    password_digest: str


@dataclass(frozen=True)
class ApiToken:
    token: str
    user_id: str
    issued_at: str


@dataclass(frozen=True)
class ProjectRecord:
    """One published WoT project.

    The client supplies everything except ``id``, ``stats``, ``created_at``,
    ``updated_at`` and ``owner``, which are server-managed; submissions
    containing them are rejected during validation.
    """

    id: str
    name: str
    short_description: str
    long_description: str
    implementation_type: str
    topic: tuple[str, ...]
    platform: str
    tags: tuple[str, ...]
    complexity: str
    version_instance: str
    td: dict[str, Any]
    owner: str
    created_at: str
    updated_at: str
    github: Optional[str] = None
    readme: Optional[str] = None
    stats: Stats = field(default_factory=Stats)

    def to_dict(self) -> dict[str, Any]:
        """Serialize to the canonical interchange document."""
        doc: dict[str, Any] = {
            "id": self.id,
            "name": self.name,
            "shortDescription": self.short_description,
            "longDescription": self.long_description,
            "implementationType": self.implementation_type,
            "topic": list(self.topic),
            "platform": self.platform,
            "tags": list(self.tags),
            "complexity": self.complexity,
            "version": {"instance": self.version_instance},
            "td": self.td,
            "stats": self.stats.to_dict(),
            "createdAt": self.created_at,
            "updatedAt": self.updated_at,
            "owner": self.owner,
        }
        if self.github is not None:
            doc["github"] = self.github
        if self.readme is not None:
            doc["readme"] = self.readme
        return doc

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "ProjectRecord":
        """Inverse of :meth:`to_dict`."""
        return cls(
            id=doc["id"],
            name=doc["name"],
            short_description=doc["shortDescription"],
            long_description=doc["longDescription"],
            implementation_type=doc["implementationType"],
            topic=tuple(doc["topic"]),
            platform=doc["platform"],
            tags=tuple(doc["tags"]),
            complexity=doc["complexity"],
            version_instance=doc["version"]["instance"],
            td=doc["td"],
            owner=doc["owner"],
            created_at=doc["createdAt"],
            updated_at=doc["updatedAt"],
            github=doc.get("github"),
            readme=doc.get("readme"),
            stats=Stats.from_dict(doc.get("stats", {})),
        )

    @classmethod
    def from_submission(
        cls, doc: dict[str, Any], project_id: str, owner: str, now: Optional[str] = None
    ) -> "ProjectRecord":
        """Build a record from a validated client submission plus the
        server-managed fields."""
        now = now or utc_now_iso()
        return cls(
            id=project_id,
            name=doc["name"],
            short_description=doc["shortDescription"],
            long_description=doc["longDescription"],
            implementation_type=doc["implementationType"],
            topic=tuple(doc["topic"]),
            platform=doc["platform"],
            tags=tuple(doc["tags"]),
            complexity=doc["complexity"],
            version_instance=doc["version"]["instance"],
            td=doc["td"],
            owner=owner,
            created_at=now,
            updated_at=now,
            github=doc.get("github"),
            readme=doc.get("readme"),
        )


def canonicalize_fields(doc: dict[str, Any]) -> dict[str, Any]:
    """Canonicalize the client-supplied fields of a validated submission.

    Trims surrounding whitespace from the name and every tag, drops tags
    that are empty after trimming, and sorts + deduplicates ``tags`` and
    ``topic``, so that semantically equal submissions produce identical
    documents.  Idempotent.
    """
    out = dict(doc)
    if "name" in out and isinstance(out["name"], str):
        out["name"] = out["name"].strip()
    if "tags" in out and isinstance(out["tags"], list):
        trimmed = [t.strip() for t in out["tags"] if isinstance(t, str)]
        out["tags"] = sorted(set(t for t in trimmed if t))
    if "topic" in out and isinstance(out["topic"], list):
        out["topic"] = sorted(set(out["topic"]))
    return out


def canonicalize(record: ProjectRecord) -> ProjectRecord:
    """Canonical form of a record; see :func:`canonicalize_fields`."""
    fields = canonicalize_fields(
        {"name": record.name, "tags": list(record.tags), "topic": list(record.topic)}
    )
    return replace(
        record,
        name=fields["name"],
        tags=tuple(fields["tags"]),
        topic=tuple(fields["topic"]),
    )
