"""Term-scored retrieval over the project corpus.

Scoring is a weighted sum over query terms: a term hit in the name tokens
counts ``name`` points, an exact (lowercased) tag match counts ``tags``
points, and a hit in the short/long description tokens counts one point
each by default.  The weights are configuration so the index and any
reference scorer can share them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from .model import ProjectRecord

_TOKEN_SPLIT = re.compile(r"[\W_]+", re.UNICODE)

MAX_LIMIT = 100
DEFAULT_LIMIT = 20


def tokenize(text: str) -> list[str]:
    """Lowercase, split on any non-alphanumeric run, drop empty tokens."""
    return [tok for tok in _TOKEN_SPLIT.split(text.lower()) if tok]


@dataclass(frozen=True)
class FieldWeights:
    name: int = 3
    tags: int = 2
    short_description: int = 1
    long_description: int = 1


DEFAULT_WEIGHTS = FieldWeights()


@dataclass(frozen=True)
class SearchQuery:
    terms: tuple[str, ...] = ()
    platform: Optional[str] = None
    topic: Optional[str] = None
    implementation_type: Optional[str] = None
    complexity: Optional[str] = None
    limit: int = DEFAULT_LIMIT
    offset: int = 0

    def __post_init__(self) -> None:
        if not (0 < self.limit <= MAX_LIMIT):
            raise ValueError(f"limit must be in 1..{MAX_LIMIT}")
        if self.offset < 0:
            raise ValueError("offset must be non-negative")


@dataclass(frozen=True)
class SearchHit:
    project_id: str
    name: str
    short_description: str
    implementation_type: str
    platform: str
    score: float
    downloads: int
    average_rating: Optional[float]

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "projectId": self.project_id,
            "name": self.name,
            "shortDescription": self.short_description,
            "implementationType": self.implementation_type,
            "platform": self.platform,
            "score": self.score,
            "downloads": self.downloads,
        }
        if self.average_rating is not None:
            doc["averageRating"] = self.average_rating
        return doc


def field_terms(record: ProjectRecord) -> dict[str, set[str]]:
    """Per-field term sets a record is retrievable by.

    Name and descriptions contribute their tokens; tags contribute the
    exact tag strings, lowercased.
    """
    return {
        "name": set(tokenize(record.name)),
        "tags": {t.lower() for t in record.tags},
        "short_description": set(tokenize(record.short_description)),
        "long_description": set(tokenize(record.long_description)),
    }


class InvertedIndex:
    """term -> field -> project ids, kept in step with the document store.

    Not internally synchronized; the owning store serializes mutation and
    snapshots reads.
    """

    def __init__(self, weights: FieldWeights = DEFAULT_WEIGHTS):
        self.weights = weights
        self._postings: dict[str, dict[str, set[str]]] = {}
        self._doc_terms: dict[str, dict[str, set[str]]] = {}

    def add(self, record: ProjectRecord) -> None:
        if record.id in self._doc_terms:
            self.remove(record.id)
        terms = field_terms(record)
        self._doc_terms[record.id] = terms
        for fname, tokens in terms.items():
            for token in tokens:
                self._postings.setdefault(token, {}).setdefault(fname, set()).add(record.id)

    def remove(self, project_id: str) -> None:
        terms = self._doc_terms.pop(project_id, None)
        if terms is None:
            return
        for fname, tokens in terms.items():
            for token in tokens:
                fields = self._postings.get(token)
                if not fields:
                    continue
                ids = fields.get(fname)
                if ids:
                    ids.discard(project_id)
                    if not ids:
                        del fields[fname]
                if not fields:
                    del self._postings[token]

    def score(self, terms: Iterable[str]) -> dict[str, float]:
        """Accumulated weight per project over the query terms.

        Each term contributes its field weight once per field it appears
        in (presence, not frequency); projects absent from the result
        scored zero.
        """
        weight_of = {
            "name": self.weights.name,
            "tags": self.weights.tags,
            "short_description": self.weights.short_description,
            "long_description": self.weights.long_description,
        }
        scores: dict[str, float] = {}
        for term in terms:
            for fname, ids in self._postings.get(term, {}).items():
                w = weight_of[fname]
                for project_id in ids:
                    scores[project_id] = scores.get(project_id, 0) + w
        return scores
