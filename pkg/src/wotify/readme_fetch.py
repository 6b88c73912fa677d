"""Resolves a project's readme to markdown text, with caching.

Resolution order: the record's explicit readme link, then raw-file
guesses derived from the repository link, then the stored long
description.  Network trouble at any step is absorbed into the next one,
so resolution always yields a body.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional
from urllib.parse import urlparse

import httpx

from . import __version__
from .model import ProjectRecord

DEFAULT_TTL_SECONDS = 300.0
DEFAULT_TIMEOUT_MS = 5000
MAX_BODY_BYTES = 512 * 1024
TRUNCATION_MARKER = "\n\n[content truncated at 512 KiB]"
MAX_REDIRECTS = 3
USER_AGENT = f"wotforge-registry/{__version__}"

README_FILENAMES = ("README.md", "readme.md")
DEFAULT_BRANCHES = ("main", "master")

# Forge host -> raw-content URL template; extending this table is the only
# change needed to support another forge.
RAW_URL_TEMPLATES: dict[str, str] = {
    "github.com": "https://raw.githubusercontent.com/{owner}/{repo}/{branch}/{filename}",
    "gitlab.com": "https://gitlab.com/{owner}/{repo}/-/raw/{branch}/{filename}",
    "bitbucket.org": "https://bitbucket.org/{owner}/{repo}/raw/{branch}/{filename}",
    "codeberg.org": "https://codeberg.org/{owner}/{repo}/raw/branch/{branch}/{filename}",
}


def raw_readme_candidates(repo_url: str) -> list[str]:
    """Raw-readme URLs to try for a repository link, best guess first.

    Branches are tried main before master, and on each branch README.md
    before readme.md.  Unknown forges produce no candidates.
    """
    parsed = urlparse(repo_url)
    template = RAW_URL_TEMPLATES.get((parsed.hostname or "").lower())
    if template is None:
        return []
    segments = [seg for seg in parsed.path.split("/") if seg]
    if len(segments) < 2:
        return []
    owner, repo = segments[0], segments[1]
    if repo.endswith(".git"):
        repo = repo[: -len(".git")]
    return [
        template.format(owner=owner, repo=repo, branch=branch, filename=filename)
        for branch in DEFAULT_BRANCHES
        for filename in README_FILENAMES
    ]


@dataclass(frozen=True)
class FetchCacheEntry:
    uri: str
    body: bytes
    fetched_at: float
    etag: Optional[str]


@dataclass(frozen=True)
class FetchResult:
    source: str  # readmeUri | repoGuess | fallbackDescription
    body: str


class _Flight:
    """In-flight fetch shared by concurrent callers of the same URI."""

    def __init__(self) -> None:
        self.event = threading.Event()
        self.body: Optional[bytes] = None


class ReadmeFetcher:
    """Caching HTTP client for readme resolution.

    Fresh cache entries (within the TTL) are served without any upstream
    request; stale entries revalidate with If-None-Match when an ETag was
    recorded.  Concurrent fetches of one URI share a single upstream
    request, successful or not.
    """

    def __init__(
        self,
        transport: Optional[httpx.BaseTransport] = None,
        ttl_seconds: float = DEFAULT_TTL_SECONDS,
        timeout_ms: int = DEFAULT_TIMEOUT_MS,
        time_func: Callable[[], float] = time.time,
    ):
        self._client = httpx.Client(
            transport=transport,
            follow_redirects=True,
            max_redirects=MAX_REDIRECTS,
            timeout=timeout_ms / 1000.0,
            headers={"User-Agent": USER_AGENT},
        )
        self._ttl = ttl_seconds
        self._time = time_func
        self._lock = threading.Lock()
        self._cache: dict[str, FetchCacheEntry] = {}
        self._inflight: dict[str, _Flight] = {}

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ReadmeFetcher":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    def fetch_readme(self, record: ProjectRecord) -> FetchResult:
        if record.readme:
            body = self._get_text(record.readme)
            if body is not None:
                return FetchResult("readmeUri", body)
        if record.github:
            for uri in raw_readme_candidates(record.github):
                body = self._get_text(uri)
                if body is not None:
                    return FetchResult("repoGuess", body)
        return FetchResult("fallbackDescription", record.long_description)

    # ------------------------------------------------------------------

    def _get_text(self, uri: str) -> Optional[str]:
        data = self._get_bytes(uri)
        if data is None:
            return None
        return data.decode("utf-8", errors="replace")

    def _get_bytes(self, uri: str) -> Optional[bytes]:
        parsed = urlparse(uri)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            return None
        with self._lock:
            entry = self._cache.get(uri)
            if entry is not None and self._time() - entry.fetched_at < self._ttl:
                return entry.body
            flight = self._inflight.get(uri)
            leader = flight is None
            if leader:
                flight = _Flight()
                self._inflight[uri] = flight
        if not leader:
            flight.event.wait()
            return flight.body
        body: Optional[bytes] = None
        try:
            body = self._fetch_upstream(uri, entry)
        finally:
            # Publish even on unexpected errors so followers never hang.
            with self._lock:
                self._inflight.pop(uri, None)
            flight.body = body
            flight.event.set()
        return body

    def _fetch_upstream(self, uri: str, stale: Optional[FetchCacheEntry]) -> Optional[bytes]:
        headers = {}
        if stale is not None and stale.etag:
            headers["If-None-Match"] = stale.etag
        try:
            response = self._client.get(uri, headers=headers)
        except httpx.HTTPError:
            return None
        if response.status_code == 304 and stale is not None:
            with self._lock:
                self._cache[uri] = FetchCacheEntry(uri, stale.body, self._time(), stale.etag)
            return stale.body
        if not response.is_success:
            return None
        content = response.content
        if len(content) > MAX_BODY_BYTES:
            content = content[:MAX_BODY_BYTES] + TRUNCATION_MARKER.encode("utf-8")
        with self._lock:
            self._cache[uri] = FetchCacheEntry(uri, content, self._time(), response.headers.get("ETag"))
        return content
