"""Embedded document store for the registry.

Durability model: every mutation appends one JSON envelope
``{"op", "id", "doc", "ts"}`` to a newline-delimited log (``projects.log``,
``users.log``, ``ratings.log``) and fsyncs before the in-memory state
changes.  Opening a data directory replays ``*.snapshot`` files first, then
the logs.  ``compact()`` rewrites current state as fresh snapshots and
truncates the logs.

All public methods are safe to call from multiple threads; a single
re-entrant lock serializes access, and the search index is updated in the
same critical section as the record map.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import replace
from pathlib import Path
from typing import IO, Any, Optional

from .model import (
    ApiToken,
    ProjectRecord,
    Stats,
    UserAccount,
    new_project_id,
    utc_now_iso,
)
from .search import (
    DEFAULT_WEIGHTS,
    FieldWeights,
    InvertedIndex,
    SearchHit,
    SearchQuery,
)

_LOGS = ("projects", "users", "ratings")


class StoreError(Exception):
    """Underlying storage failed; the operation did not take effect."""


class NotFoundError(LookupError):
    pass


class ForbiddenError(PermissionError):
    pass


class UsernameTakenError(ValueError):
    pass


class RegistryStore:
    def __init__(
        self,
        data_dir: "str | Path",
        weights: FieldWeights = DEFAULT_WEIGHTS,
        fsync: bool = True,
        compact_every: int = 0,
    ):
        """Open (creating if needed) the data directory and replay state.

        ``compact_every`` > 0 triggers an automatic compaction once that
        many envelopes have been appended since the last one.
        """
        self._dir = Path(data_dir)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._fsync = fsync
        self._compact_every = compact_every
        self._pending = 0
        self._lock = threading.RLock()
        self._closed = False

        self._projects: dict[str, ProjectRecord] = {}
        # Ids deleted in this log generation. Replay applies each log file
        # in sequence, so a deleted id must never be reassigned: a later
        # put would otherwise pick up the old incarnation's rating entries.
        self._deleted_ids: set[str] = set()
        self._ratings: dict[str, dict[str, int]] = {}
        self._users_by_id: dict[str, UserAccount] = {}
        self._users_by_name: dict[str, UserAccount] = {}
        self._tokens: dict[str, ApiToken] = {}
        self._index = InvertedIndex(weights)
        self._handles: dict[str, IO[str]] = {}

        self._replay()
        for name in _LOGS:
            self._handles[name] = open(self._log_path(name), "a", encoding="utf-8")

    # ------------------------------------------------------------------
    # log plumbing

    def _log_path(self, name: str) -> Path:
        return self._dir / f"{name}.log"

    def _snapshot_path(self, name: str) -> Path:
        return self._dir / f"{name}.snapshot"

    def _append(self, name: str, op: str, entry_id: str, doc: Optional[dict[str, Any]]) -> None:
        envelope = {"op": op, "id": entry_id, "doc": doc, "ts": utc_now_iso()}
        line = json.dumps(envelope, separators=(",", ":"), sort_keys=True) + "\n"
        handle = self._handles[name]
        try:
            handle.write(line)
            handle.flush()
            if self._fsync:
                os.fsync(handle.fileno())
        except OSError as exc:
            raise StoreError(f"cannot append to {name}.log: {exc}") from exc
        self._pending += 1

    def _maybe_compact(self) -> None:
        # Must run only after the in-memory state reflects the appended
        # envelope: compact() snapshots memory and truncates the logs.
        if self._compact_every and self._pending >= self._compact_every:
            self.compact()

    def _read_envelopes(self, path: Path) -> list[dict[str, Any]]:
        if not path.exists():
            return []
        envelopes = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    envelopes.append(json.loads(line))
        return envelopes

    def _replay(self) -> None:
        for name in _LOGS:
            for path in (self._snapshot_path(name), self._log_path(name)):
                for envelope in self._read_envelopes(path):
                    self._apply(name, envelope)

    def _apply(self, log: str, envelope: dict[str, Any]) -> None:
        op = envelope["op"]
        entry_id = envelope["id"]
        doc = envelope.get("doc")
        if log == "projects":
            if op == "put":
                record = ProjectRecord.from_dict(doc)
                self._projects[record.id] = record
                self._ratings.setdefault(record.id, {})
                self._index.add(record)
            elif op == "delete":
                self._projects.pop(entry_id, None)
                self._deleted_ids.add(entry_id)
                self._ratings.pop(entry_id, None)
                self._index.remove(entry_id)
            elif op == "download":
                record = self._projects.get(entry_id)
                if record is not None:
                    stats = replace(record.stats, downloads=record.stats.downloads + 1)
                    self._projects[entry_id] = replace(record, stats=stats)
        elif log == "users":
            if op == "user":
                user = UserAccount(id=entry_id, username=doc["username"], password_digest=doc["passwordDigest"])
                self._users_by_id[user.id] = user
                self._users_by_name[user.username] = user
            elif op == "token":
                token = ApiToken(token=entry_id, user_id=doc["userId"], issued_at=doc["issuedAt"])
                self._tokens[token.token] = token
        elif log == "ratings":
            if op == "rate" and entry_id in self._projects:
                self._ratings.setdefault(entry_id, {})[doc["userId"]] = doc["stars"]
                self._refresh_rating_stats(entry_id)

    def _refresh_rating_stats(self, project_id: str) -> None:
        record = self._projects[project_id]
        votes = self._ratings.get(project_id, {})
        stats = replace(record.stats, rating_count=len(votes), rating_sum=sum(votes.values()))
        self._projects[project_id] = replace(record, stats=stats)

    # ------------------------------------------------------------------
    # projects

    def put_project(self, record: ProjectRecord) -> str:
        """Persist a new project and index it; returns the stored id.

        A missing or colliding id is replaced with a fresh one derived
        from the project name, so every successful put creates a distinct
        record.
        """
        with self._lock:
            project_id = record.id or new_project_id(record.name)
            while project_id in self._projects or project_id in self._deleted_ids:
                project_id = new_project_id(record.name)
            record = replace(record, id=project_id)
            self._append("projects", "put", project_id, record.to_dict())
            self._projects[project_id] = record
            self._ratings.setdefault(project_id, {})
            self._index.add(record)
            self._maybe_compact()
            return project_id

    def get_project(self, project_id: str) -> Optional[ProjectRecord]:
        with self._lock:
            return self._projects.get(project_id)

    def list_projects(self) -> list[ProjectRecord]:
        with self._lock:
            return list(self._projects.values())

    def count_projects(self) -> int:
        with self._lock:
            return len(self._projects)

    def delete_project(self, project_id: str, requester_id: str) -> None:
        with self._lock:
            record = self._projects.get(project_id)
            if record is None:
                raise NotFoundError(project_id)
            if record.owner != requester_id:
                raise ForbiddenError("only the owner may delete a project")
            self._append("projects", "delete", project_id, None)
            del self._projects[project_id]
            self._deleted_ids.add(project_id)
            self._ratings.pop(project_id, None)
            self._index.remove(project_id)
            self._maybe_compact()

    def record_download(self, project_id: str) -> int:
        """Bump the download counter; returns the new count."""
        with self._lock:
            record = self._projects.get(project_id)
            if record is None:
                raise NotFoundError(project_id)
            self._append("projects", "download", project_id, None)
            stats = replace(record.stats, downloads=record.stats.downloads + 1)
            self._projects[project_id] = replace(record, stats=stats)
            self._maybe_compact()
            return stats.downloads

    def record_rating(self, project_id: str, requester_id: str, stars: int) -> Stats:
        """Set the requester's vote (1..5); a revote replaces the old one."""
        if not isinstance(stars, int) or isinstance(stars, bool) or not 1 <= stars <= 5:
            raise ValueError("stars must be an integer in 1..5")
        with self._lock:
            if project_id not in self._projects:
                raise NotFoundError(project_id)
            self._append("ratings", "rate", project_id, {"userId": requester_id, "stars": stars})
            self._ratings.setdefault(project_id, {})[requester_id] = stars
            self._refresh_rating_stats(project_id)
            self._maybe_compact()
            return self._projects[project_id].stats

    # ------------------------------------------------------------------
    # users and tokens

    def put_user(self, user: UserAccount) -> UserAccount:
        with self._lock:
            if user.username in self._users_by_name:
                raise UsernameTakenError(user.username)
            self._append(
                "users",
                "user",
                user.id,
                {"username": user.username, "passwordDigest": user.password_digest},
            )
            self._users_by_id[user.id] = user
            self._users_by_name[user.username] = user
            self._maybe_compact()
            return user

    def get_user(self, user_id: str) -> Optional[UserAccount]:
        with self._lock:
            return self._users_by_id.get(user_id)

    def get_user_by_name(self, username: str) -> Optional[UserAccount]:
        with self._lock:
            return self._users_by_name.get(username)

    def put_token(self, token: ApiToken) -> ApiToken:
        with self._lock:
            self._append("users", "token", token.token, {"userId": token.user_id, "issuedAt": token.issued_at})
            self._tokens[token.token] = token
            self._maybe_compact()
            return token

    def resolve_token(self, value: str) -> Optional[ApiToken]:
        with self._lock:
            return self._tokens.get(value)

    # ------------------------------------------------------------------
    # search

    def search(self, query: SearchQuery) -> tuple[list[SearchHit], int]:
        """Ranked hits plus the total match count before pagination.

        Ordering: score desc, downloads desc, name asc, id asc.  With no
        terms every project matching the filters is returned at score 0;
        with terms, zero-scoring projects are excluded.
        """
        with self._lock:
            if query.terms:
                scores = self._index.score(query.terms)
                candidates = [(self._projects[pid], score) for pid, score in scores.items() if score > 0]
            else:
                candidates = [(record, 0.0) for record in self._projects.values()]

            matches = [
                (record, score)
                for record, score in candidates
                if (query.platform is None or record.platform == query.platform)
                and (query.topic is None or query.topic in record.topic)
                and (query.implementation_type is None or record.implementation_type == query.implementation_type)
                and (query.complexity is None or record.complexity == query.complexity)
            ]
            matches.sort(key=lambda pair: (-pair[1], -pair[0].stats.downloads, pair[0].name, pair[0].id))
            page = matches[query.offset : query.offset + query.limit]
            hits = [
                SearchHit(
                    project_id=record.id,
                    name=record.name,
                    short_description=record.short_description,
                    implementation_type=record.implementation_type,
                    platform=record.platform,
                    score=float(score),
                    downloads=record.stats.downloads,
                    average_rating=record.stats.average_rating,
                )
                for record, score in page
            ]
            return hits, len(matches)

    # ------------------------------------------------------------------
    # maintenance

    def compact(self) -> None:
        """Rewrite *.snapshot from current state and truncate the logs."""
        with self._lock:
            now = utc_now_iso()
            snapshots: dict[str, list[dict[str, Any]]] = {name: [] for name in _LOGS}
            for record in self._projects.values():
                snapshots["projects"].append({"op": "put", "id": record.id, "doc": record.to_dict(), "ts": now})
            for user in self._users_by_id.values():
                snapshots["users"].append(
                    {
                        "op": "user",
                        "id": user.id,
                        "doc": {"username": user.username, "passwordDigest": user.password_digest},
                        "ts": now,
                    }
                )
            for token in self._tokens.values():
                snapshots["users"].append(
                    {
                        "op": "token",
                        "id": token.token,
                        "doc": {"userId": token.user_id, "issuedAt": token.issued_at},
                        "ts": now,
                    }
                )
            for project_id, votes in self._ratings.items():
                for user_id, stars in votes.items():
                    snapshots["ratings"].append(
                        {"op": "rate", "id": project_id, "doc": {"userId": user_id, "stars": stars}, "ts": now}
                    )

            try:
                for name in _LOGS:
                    tmp = self._snapshot_path(name).with_suffix(".snapshot.tmp")
                    with open(tmp, "w", encoding="utf-8") as fh:
                        for envelope in snapshots[name]:
                            fh.write(json.dumps(envelope, separators=(",", ":"), sort_keys=True) + "\n")
                        fh.flush()
                        os.fsync(fh.fileno())
                    os.replace(tmp, self._snapshot_path(name))
                    handle = self._handles.get(name)
                    if handle is not None:
                        handle.close()
                    self._handles[name] = open(self._log_path(name), "w", encoding="utf-8")
            except OSError as exc:
                raise StoreError(f"compaction failed: {exc}") from exc
            self._pending = 0
            self._deleted_ids.clear()

    def close(self) -> None:
        with self._lock:
            if self._closed:
                return
            self._closed = True
            for handle in self._handles.values():
                handle.close()
            self._handles.clear()

    def __enter__(self) -> "RegistryStore":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()
