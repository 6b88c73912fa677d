"""Package-manager-style command line for the registry.

Commands: search, show, td, install, publish.  Exit codes beyond the
usual 0/1: 2 registry unreachable, 3 unbound placeholders in `td`,
4 failed prerequisite probe, 5 missing or unusable install manifest,
6 install attempted on a TD template, 7 ambiguous project name.
"""

from __future__ import annotations

import functools
import io
import json
import os
import shutil
import subprocess
import sys
import tarfile
import tempfile
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional
from urllib.parse import urlparse

import click
import httpx

from .manifest import MANIFEST_FILENAME, InstallManifest, parse_manifest
from .model import COMPLEXITIES, IMPLEMENTATION_TYPES, PLATFORMS, TOPICS
from .validation import (
    Issue,
    MalformedPlaceholderError,
    MissingBindingError,
    TdStructureError,
    extract_placeholders,
    instantiate_template,
    validate_project_submission,
    validate_td_structure,
)

DEFAULT_REGISTRY = "http://127.0.0.1:8337"

EXIT_SERVER_DOWN = 2
EXIT_UNBOUND_PLACEHOLDERS = 3
EXIT_PROBE_FAILED = 4
EXIT_NO_MANIFEST = 5
EXIT_IS_TEMPLATE = 6
EXIT_AMBIGUOUS = 7

# Forge host -> source archive URL candidates, best guess first.
ARCHIVE_URL_TEMPLATES: dict[str, tuple[str, ...]] = {
    "github.com": (
        "https://codeload.github.com/{owner}/{repo}/tar.gz/refs/heads/main",
        "https://codeload.github.com/{owner}/{repo}/tar.gz/refs/heads/master",
    ),
    "gitlab.com": (
        "https://gitlab.com/{owner}/{repo}/-/archive/main/{repo}-main.tar.gz",
        "https://gitlab.com/{owner}/{repo}/-/archive/master/{repo}-master.tar.gz",
    ),
    "codeberg.org": (
        "https://codeberg.org/{owner}/{repo}/archive/main.tar.gz",
        "https://codeberg.org/{owner}/{repo}/archive/master.tar.gz",
    ),
    "bitbucket.org": (
        "https://bitbucket.org/{owner}/{repo}/get/main.tar.gz",
        "https://bitbucket.org/{owner}/{repo}/get/master.tar.gz",
    ),
}

_ARCHIVE_SUFFIXES = (".tar.gz", ".tgz", ".tar", ".zip")


# ----------------------------------------------------------------------
# plumbing

class RegistryApiError(Exception):
    """Non-2xx response from the registry, carrying the ApiError body."""

    def __init__(self, status: int, code: str, message: str, issues: Optional[list[dict]] = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.issues = issues or []


class RegistryClient:
    def __init__(self, base_url: str, transport: Optional[httpx.BaseTransport] = None):
        self.base_url = base_url.rstrip("/")
        self._http = httpx.Client(base_url=self.base_url, transport=transport, timeout=10.0)

    def close(self) -> None:
        self._http.close()

    @staticmethod
    def _check(response: httpx.Response) -> httpx.Response:
        if response.status_code < 400:
            return response
        try:
            body = response.json()
        except ValueError:
            body = {}
        raise RegistryApiError(
            response.status_code,
            body.get("code", "error"),
            body.get("message", f"HTTP {response.status_code}"),
            body.get("issues"),
        )

    def search(
        self,
        q: str = "",
        platform: Optional[str] = None,
        topic: Optional[str] = None,
        implementation_type: Optional[str] = None,
        complexity: Optional[str] = None,
        limit: int = 20,
        offset: int = 0,
    ) -> dict[str, Any]:
        params: dict[str, Any] = {"q": q, "limit": limit, "offset": offset}
        if platform:
            params["platform"] = platform
        if topic:
            params["topic"] = topic
        if implementation_type:
            params["type"] = implementation_type
        if complexity:
            params["complexity"] = complexity
        return self._check(self._http.get("/api/projects", params=params)).json()

    def get_project(self, project_id: str) -> Optional[dict[str, Any]]:
        response = self._http.get(f"/api/projects/{project_id}")
        if response.status_code == 404:
            return None
        return self._check(response).json()

    def get_td_bytes(self, project_id: str) -> bytes:
        return self._check(self._http.get(f"/api/projects/{project_id}/td")).content

    def get_readme(self, project_id: str) -> tuple[str, str]:
        response = self._check(self._http.get(f"/api/projects/{project_id}/readme"))
        return response.text, response.headers.get("X-WoTify-Readme-Source", "")

    def publish(self, doc: dict[str, Any], token: str) -> dict[str, Any]:
        response = self._http.post(
            "/api/projects", json=doc, headers={"Authorization": f"Bearer {token}"}
        )
        return self._check(response).json()


class ShellCommandRunner:
    """Executes manifest commands through the platform shell."""

    def run(self, command: str, cwd: Path, env: dict[str, str]) -> int:
        completed = subprocess.run(command, shell=True, cwd=cwd, env=env)
        return completed.returncode


@dataclass(frozen=True)
class PlanStep:
    kind: str  # probe | fetchSource | runScript | writeTd
    detail: str


@dataclass(frozen=True)
class InstallPlan:
    steps: tuple[PlanStep, ...]
    dry_run: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "steps": [{"kind": s.kind, "detail": s.detail} for s in self.steps],
            "dryRun": self.dry_run,
        }


def _cli_config_path() -> Path:
    return Path(click.get_app_dir("wotify")) / "config.json"


def _load_cli_config() -> dict[str, Any]:
    try:
        with open(_cli_config_path(), encoding="utf-8") as fh:
            doc = json.load(fh)
        return doc if isinstance(doc, dict) else {}
    except (OSError, ValueError):
        return {}


def _fail(message: str, code: int = 1) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _print_issues(issues: list[dict[str, Any]]) -> None:
    for issue in issues:
        path = issue.get("path") or "/"
        click.echo(f"  {path}: {issue.get('message')} [{issue.get('code')}]", err=True)


def _client(ctx: click.Context, registry: Optional[str]) -> RegistryClient:
    settings = _load_cli_config()
    base = (
        registry
        or os.environ.get("WOTIFY_REGISTRY")
        or settings.get("registryUrl")
        or DEFAULT_REGISTRY
    )
    factory: Callable[[str], RegistryClient] = (ctx.obj or {}).get("client_factory", RegistryClient)
    return factory(base)


def _runner(ctx: click.Context) -> ShellCommandRunner:
    return (ctx.obj or {}).get("runner") or ShellCommandRunner()


def _resolve_project(client: RegistryClient, id_or_name: str) -> dict[str, Any]:
    """Exact id match first, then unique exact name match."""
    record = client.get_project(id_or_name)
    if record is not None:
        return record
    hits = client.search(q=id_or_name, limit=100)["hits"]
    named = [hit for hit in hits if hit["name"] == id_or_name]
    if not named:
        _fail(f"no project matches {id_or_name!r}")
    if len(named) > 1:
        click.echo(f"error: {id_or_name!r} is ambiguous; candidates:", err=True)
        for hit in named:
            click.echo(f"  {hit['projectId']}", err=True)
        sys.exit(EXIT_AMBIGUOUS)
    record = client.get_project(named[0]["projectId"])
    if record is None:
        _fail(f"no project matches {id_or_name!r}")
    return record


def _network_errors(f: Callable) -> Callable:
    @functools.wraps(f)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return f(*args, **kwargs)
        except httpx.TransportError as exc:
            click.echo(f"error: cannot reach registry: {exc}", err=True)
            sys.exit(EXIT_SERVER_DOWN)
        except RegistryApiError as exc:
            click.echo(f"error: registry replied {exc.status} {exc.code}: {exc.message}", err=True)
            if exc.issues:
                _print_issues(exc.issues)
            sys.exit(1)

    return wrapper


def common_options(f: Callable) -> Callable:
    f = click.option("--json", "as_json", is_flag=True, help="Emit machine-readable JSON.")(f)
    f = click.option("--registry", metavar="URL", help="Registry base URL.")(f)
    return f


# ----------------------------------------------------------------------
# commands

@click.group()
def main() -> None:
    """Search, fetch, install, and publish Web of Things projects."""


@main.command("search")
@click.argument("terms", nargs=-1)
@click.option("--platform", type=click.Choice(PLATFORMS))
@click.option("--topic", type=click.Choice(TOPICS))
@click.option("--type", "implementation_type", type=click.Choice(IMPLEMENTATION_TYPES))
@click.option("--complexity", type=click.Choice(COMPLEXITIES))
@click.option("--limit", default=20, show_default=True)
@click.option("--offset", default=0)
@common_options
@click.pass_context
@_network_errors
def cmd_search(
    ctx: click.Context,
    terms: tuple[str, ...],
    platform: Optional[str],
    topic: Optional[str],
    implementation_type: Optional[str],
    complexity: Optional[str],
    limit: int,
    offset: int,
    registry: Optional[str],
    as_json: bool,
) -> None:
    """Search the registry."""
    client = _client(ctx, registry)
    data = client.search(
        q=" ".join(terms),
        platform=platform,
        topic=topic,
        implementation_type=implementation_type,
        complexity=complexity,
        limit=limit,
        offset=offset,
    )
    if as_json:
        click.echo(json.dumps(data, indent=2))
        return
    hits = data["hits"]
    if not hits:
        click.echo("no results")
        return
    rows = [
        (
            hit["name"],
            hit["implementationType"],
            hit["platform"],
            f"{hit['score']:g}",
            f"{hit['averageRating']:.1f}" if "averageRating" in hit else "-",
            hit["projectId"],
        )
        for hit in hits
    ]
    header = ("NAME", "TYPE", "PLATFORM", "SCORE", "RATING", "ID")
    widths = [max(len(row[i]) for row in [header, *rows]) for i in range(len(header))]
    for row in [header, *rows]:
        click.echo("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    click.echo(f"{data['total']} result(s)")


def _td_summary(td: dict[str, Any]) -> str:
    counts = ", ".join(
        f"{kind}: {len(td[kind])}" for kind in ("properties", "actions", "events") if isinstance(td.get(kind), dict)
    )
    title = td.get("title", "?")
    return f"TD: {title}" + (f" ({counts})" if counts else "")


@main.command("show")
@click.argument("id_or_name")
@common_options
@click.pass_context
@_network_errors
def cmd_show(ctx: click.Context, id_or_name: str, registry: Optional[str], as_json: bool) -> None:
    """Show a project's metadata, readme, and TD summary."""
    client = _client(ctx, registry)
    record = _resolve_project(client, id_or_name)
    readme_body, readme_source = client.get_readme(record["id"])
    if as_json:
        click.echo(
            json.dumps(
                {"project": record, "readme": {"source": readme_source, "body": readme_body}},
                indent=2,
            )
        )
        return
    stats = record.get("stats", {})
    rating = stats.get("averageRating")
    click.echo(f"{record['name']} ({record['id']})")
    click.echo(f"  {record['shortDescription']}")
    click.echo(
        f"  type: {record['implementationType']}    platform: {record['platform']}"
        f"    complexity: {record['complexity']}"
    )
    click.echo(f"  topics: {', '.join(record['topic'])}    tags: {', '.join(record['tags'])}")
    click.echo(f"  version: {record['version']['instance']}")
    click.echo(
        f"  downloads: {stats.get('downloads', 0)}    rating: "
        + (f"{rating:.1f} ({stats.get('ratingCount', 0)})" if rating is not None else "unrated")
    )
    if record.get("github"):
        click.echo(f"  github: {record['github']}")
    click.echo()
    click.echo(readme_body)
    click.echo()
    click.echo(_td_summary(record["td"]))
    try:
        names = sorted(extract_placeholders(record["td"]))
    except MalformedPlaceholderError:
        names = []
    if names:
        click.echo(f"placeholders: {', '.join(names)}")


def _parse_bindings(pairs: tuple[str, ...]) -> dict[str, str]:
    bindings = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise click.BadParameter(f"--bind expects NAME=VALUE, got {pair!r}")
        bindings[name] = value
    return bindings


@main.command("td")
@click.argument("id_or_name")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write the TD to this file instead of stdout.")
@click.option("--bind", "binds", multiple=True, metavar="NAME=VALUE", help="Bind a placeholder.")
@common_options
@click.pass_context
@_network_errors
def cmd_td(
    ctx: click.Context,
    id_or_name: str,
    out: Optional[Path],
    binds: tuple[str, ...],
    registry: Optional[str],
    as_json: bool,
) -> None:
    """Download a project's TD, optionally binding placeholders."""
    client = _client(ctx, registry)
    record = _resolve_project(client, id_or_name)
    raw = client.get_td_bytes(record["id"])
    bindings = _parse_bindings(binds)
    try:
        names = extract_placeholders(json.loads(raw))
    except MalformedPlaceholderError as exc:
        _fail(f"template is malformed: {exc}")

    def emit(data: bytes) -> None:
        if out is not None:
            out.write_bytes(data)
            click.echo(f"wrote {out}", err=True)
        else:
            sys.stdout.buffer.write(data)
            sys.stdout.buffer.flush()

    missing = sorted(names - set(bindings))
    if missing:
        emit(raw)
        click.echo(f"unbound placeholders: {', '.join(missing)}", err=True)
        sys.exit(EXIT_UNBOUND_PLACEHOLDERS)
    if not names:
        emit(raw)
        return
    try:
        concrete = instantiate_template(json.loads(raw), bindings)
    except TdStructureError as exc:
        click.echo("error: instantiated TD is not structurally valid:", err=True)
        _print_issues([issue.to_dict() for issue in exc.report.issues])
        sys.exit(1)
    except MissingBindingError as exc:  # unreachable given the check above
        _fail(str(exc), EXIT_UNBOUND_PLACEHOLDERS)
    emit(json.dumps(concrete, indent=2).encode("utf-8") + b"\n")


# ----------------------------------------------------------------------
# install

def archive_candidates(repo_url: str) -> list[str]:
    """Source-archive URLs for a repository link, best guess first.

    Direct links to an archive file are used as-is; known forges get
    their archive endpoints for branches main and master.
    """
    parsed = urlparse(repo_url)
    if parsed.path.endswith(_ARCHIVE_SUFFIXES):
        return [repo_url]
    templates = ARCHIVE_URL_TEMPLATES.get((parsed.hostname or "").lower())
    if not templates:
        return []
    segments = [seg for seg in parsed.path.split("/") if seg]
    if len(segments) < 2:
        return []
    owner, repo = segments[0], segments[1]
    if repo.endswith(".git"):
        repo = repo[: -len(".git")]
    return [template.format(owner=owner, repo=repo) for template in templates]


def _download_archive(url: str) -> Optional[tuple[str, bytes]]:
    try:
        response = httpx.get(url, follow_redirects=True, timeout=30.0)
    except httpx.HTTPError:
        return None
    if not response.is_success:
        return None
    return url, response.content


def _extract_archive(url: str, data: bytes, dest: Path) -> Path:
    """Unpack into dest, refusing members that escape it; returns the
    source root (the single top-level directory when there is one)."""
    base = dest.resolve()
    if urlparse(url).path.endswith(".zip"):
        with zipfile.ZipFile(io.BytesIO(data)) as archive:
            for name in archive.namelist():
                if not (dest / name).resolve().is_relative_to(base):
                    raise click.ClickException(f"archive member escapes extraction dir: {name}")
            archive.extractall(dest)
    else:
        with tarfile.open(fileobj=io.BytesIO(data), mode="r:*") as archive:
            members = []
            for member in archive.getmembers():
                if member.issym() or member.islnk():
                    continue
                if not (dest / member.name).resolve().is_relative_to(base):
                    raise click.ClickException(f"archive member escapes extraction dir: {member.name}")
                members.append(member)
            archive.extractall(dest, members=members)
    entries = [entry for entry in dest.iterdir()]
    if len(entries) == 1 and entries[0].is_dir():
        return entries[0]
    return dest


def _fetch_source(record: dict[str, Any], workspace: Path) -> tuple[str, Path]:
    candidates = archive_candidates(record["github"])
    if not candidates:
        _fail(
            f"cannot derive a source archive from {record['github']!r}; "
            "point the github field at a known forge or a direct archive URL"
        )
    for url in candidates:
        fetched = _download_archive(url)
        if fetched is not None:
            return fetched[0], _extract_archive(fetched[0], fetched[1], workspace)
    _fail(f"no source archive reachable for {record['github']!r} (tried {len(candidates)} candidate(s))")
    raise AssertionError("unreachable")


@main.command("install")
@click.argument("id_or_name")
@click.option("--dry-run", is_flag=True, help="Print the install plan without executing anything.")
@click.option("--yes", is_flag=True, help="Skip the confirmation prompt.")
@common_options
@click.pass_context
@_network_errors
def cmd_install(
    ctx: click.Context,
    id_or_name: str,
    dry_run: bool,
    yes: bool,
    registry: Optional[str],
    as_json: bool,
) -> None:
    """Fetch a code project's source and run its install manifest."""
    client = _client(ctx, registry)
    runner = _runner(ctx)
    record = _resolve_project(client, id_or_name)
    if record["implementationType"] != "code":
        click.echo(
            f"error: {record['name']!r} is a TD template, not installable software; "
            f"use `wotify td {record['id']}` instead",
            err=True,
        )
        sys.exit(EXIT_IS_TEMPLATE)

    workspace = Path(tempfile.mkdtemp(prefix="wotify-install-"))
    try:
        source_url, source_root = _fetch_source(record, workspace)
        manifest_path = source_root / MANIFEST_FILENAME
        if not manifest_path.exists():
            _fail(
                f"source tree has no {MANIFEST_FILENAME}; the project cannot be installed "
                "until its repository ships an install manifest",
                EXIT_NO_MANIFEST,
            )
        try:
            manifest_doc = json.loads(manifest_path.read_text(encoding="utf-8"))
        except ValueError as exc:
            _fail(f"{MANIFEST_FILENAME} is not valid JSON: {exc}", EXIT_NO_MANIFEST)
        parsed = parse_manifest(manifest_doc)
        if not isinstance(parsed, InstallManifest):
            click.echo(f"error: {MANIFEST_FILENAME} is invalid:", err=True)
            _print_issues([issue.to_dict() for issue in parsed.issues])
            sys.exit(EXIT_NO_MANIFEST)
        manifest = parsed

        probes: list[tuple[str, str]] = [(p.probe, p.hint) for p in manifest.prerequisites]
        if manifest.check:
            probes.append((manifest.check, "the project's own environment check failed"))
        steps = [PlanStep("probe", probe) for probe, _ in probes]
        steps.append(PlanStep("fetchSource", source_url))
        steps.append(PlanStep("runScript", manifest.install))
        plan = InstallPlan(steps=tuple(steps), dry_run=dry_run)

        if as_json and dry_run:
            click.echo(json.dumps(plan.to_dict(), indent=2))
        else:
            click.echo(f"install plan for {record['name']} ({record['id']}):")
            for i, step in enumerate(plan.steps, 1):
                click.echo(f"  {i}. {step.kind}: {step.detail}")
        if dry_run:
            return

        workdir = source_root
        if manifest.workdir:
            workdir = source_root / manifest.workdir
            if not workdir.is_dir():
                _fail(f"manifest workdir {manifest.workdir!r} does not exist in the source tree", EXIT_NO_MANIFEST)

        if not yes and not click.confirm(f"run install script for {record['name']}?"):
            _fail("aborted", 1)

        env = dict(os.environ)
        env["WOTIFY_PROJECT_NAME"] = record["name"]
        for probe, hint in probes:
            if runner.run(probe, cwd=source_root, env=env) != 0:
                click.echo(f"error: prerequisite probe failed: {probe}", err=True)
                click.echo(f"hint: {hint}", err=True)
                sys.exit(EXIT_PROBE_FAILED)

        status = runner.run(manifest.install, cwd=workdir, env=env)
        if status != 0:
            click.echo(f"error: install script exited with {status}", err=True)
            sys.exit(status)
        try:
            client.get_td_bytes(record["id"])
        except (httpx.HTTPError, RegistryApiError):
            pass
        click.echo(f"installed {record['name']} into {workdir}")
    finally:
        if dry_run:
            shutil.rmtree(workspace, ignore_errors=True)


@main.command("publish")
@click.argument("project_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--token", help="Bearer token (default: $WOTIFY_TOKEN or the config file).")
@common_options
@click.pass_context
@_network_errors
def cmd_publish(
    ctx: click.Context,
    project_file: Path,
    token: Optional[str],
    registry: Optional[str],
    as_json: bool,
) -> None:
    """Validate a project document locally, then publish it."""
    client = _client(ctx, registry)
    try:
        doc = json.loads(project_file.read_text(encoding="utf-8"))
    except ValueError as exc:
        _fail(f"{project_file} is not valid JSON: {exc}")
    issues = list(validate_project_submission(doc).issues)
    if isinstance(doc, dict) and isinstance(doc.get("td"), dict):
        report = validate_td_structure(doc["td"], allow_placeholders=True)
        issues.extend(Issue("/td" + i.path, i.code, i.message) for i in report.issues)
    if issues:
        click.echo("error: project document is invalid:", err=True)
        _print_issues([issue.to_dict() for issue in issues])
        sys.exit(1)
    token = token or os.environ.get("WOTIFY_TOKEN") or _load_cli_config().get("token")
    if not token:
        _fail("no token; pass --token, set WOTIFY_TOKEN, or add one to the config file")
    body = client.publish(doc, token)
    if as_json:
        click.echo(json.dumps(body, indent=2))
    else:
        click.echo(body["id"])


if __name__ == "__main__":
    main()
