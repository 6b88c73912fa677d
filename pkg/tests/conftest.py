from __future__ import annotations

import io
import itertools
import json
import socketserver
import tarfile
import threading
import time
from functools import partial
from http.server import SimpleHTTPRequestHandler
from pathlib import Path
from types import SimpleNamespace
from typing import Any, Callable, Optional

import httpx
import pytest
import uvicorn
from fastapi.testclient import TestClient

from wotify.config import RegistryConfig
from wotify.readme_fetch import ReadmeFetcher
from wotify.server import create_app
from wotify.store import RegistryStore

from oracles import FIXTURES_DIR

_user_counter = itertools.count(1)


@pytest.fixture(scope="session")
def submission_corpus() -> list[dict[str, Any]]:
    with open(FIXTURES_DIR / "submission-corpus.json", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def placeholder_corpus() -> list[dict[str, Any]]:
    with open(FIXTURES_DIR / "placeholder-corpus.json", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture
def make_submission() -> Callable[..., dict[str, Any]]:
    def factory(**overrides: Any) -> dict[str, Any]:
        doc: dict[str, Any] = {
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
            "td": {
                "title": "Sense HAT",
                "properties": {
                    "temperature": {"forms": [{"href": "http://device.local/temp"}]}
                },
            },
        }
        for key, value in overrides.items():
            if value is None and key in ("github", "readme"):
                doc.pop(key, None)
            else:
                doc[key] = value
        return doc

    return factory


@pytest.fixture
def store(tmp_path: Path) -> RegistryStore:
    registry_store = RegistryStore(tmp_path / "data")
    yield registry_store
    registry_store.close()


class ApiHarness:
    def __init__(self, client: TestClient, store: RegistryStore, transport_calls: list[httpx.Request]):
        self.client = client
        self.store = store
        self.transport_calls = transport_calls

    def register(self, username: Optional[str] = None, password: str = "hunter2hunter2") -> str:
        """Create a user and return a bearer token for it."""
        username = username or f"user{next(_user_counter)}"
        response = self.client.post("/api/users", json={"username": username, "password": password})
        assert response.status_code == 201, response.text
        response = self.client.post("/api/tokens", json={"username": username, "password": password})
        assert response.status_code == 201, response.text
        return response.json()["token"]

    def auth(self, token: str) -> dict[str, str]:
        return {"Authorization": f"Bearer {token}"}


@pytest.fixture
def make_api(tmp_path: Path) -> Callable[..., ApiHarness]:
    """Factory for a fully wired in-process API instance.

    ``handler`` stubs the outbound readme transport (default: everything
    404s, so readmes fall back to the long description).
    """
    stack: list[Callable[[], None]] = []
    counter = itertools.count(1)

    def factory(
        handler: Optional[Callable[[httpx.Request], httpx.Response]] = None,
        config: Optional[RegistryConfig] = None,
    ) -> ApiHarness:
        calls: list[httpx.Request] = []

        def recording_handler(request: httpx.Request) -> httpx.Response:
            calls.append(request)
            if handler is None:
                return httpx.Response(404)
            return handler(request)

        data_dir = tmp_path / f"data{next(counter)}"
        registry_store = RegistryStore(data_dir)
        fetcher = ReadmeFetcher(transport=httpx.MockTransport(recording_handler))
        app = create_app(
            config or RegistryConfig(data_dir=data_dir), store=registry_store, fetcher=fetcher
        )
        client = TestClient(app)
        client.__enter__()
        stack.append(lambda: (client.__exit__(None, None, None), fetcher.close(), registry_store.close()))
        return ApiHarness(client, registry_store, calls)

    yield factory
    for cleanup in reversed(stack):
        cleanup()


@pytest.fixture
def api(make_api: Callable[..., ApiHarness]) -> ApiHarness:
    return make_api()


def publish_submission(harness: ApiHarness, submission: dict[str, Any], token: Optional[str] = None) -> str:
    token = token or harness.register()
    response = harness.client.post("/api/projects", json=submission, headers=harness.auth(token))
    assert response.status_code == 201, response.text
    return response.json()["id"]


# ----------------------------------------------------------------------
# live HTTP plumbing for CLI and end-to-end tests

class LiveServer(SimpleNamespace):
    base_url: str
    store: RegistryStore


def _wait_until(predicate: Callable[[], bool], timeout: float = 10.0) -> None:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if predicate():
            return
        time.sleep(0.01)
    raise TimeoutError("condition not met in time")


@pytest.fixture
def live_server(tmp_path: Path) -> LiveServer:
    data_dir = tmp_path / "live-data"
    registry_store = RegistryStore(data_dir)
    fetcher = ReadmeFetcher(transport=httpx.MockTransport(lambda request: httpx.Response(404)))
    app = create_app(RegistryConfig(data_dir=data_dir), store=registry_store, fetcher=fetcher)
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    _wait_until(lambda: server.started)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield LiveServer(base_url=f"http://127.0.0.1:{port}", store=registry_store)
    server.should_exit = True
    thread.join(timeout=5)
    fetcher.close()
    registry_store.close()


@pytest.fixture
def file_server(tmp_path: Path) -> SimpleNamespace:
    """Serves ``root`` over HTTP for archive-download tests."""
    root = tmp_path / "www"
    root.mkdir()
    handler = partial(SimpleHTTPRequestHandler, directory=str(root))
    httpd = socketserver.ThreadingTCPServer(("127.0.0.1", 0), handler)
    httpd.daemon_threads = True
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    port = httpd.server_address[1]
    yield SimpleNamespace(base_url=f"http://127.0.0.1:{port}", root=root)
    httpd.shutdown()
    httpd.server_close()
    thread.join(timeout=5)


def make_source_archive(
    out_path: Path, files: dict[str, str], top_level: str = "proj-main"
) -> Path:
    """Write a gzipped tarball holding ``files`` under one top-level dir."""
    with tarfile.open(out_path, "w:gz") as archive:
        for name, content in files.items():
            data = content.encode("utf-8")
            info = tarfile.TarInfo(f"{top_level}/{name}")
            info.size = len(data)
            archive.addfile(info, io.BytesIO(data))
    return out_path
