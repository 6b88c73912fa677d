"""HTTP facade over the registry core.

Contract notes:

- every non-2xx response body is a single ApiError document
  ``{"status", "code", "message", "issues"?}``;
- mutating routes require ``Authorization: Bearer <token>`` from
  ``POST /api/tokens``;
- every response carries an ``X-WoTify-Api`` version header;
- request bodies larger than the configured cap are refused with 413.
"""

from __future__ import annotations

import argparse
import hashlib
import hmac
import re
import secrets
from contextlib import asynccontextmanager
from typing import Any, AsyncIterator, Awaitable, Callable, Optional

import uvicorn
from fastapi import Body, Depends, FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, ConfigDict, StrictInt
from starlette.exceptions import HTTPException as StarletteHTTPException

from .config import RegistryConfig, load_config
from .model import (
    COMPLEXITIES,
    IMPLEMENTATION_TYPES,
    PLATFORMS,
    TOPICS,
    ApiToken,
    ProjectRecord,
    UserAccount,
    canonicalize_fields,
    new_project_id,
    new_token_value,
    utc_now_iso,
)
from .readme_fetch import ReadmeFetcher
from .search import DEFAULT_LIMIT, MAX_LIMIT, SearchQuery, tokenize
from .store import (
    ForbiddenError,
    NotFoundError,
    RegistryStore,
    StoreError,
    UsernameTakenError,
)
from .validation import (
    Issue,
    validate_project_submission,
    validate_td_structure,
)

API_VERSION = "1"

USERNAME_RE = re.compile(r"^[A-Za-z0-9_-]{3,40}$")
PASSWORD_MIN_LENGTH = 8
PBKDF2_ITERATIONS = 100_000


# ----------------------------------------------------------------------
# passwords

def hash_password(password: str) -> str:
    salt = secrets.token_bytes(16)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, PBKDF2_ITERATIONS)
    return f"pbkdf2-sha256${PBKDF2_ITERATIONS}${salt.hex()}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        scheme, iterations, salt_hex, digest_hex = stored.split("$")
        if scheme != "pbkdf2-sha256":
            return False
        candidate = hashlib.pbkdf2_hmac(
            "sha256", password.encode("utf-8"), bytes.fromhex(salt_hex), int(iterations)
        )
        return hmac.compare_digest(candidate.hex(), digest_hex)
    except (ValueError, AttributeError):
        return False


# ----------------------------------------------------------------------
# errors

class ApiException(Exception):
    def __init__(self, status: int, code: str, message: str, issues: Optional[list[Issue]] = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.issues = issues


class PayloadTooLarge(Exception):
    pass


def _error_body(status: int, code: str, message: str, issues: Optional[list[Issue]] = None) -> dict[str, Any]:
    body: dict[str, Any] = {"status": status, "code": code, "message": message}
    if issues:
        body["issues"] = [issue.to_dict() for issue in issues]
    return body


def _error_response(status: int, code: str, message: str, issues: Optional[list[Issue]] = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content=_error_body(status, code, message, issues),
        headers={"X-WoTify-Api": API_VERSION},
    )


class BodySizeLimit:
    """ASGI middleware refusing request bodies over the configured cap.

    A Content-Length over the cap is refused before reading; bodies
    streamed without one are cut off as soon as the cap is crossed.
    """

    def __init__(self, app: Any, max_bytes: int):
        self.app = app
        self.max_bytes = max_bytes

    async def __call__(self, scope: dict, receive: Callable, send: Callable) -> None:
        if scope["type"] != "http":
            await self.app(scope, receive, send)
            return
        for key, value in scope.get("headers", []):
            if key == b"content-length":
                try:
                    declared = int(value)
                except ValueError:
                    declared = 0
                if declared > self.max_bytes:
                    response = _error_response(413, "payloadTooLarge", "request body too large")
                    await response(scope, receive, send)
                    return
        seen = 0

        async def limited_receive() -> dict:
            nonlocal seen
            message = await receive()
            if message["type"] == "http.request":
                seen += len(message.get("body", b""))
                if seen > self.max_bytes:
                    raise PayloadTooLarge()
            return message

        await self.app(scope, limited_receive, send)


# ----------------------------------------------------------------------
# request/response models

class UserCreate(BaseModel):
    model_config = ConfigDict(extra="forbid")
    username: str
    password: str


class UserCreated(BaseModel):
    id: str
    username: str


class TokenRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    username: str
    password: str


class TokenResponse(BaseModel):
    token: str


class PublishResponse(BaseModel):
    id: str


class RatingRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    stars: StrictInt


class RatingResponse(BaseModel):
    average: float
    count: int


class HealthResponse(BaseModel):
    status: str
    projects: int


# ----------------------------------------------------------------------
# app factory

def create_app(
    config: Optional[RegistryConfig] = None,
    store: Optional[RegistryStore] = None,
    fetcher: Optional[ReadmeFetcher] = None,
) -> FastAPI:
    config = config or load_config()
    owns_store = store is None
    owns_fetcher = fetcher is None
    if store is None:
        store = RegistryStore(config.data_dir)
    if fetcher is None:
        fetcher = ReadmeFetcher(timeout_ms=config.fetch_timeout_ms)

    @asynccontextmanager
    async def lifespan(app: FastAPI) -> AsyncIterator[None]:
        try:
            yield
        finally:
            if owns_fetcher:
                fetcher.close()
            if owns_store:
                store.close()

    app = FastAPI(title="wotify-registry", version=API_VERSION, lifespan=lifespan)
    app.state.config = config
    app.state.store = store
    app.state.fetcher = fetcher

    # ------------------------------------------------------------------
    # plumbing

    @app.middleware("http")
    async def add_api_version_header(
        request: Request, call_next: Callable[[Request], Awaitable[Response]]
    ) -> Response:
        response = await call_next(request)
        response.headers["X-WoTify-Api"] = API_VERSION
        return response

    app.add_middleware(BodySizeLimit, max_bytes=config.max_request_bytes)
    if config.ui_origin:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=[config.ui_origin],
            allow_methods=["*"],
            allow_headers=["*"],
            expose_headers=["X-WoTify-Api", "X-WoTify-Readme-Source"],
        )

    @app.exception_handler(ApiException)
    async def handle_api_exception(request: Request, exc: ApiException) -> JSONResponse:
        return _error_response(exc.status, exc.code, exc.message, exc.issues)

    @app.exception_handler(StarletteHTTPException)
    async def handle_http_exception(request: Request, exc: StarletteHTTPException) -> JSONResponse:
        codes = {404: "notFound", 405: "methodNotAllowed"}
        return _error_response(exc.status_code, codes.get(exc.status_code, "error"), str(exc.detail))

    @app.exception_handler(RequestValidationError)
    async def handle_request_validation(request: Request, exc: RequestValidationError) -> JSONResponse:
        issues = []
        for error in exc.errors():
            loc = [str(part) for part in error.get("loc", ()) if part != "body"]
            issues.append(Issue("/" + "/".join(loc) if loc else "", "type", error.get("msg", "invalid")))
        return _error_response(400, "badRequest", "request could not be parsed", issues)

    @app.exception_handler(PayloadTooLarge)
    async def handle_payload_too_large(request: Request, exc: PayloadTooLarge) -> JSONResponse:
        return _error_response(413, "payloadTooLarge", "request body too large")

    @app.exception_handler(StoreError)
    async def handle_store_error(request: Request, exc: StoreError) -> JSONResponse:
        return _error_response(503, "storageUnavailable", "storage is unavailable")

    @app.exception_handler(Exception)
    async def handle_unexpected(request: Request, exc: Exception) -> JSONResponse:
        return _error_response(500, "internalError", "internal server error")

    def get_store() -> RegistryStore:
        return store

    def require_user(request: Request) -> UserAccount:
        header = request.headers.get("Authorization", "")
        if not header.startswith("Bearer "):
            raise ApiException(401, "unauthorized", "missing bearer token")
        token = store.resolve_token(header[len("Bearer "):].strip())
        if token is None:
            raise ApiException(401, "unauthorized", "unknown or expired token")
        user = store.get_user(token.user_id)
        if user is None:
            raise ApiException(401, "unauthorized", "token user no longer exists")
        return user

    # ------------------------------------------------------------------
    # identity

    @app.post("/api/users", status_code=201, response_model=UserCreated)
    def create_user(body: UserCreate) -> UserCreated:
        issues = []
        if not USERNAME_RE.fullmatch(body.username):
            issues.append(Issue("/username", "format", "username must be 3-40 characters of letters, digits, '-' or '_'"))
        if len(body.password) < PASSWORD_MIN_LENGTH:
            issues.append(Issue("/password", "minLength", f"password must be at least {PASSWORD_MIN_LENGTH} characters"))
        if issues:
            raise ApiException(422, "validationFailed", "user submission failed validation", issues)
        user = UserAccount(
            id="u-" + secrets.token_hex(8),
            username=body.username,
            password_digest=hash_password(body.password),
        )
        try:
            store.put_user(user)
        except UsernameTakenError:
            raise ApiException(409, "usernameTaken", f"username {body.username!r} is taken")
        return UserCreated(id=user.id, username=user.username)

    @app.post("/api/tokens", status_code=201, response_model=TokenResponse)
    def issue_token(body: TokenRequest) -> TokenResponse:
        user = store.get_user_by_name(body.username)
        if user is None or not verify_password(body.password, user.password_digest):
            raise ApiException(401, "invalidCredentials", "unknown username or wrong password")
        token = ApiToken(token=new_token_value(), user_id=user.id, issued_at=utc_now_iso())
        store.put_token(token)
        return TokenResponse(token=token.token)

    # ------------------------------------------------------------------
    # projects

    @app.post("/api/projects", status_code=201, response_model=PublishResponse)
    def publish_project(
        payload: Any = Body(...), user: UserAccount = Depends(require_user)
    ) -> PublishResponse:
        issues = list(validate_project_submission(payload).issues)
        if isinstance(payload, dict) and isinstance(payload.get("td"), dict):
            td_report = validate_td_structure(payload["td"], allow_placeholders=True)
            issues.extend(Issue("/td" + i.path, i.code, i.message) for i in td_report.issues)
        if issues:
            raise ApiException(422, "validationFailed", "project submission failed validation", issues)
        doc = canonicalize_fields(payload)
        record = ProjectRecord.from_submission(
            doc, project_id=new_project_id(doc["name"]), owner=user.id
        )
        return PublishResponse(id=store.put_project(record))

    def _check_facet(value: Optional[str], allowed: tuple[str, ...], name: str) -> None:
        if value is not None and value not in allowed:
            raise ApiException(400, "badRequest", f"invalid {name}: {value!r}")

    @app.get("/api/projects")
    def search_projects(
        q: str = "",
        platform: Optional[str] = None,
        topic: Optional[str] = None,
        implementation_type: Optional[str] = Query(None, alias="type"),
        complexity: Optional[str] = None,
        limit: int = Query(DEFAULT_LIMIT, ge=1, le=MAX_LIMIT),
        offset: int = Query(0, ge=0),
    ) -> dict[str, Any]:
        _check_facet(platform, PLATFORMS, "platform")
        _check_facet(topic, TOPICS, "topic")
        _check_facet(implementation_type, IMPLEMENTATION_TYPES, "type")
        _check_facet(complexity, COMPLEXITIES, "complexity")
        hits, total = store.search(
            SearchQuery(
                terms=tuple(tokenize(q)),
                platform=platform,
                topic=topic,
                implementation_type=implementation_type,
                complexity=complexity,
                limit=limit,
                offset=offset,
            )
        )
        return {
            "hits": [hit.to_dict() for hit in hits],
            "total": total,
            "limit": limit,
            "offset": offset,
        }

    def _get_record_or_404(project_id: str) -> ProjectRecord:
        record = store.get_project(project_id)
        if record is None:
            raise ApiException(404, "notFound", f"no project with id {project_id!r}")
        return record

    @app.get("/api/projects/{project_id}")
    def get_project(project_id: str) -> dict[str, Any]:
        record = _get_record_or_404(project_id)
        doc = record.to_dict()
        average = record.stats.average_rating
        if average is not None:
            doc["stats"]["averageRating"] = average
        return doc

    @app.get("/api/projects/{project_id}/td")
    def get_td(project_id: str) -> JSONResponse:
        record = _get_record_or_404(project_id)
        store.record_download(project_id)
        return JSONResponse(content=record.td)

    @app.get("/api/projects/{project_id}/readme")
    def get_readme(project_id: str) -> PlainTextResponse:
        record = _get_record_or_404(project_id)
        result = fetcher.fetch_readme(record)
        return PlainTextResponse(
            result.body,
            media_type="text/markdown; charset=utf-8",
            headers={"X-WoTify-Readme-Source": result.source},
        )

    @app.post("/api/projects/{project_id}/rating", response_model=RatingResponse)
    def rate_project(
        project_id: str, body: RatingRequest, user: UserAccount = Depends(require_user)
    ) -> RatingResponse:
        _get_record_or_404(project_id)
        try:
            stats = store.record_rating(project_id, user.id, body.stars)
        except ValueError as exc:
            raise ApiException(422, "validationFailed", str(exc), [Issue("/stars", "range", str(exc))])
        assert stats.average_rating is not None
        return RatingResponse(average=stats.average_rating, count=stats.rating_count)

    @app.delete("/api/projects/{project_id}", status_code=204)
    def delete_project(project_id: str, user: UserAccount = Depends(require_user)) -> Response:
        try:
            store.delete_project(project_id, user.id)
        except NotFoundError:
            raise ApiException(404, "notFound", f"no project with id {project_id!r}")
        except ForbiddenError:
            raise ApiException(403, "forbidden", "only the owner may delete a project")
        return Response(status_code=204)

    @app.get("/api/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", projects=store.count_projects())

    return app


def main(argv: Optional[list[str]] = None) -> None:
    parser = argparse.ArgumentParser(prog="wotify-registry", description="Run the WoTify registry server.")
    parser.add_argument("--config", help="path to a JSON config file (default: $WOTIFY_CONFIG)")
    args = parser.parse_args(argv)
    config = load_config(args.config)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


if __name__ == "__main__":
    main()
