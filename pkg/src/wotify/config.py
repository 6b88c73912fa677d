"""Registry configuration: JSON config file with environment overrides.

Precedence: built-in defaults < config file < WOTIFY_* environment
variables.  The config file is given explicitly or via WOTIFY_CONFIG and
uses camelCase keys (addr, dataDir, uiOrigin, fetchTimeoutMs,
maxRequestBytes).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional

DEFAULT_ADDR = "127.0.0.1:8337"
DEFAULT_FETCH_TIMEOUT_MS = 5000
DEFAULT_MAX_REQUEST_BYTES = 1024 * 1024


def default_data_dir() -> Path:
    return Path.home() / ".local" / "share" / "wotify"


@dataclass(frozen=True)
class RegistryConfig:
    addr: str = DEFAULT_ADDR
    data_dir: Path = default_data_dir()
    ui_origin: Optional[str] = None
    fetch_timeout_ms: int = DEFAULT_FETCH_TIMEOUT_MS
    max_request_bytes: int = DEFAULT_MAX_REQUEST_BYTES

    @property
    def host(self) -> str:
        return self.addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.addr.rsplit(":", 1)[1])


def load_config(
    path: "str | Path | None" = None,
    env: Mapping[str, str] = os.environ,
) -> RegistryConfig:
    values: dict[str, Any] = {}

    config_path = path or env.get("WOTIFY_CONFIG")
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise ValueError("config file must hold a JSON object")
        if "addr" in doc:
            values["addr"] = str(doc["addr"])
        if "dataDir" in doc:
            values["data_dir"] = Path(doc["dataDir"])
        if "uiOrigin" in doc:
            values["ui_origin"] = str(doc["uiOrigin"])
        if "fetchTimeoutMs" in doc:
            values["fetch_timeout_ms"] = int(doc["fetchTimeoutMs"])
        if "maxRequestBytes" in doc:
            values["max_request_bytes"] = int(doc["maxRequestBytes"])

    if "WOTIFY_ADDR" in env:
        values["addr"] = env["WOTIFY_ADDR"]
    if "WOTIFY_DATA_DIR" in env:
        values["data_dir"] = Path(env["WOTIFY_DATA_DIR"])
    if "WOTIFY_UI_ORIGIN" in env:
        values["ui_origin"] = env["WOTIFY_UI_ORIGIN"]
    if "WOTIFY_FETCH_TIMEOUT_MS" in env:
        values["fetch_timeout_ms"] = int(env["WOTIFY_FETCH_TIMEOUT_MS"])
    if "WOTIFY_MAX_REQUEST_BYTES" in env:
        values["max_request_bytes"] = int(env["WOTIFY_MAX_REQUEST_BYTES"])

    return RegistryConfig(**values)
