"""Parsing and validation of ``wotify.json`` install manifests.

The manifest declares how a fetched project gets installed on a device:
prerequisite probes, the install command line, and optional check/uninstall
commands.  Version 1 is frozen; ``manifestVersion`` gates future evolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Union

from .validation import Issue, ValidationReport, pointer

MANIFEST_FILENAME = "wotify.json"
MANIFEST_VERSION = 1

_SCRIPT_KEYS = ("install", "check", "uninstall")
_PREREQ_KEYS = ("tool", "probe", "hint")
_TOP_KEYS = ("manifestVersion", "name", "scripts", "prerequisites", "workdir")


@dataclass(frozen=True)
class Prerequisite:
    """A tool the install needs: a side-effect-free probe command plus the
    human instruction printed when the probe fails."""

    tool: str
    probe: str
    hint: str

    def to_dict(self) -> dict[str, str]:
        return {"tool": self.tool, "probe": self.probe, "hint": self.hint}


@dataclass(frozen=True)
class InstallManifest:
    name: str
    install: str
    check: str | None = None
    uninstall: str | None = None
    prerequisites: tuple[Prerequisite, ...] = ()
    workdir: str | None = None
    manifest_version: int = MANIFEST_VERSION

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "manifestVersion": self.manifest_version,
            "name": self.name,
            "scripts": {"install": self.install},
        }
        if self.check is not None:
            doc["scripts"]["check"] = self.check
        if self.uninstall is not None:
            doc["scripts"]["uninstall"] = self.uninstall
        if self.prerequisites:
            doc["prerequisites"] = [p.to_dict() for p in self.prerequisites]
        if self.workdir is not None:
            doc["workdir"] = self.workdir
        return doc


def parse_manifest(doc: Any) -> Union[InstallManifest, ValidationReport]:
    """Parse a manifest document; on any violation return the report instead.

    Validation is order-independent: member ordering never changes the set
    of reported issues.
    """
    if not isinstance(doc, dict):
        return ValidationReport((Issue("", "type", "manifest must be a JSON object"),))

    issues: list[Issue] = []

    for key in doc:
        if key not in _TOP_KEYS:
            issues.append(Issue(pointer(key), "unexpectedField", f"unexpected field {key!r}"))

    if "manifestVersion" not in doc:
        issues.append(Issue(pointer("manifestVersion"), "required", "missing manifestVersion"))
    else:
        version = doc["manifestVersion"]
        # JSON number equality: 1 and 1.0 both pass, true does not.
        if (
            isinstance(version, bool)
            or not isinstance(version, (int, float))
            or version != MANIFEST_VERSION
        ):
            issues.append(
                Issue(
                    pointer("manifestVersion"),
                    "enum",
                    f"manifestVersion must be {MANIFEST_VERSION}",
                )
            )

    if "name" not in doc:
        issues.append(Issue(pointer("name"), "required", "missing name"))
    else:
        issues.extend(_require_string(doc, "name"))

    scripts = doc.get("scripts")
    if "scripts" not in doc:
        issues.append(Issue(pointer("scripts"), "required", "missing scripts"))
    elif not isinstance(scripts, dict):
        issues.append(Issue(pointer("scripts"), "type", "scripts must be an object"))
    else:
        for key in scripts:
            if key not in _SCRIPT_KEYS:
                issues.append(
                    Issue(pointer("scripts", key), "unexpectedField", f"unexpected script {key!r}")
                )
        if "install" not in scripts:
            issues.append(Issue(pointer("scripts", "install"), "required", "missing install script"))
        for key in _SCRIPT_KEYS:
            if key in scripts:
                issues.extend(_require_string(scripts, key, base=("scripts",)))

    prerequisites: list[Prerequisite] = []
    if "prerequisites" in doc:
        entries = doc["prerequisites"]
        if not isinstance(entries, list):
            issues.append(Issue(pointer("prerequisites"), "type", "prerequisites must be an array"))
        else:
            for i, entry in enumerate(entries):
                if not isinstance(entry, dict):
                    issues.append(
                        Issue(pointer("prerequisites", i), "type", "prerequisite must be an object")
                    )
                    continue
                for key in entry:
                    if key not in _PREREQ_KEYS:
                        issues.append(
                            Issue(
                                pointer("prerequisites", i, key),
                                "unexpectedField",
                                f"unexpected field {key!r}",
                            )
                        )
                complete = True
                for key in _PREREQ_KEYS:
                    if key not in entry:
                        issues.append(
                            Issue(
                                pointer("prerequisites", i, key),
                                "required",
                                f"prerequisite is missing {key!r}",
                            )
                        )
                        complete = False
                    else:
                        field_issues = list(_require_string(entry, key, base=("prerequisites", i)))
                        issues.extend(field_issues)
                        complete = complete and not field_issues
                if complete:
                    prerequisites.append(
                        Prerequisite(tool=entry["tool"], probe=entry["probe"], hint=entry["hint"])
                    )

    workdir = doc.get("workdir")
    if "workdir" in doc:
        if not isinstance(workdir, str):
            issues.append(Issue(pointer("workdir"), "type", "workdir must be a string"))
        elif workdir.startswith(("/", "\\")) or ".." in workdir.replace("\\", "/").split("/"):
            issues.append(
                Issue(pointer("workdir"), "format", "workdir must be a relative path inside the source tree")
            )

    if issues:
        return ValidationReport(tuple(sorted(issues, key=lambda i: (i.path, i.code))))

    scripts = doc["scripts"]
    return InstallManifest(
        name=doc["name"],
        install=scripts["install"],
        check=scripts.get("check"),
        uninstall=scripts.get("uninstall"),
        prerequisites=tuple(prerequisites),
        workdir=workdir,
        manifest_version=int(doc["manifestVersion"]),
    )


def _require_string(doc: dict, key: str, base: tuple = ()):
    path = pointer(*base, key)
    value = doc.get(key)
    if key not in doc:
        return
    if not isinstance(value, str):
        yield Issue(path, "type", f"{key} must be a string")
    elif not value:
        yield Issue(path, "minLength", f"{key} must be non-empty")
