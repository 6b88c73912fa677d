/** Client-side project validation, field for field the server's rules.
 *
 * The registry rejects a submission with the exact same issue list this
 * module produces, so the form can annotate fields before any network
 * round trip. Kept in lockstep with the server by a shared fixture corpus
 * asserted in both test suites.
 */

import type { Issue } from "./types";

export const NAME_MIN = 5;
export const SHORT_DESCRIPTION_MIN = 5;
export const SHORT_DESCRIPTION_MAX = 180;
export const LONG_DESCRIPTION_MIN = 5;
export const LONG_DESCRIPTION_MAX = 500;

export const IMPLEMENTATION_TYPES = ["template", "code"] as const;
export const TOPICS = ["sensor", "actuator", "robotics", "lighting", "other"] as const;
export const PLATFORMS = ["raspberry", "arduino", "ESP", "other"] as const;
export const COMPLEXITIES = ["simple", "medium", "expert"] as const;

const SUBMISSION_FIELDS = [
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
];

// github is additionally required when implementationType is "code".
const REQUIRED_FIELDS = [
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
];

const INTERACTION_KINDS = ["properties", "actions", "events"] as const;

type JsonObject = Record<string, unknown>;

function isPlainObject(value: unknown): value is JsonObject {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

/** RFC 6901 JSON pointer from path tokens. */
export function pointer(...tokens: Array<string | number>): string {
  return tokens
    .map((tok) => "/" + String(tok).replace(/~/g, "~0").replace(/\//g, "~1"))
    .join("");
}

// The server counts Unicode scalar values, not UTF-16 code units.
function charLength(value: string): number {
  return [...value].length;
}

// The server's notion of whitespace (anything str.isspace() accepts).
// Escapes only: U+2028/U+2029 are line terminators and may not appear
// literally in a regex literal.
const WHITESPACE_RE =
  /[\t\n\x0b\f\r\x1c-\x1f \x85\xa0\u1680\u2000-\u200a\u2028\u2029\u202f\u205f\u3000]/;

/** Absolute http(s) URI: scheme + non-empty host, no whitespace. */
export function isHttpUri(value: string): boolean {
  if (WHITESPACE_RE.test(value)) {
    return false;
  }
  const match = /^(https?):\/\/([^/?#]*)/.exec(value);
  return match !== null && match[2].length > 0;
}

function jsonEqual(a: unknown, b: unknown): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}

function checkString(
  doc: JsonObject,
  key: string,
  minLen: number | null,
  maxLen: number | null,
  issues: Issue[],
): void {
  if (!(key in doc)) return;
  const value = doc[key];
  const path = pointer(key);
  if (typeof value !== "string") {
    issues.push({ path, code: "type", message: `${key} must be a string` });
    return;
  }
  if (minLen !== null && charLength(value) < minLen) {
    issues.push({
      path,
      code: "minLength",
      message: `${key} must be at least ${minLen} characters`,
    });
  }
  if (maxLen !== null && charLength(value) > maxLen) {
    issues.push({
      path,
      code: "maxLength",
      message: `${key} must be at most ${maxLen} characters`,
    });
  }
}

function checkUri(doc: JsonObject, key: string, issues: Issue[]): void {
  if (!(key in doc)) return;
  const value = doc[key];
  const path = pointer(key);
  if (typeof value !== "string") {
    issues.push({ path, code: "type", message: `${key} must be a string` });
  } else if (!isHttpUri(value)) {
    issues.push({
      path,
      code: "format",
      message: `${key} must be an absolute http(s) URI`,
    });
  }
}

function checkEnum(
  doc: JsonObject,
  key: string,
  allowed: readonly string[],
  issues: Issue[],
): void {
  if (!(key in doc)) return;
  if (!allowed.includes(doc[key] as string)) {
    issues.push({
      path: pointer(key),
      code: "enum",
      message: `${key} must be one of: ${allowed.join(", ")}`,
    });
  }
}

function checkArray(
  doc: JsonObject,
  key: string,
  options: { itemEnum?: readonly string[]; itemMinLength?: number },
  issues: Issue[],
): void {
  if (!(key in doc)) return;
  const value = doc[key];
  const path = pointer(key);
  if (!Array.isArray(value)) {
    issues.push({ path, code: "type", message: `${key} must be an array` });
    return;
  }
  if (value.length < 1) {
    issues.push({
      path,
      code: "minItems",
      message: `${key} must contain at least 1 item`,
    });
  }
  const seen: unknown[] = [];
  let duplicated = false;
  for (const item of value) {
    if (seen.some((other) => jsonEqual(other, item))) duplicated = true;
    seen.push(item);
  }
  if (duplicated) {
    issues.push({
      path,
      code: "uniqueItems",
      message: `${key} items must be unique`,
    });
  }
  value.forEach((item, i) => {
    const itemPath = pointer(key, i);
    if (options.itemEnum && !options.itemEnum.includes(item as string)) {
      issues.push({
        path: itemPath,
        code: "enum",
        message: `${key} items must be one of: ${options.itemEnum.join(", ")}`,
      });
    }
    if (options.itemMinLength !== undefined) {
      if (typeof item !== "string") {
        issues.push({ path: itemPath, code: "type", message: `${key} items must be strings` });
      } else if (charLength(item) < options.itemMinLength) {
        issues.push({ path: itemPath, code: "minLength", message: `${key} items must be non-empty` });
      }
    }
  });
}

/** Every violation of the submission schema, with JSON-pointer paths.
 * Accepts exactly the documents the server's schema validation accepts. */
export function validateSubmission(doc: unknown): Issue[] {
  if (!isPlainObject(doc)) {
    return [{ path: "", code: "type", message: "submission must be a JSON object" }];
  }

  const issues: Issue[] = [];

  for (const key of Object.keys(doc)) {
    if (!SUBMISSION_FIELDS.includes(key)) {
      issues.push({
        path: pointer(key),
        code: "unexpectedField",
        message: `unexpected field '${key}'`,
      });
    }
  }

  const required = [...REQUIRED_FIELDS];
  if (doc["implementationType"] === "code") {
    required.splice(4, 0, "github");
  }
  for (const key of required) {
    if (!(key in doc)) {
      issues.push({
        path: pointer(key),
        code: "required",
        message: `missing required field '${key}'`,
      });
    }
  }

  checkString(doc, "name", NAME_MIN, null, issues);
  checkString(doc, "shortDescription", SHORT_DESCRIPTION_MIN, SHORT_DESCRIPTION_MAX, issues);
  checkString(doc, "longDescription", LONG_DESCRIPTION_MIN, LONG_DESCRIPTION_MAX, issues);
  checkUri(doc, "github", issues);
  checkUri(doc, "readme", issues);
  checkEnum(doc, "implementationType", IMPLEMENTATION_TYPES, issues);
  checkArray(doc, "topic", { itemEnum: TOPICS }, issues);
  checkEnum(doc, "platform", PLATFORMS, issues);
  checkArray(doc, "tags", { itemMinLength: 1 }, issues);
  checkEnum(doc, "complexity", COMPLEXITIES, issues);

  if ("version" in doc) {
    const version = doc["version"];
    if (!isPlainObject(version)) {
      issues.push({ path: pointer("version"), code: "type", message: "version must be an object" });
    } else if (!("instance" in version)) {
      issues.push({
        path: pointer("version", "instance"),
        code: "required",
        message: "missing required field 'instance'",
      });
    } else if (typeof version["instance"] !== "string") {
      issues.push({
        path: pointer("version", "instance"),
        code: "type",
        message: "version.instance must be a string",
      });
    }
  }

  if ("td" in doc && !isPlainObject(doc["td"])) {
    issues.push({ path: pointer("td"), code: "type", message: "td must be a JSON object" });
  }

  return issues;
}

// ----------------------------------------------------------------------
// TD structure

const PLACEHOLDER_SCAN_RE = /\{\{([A-Z0-9_]+)\}\}/g;

function placeholderNames(text: string): { names: string[]; malformed: boolean } {
  const names = [...text.matchAll(PLACEHOLDER_SCAN_RE)].map((m) => m[1]);
  const remainder = text.replace(PLACEHOLDER_SCAN_RE, "");
  return { names, malformed: remainder.includes("{{") || remainder.includes("}}") };
}

function* scanStrings(node: unknown, path = ""): Generator<[string, string]> {
  if (typeof node === "string") {
    yield [path, node];
  } else if (Array.isArray(node)) {
    for (let i = 0; i < node.length; i++) {
      yield* scanStrings(node[i], path + pointer(i));
    }
  } else if (isPlainObject(node)) {
    for (const [key, value] of Object.entries(node)) {
      yield* scanStrings(value, path + pointer(key));
    }
  }
}

function checkForms(node: unknown, path: string, issues: Issue[]): void {
  if (isPlainObject(node)) {
    for (const [key, value] of Object.entries(node)) {
      const childPath = path + pointer(key);
      if (key === "forms" && Array.isArray(value)) {
        value.forEach((form, i) => {
          const formPath = childPath + pointer(i);
          if (!isPlainObject(form)) {
            issues.push({ path: formPath, code: "type", message: "forms entries must be objects" });
          } else if (typeof form["href"] !== "string") {
            issues.push({
              path: formPath + pointer("href"),
              code: "href" in form ? "type" : "required",
              message: "forms entries must have a string href",
            });
          }
        });
      }
      checkForms(value, childPath, issues);
    }
  } else if (Array.isArray(node)) {
    node.forEach((value, i) => checkForms(value, path + pointer(i), issues));
  }
}

/** Structural TD subset check: string title, object interaction maps,
 * string hrefs in forms, and (unless tolerated) no `{{NAME}}` tokens. */
export function validateTdStructure(doc: unknown, allowPlaceholders = false): Issue[] {
  if (!isPlainObject(doc)) {
    return [{ path: "", code: "type", message: "TD must be a JSON object" }];
  }

  const issues: Issue[] = [];

  if (!("title" in doc)) {
    issues.push({ path: pointer("title"), code: "required", message: "TD must have a title" });
  } else if (typeof doc["title"] !== "string") {
    issues.push({ path: pointer("title"), code: "type", message: "title must be a string" });
  } else if (doc["title"] === "") {
    issues.push({ path: pointer("title"), code: "minLength", message: "title must be non-empty" });
  }

  for (const kind of INTERACTION_KINDS) {
    if (!(kind in doc)) continue;
    const interactions = doc[kind];
    const kindPath = pointer(kind);
    if (!isPlainObject(interactions)) {
      issues.push({ path: kindPath, code: "type", message: `${kind} must be an object` });
      continue;
    }
    for (const [name, interaction] of Object.entries(interactions)) {
      const memberPath = kindPath + pointer(name);
      if (!isPlainObject(interaction)) {
        issues.push({ path: memberPath, code: "type", message: `${kind} members must be objects` });
        continue;
      }
      checkForms(interaction, memberPath, issues);
    }
  }

  for (const [path, text] of scanStrings(doc)) {
    const { names, malformed } = placeholderNames(text);
    if (malformed) {
      issues.push({
        path,
        code: "malformedPlaceholder",
        message: `malformed placeholder in ${JSON.stringify(text)}`,
      });
    }
    if (names.length > 0 && !allowPlaceholders) {
      issues.push({
        path,
        code: "placeholder",
        message: "unresolved placeholder(s): " + [...new Set(names)].sort().join(", "),
      });
    }
  }

  return issues;
}

/** What the publish endpoint checks: the schema rules plus TD structure
 * (placeholders tolerated), TD issues prefixed `/td`. */
export function validateForPublish(doc: unknown): Issue[] {
  const issues = validateSubmission(doc);
  if (isPlainObject(doc) && isPlainObject(doc["td"])) {
    for (const issue of validateTdStructure(doc["td"], true)) {
      issues.push({ ...issue, path: "/td" + issue.path });
    }
  }
  return issues;
}
