/** `{{NAME}}` template mechanics, duplicated from the registry on purpose:
 * binding happens client-side so a concrete TD never needs a server round
 * trip. NAME is one or more of A-Z, 0-9, underscore; leftover brace pairs
 * after scanning make a document malformed. */

import type { Issue } from "./types";
import { validateTdStructure } from "./validate";

export class MalformedPlaceholderError extends Error {
  constructor(
    readonly path: string,
    readonly text: string,
  ) {
    super(`malformed placeholder at ${path || "/"}: ${JSON.stringify(text)}`);
    this.name = "MalformedPlaceholderError";
  }
}

export class MissingBindingError extends Error {
  readonly names: string[];

  constructor(names: Iterable<string>) {
    const ordered = [...names].sort();
    super("missing binding: " + ordered.join(", "));
    this.name = "MissingBindingError";
    this.names = ordered;
  }
}

export class TdStructureError extends Error {
  constructor(readonly issues: Issue[]) {
    super(
      "instantiated document fails TD structure validation: " +
        issues.map((i) => `${i.path} ${i.code}`).join("; "),
    );
    this.name = "TdStructureError";
  }
}

function tokenRe(): RegExp {
  return /\{\{([A-Z0-9_]+)\}\}/g;
}

function placeholderNames(text: string): { names: string[]; malformed: boolean } {
  const names = [...text.matchAll(tokenRe())].map((m) => m[1]);
  const remainder = text.replace(tokenRe(), "");
  return { names, malformed: remainder.includes("{{") || remainder.includes("}}") };
}

function isPlainObject(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function* scanStrings(node: unknown, path = ""): Generator<[string, string]> {
  if (typeof node === "string") {
    yield [path, node];
  } else if (Array.isArray(node)) {
    for (let i = 0; i < node.length; i++) {
      yield* scanStrings(node[i], `${path}/${i}`);
    }
  } else if (isPlainObject(node)) {
    for (const [key, value] of Object.entries(node)) {
      yield* scanStrings(value, `${path}/${key.replace(/~/g, "~0").replace(/\//g, "~1")}`);
    }
  }
}

/** Distinct placeholder names across all string values (keys are not
 * scanned). Throws MalformedPlaceholderError on broken brace syntax. */
export function extractPlaceholders(document: unknown): Set<string> {
  const found = new Set<string>();
  for (const [path, text] of scanStrings(document)) {
    const { names, malformed } = placeholderNames(text);
    if (malformed) {
      throw new MalformedPlaceholderError(path, text);
    }
    for (const name of names) found.add(name);
  }
  return found;
}

/** Replace every placeholder with its binding and return the concrete TD.
 * The input is never mutated; extra bindings are tolerated. Throws
 * MissingBindingError when a placeholder has no binding and
 * TdStructureError when the result fails the structural check. */
export function instantiateTemplate<T>(document: T, bindings: Record<string, string>): T {
  const needed = extractPlaceholders(document);
  const missing = [...needed].filter((name) => !(name in bindings));
  if (missing.length > 0) {
    throw new MissingBindingError(missing);
  }

  const substitute = (node: unknown): unknown => {
    if (typeof node === "string") {
      // Function replacement: binding values holding $ or regex syntax
      // are inserted verbatim.
      return node.replace(tokenRe(), (_match, name: string) => bindings[name]);
    }
    if (Array.isArray(node)) {
      return node.map(substitute);
    }
    if (isPlainObject(node)) {
      return Object.fromEntries(
        Object.entries(node).map(([key, value]) => [key, substitute(value)]),
      );
    }
    return node;
  };

  const result = substitute(document) as T;
  const issues = validateTdStructure(result);
  if (issues.length > 0) {
    throw new TdStructureError(issues);
  }
  return result;
}
