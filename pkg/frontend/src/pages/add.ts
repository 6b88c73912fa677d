import { ApiError } from "../api";
import { client, getToken } from "../state";
import { clear, el } from "../dom";
import {
  COMPLEXITIES,
  IMPLEMENTATION_TYPES,
  PLATFORMS,
  TOPICS,
  validateForPublish,
} from "../validate";
import type { Issue } from "../types";

interface FieldBox {
  wrap: HTMLElement;
  error: HTMLElement;
}

function fieldBox(label: string, control: HTMLElement, hint = ""): FieldBox {
  const error = el("p", { class: "field-error" });
  const children: Array<Node | string> = [el("span", { class: "field-label" }, [label]), control];
  if (hint) {
    children.push(el("span", { class: "field-hint" }, [hint]));
  }
  children.push(error);
  return { wrap: el("label", { class: "field" }, children), error };
}

function selectFrom(options: readonly string[]): HTMLSelectElement {
  const select = el("select");
  for (const option of options) {
    select.append(el("option", { value: option }, [option]));
  }
  return select;
}

/** First path token decides which field annotation shows the issue. */
function fieldKeyFor(issue: Issue): string {
  const token = issue.path.split("/")[1] ?? "";
  return token.replace(/~1/g, "/").replace(/~0/g, "~");
}

export function mountAddPage(root: HTMLElement): void {
  clear(root);
  root.append(el("h2", {}, ["publish a project"]));
  if (!getToken()) {
    root.append(
      el("p", { class: "notice" }, [
        "publishing needs an account; ",
        el("a", { href: "#/login" }, ["log in"]),
        " first.",
      ]),
    );
    return;
  }

  const form = el("form", { class: "add-form", novalidate: "novalidate" });
  const errors = new Map<string, HTMLElement>();
  const general = el("div", { class: "form-errors" });

  const nameInput = el("input", { type: "text" });
  const shortInput = el("input", { type: "text" });
  const longInput = el("textarea", { rows: "4" });
  const typeSelect = selectFrom(IMPLEMENTATION_TYPES);
  const githubInput = el("input", { type: "text", placeholder: "https://github.com/…" });
  const readmeInput = el("input", { type: "text", placeholder: "https://…/README.md" });
  const platformSelect = selectFrom(PLATFORMS);
  const complexitySelect = selectFrom(COMPLEXITIES);
  const tagsInput = el("input", { type: "text", placeholder: "comma, separated, tags" });
  const versionInput = el("input", { type: "text", placeholder: "1.0.0" });
  const tdInput = el("textarea", { rows: "10", class: "td-input" });
  const tdFile = el("input", { type: "file", accept: "application/json,.json,.jsonld" });
  tdFile.addEventListener("change", () => {
    const file = tdFile.files?.[0];
    if (file) {
      void file.text().then((text) => {
        tdInput.value = text;
      });
    }
  });

  const topicBoxes = new Map<string, HTMLInputElement>();
  const topicsWrap = el("div", { class: "topics" });
  for (const topic of TOPICS) {
    const box = el("input", { type: "checkbox", value: topic });
    topicBoxes.set(topic, box);
    topicsWrap.append(el("label", { class: "topic-choice" }, [box, topic]));
  }

  const fields: Array<[string, FieldBox]> = [
    ["name", fieldBox("name", nameInput, "at least 5 characters")],
    ["shortDescription", fieldBox("short description", shortInput, "5 to 180 characters")],
    ["longDescription", fieldBox("long description", longInput, "5 to 500 characters")],
    ["implementationType", fieldBox("implementation type", typeSelect)],
    ["github", fieldBox("github repository", githubInput, "required for code projects")],
    ["readme", fieldBox("readme URI (optional)", readmeInput)],
    ["topic", fieldBox("topics", topicsWrap, "pick at least one")],
    ["platform", fieldBox("platform", platformSelect)],
    ["complexity", fieldBox("complexity", complexitySelect)],
    ["tags", fieldBox("tags", tagsInput)],
    ["version", fieldBox("version instance", versionInput)],
    ["td", fieldBox("Thing Description (JSON)", el("div", {}, [tdFile, tdInput]))],
  ];
  for (const [key, box] of fields) {
    errors.set(key, box.error);
    form.append(box.wrap);
  }

  const submit = el("button", { type: "submit" }, ["publish"]);
  form.append(general, submit);
  root.append(form);

  function showIssues(issues: Issue[]): void {
    clear(general);
    for (const errorEl of errors.values()) {
      errorEl.textContent = "";
    }
    for (const issue of issues) {
      const slot = errors.get(fieldKeyFor(issue));
      if (slot) {
        const line = `${issue.path}: ${issue.message}`;
        slot.textContent = slot.textContent ? `${slot.textContent}; ${line}` : line;
      } else {
        general.append(el("p", { class: "field-error" }, [`${issue.path}: ${issue.message}`]));
      }
    }
  }

  function buildSubmission(): Record<string, unknown> | null {
    const doc: Record<string, unknown> = {
      name: nameInput.value,
      shortDescription: shortInput.value,
      longDescription: longInput.value,
      implementationType: typeSelect.value,
      topic: [...topicBoxes.entries()].filter(([, box]) => box.checked).map(([t]) => t),
      platform: platformSelect.value,
      tags: tagsInput.value
        .split(",")
        .map((tag) => tag.trim())
        .filter((tag) => tag !== ""),
      complexity: complexitySelect.value,
      version: { instance: versionInput.value },
    };
    if (githubInput.value.trim() !== "") {
      doc.github = githubInput.value.trim();
    }
    if (readmeInput.value.trim() !== "") {
      doc.readme = readmeInput.value.trim();
    }
    try {
      doc.td = JSON.parse(tdInput.value) as unknown;
    } catch {
      showIssues([{ path: "/td", code: "json", message: "not valid JSON" }]);
      return null;
    }
    return doc;
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const doc = buildSubmission();
    if (doc === null) {
      return;
    }
    // Same check the server runs, so most mistakes never leave the page.
    const issues = validateForPublish(doc);
    if (issues.length > 0) {
      showIssues(issues);
      return;
    }
    const token = getToken();
    if (!token) {
      clear(general);
      general.append(el("p", { class: "field-error" }, ["session expired; log in again"]));
      return;
    }
    client()
      .publish(doc, token)
      .then((published) => {
        clear(root);
        root.append(
          el("h2", {}, ["published"]),
          el("p", {}, [
            "project id: ",
            el("a", { href: `#/project/${published.id}` }, [published.id]),
          ]),
        );
      })
      .catch((error: unknown) => {
        if (error instanceof ApiError && error.issues.length > 0) {
          showIssues(error.issues);
        } else {
          showIssues([
            {
              path: "",
              code: "error",
              message: error instanceof Error ? error.message : String(error),
            },
          ]);
        }
      });
  });
}
