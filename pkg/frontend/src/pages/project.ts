import { ApiError, type TdBytes } from "../api";
import { client, getToken } from "../state";
import { clear, el, errorBox, loadingBox } from "../dom";
import { renderMarkdownSanitized } from "../markdown";
import {
  MalformedPlaceholderError,
  MissingBindingError,
  TdStructureError,
  extractPlaceholders,
  instantiateTemplate,
} from "../placeholders";
import { badgeClass } from "./search";
import type { ProjectDetail } from "../types";

export function tdFilename(projectName: string, concrete = false): string {
  const stem = projectName.replace(/[^A-Za-z0-9._-]+/g, "-");
  return concrete ? `${stem}.td.json` : `${stem}.td.raw.json`;
}

/** Wrap the registry's TD bytes untouched; serializing the parsed document
 * again would break byte-for-byte identity with GET /td. */
export function tdDownloadBlob(td: TdBytes): Blob {
  return new Blob([td.bytes as BlobPart], { type: td.contentType });
}

function triggerDownload(filename: string, blob: Blob): void {
  const url = URL.createObjectURL(blob);
  const anchor = el("a", { href: url, download: filename });
  document.body.append(anchor);
  anchor.click();
  anchor.remove();
  URL.revokeObjectURL(url);
}

function metaRow(label: string, value: string | Node): HTMLElement {
  return el("div", { class: "meta-row" }, [
    el("dt", {}, [label]),
    el("dd", {}, [value]),
  ]);
}

function ratingWidget(detail: ProjectDetail): HTMLElement {
  const box = el("div", { class: "rating" });
  const summary = el("span", { class: "rating-summary" });
  const average = detail.stats.averageRating;
  summary.textContent =
    average !== undefined
      ? `rated ${average} by ${detail.stats.ratingCount} user(s)`
      : "not rated yet";
  const stars = el("span", { class: "rating-stars" });
  for (let n = 1; n <= 5; n += 1) {
    const button = el("button", { type: "button", class: "star", "data-stars": String(n) }, [
      `${n}★`,
    ]);
    button.addEventListener("click", () => {
      const token = getToken();
      if (!token) {
        summary.textContent = "log in to rate this project";
        return;
      }
      client()
        .rate(detail.id, n, token)
        .then((result) => {
          summary.textContent = `rated ${result.average} by ${result.count} user(s)`;
        })
        .catch((error: unknown) => {
          summary.textContent =
            error instanceof ApiError ? `rating failed: ${error.message}` : "rating failed";
        });
    });
    stars.append(button);
  }
  box.append(stars, summary);
  return box;
}

function generalTab(detail: ProjectDetail): HTMLElement {
  const pane = el("section", { class: "tab-pane" });
  const meta = el("dl", { class: "meta" });
  meta.append(
    metaRow("platform", detail.platform),
    metaRow("topics", detail.topic.join(", ")),
    metaRow("complexity", detail.complexity),
    metaRow("version", detail.version.instance),
    metaRow("downloads", String(detail.stats.downloads)),
    metaRow("owner", detail.owner),
  );
  if (detail.tags.length > 0) {
    meta.append(metaRow("tags", detail.tags.join(", ")));
  }
  if (detail.github) {
    meta.append(metaRow("github", el("a", { href: detail.github, rel: "noopener" }, [detail.github])));
  }
  pane.append(el("p", { class: "short-desc" }, [detail.shortDescription]), meta);
  pane.append(ratingWidget(detail));

  const readmeBox = el("div", { class: "readme" }, [loadingBox()]);
  const sourceNote = el("p", { class: "readme-source" });
  pane.append(el("h3", {}, ["readme"]), sourceNote, readmeBox);
  client()
    .getReadme(detail.id)
    .then((result) => {
      clear(readmeBox);
      sourceNote.textContent = result.source ? `source: ${result.source}` : "";
      // Sanitized before insertion; this is the only innerHTML sink in the app.
      readmeBox.innerHTML = renderMarkdownSanitized(result.body);
    })
    .catch(() => {
      clear(readmeBox);
      readmeBox.append(el("p", { class: "long-desc" }, [detail.longDescription]));
    });
  return pane;
}

function bindingErrorText(error: unknown): string {
  if (error instanceof MissingBindingError) {
    return `unbound placeholders: ${error.names.join(", ")}`;
  }
  if (error instanceof MalformedPlaceholderError) {
    return `malformed placeholder at ${error.path || "/"}`;
  }
  if (error instanceof TdStructureError) {
    return `instantiated TD is not structurally valid: ${error.issues
      .map((issue) => issue.path || "/")
      .join(", ")}`;
  }
  return error instanceof Error ? error.message : String(error);
}

function tdTab(detail: ProjectDetail): HTMLElement {
  const pane = el("section", { class: "tab-pane" });
  const pre = el("pre", { class: "td-view" }, [JSON.stringify(detail.td, null, 2)]);
  const note = el("p", { class: "td-note" });

  const downloadRaw = el("button", { type: "button", class: "download-td" }, [
    "download TD (as published)",
  ]);
  downloadRaw.addEventListener("click", () => {
    client()
      .getTdBytes(detail.id)
      .then((td) => triggerDownload(tdFilename(detail.name), tdDownloadBlob(td)))
      .catch((error: unknown) => {
        note.textContent =
          error instanceof ApiError ? `download failed: ${error.message}` : "download failed";
      });
  });
  pane.append(downloadRaw, note, pre);

  let placeholders: string[] = [];
  try {
    placeholders = [...extractPlaceholders(detail.td)].sort();
  } catch (error) {
    if (error instanceof MalformedPlaceholderError) {
      pane.append(errorBox(bindingErrorText(error)));
      return pane;
    }
    throw error;
  }
  if (placeholders.length === 0) {
    return pane;
  }

  const form = el("form", { class: "binding-form" });
  form.append(el("h3", {}, ["instantiate template"]));
  const inputs = new Map<string, HTMLInputElement>();
  for (const name of placeholders) {
    const input = el("input", { type: "text", name, id: `binding-${name}` });
    inputs.set(name, input);
    form.append(el("label", { for: `binding-${name}` }, [name]), input);
  }
  const result = el("div", { class: "binding-result" });
  const instantiate = el("button", { type: "submit" }, ["instantiate & download"]);
  form.append(instantiate);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    clear(result);
    const bindings: Record<string, string> = {};
    for (const [name, input] of inputs) {
      if (input.value !== "") {
        bindings[name] = input.value;
      }
    }
    try {
      const concrete = instantiateTemplate(detail.td, bindings);
      const text = JSON.stringify(concrete, null, 2);
      triggerDownload(
        tdFilename(detail.name, true),
        new Blob([text], { type: "application/td+json" }),
      );
      result.append(el("pre", { class: "td-view" }, [text]));
    } catch (error) {
      result.append(errorBox(bindingErrorText(error)));
    }
  });
  pane.append(form, result);
  return pane;
}

export function renderProjectDetail(root: HTMLElement, detail: ProjectDetail): void {
  clear(root);
  const badge = el("span", { class: badgeClass(detail.implementationType) }, [
    detail.implementationType,
  ]);
  root.append(el("h2", { class: "project-title" }, [detail.name, " ", badge]));

  const tabBar = el("div", { class: "tabs", role: "tablist" });
  const generalButton = el(
    "button",
    { type: "button", class: "tab active", role: "tab" },
    ["General"],
  );
  const tdButton = el("button", { type: "button", class: "tab", role: "tab" }, [
    "Thing Description",
  ]);
  tabBar.append(generalButton, tdButton);
  root.append(tabBar);

  const general = generalTab(detail);
  const td = tdTab(detail);
  td.hidden = true;
  root.append(general, td);

  generalButton.addEventListener("click", () => {
    general.hidden = false;
    td.hidden = true;
    generalButton.classList.add("active");
    tdButton.classList.remove("active");
  });
  tdButton.addEventListener("click", () => {
    general.hidden = true;
    td.hidden = false;
    tdButton.classList.add("active");
    generalButton.classList.remove("active");
  });
}

export function mountProjectPage(root: HTMLElement, projectId: string): void {
  clear(root);
  root.append(loadingBox());
  client()
    .getProject(projectId)
    .then((detail) => renderProjectDetail(root, detail))
    .catch((error: unknown) => {
      clear(root);
      root.append(
        errorBox(
          error instanceof ApiError ? error.message : `cannot load project ${projectId}`,
        ),
      );
    });
}
