import { client } from "../state";
import { clear, el, errorBox, loadingBox } from "../dom";
import { COMPLEXITIES, IMPLEMENTATION_TYPES, PLATFORMS, TOPICS } from "../validate";
import type { SearchHit } from "../types";

/** CSS class for the implementation-type badge; template and code must look different. */
export function badgeClass(implementationType: string): string {
  return implementationType === "template" ? "badge badge-template" : "badge badge-code";
}

export function renderSearchResults(container: HTMLElement, hits: SearchHit[]): void {
  clear(container);
  if (hits.length === 0) {
    container.append(el("p", { class: "empty" }, ["no results"]));
    return;
  }
  const list = el("ul", { class: "results" });
  for (const hit of hits) {
    const badge = el("span", { class: badgeClass(hit.implementationType) }, [
      hit.implementationType,
    ]);
    const title = el("a", { href: `#/project/${hit.projectId}`, class: "result-name" }, [
      hit.name,
    ]);
    const rated = hit.averageRating !== undefined ? ` · rated ${hit.averageRating}` : "";
    const meta = el("span", { class: "result-meta" }, [
      `${hit.platform} · score ${hit.score} · ${hit.downloads} downloads${rated}`,
    ]);
    const item = el("li", { class: "result" }, [
      el("div", { class: "result-head" }, [title, badge]),
      el("p", { class: "result-desc" }, [hit.shortDescription]),
      meta,
    ]);
    list.append(item);
  }
  container.append(list);
}

function facetSelect(name: string, label: string, options: readonly string[]): HTMLSelectElement {
  const select = el("select", { name, id: `facet-${name}` });
  select.append(el("option", { value: "" }, [`any ${label}`]));
  for (const option of options) {
    select.append(el("option", { value: option }, [option]));
  }
  return select;
}

export function mountSearchPage(root: HTMLElement): void {
  clear(root);
  const form = el("form", { class: "search-form" });
  const input = el("input", {
    type: "search",
    name: "q",
    placeholder: "search projects…",
    "aria-label": "search terms",
  });
  const typeSel = facetSelect("type", "type", IMPLEMENTATION_TYPES);
  const platformSel = facetSelect("platform", "platform", PLATFORMS);
  const topicSel = facetSelect("topic", "topic", TOPICS);
  const complexitySel = facetSelect("complexity", "complexity", COMPLEXITIES);
  const submit = el("button", { type: "submit" }, ["search"]);
  form.append(input, typeSel, platformSel, topicSel, complexitySel, submit);

  const status = el("div", { class: "search-status" });
  const results = el("div", { class: "search-results" });
  root.append(el("h2", {}, ["find a project"]), form, status, results);

  let generation = 0;
  async function run(): Promise<void> {
    const ticket = ++generation;
    clear(status);
    clear(results);
    results.append(loadingBox());
    try {
      const response = await client().search({
        q: input.value || undefined,
        type: typeSel.value || undefined,
        platform: platformSel.value || undefined,
        topic: topicSel.value || undefined,
        complexity: complexitySel.value || undefined,
      });
      if (ticket !== generation) {
        return;
      }
      status.textContent = `${response.total} result(s)`;
      renderSearchResults(results, response.hits);
    } catch (error) {
      if (ticket !== generation) {
        return;
      }
      clear(results);
      results.append(errorBox(error instanceof Error ? error.message : String(error)));
    }
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void run();
  });
  for (const sel of [typeSel, platformSel, topicSel, complexitySel]) {
    sel.addEventListener("change", () => void run());
  }
  void run();
}
