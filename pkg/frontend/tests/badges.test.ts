// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";
import { badgeClass, renderSearchResults } from "../src/pages/search";
import type { SearchHit } from "../src/types";

function hit(overrides: Partial<SearchHit>): SearchHit {
  return {
    projectId: "wot-demo-aaaaaa",
    name: "wot-demo",
    shortDescription: "A demo project.",
    implementationType: "code",
    platform: "raspberry",
    score: 3,
    downloads: 0,
    ...overrides,
  };
}

describe("implementation-type badges", () => {
  it("assigns distinct classes to template and code", () => {
    expect(badgeClass("template")).not.toBe(badgeClass("code"));
    expect(badgeClass("template")).toContain("badge-template");
    expect(badgeClass("code")).toContain("badge-code");
  });

  it("renders hits with visually distinct, labelled badges", () => {
    const container = document.createElement("div");
    renderSearchResults(container, [
      hit({ projectId: "wot-tpl-aaaaaa", name: "wot-tpl", implementationType: "template" }),
      hit({ projectId: "wot-code-aaaaaa", name: "wot-code", implementationType: "code" }),
    ]);

    const badges = [...container.querySelectorAll(".badge")];
    expect(badges).toHaveLength(2);
    const [tpl, code] = badges;
    expect(tpl.textContent).toBe("template");
    expect(code.textContent).toBe("code");
    expect(tpl.className).not.toBe(code.className);
    expect(tpl.classList.contains("badge-template")).toBe(true);
    expect(code.classList.contains("badge-code")).toBe(true);
  });

  it("links each hit to its project page", () => {
    const container = document.createElement("div");
    renderSearchResults(container, [hit({ projectId: "wot-x-bbbbbb" })]);
    const anchor = container.querySelector("a.result-name");
    expect(anchor?.getAttribute("href")).toBe("#/project/wot-x-bbbbbb");
  });

  it("says so when nothing matches", () => {
    const container = document.createElement("div");
    renderSearchResults(container, []);
    expect(container.textContent).toContain("no results");
  });
});
