// @vitest-environment jsdom
// jsdom, not happy-dom: the sanitizer probes DOM features happy-dom fakes
// incompletely, which silently disables it.
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import { renderMarkdownSanitized } from "../src/markdown";

// import.meta.url is an http URL in browser-like environments; resolve from
// the vitest root (frontend/) instead.
const hostile = readFileSync(join(process.cwd(), "..", "fixtures", "hostile-readme.md"), "utf-8");

describe("readme sanitization", () => {
  it("strips every active-content vector from the hostile readme", () => {
    const html = renderMarkdownSanitized(hostile);
    const host = document.createElement("div");
    host.innerHTML = html;
    document.body.append(host);

    expect((window as unknown as Record<string, unknown>).__pwned).toBeUndefined();
    expect(host.querySelector("script")).toBeNull();
    expect(host.querySelector("iframe")).toBeNull();
    for (const node of host.querySelectorAll("*")) {
      for (const attr of node.attributes) {
        expect(attr.name.startsWith("on")).toBe(false);
      }
    }
    for (const anchor of host.querySelectorAll("a")) {
      expect(anchor.href.toLowerCase().startsWith("javascript:")).toBe(false);
    }
    host.remove();
  });

  it("keeps the harmless markdown", () => {
    const html = renderMarkdownSanitized(hostile);
    const host = document.createElement("div");
    host.innerHTML = html;

    expect(host.querySelector("em, strong")).not.toBeNull();
    expect(host.querySelector("code")).not.toBeNull();
    const links = [...host.querySelectorAll("a")].map((a) => a.getAttribute("href") ?? "");
    expect(links.some((href) => href.startsWith("https://"))).toBe(true);
  });

  it("renders ordinary markdown structure", () => {
    const html = renderMarkdownSanitized("# Title\n\nSome *emphasis* and `code`.\n");
    expect(html).toContain("<h1>");
    expect(html).toContain("<em>");
    expect(html).toContain("<code>");
  });
});
