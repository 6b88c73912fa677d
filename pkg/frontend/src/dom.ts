/** Tiny DOM helpers; data always goes through textContent, never markup. */

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: Array<Node | string> = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") {
      node.className = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}

export function errorBox(message: string): HTMLElement {
  return el("div", { class: "error", role: "alert" }, [message]);
}

export function loadingBox(): HTMLElement {
  return el("div", { class: "loading" }, ["loading…"]);
}
