import "./styles.css";
import { el } from "./dom";
import { getUsername } from "./state";
import { mountAddPage } from "./pages/add";
import { mountAuthPage } from "./pages/auth";
import { mountProjectPage } from "./pages/project";
import { mountSearchPage } from "./pages/search";

function renderNav(nav: HTMLElement): void {
  while (nav.firstChild) {
    nav.removeChild(nav.firstChild);
  }
  nav.append(
    el("a", { href: "#/search", class: "brand" }, ["WoTify"]),
    el("a", { href: "#/search" }, ["search"]),
    el("a", { href: "#/add" }, ["publish"]),
    el("a", { href: "#/login" }, [getUsername() ? `account (${getUsername()})` : "log in"]),
  );
}

function route(root: HTMLElement, nav: HTMLElement): void {
  renderNav(nav);
  const hash = location.hash || "#/search";
  const projectMatch = /^#\/project\/(.+)$/.exec(hash);
  if (projectMatch) {
    mountProjectPage(root, decodeURIComponent(projectMatch[1]));
  } else if (hash === "#/add") {
    mountAddPage(root);
  } else if (hash === "#/login") {
    mountAuthPage(root);
  } else {
    mountSearchPage(root);
  }
}

function start(): void {
  const app = document.getElementById("app");
  if (!app) {
    return;
  }
  const nav = el("nav", { class: "topnav" });
  const root = el("main", { class: "page" });
  app.append(nav, root);
  window.addEventListener("hashchange", () => route(root, nav));
  route(root, nav);
}

start();
