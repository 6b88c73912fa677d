import { ApiError } from "../api";
import { clearSession, client, getUsername, setSession } from "../state";
import { clear, el, errorBox } from "../dom";

export function mountAuthPage(root: HTMLElement): void {
  clear(root);
  root.append(el("h2", {}, ["account"]));

  const current = getUsername();
  if (current) {
    const logout = el("button", { type: "button" }, ["log out"]);
    logout.addEventListener("click", () => {
      clearSession();
      mountAuthPage(root);
    });
    root.append(el("p", {}, [`logged in as ${current}. `]), logout);
    return;
  }

  const username = el("input", { type: "text", autocomplete: "username" });
  const password = el("input", { type: "password", autocomplete: "current-password" });
  const message = el("div", { class: "auth-message" });
  const login = el("button", { type: "submit" }, ["log in"]);
  const register = el("button", { type: "button" }, ["register & log in"]);

  const form = el("form", { class: "auth-form" }, [
    el("label", { class: "field" }, [el("span", { class: "field-label" }, ["username"]), username]),
    el("label", { class: "field" }, [el("span", { class: "field-label" }, ["password"]), password]),
    el("div", { class: "auth-actions" }, [login, register]),
    message,
  ]);
  root.append(form);

  function fail(error: unknown): void {
    clear(message);
    message.append(
      errorBox(error instanceof ApiError ? error.message : "registry unreachable"),
    );
  }

  async function doLogin(): Promise<void> {
    const token = await client().createToken(username.value, password.value);
    setSession(username.value, token);
    location.hash = "#/search";
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    doLogin().catch(fail);
  });
  register.addEventListener("click", () => {
    client()
      .createUser(username.value, password.value)
      .then(doLogin)
      .catch(fail);
  });
}
