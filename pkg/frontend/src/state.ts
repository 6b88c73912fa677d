/** Session state (token in localStorage) and API base resolution. */

import { ApiClient } from "./api";

const TOKEN_KEY = "wotify.token";
const USERNAME_KEY = "wotify.username";

export function getToken(): string | null {
  return localStorage.getItem(TOKEN_KEY);
}

export function getUsername(): string | null {
  return localStorage.getItem(USERNAME_KEY);
}

export function setSession(username: string, token: string): void {
  localStorage.setItem(USERNAME_KEY, username);
  localStorage.setItem(TOKEN_KEY, token);
}

export function clearSession(): void {
  localStorage.removeItem(USERNAME_KEY);
  localStorage.removeItem(TOKEN_KEY);
}

/** API base URL: a global injected at build/deploy time, a meta tag, or
 * same-origin. */
export function apiBase(): string {
  const injected = (globalThis as Record<string, unknown>)["__WOTIFY_API_BASE__"];
  if (typeof injected === "string") {
    return injected.replace(/\/$/, "");
  }
  const meta = document.querySelector('meta[name="wotify-api-base"]');
  const content = meta?.getAttribute("content");
  if (content) {
    return content.replace(/\/$/, "");
  }
  return "";
}

let shared: ApiClient | null = null;

export function client(): ApiClient {
  if (shared === null) {
    shared = new ApiClient(apiBase());
  }
  return shared;
}
