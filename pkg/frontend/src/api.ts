/** Typed client for the registry's JSON API. Every non-2xx response is an
 * ApiError carrying the server's error envelope. */

import type { Issue, ProjectDetail, RatingResult, SearchResponse } from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly issues: Issue[] = [],
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface SearchParams {
  q?: string;
  platform?: string;
  topic?: string;
  type?: string;
  complexity?: string;
  limit?: number;
  offset?: number;
}

export interface TdBytes {
  bytes: Uint8Array;
  contentType: string;
}

export interface ReadmeResult {
  body: string;
  source: string;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly base: string = "",
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchFn(this.base + path, init);
    if (response.ok) {
      return response;
    }
    let body: Record<string, unknown> = {};
    try {
      body = (await response.json()) as Record<string, unknown>;
    } catch {
      // non-JSON error body; fall through to the generic envelope
    }
    throw new ApiError(
      response.status,
      typeof body.code === "string" ? body.code : "error",
      typeof body.message === "string" ? body.message : `HTTP ${response.status}`,
      Array.isArray(body.issues) ? (body.issues as Issue[]) : [],
    );
  }

  private jsonInit(method: string, payload: unknown, token?: string): RequestInit {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (token) {
      headers["authorization"] = `Bearer ${token}`;
    }
    return { method, headers, body: JSON.stringify(payload) };
  }

  async search(params: SearchParams): Promise<SearchResponse> {
    const query = new URLSearchParams();
    query.set("q", params.q ?? "");
    for (const key of ["platform", "topic", "type", "complexity"] as const) {
      const value = params[key];
      if (value) query.set(key, value);
    }
    query.set("limit", String(params.limit ?? 20));
    query.set("offset", String(params.offset ?? 0));
    const response = await this.request(`/api/projects?${query}`);
    return (await response.json()) as SearchResponse;
  }

  async getProject(id: string): Promise<ProjectDetail> {
    const response = await this.request(`/api/projects/${encodeURIComponent(id)}`);
    return (await response.json()) as ProjectDetail;
  }

  /** The TD exactly as the registry serves it. Callers that only download
   * must write these bytes untouched: re-encoding would destroy the
   * byte-for-byte identity with GET /td. */
  async getTdBytes(id: string): Promise<TdBytes> {
    const response = await this.request(`/api/projects/${encodeURIComponent(id)}/td`);
    const buffer = await response.arrayBuffer();
    return {
      bytes: new Uint8Array(buffer),
      contentType: response.headers.get("content-type") ?? "application/json",
    };
  }

  async getReadme(id: string): Promise<ReadmeResult> {
    const response = await this.request(`/api/projects/${encodeURIComponent(id)}/readme`);
    return {
      body: await response.text(),
      source: response.headers.get("X-WoTify-Readme-Source") ?? "",
    };
  }

  async createUser(username: string, password: string): Promise<void> {
    await this.request("/api/users", this.jsonInit("POST", { username, password }));
  }

  async createToken(username: string, password: string): Promise<string> {
    const response = await this.request(
      "/api/tokens",
      this.jsonInit("POST", { username, password }),
    );
    const body = (await response.json()) as { token: string };
    return body.token;
  }

  async publish(doc: unknown, token: string): Promise<{ id: string }> {
    const response = await this.request("/api/projects", this.jsonInit("POST", doc, token));
    return (await response.json()) as { id: string };
  }

  async rate(id: string, stars: number, token: string): Promise<RatingResult> {
    const response = await this.request(
      `/api/projects/${encodeURIComponent(id)}/rating`,
      this.jsonInit("POST", { stars }, token),
    );
    return (await response.json()) as RatingResult;
  }
}
