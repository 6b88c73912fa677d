/** Wire types for the registry's JSON API. */

export interface Issue {
  path: string;
  code: string;
  message: string;
}

export interface SearchHit {
  projectId: string;
  name: string;
  shortDescription: string;
  implementationType: "template" | "code";
  platform: string;
  score: number;
  downloads: number;
  averageRating?: number;
}

export interface SearchResponse {
  hits: SearchHit[];
  total: number;
  limit: number;
  offset: number;
}

export interface Stats {
  downloads: number;
  ratingCount: number;
  ratingSum: number;
  averageRating?: number;
}

export interface ProjectDetail {
  id: string;
  name: string;
  shortDescription: string;
  longDescription: string;
  implementationType: "template" | "code";
  topic: string[];
  platform: string;
  tags: string[];
  complexity: string;
  version: { instance: string };
  td: Record<string, unknown>;
  stats: Stats;
  createdAt: string;
  updatedAt: string;
  owner: string;
  github?: string;
  readme?: string;
}

export interface RatingResult {
  average: number;
  count: number;
}
