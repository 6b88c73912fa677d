import { marked } from "marked";
import DOMPurify from "dompurify";

/** Render markdown to sanitized HTML, safe to assign to innerHTML. */
export function renderMarkdownSanitized(markdown: string): string {
  return DOMPurify.sanitize(marked.parse(markdown, { async: false }) as string);
}
