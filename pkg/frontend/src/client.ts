/** Thin fetch wrapper for the listening-test endpoints. */

import type { ResponseRecord, SessionManifest, SubmitResult } from './types.js';

export class ApiClient {
  /** @param base server origin, '' when the UI is served by the same
   *  process; @param fetchFn injectable for tests. */
  constructor(
    private readonly base: string = '',
    private readonly fetchFn: typeof fetch = globalThis.fetch,
  ) {}

  async manifest(sessionId: string, participant: string): Promise<SessionManifest> {
    const url =
      `${this.base}/api/session/${encodeURIComponent(sessionId)}` +
      `?participant=${encodeURIComponent(participant)}`;
    const res = await this.fetchFn(url);
    if (!res.ok) {
      throw new Error(`session request failed: HTTP ${res.status}`);
    }
    return (await res.json()) as SessionManifest;
  }

  /** Submit one response. Validation failures come back as
   *  { ok: false, error } rather than throwing, so the UI can show the
   *  server's reason and keep the trial open. */
  async submit(record: ResponseRecord): Promise<SubmitResult> {
    const res = await this.fetchFn(`${this.base}/api/response`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(record),
    });
    let body: unknown;
    try {
      body = await res.json();
    } catch {
      throw new Error(`malformed server reply: HTTP ${res.status}`);
    }
    const out = body as SubmitResult;
    if (!res.ok && out.ok !== false) {
      throw new Error(`submit failed: HTTP ${res.status}`);
    }
    return out;
  }

  /** Manifest URLs are server-relative; resolve against the base. */
  audioUrl(path: string): string {
    return this.base + path;
  }
}
