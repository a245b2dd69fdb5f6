// Service client: one in-flight /recognize at a time, newer calls
// cancel and supersede older ones.

import type { ModelInfo, RecognitionResult } from "./types.js";

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

export class SuperededError extends Error {
  constructor() {
    super("request superseded by a newer submission");
    this.name = "SuperededError";
  }
}

export class RecognizeClient {
  /** Total /recognize HTTP requests issued (used by tests). */
  requestCount = 0;

  private controller: AbortController | null = null;

  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (u, i) => fetch(u, i),
  ) {}

  async modelInfo(): Promise<ModelInfo> {
    const resp = await this.fetchFn(`${this.baseUrl}/model`);
    if (!resp.ok) throw new Error(`model info failed: ${resp.status}`);
    return (await resp.json()) as ModelInfo;
  }

  async recognize(strokes: number[][][]): Promise<RecognitionResult> {
    if (this.controller) this.controller.abort();
    const controller = new AbortController();
    this.controller = controller;
    this.requestCount += 1;
    let resp: Response;
    try {
      resp = await this.fetchFn(`${this.baseUrl}/recognize`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ strokes }),
        signal: controller.signal,
      });
    } catch (err) {
      if (controller.signal.aborted) throw new SuperededError();
      throw err;
    } finally {
      if (this.controller === controller) this.controller = null;
    }
    if (!resp.ok) {
      const detail = await resp.text().catch(() => "");
      throw new Error(`recognize failed: ${resp.status} ${detail}`);
    }
    return (await resp.json()) as RecognitionResult;
  }
}
