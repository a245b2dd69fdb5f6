import assert from "node:assert/strict";
import { test } from "node:test";

import { RecognizeClient, SuperededError } from "../src/client.js";
import type { RecognitionResult } from "../src/types.js";

const RESULT: RecognitionResult = {
  categories: [{ name: "cat0", p: 0.9 }],
  explanation: "Recognized as 'cat0' because it appears to be composed of: line0.",
  assignment: [[0.8, 0.2]],
};

function okResponse(payload: unknown): Response {
  return {
    ok: true,
    status: 200,
    json: async () => payload,
    text: async () => JSON.stringify(payload),
  } as unknown as Response;
}

test("recognize posts the stroke list and parses the result", async () => {
  let seenUrl = "";
  let seenBody = "";
  const client = new RecognizeClient("http://svc", async (url, init) => {
    seenUrl = url;
    seenBody = String(init?.body);
    return okResponse(RESULT);
  });
  const out = await client.recognize([[[0, 0], [1, 1]]]);
  assert.equal(seenUrl, "http://svc/recognize");
  assert.deepEqual(JSON.parse(seenBody), { strokes: [[[0, 0], [1, 1]]] });
  assert.deepEqual(out, RESULT);
  assert.equal(client.requestCount, 1);
});

test("a new submission aborts and supersedes the in-flight one", async () => {
  const aborted: boolean[] = [];
  const client = new RecognizeClient("http://svc", (url, init) => {
    const signal = init?.signal as AbortSignal;
    return new Promise((resolve, reject) => {
      signal.addEventListener("abort", () => {
        aborted.push(true);
        reject(new DOMException("aborted", "AbortError"));
      });
      // resolve slowly; only an abort or the test's second call settles it
      setTimeout(() => resolve(okResponse(RESULT)), 50);
    });
  });
  const first = client.recognize([[[0, 0], [1, 1]]]);
  const second = client.recognize([[[0, 0], [1, 1]], [[2, 2], [3, 3]]]);
  await assert.rejects(first, SuperededError);
  assert.deepEqual(await second, RESULT);
  assert.equal(aborted.length, 1);
  assert.equal(client.requestCount, 2);
});

test("http errors carry the status", async () => {
  const client = new RecognizeClient("http://svc", async () => {
    return {
      ok: false,
      status: 422,
      text: async () => "strokes must be a non-empty list",
    } as unknown as Response;
  });
  await assert.rejects(client.recognize([]), /422/);
});

test("network failures propagate as plain errors", async () => {
  const client = new RecognizeClient("http://svc", async () => {
    throw new TypeError("fetch failed");
  });
  await assert.rejects(client.recognize([[[0, 0], [1, 1]]]), TypeError);
});

test("model info round-trips", async () => {
  const info = { scenario: "labels_full", label_space: { categories: [] } };
  const client = new RecognizeClient("http://svc", async (url) => {
    assert.equal(url, "http://svc/model");
    return okResponse(info);
  });
  assert.deepEqual(await client.modelInfo(), info);
});
