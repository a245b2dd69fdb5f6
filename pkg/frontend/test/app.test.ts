// Scripted pointer sequences against the full app loop: one /recognize
// call per pen-up, stroke recoloring, explanation rendering, failure
// banner, and clear-all.

import assert from "node:assert/strict";
import { test } from "node:test";

import { AppElements, SketchApp } from "../src/app.js";
import { RecognizeClient } from "../src/client.js";
import { componentColor } from "../src/palette.js";
import type { RecognitionResult } from "../src/types.js";
import { StubCanvas, StubElement, pointerEvent } from "./dom_stub.js";

function makeResult(componentIds: number[]): RecognitionResult {
  return {
    categories: [
      { name: "cat1", p: 0.97 },
      { name: "cat0", p: 0.02 },
      { name: "cat2", p: 0.01 },
    ],
    explanation:
      "Recognized as 'cat1' because it appears to be composed of: line0, arc1.",
    assignment: componentIds.map((id) => {
      const row = [0.05, 0.05, 0.05, 0.05];
      row[id] = 0.85;
      return row;
    }),
    stroke_components: componentIds.map((id) => ({
      id,
      name: `comp${id}`,
      p: 0.9,
    })),
  };
}

interface Harness {
  app: SketchApp;
  canvas: StubCanvas;
  elements: AppElements;
  calls: { body: string }[];
  failNext: { value: boolean };
}

function harness(): Harness {
  const calls: { body: string }[] = [];
  const failNext = { value: false };
  const fetchStub = async (url: string, init?: RequestInit) => {
    if (url.endsWith("/recognize")) {
      if (failNext.value) throw new TypeError("fetch failed");
      const body = String(init?.body);
      calls.push({ body });
      const n = (JSON.parse(body).strokes as unknown[]).length;
      const ids = Array.from({ length: n }, (_, i) => i % 4);
      return {
        ok: true,
        status: 200,
        json: async () => makeResult(ids),
        text: async () => "",
      } as unknown as Response;
    }
    throw new Error(`unexpected url ${url}`);
  };
  const canvas = new StubCanvas();
  const elements: AppElements = {
    canvas: canvas as unknown as HTMLCanvasElement,
    categories: new StubElement() as unknown as HTMLElement,
    explanation: new StubElement() as unknown as HTMLElement,
    existence: new StubElement() as unknown as HTMLElement,
    banner: new StubElement() as unknown as HTMLElement,
    clearButton: new StubElement() as unknown as HTMLElement,
    status: new StubElement() as unknown as HTMLElement,
  };
  const client = new RecognizeClient("http://svc", fetchStub);
  const app = new SketchApp(elements, client);
  app.attach();
  return { app, canvas, elements, calls, failNext };
}

function drag(canvas: StubCanvas, from: [number, number], to: [number, number]) {
  canvas.dispatch("pointerdown", pointerEvent(from[0], from[1], 0));
  const steps = 8;
  for (let i = 1; i <= steps; i++) {
    const x = from[0] + ((to[0] - from[0]) * i) / steps;
    const y = from[1] + ((to[1] - from[1]) * i) / steps;
    canvas.dispatch("pointermove", pointerEvent(x, y, i));
  }
  canvas.dispatch("pointerup", pointerEvent(to[0], to[1], steps + 1));
}

async function settle() {
  await new Promise((resolve) => setTimeout(resolve, 0));
}

test("exactly one recognize call per pen-up", async () => {
  const h = harness();
  drag(h.canvas, [10, 10], [100, 10]);
  await settle();
  assert.equal(h.app.client.requestCount, 1);
  drag(h.canvas, [10, 40], [100, 40]);
  await settle();
  assert.equal(h.app.client.requestCount, 2);
  // every submission carries the full session stroke list
  assert.equal(JSON.parse(h.calls[1].body).strokes.length, 2);
});

test("click without drag triggers no call", async () => {
  const h = harness();
  h.canvas.dispatch("pointerdown", pointerEvent(5, 5, 0));
  h.canvas.dispatch("pointerup", pointerEvent(5, 5, 1));
  await settle();
  assert.equal(h.app.client.requestCount, 0);
});

test("strokes are recolored by the returned component ids", async () => {
  const h = harness();
  drag(h.canvas, [10, 10], [100, 10]);
  await settle();
  drag(h.canvas, [10, 40], [100, 40]);
  await settle();
  h.canvas.ctx.strokeColors = [];
  h.app.redraw();
  assert.deepEqual(h.canvas.ctx.strokeColors, [
    componentColor(0),
    componentColor(1),
  ]);
});

test("explanation and ranking are rendered", async () => {
  const h = harness();
  drag(h.canvas, [10, 10], [80, 60]);
  await settle();
  const explanation = (h.elements.explanation as unknown as StubElement).textContent;
  assert.match(explanation, /Recognized as 'cat1'/);
  const list = (h.elements.categories as unknown as StubElement).innerHTML;
  assert.match(list, /cat1/);
  assert.match(list, /97\.0%/);
});

test("service failure shows the banner and keeps strokes", async () => {
  const h = harness();
  h.failNext.value = true;
  drag(h.canvas, [10, 10], [80, 60]);
  await settle();
  const banner = h.elements.banner as unknown as StubElement;
  assert.equal(banner.hidden, false);
  assert.match(banner.textContent, /unreachable/);
  assert.equal(h.app.strokes.length, 1);
  // recovery: next pen-up succeeds and hides the banner
  h.failNext.value = false;
  drag(h.canvas, [10, 40], [100, 40]);
  await settle();
  assert.equal(banner.hidden, true);
});

test("clear empties strokes and panels", async () => {
  const h = harness();
  drag(h.canvas, [10, 10], [80, 60]);
  await settle();
  (h.elements.clearButton as unknown as StubElement).dispatch("click");
  assert.equal(h.app.strokes.length, 0);
  assert.equal(h.app.view.result, null);
  assert.equal((h.elements.categories as unknown as StubElement).innerHTML, "");
  assert.equal((h.elements.explanation as unknown as StubElement).textContent, "");
});

test("existence checklist renders when the scenario returns it", async () => {
  const h = harness();
  drag(h.canvas, [10, 10], [80, 60]);
  await settle();
  // re-render with an existence payload spliced in
  h.app.view.update({
    ...makeResult([0]),
    existence: [
      { name: "line0", p: 0.93 },
      { name: "arc1", p: 0.12 },
    ],
  });
  h.app.renderPanels();
  const html = (h.elements.existence as unknown as StubElement).innerHTML;
  assert.match(html, /class="present">line0/);
  assert.match(html, /class="absent">arc1/);
});
