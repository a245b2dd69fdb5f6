import assert from "node:assert/strict";
import { test } from "node:test";

import { componentColor } from "../src/palette.js";
import { ParseView } from "../src/view.js";
import type { RecognitionResult } from "../src/types.js";

const FULL: RecognitionResult = {
  categories: [
    { name: "cat2", p: 0.95 },
    { name: "cat0", p: 0.04 },
  ],
  explanation: "Recognized as 'cat2' because it appears to be composed of: arc1.",
  assignment: [
    [0.1, 0.8, 0.1],
    [0.7, 0.2, 0.1],
  ],
  stroke_components: [
    { id: 1, name: "arc1", p: 0.99 },
    { id: 1, name: "arc1", p: 0.97 },
  ],
};

test("stroke colors key on the returned component ids", () => {
  const view = new ParseView();
  view.update(FULL);
  assert.equal(view.colorForStroke(0), componentColor(1));
  // two strokes with the same component share a color
  assert.equal(view.colorForStroke(0), view.colorForStroke(1));
});

test("without per-stroke predictions the assignment argmax colors strokes", () => {
  const view = new ParseView();
  view.update({ ...FULL, stroke_components: undefined });
  assert.equal(view.strokeComponentId(0), 1);
  assert.equal(view.strokeComponentId(1), 0);
  assert.notEqual(view.colorForStroke(0), view.colorForStroke(1));
});

test("palette is stable and total per component id", () => {
  assert.equal(componentColor(3), componentColor(3));
  assert.notEqual(componentColor(0), componentColor(1));
  assert.ok(componentColor(97).startsWith("#"));
});

test("clearing empties the parse view", () => {
  const view = new ParseView();
  view.update(FULL);
  view.clear();
  assert.equal(view.result, null);
  assert.deepEqual(view.categoryRanking(), []);
  assert.equal(view.explanation(), "");
  assert.deepEqual(view.existence(), []);
});

test("existence entries surface only when the service returns them", () => {
  const view = new ParseView();
  view.update(FULL);
  assert.deepEqual(view.existence(), []);
  view.update({
    ...FULL,
    existence: [{ name: "line0", p: 0.9 }],
  });
  assert.equal(view.existence().length, 1);
});
