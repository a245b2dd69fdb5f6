import assert from "node:assert/strict";
import { test } from "node:test";

import { StrokeCapture, strokeLength, toRequestStrokes } from "../src/strokes.js";

test("click without drag yields no stroke", () => {
  const cap = new StrokeCapture();
  cap.begin(10, 10, 0);
  assert.equal(cap.end(), null);
});

test("jitter below the sampling threshold still counts as a click", () => {
  const cap = new StrokeCapture(2);
  cap.begin(10, 10, 0);
  cap.move(10.5, 10.2, 1);
  cap.move(9.8, 10.1, 2);
  assert.equal(cap.end(), null);
});

test("straight drag keeps at least two points", () => {
  const cap = new StrokeCapture(2);
  cap.begin(0, 0, 0);
  for (let i = 1; i <= 10; i++) cap.move(i * 3, 0, i);
  const stroke = cap.end();
  assert.ok(stroke && stroke.length >= 2);
});

test("sampling keeps at most one point per 2px of path length", () => {
  const cap = new StrokeCapture(2);
  cap.begin(0, 0, 0);
  // scripted diagonal drag with sub-pixel steps
  for (let i = 1; i <= 400; i++) cap.move(i * 0.25, i * 0.17, i);
  const stroke = cap.end();
  assert.ok(stroke);
  const length = strokeLength(stroke);
  assert.ok(
    stroke.length - 1 <= length / 2,
    `${stroke.length} points for ${length.toFixed(1)}px of path`,
  );
});

test("moves while not active are ignored", () => {
  const cap = new StrokeCapture();
  cap.move(5, 5, 0);
  assert.equal(cap.active, false);
  assert.equal(cap.current().length, 0);
});

test("cancel discards the stroke in progress", () => {
  const cap = new StrokeCapture();
  cap.begin(0, 0, 0);
  cap.move(10, 10, 1);
  cap.cancel();
  assert.equal(cap.end(), null);
});

test("request payload is [[x, y], ...] per stroke", () => {
  const strokes = [
    [
      { x: 1, y: 2, t: 0 },
      { x: 3, y: 4, t: 1 },
    ],
  ];
  assert.deepEqual(toRequestStrokes(strokes), [[[1, 2], [3, 4]]]);
});
