// End-to-end: drive the app against a live recognition server.
//
// Orchestrated from the Python test suite, which trains an overfit
// checkpoint, starts the service, and sets SKETCHREC_E2E_URL plus
// SKETCHREC_E2E_SKETCH (a JSON file with canvas-pixel strokes of a
// training sample and its category name). Skipped when unset.
import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { test } from "node:test";
import { SketchApp } from "../src/app.js";
import { RecognizeClient } from "../src/client.js";
import { StubCanvas, StubElement, pointerEvent } from "./dom_stub.js";
const url = process.env.SKETCHREC_E2E_URL;
const sketchPath = process.env.SKETCHREC_E2E_SKETCH;
test("drawing a training sample ranks its true category first", { skip: !url || !sketchPath }, async () => {
    const fixture = JSON.parse(readFileSync(sketchPath, "utf-8"));
    const canvas = new StubCanvas();
    const elements = {
        canvas: canvas,
        categories: new StubElement(),
        explanation: new StubElement(),
        existence: new StubElement(),
        banner: new StubElement(),
        clearButton: new StubElement(),
        status: new StubElement(),
    };
    const client = new RecognizeClient(url);
    const app = new SketchApp(elements, client);
    app.attach();
    let penUps = 0;
    for (const stroke of fixture.strokes) {
        canvas.dispatch("pointerdown", pointerEvent(stroke[0][0], stroke[0][1]));
        for (let i = 1; i < stroke.length; i++) {
            canvas.dispatch("pointermove", pointerEvent(stroke[i][0], stroke[i][1], i));
        }
        canvas.dispatch("pointerup", pointerEvent(0, 0));
        penUps += 1;
        // wait for the in-flight submission to settle before the next stroke
        const banner = elements.banner;
        const deadline = Date.now() + 5000;
        while (app.renderCount < penUps && Date.now() < deadline) {
            if (!banner.hidden && banner.textContent)
                break; // service failure
            await new Promise((r) => setTimeout(r, 5));
        }
    }
    assert.equal(client.requestCount, penUps, "one request per pen-up");
    const ranking = app.view.categoryRanking();
    assert.ok(ranking.length > 0, "no recognition result arrived");
    assert.equal(ranking[0].name, fixture.category_name);
    assert.ok(ranking[0].p > 0.99, `confidence ${ranking[0].p}`);
    const explanation = elements.explanation.textContent;
    assert.match(explanation, /Recognized as/);
    // every drawn stroke has exactly one color once a result arrives
    canvas.ctx.strokeColors = [];
    app.redraw();
    assert.equal(canvas.ctx.strokeColors.length, fixture.strokes.length);
});
