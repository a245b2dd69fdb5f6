// Application controller: pointer capture -> session strokes -> submit on
// every pen-up -> recolor and panels from the response.

import { RecognizeClient, SuperededError } from "./client.js";
import { INK_COLOR } from "./palette.js";
import { CanvasStroke, StrokeCapture, toRequestStrokes } from "./strokes.js";
import { ParseView } from "./view.js";

export interface AppElements {
  canvas: HTMLCanvasElement;
  categories: HTMLElement;
  explanation: HTMLElement;
  existence: HTMLElement;
  banner: HTMLElement;
  clearButton: HTMLElement;
  status: HTMLElement;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export class SketchApp {
  strokes: CanvasStroke[] = [];
  readonly capture = new StrokeCapture();
  readonly view = new ParseView();
  /** Completed submit/render cycles, for tests and debugging. */
  renderCount = 0;

  constructor(
    private readonly el: AppElements,
    readonly client: RecognizeClient,
  ) {}

  attach(): void {
    const canvas = this.el.canvas;
    canvas.addEventListener("pointerdown", (e: PointerEvent) => {
      if (canvas.setPointerCapture) canvas.setPointerCapture(e.pointerId);
      this.pointerDown(e.offsetX, e.offsetY, e.timeStamp);
    });
    canvas.addEventListener("pointermove", (e: PointerEvent) => {
      this.pointerMove(e.offsetX, e.offsetY, e.timeStamp);
    });
    canvas.addEventListener("pointerup", () => {
      void this.pointerUp();
    });
    canvas.addEventListener("pointercancel", () => {
      this.capture.cancel();
      this.redraw();
    });
    this.el.clearButton.addEventListener("click", () => this.clearAll());
  }

  pointerDown(x: number, y: number, t: number): void {
    this.capture.begin(x, y, t);
  }

  pointerMove(x: number, y: number, t: number): void {
    if (!this.capture.active) return;
    this.capture.move(x, y, t);
    this.redraw();
  }

  /** Pen-up: finalize the stroke and submit the whole session once. */
  async pointerUp(): Promise<void> {
    const stroke = this.capture.end();
    if (stroke === null) {
      this.redraw();
      return;
    }
    this.strokes.push(stroke);
    this.redraw();
    await this.submit();
  }

  private async submit(): Promise<void> {
    try {
      const result = await this.client.recognize(toRequestStrokes(this.strokes));
      this.el.banner.hidden = true;
      this.view.update(result);
      this.renderCount += 1;
      this.redraw();
      this.renderPanels();
    } catch (err) {
      if (err instanceof SuperededError) return; // a newer pen-up took over
      this.el.banner.hidden = false;
      this.el.banner.textContent =
        "recognition service unreachable; strokes kept";
    }
  }

  clearAll(): void {
    this.strokes = [];
    this.capture.cancel();
    this.view.clear();
    this.redraw();
    this.renderPanels();
  }

  redraw(): void {
    const canvas = this.el.canvas;
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.lineWidth = 3;
    ctx.lineCap = "round";
    ctx.lineJoin = "round";
    this.strokes.forEach((stroke, i) => {
      this.drawPolyline(ctx, stroke, this.view.colorForStroke(i));
    });
    const active = this.capture.current();
    if (active.length > 1) {
      this.drawPolyline(ctx, active, INK_COLOR);
    }
  }

  private drawPolyline(
    ctx: CanvasRenderingContext2D,
    points: readonly { x: number; y: number }[],
    color: string,
  ): void {
    ctx.strokeStyle = color;
    ctx.beginPath();
    ctx.moveTo(points[0].x, points[0].y);
    for (let i = 1; i < points.length; i++) {
      ctx.lineTo(points[i].x, points[i].y);
    }
    ctx.stroke();
  }

  renderPanels(): void {
    const ranking = this.view.categoryRanking().slice(0, 3);
    this.el.categories.innerHTML = ranking
      .map(
        (c) =>
          `<li><span class="name">${escapeHtml(c.name)}</span>` +
          `<span class="prob">${(c.p * 100).toFixed(1)}%</span></li>`,
      )
      .join("");
    this.el.explanation.textContent = this.view.explanation();
    const existence = this.view.existence();
    this.el.existence.innerHTML = existence
      .map((e) => {
        const mark = e.p > 0.5 ? "present" : "absent";
        return (
          `<li class="${mark}">${escapeHtml(e.name)}` +
          `<span class="prob">${(e.p * 100).toFixed(0)}%</span></li>`
        );
      })
      .join("");
  }
}

/** Browser entry point. */
export async function mount(doc: Document, baseUrl = ""): Promise<SketchApp> {
  const get = (id: string) => {
    const node = doc.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node;
  };
  const elements: AppElements = {
    canvas: get("board") as HTMLCanvasElement,
    categories: get("categories"),
    explanation: get("explanation"),
    existence: get("existence"),
    banner: get("banner"),
    clearButton: get("clear"),
    status: get("status"),
  };
  const client = new RecognizeClient(baseUrl);
  const app = new SketchApp(elements, client);
  app.attach();
  try {
    const info = await client.modelInfo();
    elements.status.textContent =
      `model: ${info.scenario} / ${info.fusion_mode}, ` +
      `${info.label_space.categories.length} categories, ` +
      `${info.label_space.components.length} component types`;
  } catch {
    elements.status.textContent = "model info unavailable";
  }
  return app;
}
