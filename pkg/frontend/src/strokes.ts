// Stroke capture with distance-thresholded sampling.

export interface StrokePoint {
  x: number;
  y: number;
  t: number;
}

export type CanvasStroke = StrokePoint[];

/**
 * Accumulates pointer positions into a stroke. Points closer than
 * `minDistancePx` to the last kept point are dropped, so a stroke carries
 * at most one point per `minDistancePx` of path length (plus the start).
 * A click without a drag (fewer than two kept points) yields no stroke.
 */
export class StrokeCapture {
  private points: StrokePoint[] = [];
  private down = false;

  constructor(private minDistancePx = 2) {}

  get active(): boolean {
    return this.down;
  }

  current(): readonly StrokePoint[] {
    return this.points;
  }

  begin(x: number, y: number, t: number): void {
    this.down = true;
    this.points = [{ x, y, t }];
  }

  move(x: number, y: number, t: number): void {
    if (!this.down) return;
    const last = this.points[this.points.length - 1];
    if (Math.hypot(x - last.x, y - last.y) >= this.minDistancePx) {
      this.points.push({ x, y, t });
    }
  }

  /** Finalize on pointer-up; returns null for a zero-length drag. */
  end(): CanvasStroke | null {
    if (!this.down) return null;
    this.down = false;
    const stroke = this.points;
    this.points = [];
    return stroke.length >= 2 ? stroke : null;
  }

  cancel(): void {
    this.down = false;
    this.points = [];
  }
}

/** Polyline length of a stroke in pixels. */
export function strokeLength(stroke: readonly StrokePoint[]): number {
  let total = 0;
  for (let i = 1; i < stroke.length; i++) {
    total += Math.hypot(stroke[i].x - stroke[i - 1].x, stroke[i].y - stroke[i - 1].y);
  }
  return total;
}

/** Strokes as the [[x, y], ...] lists the service expects. */
export function toRequestStrokes(strokes: readonly CanvasStroke[]): number[][][] {
  return strokes.map((s) => s.map((p) => [p.x, p.y]));
}
