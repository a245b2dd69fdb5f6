// Parse-view state: the last recognition result and what it implies for
// stroke coloring and the side panels. Pure state, no DOM.

import { componentColor, INK_COLOR } from "./palette.js";
import type { RecognitionResult } from "./types.js";

export class ParseView {
  result: RecognitionResult | null = null;

  update(result: RecognitionResult): void {
    this.result = result;
  }

  clear(): void {
    this.result = null;
  }

  /** Component id for a drawn stroke, from the scenario's fields:
   * per-stroke predictions when present, otherwise the returned
   * assignment row's argmax. */
  strokeComponentId(strokeIndex: number): number {
    if (!this.result) return -1;
    const sc = this.result.stroke_components;
    if (sc && strokeIndex < sc.length) return sc[strokeIndex].id;
    const row = this.result.assignment[strokeIndex];
    if (!row) return -1;
    let best = 0;
    for (let j = 1; j < row.length; j++) {
      if (row[j] > row[best]) best = j;
    }
    return best;
  }

  colorForStroke(strokeIndex: number): string {
    if (!this.result) return INK_COLOR;
    return componentColor(this.strokeComponentId(strokeIndex));
  }

  categoryRanking(): { name: string; p: number }[] {
    return this.result ? this.result.categories : [];
  }

  explanation(): string {
    return this.result ? this.result.explanation : "";
  }

  existence(): { name: string; p: number }[] {
    return this.result?.existence ?? [];
  }
}
