// Wire types for the recognition service's JSON API.

export interface CategoryScore {
  name: string;
  p: number;
}

export interface StrokeComponent {
  id: number;
  name: string;
  p: number;
}

export interface ExistenceEntry {
  name: string;
  p: number;
}

export interface RecognitionResult {
  categories: CategoryScore[];
  explanation: string;
  assignment: number[][];
  stroke_components?: StrokeComponent[];
  existence?: ExistenceEntry[];
}

export interface ModelInfo {
  scenario: string;
  fusion_mode: string;
  token_path: string;
  dims: { d: number; n_layers: number; n_heads: number; max_strokes: number };
  label_space: {
    categories: string[];
    components: string[];
    composition: Record<string, string[]>;
  };
  checkpoint_sha256: string;
}
