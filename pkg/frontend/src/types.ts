// Shapes of the triage-service JSON contract plus the session-side records.

export type TypeScore = {
  name: string;
  probability: number;
  predicted: boolean;
};

export type ClassifyResponse = {
  severity_label: string;
  severity_index: number;
  severity_probs: number[];
  types: TypeScore[];
  model_version: string;
  latency_ms: number;
};

export type LabelsResponse = {
  severities: string[];
  types: string[];
};

export type TriageEntry = {
  submitted_text: string;
  response: ClassifyResponse;
  submitted_at: string; // ISO 8601; entries are kept in submission order
  note?: string;
};

export type UiConfig = {
  api_base_url: string;
  threshold_override?: number;
};
