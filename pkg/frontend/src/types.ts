/** Wire types mirroring the service's JSON payloads. The UI renders these
 * verbatim; it never derives statistics of its own. */

export interface Citation {
  authors: string;
  year: number;
  title: string;
}

export interface DocumentPayload {
  id: string;
  citation: Citation;
  file_ref: string | null;
  review_status: 'not_started' | 'in_progress' | 'complete';
  provisionally_included: boolean;
  duplicate_of: string | null;
  label?: string;
  annotations?: AnnotationPayload[];
}

export interface AnnotationPayload {
  id: string;
  document_id: string;
  kind: string;
  page: number;
  region: { x: number; y: number; w: number; h: number } | null;
  text: string | null;
  link_target: string | null;
}

export interface ScopePayload {
  criteria: string[];
  confounders: string[];
  target_context: string;
  revision?: number;
}

export interface ProjectPayload {
  id: string;
  schema_version: number;
  question: { intervention: string; outcome: string; topic: string };
  question_text: string;
  scope: ScopePayload;
  documents: DocumentPayload[];
  groups: GroupPayload[];
  revision: number;
}

export interface GroupPayload {
  name: string;
  member_ids: string[];
  meta_analyzed: boolean;
}

export interface SchemaQuestion {
  id: string;
  section: string;
  prompt: string;
  answer_kind: 'text' | 'integer' | 'number' | 'boolean' | 'single_choice' | 'multi_choice';
  options: string[];
  show_if: [string, unknown][];
  mandatory: boolean;
  qa_link: string | null;
  manual: { description: string; location: string; importance: string };
}

export interface QualityQuestion {
  id: string;
  table_kind: 'risk_of_bias' | 'construct_consistency' | 'applicability';
  prompt: string;
  extraction_link: string;
}

export interface SchemaPayload {
  extraction: SchemaQuestion[];
  quality: QualityQuestion[];
}

export interface QualityAnswerPayload {
  question_id: string;
  verdict: 'yes' | 'no' | 'not_sure';
  note: string;
}

export interface ResultRow {
  id?: string;
  label: string;
  design?: string;
  outcome_kind?: string;
  effect_kind?: string;
  data: Record<string, number | null>;
  units?: string | null;
}

export interface EvidenceTableSchema {
  design: string;
  outcome_kind: string;
  columns: string[];
  optional_columns: string[];
  timepoints: string[];
}

export interface ValidationReport {
  ok: boolean;
  missing_mandatory: string[];
  note_violations: string[];
  invalid_values: string[];
}

export interface AnswersPayload {
  answers: Record<string, unknown>;
  results: ResultRow[];
  evidence_table: EvidenceTableSchema | null;
  validation: ValidationReport;
  revision: number;
}

export interface TriageColumnPayload {
  id: string;
  prompt: string;
  source: 'extraction' | 'quality';
}

export interface TriageRowPayload {
  result_id: string;
  document_id: string;
  label: string;
  cells: Record<string, unknown>;
  quality_notes: Record<string, string>;
  action: { choice: string; note: string } | null;
}

export interface TriageTablePayload {
  kind: string;
  columns: TriageColumnPayload[];
  rows: TriageRowPayload[];
  highlighted_cells: [number, string][];
  revision: number;
}

export interface DotplotPayload {
  quantiles: number[];
  dots: { bin_center: number; stack_index: number }[];
  bin_width: number;
  axis: { min: number; max: number };
}

export interface EffectPayload {
  kind: string;
  y: number;
  v: number;
  original_units: string | null;
  correction_applied: string | null;
}

export interface AnalysisRowPayload {
  result_id: string;
  document_id: string;
  citation: string;
  timepoint: string;
  arm_summary: string;
  arms: Record<string, number | null>;
  effect: EffectPayload;
  flag: { note: string } | null;
  warnings: string[];
  included: boolean;
  dotplot: DotplotPayload | null;
  original_units?: {
    convertible: boolean;
    y?: number;
    v?: number;
    units?: string | null;
    reason?: string;
  };
  original_dotplot?: DotplotPayload | null;
}

export interface PooledPayload {
  mu: number;
  se: number;
  ci95: [number, number];
  tau2: number;
  Q: number;
  I2: number;
  k: number;
  dotplot: DotplotPayload;
}

export interface GroupTablePayload {
  name: string;
  meta_analyzed: boolean;
  axis: { min: number; max: number } | null;
  rows: AnalysisRowPayload[];
  pooled: PooledPayload | null;
  pooled_note: string | null;
}

export interface AnalysisPayload {
  question: string;
  revision: number;
  include_mask: { excluded: string[] };
  sort: 'none' | 'effect';
  units: 'standardized' | 'original';
  groups: GroupTablePayload[];
}

export type TriageKind = 'risk_of_bias' | 'construct_consistency' | 'applicability';

export const TRIAGE_KINDS: TriageKind[] = [
  'risk_of_bias',
  'construct_consistency',
  'applicability',
];

export const ACTION_CHOICES: Record<TriageKind, string[]> = {
  risk_of_bias: ['include', 'exclude', 'flag'],
  construct_consistency: ['include', 'exclude', 'separate'],
  applicability: ['include', 'exclude', 'show_separately'],
};
