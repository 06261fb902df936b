/** Shared types for the annotation client. */

export type Verdict = 'connected' | 'not-connected' | 'flagged';

export type Pair = [number, number];

export interface ScenarioInfo {
  id: string;
  views: number;
  pairs: number;
  has_images: boolean;
}

export interface NextPairResponse {
  done: boolean;
  pair?: Pair;
  images?: [string, string];
  labeled: number;
  total: number;
}

export interface LabelAck {
  ok: boolean;
  events: number;
  labeled: number;
  total: number;
}

export interface PairVerdicts {
  pair: Pair;
  verdicts: Record<string, Verdict>;
}

export interface AgreementReport {
  scenario: string;
  pairs: PairVerdicts[];
  agreed: number;
  agreed_pairs: Pair[];
  conflicts: Pair[];
  flagged: Pair[];
  completion: Record<string, number>;
  total_pairs: number;
}

export interface HumanGraphResponse {
  scenario: string;
  annotator: string;
  partial: boolean;
  iou: number;
  nodes: number[];
  edges: Pair[];
  graph: unknown;
}

export type Mode = 'labeling' | 'review';

/** Current pair on screen plus its image URLs. */
export interface CurrentPair {
  pair: Pair;
  images: [string, string];
}

/**
 * Everything the view needs to draw one frame. The controller owns this
 * state; only acknowledged POSTs mutate the labeled count.
 */
export interface SessionState {
  scenarioId: string;
  annotator: string;
  mode: Mode;
  current: CurrentPair | null;
  labeled: number;
  total: number;
  done: boolean;
  /** IoU against ground truth, shown on the done screen. */
  iou: number | null;
  iouPartial: boolean;
  report: AgreementReport | null;
  /** Conflict pair opened in the review panel. */
  reviewPair: CurrentPair | null;
  reviewVerdicts: Record<string, Verdict> | null;
  error: string | null;
}

/** The four pair-judgment criteria shown as on-screen guidance. */
export const GUIDANCE: ReadonlyArray<{ title: string; hint: string }> = [
  {
    title: 'Shared objects',
    hint: 'The same recognizable object appears in both views, enough to place the cameras relative to each other.',
  },
  {
    title: 'Object Continuity',
    hint: 'Each view shows a different part of one object, and the parts line up as a continuous whole.',
  },
  {
    title: 'Sub-Scene Relationship',
    hint: 'One view is a close-up or partly blocked portion of what the other view shows.',
  },
  {
    title: 'Featureless Surface',
    hint: 'If the shared region is a blank surface with nothing distinctive, treat the pair as not connected.',
  },
];
