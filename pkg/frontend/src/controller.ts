/**
 * Session controller: all client logic, free of DOM dependencies.
 *
 * The controller owns a SessionState snapshot and notifies subscribers after
 * every change. Labels advance only once the service acknowledges the POST,
 * so no verdict can be lost to navigation; a failed request parks the state
 * behind an error banner and retry() re-runs the exact step that failed.
 */

import type { AnnotationApi } from './api.js';
import type { CurrentPair, Pair, SessionState, Verdict } from './types.js';

const KEY_VERDICTS: Record<string, Verdict> = {
  y: 'connected',
  n: 'not-connected',
  f: 'flagged',
};

export type Listener = (state: SessionState) => void;

export class SessionController {
  private state: SessionState;
  private listeners: Listener[] = [];
  private busy = false;
  private retryStep: (() => Promise<void>) | null = null;

  constructor(
    private readonly api: AnnotationApi,
    scenarioId: string,
    annotator: string,
  ) {
    this.state = {
      scenarioId,
      annotator,
      mode: 'labeling',
      current: null,
      labeled: 0,
      total: 0,
      done: false,
      iou: null,
      iouPartial: false,
      report: null,
      reviewPair: null,
      reviewVerdicts: null,
      error: null,
    };
  }

  snapshot(): SessionState {
    return { ...this.state };
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    listener(this.snapshot());
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    const snap = this.snapshot();
    for (const listener of this.listeners) listener(snap);
  }

  private async guarded(step: () => Promise<void>): Promise<void> {
    try {
      await step();
      this.state.error = null;
      this.retryStep = null;
    } catch (err) {
      this.state.error = err instanceof Error ? err.message : String(err);
      this.retryStep = step;
    }
    this.emit();
  }

  /** Begin the labeling flow: fetch the first unlabeled pair. */
  start(): Promise<void> {
    return this.guarded(() => this.advance());
  }

  /** Re-run whatever failed last (fetch-next or a label POST). */
  retry(): Promise<void> {
    const step = this.retryStep;
    if (!step) return Promise.resolve();
    return this.guarded(step);
  }

  private async advance(): Promise<void> {
    const next = await this.api.nextPair(this.state.scenarioId, this.state.annotator);
    this.state.labeled = next.labeled;
    this.state.total = next.total;
    if (next.done) {
      this.state.current = null;
      this.state.done = true;
      const graph = await this.api.humanGraph(this.state.scenarioId, this.state.annotator);
      this.state.iou = graph.iou;
      this.state.iouPartial = graph.partial;
      return;
    }
    this.state.current = { pair: next.pair!, images: next.images! };
    this.state.done = false;
  }

  /**
   * Submit a verdict for the pair on screen. Resolves to true once the
   * service acknowledged the event and the next pair (or done screen) is up.
   */
  async submitVerdict(verdict: Verdict): Promise<boolean> {
    const current = this.state.current;
    if (!current || this.busy || this.state.mode !== 'labeling') return false;
    this.busy = true;
    let acked = false;
    await this.guarded(async () => {
      const ack = await this.api.submitLabel(
        this.state.scenarioId,
        current.pair,
        this.state.annotator,
        verdict,
      );
      acked = ack.ok;
      this.state.labeled = ack.labeled;
      this.state.total = ack.total;
      await this.advance();
    });
    this.busy = false;
    return acked && this.state.error === null;
  }

  /**
   * Keyboard entry point; returns the verdict submission promise so callers
   * can await the acknowledgment, or null when the key does nothing. Key and
   * button paths share submitVerdict, so they produce identical events.
   */
  handleKey(key: string): Promise<boolean> | null {
    const verdict = KEY_VERDICTS[key.toLowerCase()];
    if (!verdict) return null;
    if (this.state.mode === 'review') {
      if (!this.state.reviewPair) return null;
      return this.relabel(verdict);
    }
    return this.submitVerdict(verdict);
  }

  /** Switch to the conflict-review view and load the agreement report. */
  openReview(): Promise<void> {
    this.state.mode = 'review';
    this.state.reviewPair = null;
    this.state.reviewVerdicts = null;
    return this.guarded(async () => {
      this.state.report = await this.api.agreement(this.state.scenarioId);
    });
  }

  /** Refresh the report; drops the selected pair if its conflict cleared. */
  refreshReview(): Promise<void> {
    return this.guarded(async () => {
      const report = await this.api.agreement(this.state.scenarioId);
      this.state.report = report;
      const selected = this.state.reviewPair?.pair;
      if (selected) {
        const stillListed =
          report.conflicts.some((p) => samePair(p, selected)) ||
          report.flagged.some((p) => samePair(p, selected));
        if (!stillListed) {
          this.state.reviewPair = null;
          this.state.reviewVerdicts = null;
        } else {
          this.state.reviewVerdicts = verdictsFor(report, selected);
        }
      }
    });
  }

  /** Open one conflicting pair: both images plus each annotator's verdict. */
  selectReviewPair(pair: Pair): void {
    const report = this.state.report;
    if (!report) return;
    this.state.reviewPair = {
      pair,
      images: [
        this.api.imageUrl(this.state.scenarioId, pair[0]),
        this.api.imageUrl(this.state.scenarioId, pair[1]),
      ],
    };
    this.state.reviewVerdicts = verdictsFor(report, pair);
    this.emit();
  }

  /** Post a superseding event for the selected pair, then refresh. */
  async relabel(verdict: Verdict): Promise<boolean> {
    const selected = this.state.reviewPair;
    if (!selected || this.busy) return false;
    this.busy = true;
    let acked = false;
    await this.guarded(async () => {
      const ack = await this.api.submitLabel(
        this.state.scenarioId,
        selected.pair,
        this.state.annotator,
        verdict,
      );
      acked = ack.ok;
      const report = await this.api.agreement(this.state.scenarioId);
      this.state.report = report;
      const stillListed =
        report.conflicts.some((p) => samePair(p, selected.pair)) ||
        report.flagged.some((p) => samePair(p, selected.pair));
      if (!stillListed) {
        this.state.reviewPair = null;
        this.state.reviewVerdicts = null;
      } else {
        this.state.reviewVerdicts = verdictsFor(report, selected.pair);
      }
    });
    this.busy = false;
    return acked && this.state.error === null;
  }

  /** Leave review mode and resume (or finish) labeling. */
  backToLabeling(): Promise<void> {
    this.state.mode = 'labeling';
    this.state.reviewPair = null;
    this.state.reviewVerdicts = null;
    return this.guarded(() => this.advance());
  }
}

function samePair(a: Pair, b: Pair): boolean {
  return a[0] === b[0] && a[1] === b[1];
}

function verdictsFor(report: { pairs: { pair: Pair; verdicts: Record<string, Verdict> }[] }, pair: Pair) {
  const row = report.pairs.find((p) => samePair(p.pair, pair));
  return row ? { ...row.verdicts } : {};
}

export { KEY_VERDICTS };
