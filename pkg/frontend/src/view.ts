/**
 * DOM rendering layer. Renders a SessionState snapshot into the app root and
 * forwards clicks/keys to the controller; holds no state of its own beyond
 * the shared zoom factor for the image pair.
 */

import type { SessionController } from './controller.js';
import type { SessionState, Verdict } from './types.js';
import { GUIDANCE } from './types.js';

const VERDICT_BUTTONS: Array<{ verdict: Verdict; label: string; key: string }> = [
  { verdict: 'connected', label: 'Connected', key: 'Y' },
  { verdict: 'not-connected', label: 'Not connected', key: 'N' },
  { verdict: 'flagged', label: 'Flag for review', key: 'F' },
];

export class SessionView {
  private zoom = 1;

  constructor(
    private readonly root: HTMLElement,
    private readonly controller: SessionController,
  ) {
    document.addEventListener('keydown', (ev) => {
      if (ev.target instanceof HTMLInputElement) return;
      void this.controller.handleKey(ev.key);
    });
    controller.subscribe((state) => this.render(state));
  }

  private render(state: SessionState): void {
    this.root.replaceChildren();
    this.root.append(this.header(state));
    if (state.error) this.root.append(this.errorBanner(state));
    if (state.mode === 'review') {
      this.root.append(this.reviewPanel(state));
      return;
    }
    if (state.done) {
      this.root.append(this.doneScreen(state));
      return;
    }
    if (state.current) {
      this.root.append(this.imagePair(state.current.images));
      this.root.append(this.verdictBar());
      this.root.append(this.guidancePanel());
    }
  }

  private header(state: SessionState): HTMLElement {
    const el = div('header');
    const title = div('title');
    title.textContent = `${state.scenarioId} — ${state.annotator}`;
    const progress = div('progress');
    const bar = div('progress-bar');
    const fill = div('progress-fill');
    const pct = state.total ? (100 * state.labeled) / state.total : 0;
    fill.style.width = `${pct}%`;
    bar.append(fill);
    const text = div('progress-text');
    text.textContent = `${state.labeled} / ${state.total} pairs`;
    progress.append(bar, text);

    const nav = div('nav');
    const reviewBtn = button(
      state.mode === 'review' ? 'Back to labeling' : 'Review conflicts',
      () => {
        void (state.mode === 'review'
          ? this.controller.backToLabeling()
          : this.controller.openReview());
      },
    );
    nav.append(reviewBtn);
    el.append(title, progress, nav);
    return el;
  }

  private errorBanner(state: SessionState): HTMLElement {
    const el = div('error-banner');
    const msg = div('error-text');
    msg.textContent = `Request failed: ${state.error}. Nothing was lost; retry when ready.`;
    el.append(msg, button('Retry', () => void this.controller.retry()));
    return el;
  }

  private imagePair(images: [string, string]): HTMLElement {
    const el = div('image-pair');
    for (const src of images) {
      const frame = div('image-frame');
      const img = document.createElement('img');
      img.src = src;
      img.draggable = false;
      img.style.transform = `scale(${this.zoom})`;
      frame.append(img);
      el.append(frame);
    }
    // Wheel over either image zooms both, around the same factor.
    el.addEventListener('wheel', (ev) => {
      ev.preventDefault();
      this.zoom = Math.min(8, Math.max(1, this.zoom * (ev.deltaY < 0 ? 1.15 : 1 / 1.15)));
      for (const img of el.querySelectorAll('img')) {
        (img as HTMLImageElement).style.transform = `scale(${this.zoom})`;
      }
    });
    return el;
  }

  private verdictBar(): HTMLElement {
    const el = div('verdict-bar');
    for (const { verdict, label, key } of VERDICT_BUTTONS) {
      el.append(button(`${label} (${key})`, () => void this.controller.submitVerdict(verdict)));
    }
    return el;
  }

  private guidancePanel(): HTMLElement {
    const el = div('guidance');
    const heading = document.createElement('h3');
    heading.textContent = 'Judging a pair';
    el.append(heading);
    const list = document.createElement('ul');
    for (const { title, hint } of GUIDANCE) {
      const item = document.createElement('li');
      const strong = document.createElement('strong');
      strong.textContent = `${title}: `;
      item.append(strong, document.createTextNode(hint));
      list.append(item);
    }
    el.append(list);
    return el;
  }

  private doneScreen(state: SessionState): HTMLElement {
    const el = div('done-screen');
    const heading = document.createElement('h2');
    heading.textContent = 'All pairs labeled';
    const iou = div('iou');
    iou.textContent =
      state.iou === null ? '' : `Graph IoU vs ground truth: ${state.iou.toFixed(6)}`;
    el.append(heading, iou);
    if (state.iouPartial) {
      const note = div('note');
      note.textContent = 'Partial: unlabeled pairs counted as not connected.';
      el.append(note);
    }
    return el;
  }

  private reviewPanel(state: SessionState): HTMLElement {
    const el = div('review');
    const lists = div('review-lists');
    lists.append(
      this.pairList('Conflicts', state.report?.conflicts ?? [], state),
      this.pairList('Needs review (flagged)', state.report?.flagged ?? [], state),
    );
    el.append(lists, button('Refresh', () => void this.controller.refreshReview()));

    if (state.reviewPair) {
      el.append(this.imagePair(state.reviewPair.images));
      const verdicts = div('verdict-table');
      for (const [annotator, verdict] of Object.entries(state.reviewVerdicts ?? {})) {
        const row = div('verdict-row');
        row.textContent = `${annotator}: ${verdict}`;
        verdicts.append(row);
      }
      el.append(verdicts);
      const bar = div('verdict-bar');
      for (const { verdict, label, key } of VERDICT_BUTTONS) {
        bar.append(button(`Relabel ${label} (${key})`, () => void this.controller.relabel(verdict)));
      }
      el.append(bar);
    } else {
      const hint = div('note');
      hint.textContent = 'Select a pair to compare verdicts and relabel.';
      el.append(hint);
    }
    return el;
  }

  private pairList(titleText: string, pairs: Array<[number, number]>, state: SessionState): HTMLElement {
    const el = div('pair-list');
    const heading = document.createElement('h3');
    heading.textContent = `${titleText} (${pairs.length})`;
    el.append(heading);
    if (!pairs.length) {
      const empty = div('note');
      empty.textContent = 'none';
      el.append(empty);
      return el;
    }
    for (const pair of pairs) {
      const selected =
        state.reviewPair && state.reviewPair.pair[0] === pair[0] && state.reviewPair.pair[1] === pair[1];
      const btn = button(`views ${pair[0]} + ${pair[1]}`, () =>
        this.controller.selectReviewPair(pair),
      );
      if (selected) btn.classList.add('selected');
      el.append(btn);
    }
    return el;
  }
}

function div(className: string): HTMLDivElement {
  const el = document.createElement('div');
  el.className = className;
  return el;
}

function button(label: string, onClick: () => void): HTMLButtonElement {
  const el = document.createElement('button');
  el.type = 'button';
  el.textContent = label;
  el.addEventListener('click', onClick);
  return el;
}
