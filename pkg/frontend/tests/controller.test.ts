import { describe, expect, it } from 'vitest';

import { AnnotationApi } from '../src/api.js';
import { SessionController } from '../src/controller.js';
import type { Pair, Verdict } from '../src/types.js';
import { FakeService } from './fake_service.js';

const GT_EDGES: Pair[] = [
  [0, 1],
  [1, 2],
  [2, 3],
  [3, 4],
  [4, 5],
  [0, 5],
];

function setup(annotator = 'amy') {
  const service = new FakeService('sixpack', 6, GT_EDGES);
  const api = new AnnotationApi(service.fetch);
  const controller = new SessionController(api, 'sixpack', annotator);
  return { service, api, controller };
}

function gtVerdict(pair: Pair): Verdict {
  return GT_EDGES.some((e) => e[0] === pair[0] && e[1] === pair[1])
    ? 'connected'
    : 'not-connected';
}

describe('labeling flow', () => {
  it('labels all 15 pairs by keyboard, one acknowledged event per keystroke', async () => {
    const { service, controller } = setup();
    await controller.start();

    let keystrokes = 0;
    while (!controller.snapshot().done) {
      const pair = controller.snapshot().current!.pair;
      const promise = controller.handleKey(gtVerdict(pair) === 'connected' ? 'y' : 'n');
      expect(promise).not.toBeNull();
      keystrokes += 1;
      const acked = await promise!;
      expect(acked).toBe(true);
      expect(service.events.length).toBe(keystrokes);
      expect(keystrokes).toBeLessThanOrEqual(15);
    }

    // One keystroke per pair: 15 interaction steps total, nothing else needed.
    expect(keystrokes).toBe(15);
    expect(service.events.length).toBe(15);
    expect(controller.snapshot().labeled).toBe(15);
  });

  it('shows the service-computed IoU on the done screen', async () => {
    const { service, controller } = setup();
    await controller.start();
    while (!controller.snapshot().done) {
      await controller.handleKey(gtVerdict(controller.snapshot().current!.pair) === 'connected' ? 'y' : 'n');
    }
    const state = controller.snapshot();
    expect(state.iou).toBe(service.humanIou('amy'));
    expect(state.iou).toBeGreaterThan(0.999999);
    expect(state.iouPartial).toBe(false);
  });

  it('keyboard and button paths produce identical events', async () => {
    const first = setup('kb');
    await first.controller.start();
    await first.controller.handleKey('f');

    const second = setup('btn');
    await second.controller.start();
    await second.controller.submitVerdict('flagged');

    expect(first.service.events[0]!.pair).toEqual(second.service.events[0]!.pair);
    expect(first.service.events[0]!.verdict).toBe(second.service.events[0]!.verdict);
  });

  it('ignores keys that are not verdicts', async () => {
    const { service, controller } = setup();
    await controller.start();
    expect(controller.handleKey('x')).toBeNull();
    expect(controller.handleKey('Escape')).toBeNull();
    expect(service.events.length).toBe(0);
  });

  it('maps y, n, and f to the three verdicts', async () => {
    const { service, controller } = setup();
    await controller.start();
    await controller.handleKey('y');
    await controller.handleKey('N');
    await controller.handleKey('f');
    expect(service.events.map((e) => e.verdict)).toEqual([
      'connected',
      'not-connected',
      'flagged',
    ]);
  });
});

describe('failure handling', () => {
  it('keeps the pair and loses nothing on a failed POST, then retries', async () => {
    const { service, controller } = setup();
    await controller.start();
    const pair = controller.snapshot().current!.pair;

    service.failNextPost = true;
    const acked = await controller.submitVerdict('connected');
    expect(acked).toBe(false);
    expect(service.events.length).toBe(0);

    const state = controller.snapshot();
    expect(state.error).not.toBeNull();
    expect(state.current!.pair).toEqual(pair);

    await controller.retry();
    expect(service.events.length).toBe(1);
    expect(service.events[0]!.pair).toEqual(pair);
    expect(controller.snapshot().error).toBeNull();
    expect(controller.snapshot().current!.pair).not.toEqual(pair);
  });

  it('does not double-submit while a post is in flight', async () => {
    const { service, controller } = setup();
    await controller.start();
    const p1 = controller.submitVerdict('connected');
    const p2 = controller.submitVerdict('connected');
    await Promise.all([p1, p2]);
    expect(service.events.length).toBe(1);
  });
});

describe('review flow', () => {
  async function labelEverything(service: FakeService, annotator: string, flip: Pair | null) {
    for (const pair of service.pairs) {
      let verdict = gtVerdict(pair);
      if (flip && flip[0] === pair[0] && flip[1] === pair[1]) {
        verdict = verdict === 'connected' ? 'not-connected' : 'connected';
      }
      service.events.push({ pair, annotator, verdict });
    }
  }

  it('lists conflicts and clears one after consistent relabeling', async () => {
    const { service, controller } = setup('bob');
    await labelEverything(service, 'alice', null);
    await labelEverything(service, 'bob', [1, 2]); // seeded conflict

    await controller.openReview();
    let state = controller.snapshot();
    expect(state.mode).toBe('review');
    expect(state.report!.conflicts).toEqual([[1, 2]]);

    controller.selectReviewPair([1, 2]);
    state = controller.snapshot();
    expect(state.reviewPair!.pair).toEqual([1, 2]);
    expect(state.reviewVerdicts).toEqual({ alice: 'connected', 'bob': 'not-connected' });
    expect(state.reviewPair!.images[0]).toContain('/images/1');

    // Bob relabels to agree with Alice; the conflict disappears on refresh.
    const acked = await controller.relabel('connected');
    expect(acked).toBe(true);
    state = controller.snapshot();
    expect(state.report!.conflicts).toEqual([]);
    expect(state.reviewPair).toBeNull();
  });

  it('shows flagged-only pairs in their own list', async () => {
    const { service, controller } = setup('bob');
    service.events.push({ pair: [0, 1], annotator: 'alice', verdict: 'flagged' });
    service.events.push({ pair: [0, 1], annotator: 'bob', verdict: 'flagged' });
    await controller.openReview();
    const report = controller.snapshot().report!;
    expect(report.flagged).toEqual([[0, 1]]);
    expect(report.conflicts).toEqual([]);
  });

  it('relabels via keyboard in review mode', async () => {
    const { service, controller } = setup('bob');
    await labelEverything(service, 'alice', null);
    await labelEverything(service, 'bob', [0, 1]);
    await controller.openReview();
    controller.selectReviewPair([0, 1]);
    const promise = controller.handleKey('y');
    expect(promise).not.toBeNull();
    await promise!;
    expect(service.events.at(-1)).toEqual({ pair: [0, 1], annotator: 'bob', verdict: 'connected' });
  });

  it('returns to labeling mode and keeps going', async () => {
    const { controller } = setup();
    await controller.start();
    await controller.openReview();
    expect(controller.snapshot().mode).toBe('review');
    await controller.backToLabeling();
    const state = controller.snapshot();
    expect(state.mode).toBe('labeling');
    expect(state.current).not.toBeNull();
  });
});
