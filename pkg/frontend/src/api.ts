/** Thin typed client for the annotation service HTTP API. */

import type {
  AgreementReport,
  HumanGraphResponse,
  LabelAck,
  NextPairResponse,
  Pair,
  ScenarioInfo,
  Verdict,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(detail, response.status);
  }
  return (await response.json()) as T;
}

export class AnnotationApi {
  constructor(
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
    private readonly base: string = '',
  ) {}

  async listScenarios(): Promise<ScenarioInfo[]> {
    const body = await asJson<{ scenarios: ScenarioInfo[] }>(
      await this.fetchImpl(`${this.base}/api/scenarios`),
    );
    return body.scenarios;
  }

  nextPair(scenarioId: string, annotator: string): Promise<NextPairResponse> {
    const q = encodeURIComponent(annotator);
    return this.fetchImpl(
      `${this.base}/api/scenarios/${encodeURIComponent(scenarioId)}/next?annotator=${q}`,
    ).then((r) => asJson<NextPairResponse>(r));
  }

  submitLabel(
    scenarioId: string,
    pair: Pair,
    annotator: string,
    verdict: Verdict,
  ): Promise<LabelAck> {
    return this.fetchImpl(`${this.base}/api/scenarios/${encodeURIComponent(scenarioId)}/labels`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ pair, annotator, verdict }),
    }).then((r) => asJson<LabelAck>(r));
  }

  agreement(scenarioId: string): Promise<AgreementReport> {
    return this.fetchImpl(
      `${this.base}/api/scenarios/${encodeURIComponent(scenarioId)}/agreement`,
    ).then((r) => asJson<AgreementReport>(r));
  }

  humanGraph(scenarioId: string, annotator: string): Promise<HumanGraphResponse> {
    const q = encodeURIComponent(annotator);
    return this.fetchImpl(
      `${this.base}/api/scenarios/${encodeURIComponent(scenarioId)}/human-graph?annotator=${q}`,
    ).then((r) => asJson<HumanGraphResponse>(r));
  }

  imageUrl(scenarioId: string, viewId: number): string {
    return `${this.base}/api/scenarios/${encodeURIComponent(scenarioId)}/images/${viewId}`;
  }
}
