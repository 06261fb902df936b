import { describe, expect, it } from 'vitest';

import { AnnotationApi, ApiError } from '../src/api.js';
import { FakeService } from './fake_service.js';

describe('AnnotationApi', () => {
  it('lists scenarios', async () => {
    const service = new FakeService('demo', 4, [[0, 1]]);
    const api = new AnnotationApi(service.fetch);
    const scenarios = await api.listScenarios();
    expect(scenarios).toEqual([{ id: 'demo', views: 4, pairs: 6, has_images: true }]);
  });

  it('propagates error details with status codes', async () => {
    const service = new FakeService('demo', 4, []);
    const api = new AnnotationApi(service.fetch);
    await expect(api.humanGraph('demo', 'ghost')).rejects.toThrowError(ApiError);
    await expect(api.humanGraph('demo', 'ghost')).rejects.toMatchObject({ status: 404 });
  });

  it('posts labels with the documented body shape', async () => {
    const service = new FakeService('demo', 4, []);
    const api = new AnnotationApi(service.fetch);
    const ack = await api.submitLabel('demo', [0, 2], 'amy', 'connected');
    expect(ack.ok).toBe(true);
    expect(service.events[0]).toEqual({ pair: [0, 2], annotator: 'amy', verdict: 'connected' });
  });

  it('rejects malformed pairs with a 400', async () => {
    const service = new FakeService('demo', 4, []);
    const api = new AnnotationApi(service.fetch);
    await expect(api.submitLabel('demo', [2, 0], 'amy', 'connected')).rejects.toMatchObject({
      status: 400,
    });
  });

  it('builds image urls', () => {
    const api = new AnnotationApi();
    expect(api.imageUrl('demo', 3)).toBe('/api/scenarios/demo/images/3');
  });
});
