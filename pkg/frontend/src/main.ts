/** Entry point: scenario/annotator picker, then the labeling session. */

import { AnnotationApi } from './api.js';
import { SessionController } from './controller.js';
import { SessionView } from './view.js';

const api = new AnnotationApi();

function startSession(scenarioId: string, annotator: string): void {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app element');
  const controller = new SessionController(api, scenarioId, annotator);
  new SessionView(root, controller);
  void controller.start();
}

async function showPicker(): Promise<void> {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app element');
  root.replaceChildren();

  const form = document.createElement('form');
  form.className = 'picker';
  const heading = document.createElement('h2');
  heading.textContent = 'Co-visibility annotation';

  const select = document.createElement('select');
  select.name = 'scenario';
  try {
    for (const s of await api.listScenarios()) {
      const option = document.createElement('option');
      option.value = s.id;
      option.textContent = `${s.id} (${s.views} views, ${s.pairs} pairs)`;
      select.append(option);
    }
  } catch (err) {
    const msg = document.createElement('div');
    msg.className = 'error-banner';
    msg.textContent = `Cannot reach the annotation service: ${String(err)}`;
    root.append(msg);
    return;
  }

  const name = document.createElement('input');
  name.name = 'annotator';
  name.placeholder = 'annotator name';
  name.required = true;

  const go = document.createElement('button');
  go.type = 'submit';
  go.textContent = 'Start labeling';

  form.append(heading, select, name, go);
  form.addEventListener('submit', (ev) => {
    ev.preventDefault();
    if (!select.value || !name.value) return;
    const url = new URL(window.location.href);
    url.searchParams.set('scenario', select.value);
    url.searchParams.set('annotator', name.value);
    window.history.replaceState(null, '', url);
    startSession(select.value, name.value);
  });
  root.append(form);
}

const params = new URLSearchParams(window.location.search);
const scenario = params.get('scenario');
const annotator = params.get('annotator');
if (scenario && annotator) {
  startSession(scenario, annotator);
} else {
  void showPicker();
}
