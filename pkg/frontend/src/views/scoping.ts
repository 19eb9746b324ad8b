/** Scoping view: the research question plus editable review scope. */

import type { App } from '../app.js';
import { el } from '../format.js';

function linesToList(value: string): string[] {
  return value.split('\n').map((s) => s.trim()).filter(Boolean);
}

export async function renderScoping(app: App): Promise<HTMLElement> {
  const [project, scope] = await Promise.all([
    app.client.getProject(),
    app.client.getScope(),
  ]);

  const criteria = el('textarea', {
    id: 'scope-criteria',
    rows: '5',
    placeholder: 'one inclusion criterion per line',
  });
  criteria.value = scope.criteria.join('\n');
  const confounders = el('textarea', {
    id: 'scope-confounders',
    rows: '5',
    placeholder: 'one expected confounder per line',
  });
  confounders.value = scope.confounders.join('\n');
  const context = el('textarea', {
    id: 'scope-context',
    rows: '3',
    placeholder: 'the context you want your inference to apply to',
  });
  context.value = scope.target_context;

  const save = el('button', { class: 'primary', text: 'Save scope' });
  save.addEventListener('click', () =>
    app.guard(async () => {
      await app.client.putScope({
        criteria: linesToList(criteria.value),
        confounders: linesToList(confounders.value),
        target_context: context.value.trim(),
      });
      app.notify('Scope saved.');
    }),
  );

  return el(
    'section',
    { class: 'view scoping' },
    el('h2', { text: 'Scoping' }),
    el('p', { class: 'question-text', text: project.question_text }),
    el('div', { class: 'field' },
       el('label', { text: 'Study inclusion criteria' }), criteria),
    el('div', { class: 'field' },
       el('label', { text: 'Potential confounding variables' }), confounders),
    el('div', { class: 'field' },
       el('label', { text: 'Target context' }), context),
    save,
  );
}
