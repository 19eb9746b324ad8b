/** Review management: registered articles, progress, provisional inclusion. */

import type { App } from '../app.js';
import { el } from '../format.js';

const STATUS_LABELS: Record<string, string> = {
  not_started: 'not started',
  in_progress: 'in progress',
  complete: 'complete',
};

export async function renderReview(app: App): Promise<HTMLElement> {
  const project = await app.client.getProject();

  const authors = el('input', { id: 'new-doc-authors', placeholder: 'Authors' });
  const year = el('input', { id: 'new-doc-year', placeholder: 'Year', type: 'number' });
  const title = el('input', { id: 'new-doc-title', placeholder: 'Title' });
  const fileRef = el('input', { id: 'new-doc-file', placeholder: 'PDF path or URL (optional)' });
  const add = el('button', { class: 'primary', text: 'Add article' });
  add.addEventListener('click', () =>
    app.guard(async () => {
      const doc = await app.client.addDocument({
        authors: authors.value.trim(),
        year: Number(year.value),
        title: title.value.trim(),
      }, fileRef.value.trim() || undefined);
      app.notify(doc.duplicate_of
        ? `Added ${doc.id} (warning: possible duplicate of ${doc.duplicate_of}).`
        : `Added ${doc.id}.`);
      await app.refresh();
    }),
  );

  const rows = project.documents.map((doc) => {
    const include = el('input', {
      type: 'checkbox',
      class: 'doc-include',
      'data-doc': doc.id,
    }) as HTMLInputElement;
    include.checked = doc.provisionally_included;
    include.addEventListener('change', () =>
      app.guard(async () => {
        await app.client.patchDocument(doc.id, {
          provisionally_included: include.checked,
        });
        await app.refresh();
      }),
    );

    const status = el('select', { class: 'doc-status', 'data-doc': doc.id });
    for (const value of Object.keys(STATUS_LABELS)) {
      const opt = el('option', { value, text: STATUS_LABELS[value] });
      if (value === doc.review_status) opt.setAttribute('selected', '');
      status.append(opt);
    }
    status.addEventListener('change', () =>
      app.guard(async () => {
        await app.client.patchDocument(doc.id, {
          review_status: (status as HTMLSelectElement).value,
        });
        app.notify(`${doc.id} status updated.`);
        await app.refresh();
      }),
    );

    const openBtn = el('button', { class: 'open-extract', 'data-doc': doc.id,
                                   text: 'Extract' });
    openBtn.addEventListener('click', () =>
      app.navigate({ view: 'extract', documentId: doc.id }));

    return el(
      'tr',
      { class: doc.provisionally_included ? '' : 'excluded-doc', 'data-doc': doc.id },
      el('td', { text: doc.id }),
      el('td', {},
         `${doc.citation.authors} (${doc.citation.year}) `,
         el('em', { text: doc.citation.title }),
         doc.duplicate_of
           ? el('span', { class: 'chip warn',
                          title: `possible duplicate of ${doc.duplicate_of}`,
                          text: 'duplicate?' })
           : null),
      el('td', {},
         el('span', { class: `chip status-${doc.review_status}`,
                      text: STATUS_LABELS[doc.review_status] }),
         status),
      el('td', {}, include),
      el('td', {}, openBtn),
    );
  });

  return el(
    'section',
    { class: 'view review' },
    el('h2', { text: 'Review management' }),
    el('p', { class: 'question-text', text: project.question_text }),
    el('div', { class: 'add-doc' }, authors, year, title, fileRef, add),
    el(
      'table',
      { class: 'doc-table' },
      el('thead', {},
         el('tr', {},
            el('th', { text: 'id' }),
            el('th', { text: 'citation' }),
            el('th', { text: 'progress' }),
            el('th', { text: 'include' }),
            el('th', { text: '' }))),
      el('tbody', {}, ...rows),
    ),
  );
}
