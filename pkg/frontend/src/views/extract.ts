/** Extraction split view: document pane on the left, tabbed forms on the
 * right (dynamic extraction form, quality assessment, coding manual),
 * with link icons jumping between linked questions across the forms. */

import type { App } from '../app.js';
import { clear, el } from '../format.js';
import type {
  AnswersPayload,
  QualityAnswerPayload,
  ResultRow,
  SchemaPayload,
  SchemaQuestion,
} from '../types.js';

type Answers = Record<string, unknown>;

function predicateHolds(question: SchemaQuestion, answers: Answers): boolean {
  return question.show_if.every(([qid, value]) => answers[qid] === value);
}

function visibleQuestions(schema: SchemaPayload, answers: Answers): SchemaQuestion[] {
  return schema.extraction.filter((q) => predicateHolds(q, answers));
}

function answerInput(question: SchemaQuestion, answers: Answers,
                     onChange: () => void): HTMLElement {
  const current = answers[question.id];
  const commit = (value: unknown) => {
    if (value === '' || value === undefined || Number.isNaN(value as number)) {
      delete answers[question.id];
    } else {
      answers[question.id] = value;
    }
    onChange();
  };

  if (question.answer_kind === 'boolean') {
    const wrap = el('span', { class: 'bool-input' });
    for (const option of [true, false]) {
      const btn = el('button', {
        class: `bool-choice ${current === option ? 'active' : ''}`,
        'data-q': question.id,
        'data-value': String(option),
        text: option ? 'yes' : 'no',
      });
      btn.addEventListener('click', () => commit(option));
      wrap.append(btn);
    }
    return wrap;
  }
  if (question.answer_kind === 'single_choice') {
    const select = el('select', { 'data-q': question.id }) as HTMLSelectElement;
    select.append(el('option', { value: '', text: '(unanswered)' }));
    for (const option of question.options) {
      const opt = el('option', { value: option, text: option });
      if (current === option) opt.setAttribute('selected', '');
      select.append(opt);
    }
    select.addEventListener('change', () => commit(select.value || ''));
    return select;
  }
  if (question.answer_kind === 'multi_choice') {
    const wrap = el('span', { class: 'multi-input' });
    const selected = new Set(Array.isArray(current) ? (current as string[]) : []);
    for (const option of question.options) {
      const box = el('input', { type: 'checkbox', 'data-q': question.id,
                                value: option }) as HTMLInputElement;
      box.checked = selected.has(option);
      box.addEventListener('change', () => {
        if (box.checked) selected.add(option); else selected.delete(option);
        commit([...selected]);
      });
      wrap.append(el('label', {}, box, option));
    }
    return wrap;
  }
  const input = el('input', {
    'data-q': question.id,
    type: question.answer_kind === 'text' ? 'text' : 'number',
    value: current === undefined ? '' : String(current),
  }) as HTMLInputElement;
  input.addEventListener('change', () => {
    if (question.answer_kind === 'integer') commit(parseInt(input.value, 10));
    else if (question.answer_kind === 'number') commit(parseFloat(input.value));
    else commit(input.value.trim());
  });
  return input;
}

function resultEditor(payload: AnswersPayload, results: ResultRow[],
                      rerender: () => void): HTMLElement {
  const table = payload.evidence_table;
  if (!table) {
    return el('p', { class: 'hint',
                     text: 'Answer the design and outcome questions to unlock the evidence table.' });
  }
  const grid = el('table', { class: 'evidence-table' });
  grid.append(el('thead', {}, el('tr', {},
    el('th', { text: 'timepoint' }),
    ...table.columns.map((c) => el('th', { text: c })),
    el('th', { text: '' }))));
  const body = el('tbody', {});
  results.forEach((row, index) => {
    const cells: HTMLElement[] = [];
    const label = el('input', { class: 'result-label', value: row.label }) as HTMLInputElement;
    label.addEventListener('change', () => { row.label = label.value.trim() || 'post'; });
    cells.push(el('td', {}, label));
    for (const col of table.columns) {
      const input = el('input', {
        type: 'number', step: 'any', class: 'stat-input',
        'data-col': col, 'data-row': String(index),
        value: row.data[col] === null || row.data[col] === undefined
          ? '' : String(row.data[col]),
        placeholder: table.optional_columns.includes(col) ? 'optional' : '',
      }) as HTMLInputElement;
      input.addEventListener('change', () => {
        row.data[col] = input.value === '' ? null : Number(input.value);
      });
      cells.push(el('td', {}, input));
    }
    const remove = el('button', { class: 'remove-result', text: 'x' });
    remove.addEventListener('click', () => {
      results.splice(index, 1);
      rerender();
    });
    cells.push(el('td', {}, remove));
    body.append(el('tr', {}, ...cells));
  });
  grid.append(body);

  const addRow = el('button', { class: 'add-result', text: 'Add result row' });
  addRow.addEventListener('click', () => {
    const data: Record<string, number | null> = {};
    for (const col of table.columns) data[col] = null;
    results.push({ label: table.timepoints[results.length] ?? 'post', data });
    rerender();
  });
  return el('div', { class: 'evidence-editor' },
            el('h4', { text: 'Evidence table' }), grid, addRow);
}

export async function renderExtract(app: App, documentId: string): Promise<HTMLElement> {
  const [project, schema, payload, qualityPayload, annotations] = await Promise.all([
    app.client.getProject(),
    app.client.getSchema(),
    app.client.getAnswers(documentId),
    app.client.getQuality(documentId),
    app.client.getAnnotations(documentId),
  ]);
  const doc = project.documents.find((d) => d.id === documentId);
  if (!doc) throw new Error(`unknown document ${documentId}`);

  const answers: Answers = { ...payload.answers };
  const results: ResultRow[] = payload.results.map((r) => ({ ...r, data: { ...r.data } }));
  const quality = new Map<string, QualityAnswerPayload>(
    qualityPayload.quality.map((qa) => [qa.question_id, { ...qa }]));

  const root = el('section', { class: 'view extract' });
  const left = el('div', { class: 'document-pane' });
  const right = el('div', { class: 'form-pane' });
  root.append(
    el('h2', {}, `Evidence extraction: ${doc.citation.authors} (${doc.citation.year})`),
    el('div', { class: 'split' }, left, right));

  // left pane: native PDF embed when a file is attached, plus annotations
  if (doc.file_ref) {
    left.append(el('embed', { src: doc.file_ref, type: 'application/pdf',
                              class: 'pdf-embed' }));
  } else {
    left.append(el('p', { class: 'hint',
                          text: 'No file attached; review from your own copy.' }));
  }
  const annList = el('ul', { class: 'annotations' },
    ...annotations.annotations.map((a) => el(
      'li', { 'data-annotation': a.id },
      el('span', { class: 'chip', text: a.kind }),
      ` p.${a.page} `,
      a.text ?? '')));
  const annPage = el('input', { type: 'number', value: '1', class: 'ann-page' }) as HTMLInputElement;
  const annText = el('input', { placeholder: 'comment text', class: 'ann-text' }) as HTMLInputElement;
  const annAdd = el('button', { text: 'Add comment' });
  annAdd.addEventListener('click', () =>
    app.guard(async () => {
      await app.client.addAnnotation(documentId, {
        kind: 'comment', page: Number(annPage.value), text: annText.value,
      });
      await app.refresh();
    }));
  left.append(el('h4', { text: 'Annotations' }), annList,
              el('div', { class: 'ann-add' }, annPage, annText, annAdd));

  // right pane: tab strip + panels
  const tabs = el('div', { class: 'tabs' });
  const panel = el('div', { class: 'tab-panel' });
  right.append(tabs, panel);

  const renderTabs = () => {
    clear(tabs);
    for (const tab of ['extraction', 'quality', 'manual'] as const) {
      const btn = el('button', {
        class: `tab ${app.state.extractTab === tab ? 'active' : ''}`,
        'data-tab': tab,
        text: tab === 'extraction' ? 'Evidence extraction'
          : tab === 'quality' ? 'Quality assessment' : 'Coding manual',
      });
      btn.addEventListener('click', () => {
        app.state.extractTab = tab;
        renderTabs();
        renderPanel();
      });
      tabs.append(btn);
    }
  };

  const focusQuestion = (qid: string) => {
    const target = panel.querySelector(`[data-question-row="${qid}"]`);
    if (target) {
      target.classList.add('linked-focus');
      (target as HTMLElement).scrollIntoView?.({ block: 'center' });
    }
  };

  const renderExtractionTab = () => {
    clear(panel);
    const validation = el('div', { class: 'validation' });
    const renderValidation = (report: AnswersPayload['validation']) => {
      clear(validation);
      if (report.ok) {
        validation.append(el('p', { class: 'ok', text: 'Ready to mark complete.' }));
      } else {
        if (report.missing_mandatory.length) {
          validation.append(el('p', { class: 'warn',
            text: `Missing mandatory: ${report.missing_mandatory.join(', ')}` }));
        }
        if (report.note_violations.length) {
          validation.append(el('p', { class: 'warn',
            text: `Notes required for: ${report.note_violations.join(', ')}` }));
        }
      }
    };
    renderValidation(payload.validation);

    const form = el('div', { class: 'question-list' });
    const renderForm = () => {
      clear(form);
      let section = '';
      for (const q of visibleQuestions(schema, answers)) {
        if (q.section !== section) {
          section = q.section;
          form.append(el('h4', { class: 'section-head', text: section.replace('_', ' ') }));
        }
        const link = q.qa_link
          ? el('button', { class: 'link-icon', 'data-link-to': q.qa_link,
                           title: 'linked quality question', text: '⇄' })
          : null;
        link?.addEventListener('click', () => {
          app.state.extractTab = 'quality';
          renderTabs();
          renderPanel();
          focusQuestion(q.qa_link as string);
        });
        form.append(el('div', { class: 'question-row', 'data-question-row': q.id },
          el('label', {}, q.prompt, q.mandatory ? el('span', { class: 'req', text: ' *' }) : null),
          answerInput(q, answers, renderForm),
          link));
      }
      form.append(resultEditor(payload, results, renderForm));
    };
    renderForm();

    const save = el('button', { class: 'primary save-answers', text: 'Save answers' });
    save.addEventListener('click', () =>
      app.guard(async () => {
        const saved = await app.client.putAnswers(documentId, answers,
                                                  payload.evidence_table ? results : undefined);
        renderValidation(saved.validation);
        app.notify('Answers saved.');
      }));
    panel.append(validation, form, save);
  };

  const renderQualityTab = () => {
    clear(panel);
    const list = el('div', { class: 'question-list' });
    let kind = '';
    for (const q of schema.quality) {
      if (q.table_kind !== kind) {
        kind = q.table_kind;
        list.append(el('h4', { class: 'section-head', text: kind.replace(/_/g, ' ') }));
      }
      const current = quality.get(q.id);
      const radios = el('span', { class: 'verdicts' });
      for (const verdict of ['yes', 'no', 'not_sure'] as const) {
        const radio = el('input', { type: 'radio', name: `qa-${q.id}`,
                                    value: verdict, 'data-q': q.id }) as HTMLInputElement;
        radio.checked = current?.verdict === verdict;
        radio.addEventListener('change', () => {
          const existing = quality.get(q.id);
          quality.set(q.id, { question_id: q.id, verdict,
                              note: existing?.note ?? '' });
        });
        radios.append(el('label', {}, radio, verdict.replace('_', ' ')));
      }
      const note = el('input', { class: 'qa-note', placeholder: 'note (required for yes / not sure)',
                                 value: current?.note ?? '', 'data-note': q.id }) as HTMLInputElement;
      note.addEventListener('change', () => {
        const existing = quality.get(q.id);
        if (existing) existing.note = note.value;
        else quality.set(q.id, { question_id: q.id, verdict: 'no', note: note.value });
      });
      const link = el('button', { class: 'link-icon', 'data-link-to': q.extraction_link,
                                  title: 'linked extraction question', text: '⇄' });
      link.addEventListener('click', () => {
        app.state.extractTab = 'extraction';
        renderTabs();
        renderPanel();
        focusQuestion(q.extraction_link);
      });
      list.append(el('div', { class: 'question-row', 'data-question-row': q.id },
                     el('label', { text: q.prompt }), radios, note, link));
    }
    const save = el('button', { class: 'primary save-quality', text: 'Save judgments' });
    save.addEventListener('click', () =>
      app.guard(async () => {
        await app.client.putQuality(documentId, [...quality.values()]);
        app.notify('Quality judgments saved.');
      }));
    panel.append(list, save);
  };

  const renderManualTab = () => {
    clear(panel);
    const list = el('dl', { class: 'manual' });
    for (const q of schema.extraction) {
      list.append(
        el('dt', { text: q.prompt }),
        el('dd', {},
           el('p', {}, el('strong', { text: 'What to look for: ' }), q.manual.description),
           el('p', {}, el('strong', { text: 'Where: ' }), q.manual.location),
           el('p', {}, el('strong', { text: 'Why it matters: ' }), q.manual.importance)));
    }
    panel.append(list);
  };

  const renderPanel = () => {
    if (app.state.extractTab === 'quality') renderQualityTab();
    else if (app.state.extractTab === 'manual') renderManualTab();
    else renderExtractionTab();
  };

  renderTabs();
  renderPanel();
  return root;
}
