/** Triage tables with difference highlighting, per-row actions, and the
 * drag-and-drop study grouping dialog. */

import type { App } from '../app.js';
import { clear, el } from '../format.js';
import { ACTION_CHOICES, TRIAGE_KINDS, type TriageKind } from '../types.js';

function cellText(value: unknown): string {
  if (value === null || value === undefined) return '';
  if (value === true) return 'yes';
  if (value === false) return 'no';
  return String(value);
}

async function renderGroupingBoard(app: App, container: HTMLElement): Promise<void> {
  const { groups } = await app.client.getGroups();
  const project = await app.client.getProject();
  const labels = new Map<string, string>();
  for (const doc of project.documents) {
    const answers = doc.citation
      ? `${doc.citation.authors.split(',')[0]} (${doc.citation.year})` : doc.id;
    labels.set(doc.id, answers);
  }
  // result -> document label, via the groups' members and analysis rows
  const analysis = await app.client.getAnalysis();
  const rowLabel = new Map<string, string>();
  for (const table of analysis.groups) {
    for (const row of table.rows) rowLabel.set(row.result_id, row.citation);
  }

  clear(container);
  const board = el('div', { class: 'grouping-board' });
  for (const group of groups) {
    const column = el('div', { class: 'group-column', 'data-group': group.name });
    column.addEventListener('dragover', (event) => event.preventDefault());
    column.addEventListener('drop', (event) => {
      event.preventDefault();
      const resultId = (event as DragEvent).dataTransfer?.getData('text/plain');
      if (!resultId) return;
      void app.guard(async () => {
        await app.client.editGroups({ op: 'move', result_id: resultId,
                                      to_group: group.name });
        await renderGroupingBoard(app, container);
        await app.refresh();
      });
    });

    const title = el('span', { class: 'group-title', text: group.name });
    title.addEventListener('dblclick', () => {
      const next = window.prompt('Rename group', group.name);
      if (!next || next === group.name) return;
      void app.guard(async () => {
        await app.client.editGroups({ op: 'rename', old: group.name, new: next });
        await renderGroupingBoard(app, container);
      });
    });
    const remove = el('button', { class: 'group-delete', title: 'delete group',
                                  text: 'x' });
    remove.addEventListener('click', () =>
      app.guard(async () => {
        await app.client.editGroups({ op: 'delete', name: group.name });
        await renderGroupingBoard(app, container);
      }));
    const header = el('div', { class: 'group-header' }, title,
                      group.meta_analyzed ? null
                        : el('span', { class: 'chip', text: 'not pooled' }),
                      remove);
    column.append(header);

    for (const resultId of group.member_ids) {
      const tile = el('div', { class: 'result-tile', draggable: 'true',
                               'data-result': resultId,
                               text: `${resultId} ${rowLabel.get(resultId) ?? ''}` });
      tile.addEventListener('dragstart', (event) => {
        (event as DragEvent).dataTransfer?.setData('text/plain', resultId);
      });
      column.append(tile);
    }
    board.append(column);
  }

  const name = el('input', { placeholder: 'new group name', class: 'new-group-name' }) as HTMLInputElement;
  const create = el('button', { class: 'new-group-create', text: 'Add group' });
  create.addEventListener('click', () =>
    app.guard(async () => {
      await app.client.editGroups({ op: 'create', name: name.value.trim() });
      await renderGroupingBoard(app, container);
    }));
  container.append(board, el('div', { class: 'new-group' }, name, create));
}

export async function renderTriage(app: App, kind: TriageKind): Promise<HTMLElement> {
  const table = await app.client.getTriage(kind);
  const highlighted = new Set(table.highlighted_cells.map(([row, col]) => `${row}:${col}`));

  const tabs = el('div', { class: 'tabs' },
    ...TRIAGE_KINDS.map((k) => {
      const btn = el('button', {
        class: `tab ${k === kind ? 'active' : ''}`,
        'data-kind': k,
        text: k.replace(/_/g, ' '),
      });
      btn.addEventListener('click', () => app.navigate({ view: 'triage', kind: k }));
      return btn;
    }));

  const highlightToggle = el('button', {
    class: `toggle ${app.state.highlightDiffs ? 'active' : ''}`,
    id: 'highlight-toggle',
    text: 'Highlight differences',
  });
  highlightToggle.addEventListener('click', () => {
    app.state.highlightDiffs = !app.state.highlightDiffs;
    void app.refresh();
  });

  const head = el('tr', {}, el('th', { text: 'study result' }),
    ...table.columns.map((c) =>
      el('th', { class: `col-${c.source}`, title: c.id, text: c.prompt })),
    el('th', { text: 'What will you do?' }));

  const body = el('tbody', {});
  table.rows.forEach((row, index) => {
    const cells: HTMLElement[] = [el('td', { class: 'row-label', text: row.label })];
    for (const col of table.columns) {
      const isDiff = app.state.highlightDiffs && highlighted.has(`${index}:${col.id}`);
      const note = row.quality_notes[col.id];
      cells.push(el('td', {
        class: `cell ${isDiff ? 'diff' : ''}`,
        'data-cell': `${row.result_id}:${col.id}`,
        title: note ?? null,
      }, cellText(row.cells[col.id])));
    }

    const actionCell = el('td', { class: 'action-cell' });
    const noteInput = el('input', {
      class: 'action-note', placeholder: 'note (required to flag)',
      value: row.action?.note ?? '',
    }) as HTMLInputElement;
    for (const choice of ACTION_CHOICES[kind]) {
      const radio = el('input', {
        type: 'radio', name: `action-${row.result_id}`, value: choice,
        'data-result': row.result_id, 'data-choice': choice,
      }) as HTMLInputElement;
      radio.checked = row.action?.choice === choice;
      radio.addEventListener('change', () =>
        app.guard(async () => {
          await app.client.applyAction({
            result_id: row.result_id, kind, choice,
            note: noteInput.value.trim(),
          });
          app.notify(`${row.result_id}: ${choice.replace(/_/g, ' ')}.`);
          await app.refresh();
        }));
      actionCell.append(el('label', { class: 'action-choice' }, radio,
                           choice.replace(/_/g, ' ')));
    }
    actionCell.append(noteInput);
    cells.push(actionCell);
    body.append(el('tr', { 'data-result': row.result_id }, ...cells));
  });

  const groupingSection = el('div', { class: 'grouping-dialog' });
  const groupingToggle = el('button', { id: 'grouping-toggle',
                                        text: 'Study grouping' });
  groupingToggle.addEventListener('click', () =>
    app.guard(async () => {
      app.state.groupingOpen = !app.state.groupingOpen;
      if (app.state.groupingOpen) await renderGroupingBoard(app, groupingSection);
      else clear(groupingSection);
    }));
  if (app.state.groupingOpen) await renderGroupingBoard(app, groupingSection);

  return el('section', { class: 'view triage' },
    el('h2', { text: 'Triage' }),
    tabs,
    el('div', { class: 'toolbar' }, highlightToggle, groupingToggle),
    table.rows.length
      ? el('table', { class: 'triage-table' }, el('thead', {}, head), body)
      : el('p', { class: 'hint',
                  text: 'No rows yet: triage shows results of included, completed documents.' }),
    groupingSection);
}
