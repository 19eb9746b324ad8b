/** Interactive forest plot: one table per study group, quantile dotplots
 * per row, pooled bottom row, flag tooltips, sensitivity toggles, sort
 * and unit-conversion controls. Every number shown is payload data. */

import type { App } from '../app.js';
import { renderDotplot } from '../dotplot.js';
import { el, fmt, pooledSummary } from '../format.js';
import type { AnalysisRowPayload, GroupTablePayload } from '../types.js';

function effectText(row: AnalysisRowPayload, units: string): string {
  if (units === 'original' && row.original_units) {
    if (!row.original_units.convertible) return `${row.effect.kind} (not convertible)`;
    const u = row.original_units.units ? ` ${row.original_units.units}` : '';
    return `${fmt(row.original_units.y as number)}${u}`;
  }
  return `${row.effect.kind} ${fmt(row.effect.y)}`;
}

function renderRow(app: App, row: AnalysisRowPayload, units: string): HTMLElement {
  const toggle = el('input', {
    type: 'checkbox', class: 'include-toggle', 'data-result': row.result_id,
    title: 'include in the pooled estimate',
  }) as HTMLInputElement;
  toggle.checked = row.included;
  toggle.disabled = row.dotplot === null; // zero-variance rows cannot pool
  toggle.addEventListener('change', () => {
    // optimistic local mask; the re-fetch below is the source of truth
    if (toggle.checked) app.state.excluded.delete(row.result_id);
    else app.state.excluded.add(row.result_id);
    void app.guard(async () => app.refresh(), () => {
      toggle.checked = !toggle.checked;
      if (toggle.checked) app.state.excluded.delete(row.result_id);
      else app.state.excluded.add(row.result_id);
    });
  });

  const flag = row.flag
    ? el('span', { class: 'flag', title: row.flag.note, text: '⚑' })
    : null;

  const dp = units === 'original'
    ? (row.original_dotplot ?? null)
    : row.dotplot;
  const dotCell = el('td', { class: 'dot-cell' });
  if (dp) {
    dotCell.append(renderDotplot(dp, {
      color: row.included ? '#1f77b4' : '#bbbbbb',
    }));
  } else if (units === 'original' && row.original_units &&
             !row.original_units.convertible) {
    dotCell.append(el('span', { class: 'hint', text: 'not convertible' }));
  } else {
    dotCell.append(el('span', { class: 'hint',
                                text: row.warnings.join('; ') || 'no distribution' }));
  }

  const label = row.timepoint && row.timepoint !== 'post'
    ? `${row.citation} [${row.timepoint}]` : row.citation;
  return el('tr', {
    class: `result-row ${row.included ? '' : 'row-excluded'}`,
    'data-result': row.result_id,
  },
    el('td', { class: 'citation-cell' }, label, ' ', flag),
    el('td', { class: 'arms-cell', text: row.arm_summary }),
    el('td', { class: 'effect-cell', text: effectText(row, units) }),
    dotCell,
    el('td', { class: 'toggle-cell' }, toggle));
}

function renderGroupTable(app: App, table: GroupTablePayload, units: string): HTMLElement {
  const section = el('section', { class: 'group-table', 'data-group': table.name });
  section.append(el('h3', {}, table.name,
    table.meta_analyzed ? null
      : el('span', { class: 'chip', text: 'shown without pooling' })));

  if (!table.rows.length) {
    section.append(el('p', { class: 'hint', text: 'No results in this group.' }));
    return section;
  }

  const body = el('tbody', {}, ...table.rows.map((row) => renderRow(app, row, units)));
  const foot = el('tfoot', {});
  if (table.pooled) {
    const pooledDots = el('td', { class: 'dot-cell' },
                          renderDotplot(table.pooled.dotplot, { color: '#d62728' }));
    foot.append(el('tr', { class: 'pooled-row' },
      el('td', { class: 'citation-cell', text: `Pooled (k=${table.pooled.k})` }),
      el('td', { class: 'arms-cell pooled-stats', text: pooledSummary(table.pooled) }),
      el('td', { class: 'effect-cell', text: fmt(table.pooled.mu) }),
      pooledDots,
      el('td', {})));
  } else if (table.pooled_note) {
    foot.append(el('tr', { class: 'pooled-row' },
      el('td', { class: 'pooled-note', colspan: '5', text: table.pooled_note })));
  }

  section.append(el('table', { class: 'forest' },
    el('thead', {}, el('tr', {},
      el('th', { text: 'study result' }),
      el('th', { text: 'summary statistics' }),
      el('th', { text: 'effect' }),
      el('th', { text: 'sampling distribution (20 outcomes)' }),
      el('th', { text: 'include' }))),
    body, foot));
  return section;
}

export async function renderAnalysis(app: App): Promise<HTMLElement> {
  const payload = await app.client.getAnalysis({
    excluded: [...app.state.excluded],
    sort: app.state.sort,
    units: app.state.units,
  });

  const sortBtn = el('button', {
    id: 'sort-toggle',
    class: `toggle ${app.state.sort === 'effect' ? 'active' : ''}`,
    text: 'Sort by effect size',
  });
  sortBtn.addEventListener('click', () => {
    app.state.sort = app.state.sort === 'effect' ? 'none' : 'effect';
    void app.refresh();
  });
  const unitsBtn = el('button', {
    id: 'units-toggle',
    class: `toggle ${app.state.units === 'original' ? 'active' : ''}`,
    text: 'Original measurement units',
  });
  unitsBtn.addEventListener('click', () => {
    app.state.units = app.state.units === 'original' ? 'standardized' : 'original';
    void app.refresh();
  });

  const excludedNote = payload.include_mask.excluded.length
    ? el('p', { class: 'hint', id: 'mask-note',
                text: `Excluded from pooling: ${payload.include_mask.excluded.join(', ')}` })
    : null;

  return el('section', { class: 'view analysis' },
    el('h2', { text: 'Meta-analysis' }),
    el('p', { class: 'question-text', text: payload.question }),
    el('div', { class: 'toolbar' }, sortBtn, unitsBtn),
    excludedNote,
    ...payload.groups.map((g) => renderGroupTable(app, g, payload.units)));
}
