/** Client view state. The include mask is local until an analysis
 * re-fetch resolves; the revision watermark lives on the ApiClient. */

import type { TriageKind } from './types.js';

export type Route =
  | { view: 'scoping' }
  | { view: 'review' }
  | { view: 'extract'; documentId: string }
  | { view: 'triage'; kind: TriageKind }
  | { view: 'analysis' };

export interface ViewState {
  route: Route;
  excluded: Set<string>;
  sort: 'none' | 'effect';
  units: 'standardized' | 'original';
  highlightDiffs: boolean;
  extractTab: 'extraction' | 'quality' | 'manual';
  groupingOpen: boolean;
}

export function initialState(): ViewState {
  return {
    route: { view: 'review' },
    excluded: new Set(),
    sort: 'none',
    units: 'standardized',
    highlightDiffs: true,
    extractTab: 'extraction',
    groupingOpen: false,
  };
}

export function routeFromHash(hash: string): Route {
  const parts = hash.replace(/^#\/?/, '').split('/').filter(Boolean);
  switch (parts[0]) {
    case 'scoping':
      return { view: 'scoping' };
    case 'extract':
      if (parts[1]) return { view: 'extract', documentId: parts[1] };
      return { view: 'review' };
    case 'triage':
      return {
        view: 'triage',
        kind: (parts[1] as TriageKind) || 'risk_of_bias',
      };
    case 'analysis':
      return { view: 'analysis' };
    default:
      return { view: 'review' };
  }
}

export function hashFromRoute(route: Route): string {
  switch (route.view) {
    case 'extract':
      return `#/extract/${route.documentId}`;
    case 'triage':
      return `#/triage/${route.kind}`;
    default:
      return `#/${route.view}`;
  }
}
