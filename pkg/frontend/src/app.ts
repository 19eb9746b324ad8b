/** Application shell: navigation, rendering, and error/conflict surfacing. */

import { ApiClient, ApiError, RevisionConflictError } from './api.js';
import { clear, el } from './format.js';
import { hashFromRoute, initialState, type Route, type ViewState } from './state.js';
import { renderAnalysis } from './views/analysis.js';
import { renderExtract } from './views/extract.js';
import { renderReview } from './views/review.js';
import { renderScoping } from './views/scoping.js';
import { renderTriage } from './views/triage.js';

const NAV: { route: Route; label: string }[] = [
  { route: { view: 'scoping' }, label: 'Scoping' },
  { route: { view: 'review' }, label: 'Review' },
  { route: { view: 'triage', kind: 'risk_of_bias' }, label: 'Triage' },
  { route: { view: 'analysis' }, label: 'Meta-analysis' },
];

export class App {
  client: ApiClient;
  state: ViewState;
  root: HTMLElement;
  private banner: HTMLElement;
  private nav: HTMLElement;
  private outlet: HTMLElement;
  private rendering: Promise<void> = Promise.resolve();

  constructor(root: HTMLElement, client: ApiClient) {
    this.root = root;
    this.client = client;
    this.state = initialState();
    this.banner = el('div', { class: 'banner hidden', id: 'banner' });
    this.nav = el('nav', { class: 'main-nav' });
    this.outlet = el('main', { class: 'outlet' });
    clear(root).append(this.banner, this.nav, this.outlet);
    this.renderNav();
  }

  private renderNav(): void {
    clear(this.nav);
    for (const item of NAV) {
      const active = item.route.view === this.state.route.view;
      const btn = el('button', {
        class: `nav-item ${active ? 'active' : ''}`,
        'data-nav': item.route.view,
        text: item.label,
      });
      btn.addEventListener('click', () => void this.navigate(item.route));
      this.nav.append(btn);
    }
  }

  notify(message: string, kind: 'info' | 'error' = 'info'): void {
    this.banner.textContent = message;
    this.banner.className = `banner ${kind}`;
    if (kind === 'info') {
      setTimeout(() => this.banner.classList.add('hidden'), 2500);
    }
  }

  /** Run a mutation, mapping failures to the banner. 409 prompts a reload. */
  async guard(fn: () => Promise<unknown>, rollback?: () => void): Promise<void> {
    try {
      await fn();
    } catch (err) {
      rollback?.();
      if (err instanceof RevisionConflictError) {
        this.notify('Someone else changed this project; reloading.', 'error');
        await this.client.getProject(); // re-sync the revision watermark
        await this.refresh();
      } else if (err instanceof ApiError) {
        const ids = err.ids.length ? ` (${err.ids.join(', ')})` : '';
        this.notify(`${err.message}${ids}`, 'error');
      } else {
        this.notify('Server unreachable; check the connection and retry.', 'error');
      }
    }
  }

  async navigate(route: Route): Promise<void> {
    this.state.route = route;
    if (typeof window !== 'undefined' && window.history?.replaceState) {
      window.history.replaceState(null, '', hashFromRoute(route));
    }
    this.renderNav();
    await this.refresh();
  }

  async refresh(): Promise<void> {
    // serialize renders so a slow fetch never overwrites a newer view
    this.rendering = this.rendering.then(() => this.renderRoute());
    await this.rendering;
  }

  private async renderRoute(): Promise<void> {
    const route = this.state.route;
    try {
      let view: HTMLElement;
      switch (route.view) {
        case 'scoping':
          view = await renderScoping(this);
          break;
        case 'extract':
          view = await renderExtract(this, route.documentId);
          break;
        case 'triage':
          view = await renderTriage(this, route.kind);
          break;
        case 'analysis':
          view = await renderAnalysis(this);
          break;
        default:
          view = await renderReview(this);
      }
      clear(this.outlet).append(view);
    } catch (err) {
      clear(this.outlet).append(
        el('p', { class: 'error', text: `Could not load this view: ${String(err)}` }));
      const retry = el('button', { text: 'Retry' });
      retry.addEventListener('click', () => void this.refresh());
      this.outlet.append(retry);
    }
  }
}

export async function createApp(root: HTMLElement, base: string): Promise<App> {
  const client = await ApiClient.connect(base);
  const app = new App(root, client);
  await app.refresh();
  return app;
}
