/** Browser entry point. The API base defaults to the page origin and can
 * be overridden with ?api=http://host:port for static hosting. */

import { createApp } from './app.js';
import { routeFromHash } from './state.js';

async function boot(): Promise<void> {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app mount point');
  const params = new URLSearchParams(window.location.search);
  const base = params.get('api') ?? window.location.origin;
  const app = await createApp(root, base);
  await app.navigate(routeFromHash(window.location.hash));
  window.addEventListener('hashchange', () => {
    void app.navigate(routeFromHash(window.location.hash));
  });
}

void boot();
