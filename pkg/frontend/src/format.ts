/** Display formatting only. Numbers shown in the UI come from API
 * payloads; these helpers round for the screen and nothing else. */

export function fmt(x: number, digits = 3): string {
  if (!Number.isFinite(x)) return String(x);
  const rounded = Number(x.toFixed(digits));
  return Object.is(rounded, -0) ? '0' : String(rounded);
}

export function pooledSummary(p: { mu: number; ci95: [number, number];
                                   tau2: number; I2: number; k: number }): string {
  return `mu=${fmt(p.mu)} [${fmt(p.ci95[0])}, ${fmt(p.ci95[1])}] ` +
         `tau2=${fmt(p.tau2)} I2=${fmt(p.I2, 2)} k=${p.k}`;
}

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | boolean | null | undefined> = {},
  ...children: (Node | string | null | undefined)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (value === null || value === undefined || value === false) continue;
    if (key === 'text') {
      node.textContent = String(value);
    } else if (value === true) {
      node.setAttribute(key, '');
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    if (child === null || child === undefined) continue;
    node.append(child instanceof Node ? child : document.createTextNode(child));
  }
  return node;
}

export function clear(node: HTMLElement): HTMLElement {
  node.textContent = '';
  return node;
}
