/** Render server-computed dotplot geometry as SVG stacked circles.
 *
 * Every coordinate comes from the payload (bin centers, stack indexes,
 * axis bounds); this module only maps them onto pixels.
 */

import type { DotplotPayload } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export interface DotplotOptions {
  width?: number;
  height?: number;
  radius?: number;
  color?: string;
  showAxis?: boolean;
}

export function renderDotplot(dp: DotplotPayload,
                              opts: DotplotOptions = {}): SVGSVGElement {
  const width = opts.width ?? 320;
  const height = opts.height ?? 46;
  const r = opts.radius ?? 3.5;
  const color = opts.color ?? '#1f77b4';
  const { min, max } = dp.axis;
  const span = max - min;
  const pad = r + 1;
  const toX = (v: number) => pad + ((v - min) / span) * (width - 2 * pad);

  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('class', 'dotplot');
  svg.setAttribute('width', String(width));
  svg.setAttribute('height', String(height));
  svg.setAttribute('viewBox', `0 0 ${width} ${height}`);

  const baseline = height - 2;
  if (opts.showAxis !== false) {
    const axis = document.createElementNS(SVG_NS, 'line');
    axis.setAttribute('x1', String(pad));
    axis.setAttribute('x2', String(width - pad));
    axis.setAttribute('y1', String(baseline));
    axis.setAttribute('y2', String(baseline));
    axis.setAttribute('stroke', '#ccc');
    svg.append(axis);
    if (min < 0 && max > 0) {
      const zero = document.createElementNS(SVG_NS, 'line');
      zero.setAttribute('x1', String(toX(0)));
      zero.setAttribute('x2', String(toX(0)));
      zero.setAttribute('y1', '2');
      zero.setAttribute('y2', String(baseline));
      zero.setAttribute('stroke', '#bbb');
      zero.setAttribute('stroke-dasharray', '3 2');
      svg.append(zero);
    }
  }

  for (const dot of dp.dots) {
    const circle = document.createElementNS(SVG_NS, 'circle');
    circle.setAttribute('cx', String(toX(dot.bin_center)));
    circle.setAttribute('cy', String(baseline - r - 1 - dot.stack_index * (2 * r + 1)));
    circle.setAttribute('r', String(r));
    circle.setAttribute('fill', color);
    svg.append(circle);
  }
  return svg;
}
