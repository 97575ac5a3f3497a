/** Pure view helpers: attribution bars and DOM construction. */

import type { AttributionEntry } from './types.js';

export interface BarSpec {
  feature: string;
  rawValue: string | number;
  phi: number;
  widthPct: number;
  sign: 'positive' | 'negative';
}

/**
 * Bars sorted by |phi| descending, widths normalized per list so the
 * largest magnitude spans the full width. The two trees' phi scales are
 * not comparable, so each list normalizes independently.
 */
export function buildBars(entries: AttributionEntry[]): BarSpec[] {
  const ordered = [...entries].sort((a, b) => Math.abs(b.phi) - Math.abs(a.phi));
  const maxAbs = ordered.length ? Math.abs(ordered[0].phi) : 0;
  return ordered.map((entry) => ({
    feature: entry.feature,
    rawValue: entry.raw_value,
    phi: entry.phi,
    widthPct: maxAbs > 0 ? (Math.abs(entry.phi) / maxAbs) * 100 : 0,
    sign: entry.phi < 0 ? 'negative' : 'positive',
  }));
}

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function renderBarList(title: string, entries: AttributionEntry[]): HTMLElement {
  const section = el('div', 'attribution-list');
  section.appendChild(el('h4', undefined, title));
  for (const bar of buildBars(entries)) {
    const row = el('div', 'bar-row');
    const label = el('span', 'bar-label', `${bar.feature} = ${bar.rawValue}`);
    const track = el('div', 'bar-track');
    const fill = el('div', `bar-fill ${bar.sign}`);
    fill.style.width = `${bar.widthPct}%`;
    fill.title = `phi = ${bar.phi}`;
    track.appendChild(fill);
    const value = el('span', 'bar-value', bar.phi.toFixed(4));
    row.append(label, track, value);
    section.appendChild(row);
  }
  return section;
}
