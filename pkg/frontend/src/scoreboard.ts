import type { DurationClass, RatingCategory, ScoreboardRow } from './types.js';
import { CATEGORIES } from './types.js';

/** Rows sorted by score descending (ties by name for stable rendering). */
export function sortRows(rows: ScoreboardRow[]): ScoreboardRow[] {
  return [...rows].sort(
    (a, b) =>
      b.score - a.score || a.combination_name.localeCompare(b.combination_name),
  );
}

export interface ChartColumn {
  combination: string;
  durationClass: DurationClass;
  counts: Record<RatingCategory, number>;
  total: number;
}

/**
 * Per-combination stacked category counts, split by duration class. The
 * numbers come straight from the service rows; nothing is recomputed.
 */
export function chartColumns(rows: ScoreboardRow[]): ChartColumn[] {
  const columns: ChartColumn[] = [];
  for (const row of sortRows(rows)) {
    for (const durationClass of ['standard', 'long'] as DurationClass[]) {
      const counts = row.by_duration_class[durationClass];
      columns.push({
        combination: row.combination_name,
        durationClass,
        counts,
        total: CATEGORIES.reduce((sum, c) => sum + counts[c], 0),
      });
    }
  }
  return columns;
}

export function renderScoreboard(
  container: HTMLElement,
  rows: ScoreboardRow[],
): void {
  const doc = container.ownerDocument;
  container.textContent = '';

  const table = doc.createElement('table');
  table.className = 'scoreboard';
  const head = doc.createElement('tr');
  for (const label of ['Combination', 'Score', 'Rated']) {
    const th = doc.createElement('th');
    th.textContent = label;
    head.appendChild(th);
  }
  table.appendChild(head);
  for (const row of sortRows(rows)) {
    const tr = doc.createElement('tr');
    tr.dataset.combination = row.combination_name;
    const cells = [row.combination_name, String(row.score), String(row.num_rated)];
    for (const text of cells) {
      const td = doc.createElement('td');
      td.textContent = text;
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  container.appendChild(table);

  const chart = doc.createElement('div');
  chart.className = 'chart';
  const columns = chartColumns(rows);
  const scale = Math.max(1, ...columns.map((c) => c.total));
  for (const column of columns) {
    const col = doc.createElement('div');
    col.className = `chart-col ${column.durationClass}`;
    col.dataset.combination = column.combination;
    col.dataset.durationClass = column.durationClass;
    for (const category of CATEGORIES) {
      const seg = doc.createElement('div');
      seg.className = `seg seg-${category}`;
      seg.dataset.count = String(column.counts[category]);
      seg.style.height = `${(column.counts[category] / scale) * 100}%`;
      seg.title = `${column.combination} ${column.durationClass} ${category}: ${column.counts[category]}`;
      col.appendChild(seg);
    }
    const label = doc.createElement('span');
    label.className = 'chart-label';
    label.textContent = `${column.combination} (${column.durationClass})`;
    col.appendChild(label);
    chart.appendChild(col);
  }
  container.appendChild(chart);
}
