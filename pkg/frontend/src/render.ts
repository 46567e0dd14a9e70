// Pure HTML renderers. The generic sorted table view works for any
// vocabulary; a grid view switches on when the state carries an adjacency
// predicate shaped like Next(square, direction, square) with recognizable
// direction names. Differences against the previous state are highlighted.

import { Elem, StateJson } from "./api.js";
import { StateDiff } from "./model.js";

const esc = (s: unknown): string =>
  String(s).replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

const tupleText = (t: Elem[]): string => t.join(", ");

// -- generic table view -------------------------------------------------------

export function renderStateTable(state: StateJson, diff: StateDiff): string {
  const rows: string[] = [];
  for (const name of Object.keys(state.predicates).sort()) {
    const tuples = state.predicates[name];
    const added = new Set(diff.addedTuples[name] ?? []);
    const cells = tuples
      .slice()
      .sort((a, b) => tupleText(a).localeCompare(tupleText(b)))
      .map((t) => {
        const key = JSON.stringify(t);
        const cls = added.has(key) ? ' class="diff-added"' : "";
        return `<span${cls}>(${esc(tupleText(t))})</span>`;
      })
      .join(" ");
    const removed = (diff.removedTuples[name] ?? [])
      .map((key) => `<span class="diff-removed">(${esc(tupleText(JSON.parse(key)))})</span>`)
      .join(" ");
    rows.push(`<tr><th>${esc(name)}</th><td>${cells}${removed ? " " + removed : ""}</td></tr>`);
  }
  for (const name of Object.keys(state.functions).sort()) {
    const changed = new Set(
      (diff.changedValues[name] ?? []).map((c) => c.split(":")[0]));
    const cells = state.functions[name]
      .slice()
      .sort((a, b) => tupleText(a[0]).localeCompare(tupleText(b[0])))
      .map(([args, value]) => {
        const header = `${name}(${tupleText(args)})`;
        const cls = changed.has(header) ? ' class="diff-added"' : "";
        const argText = args.length ? `(${esc(tupleText(args))})` : "";
        return `<span${cls}>${argText} &rarr; ${esc(value)}</span>`;
      })
      .join(" ");
    rows.push(`<tr><th>${esc(name)}</th><td>${cells}</td></tr>`);
  }
  return `<table class="state-table">${rows.join("")}</table>`;
}

// -- grid view ----------------------------------------------------------------

const DIRECTION_OFFSETS: Record<string, [number, number]> = {
  east: [1, 0], right: [1, 0],
  west: [-1, 0], left: [-1, 0],
  north: [0, -1], up: [0, -1],
  south: [0, 1], down: [0, 1],
};

function directionOffset(name: Elem): [number, number] | null {
  return DIRECTION_OFFSETS[String(name).toLowerCase()] ?? null;
}

export interface GridLayout {
  adjacency: string;                     // the predicate used
  cells: Map<Elem, [number, number]>;    // square -> (x, y)
  width: number;
  height: number;
}

/**
 * Look for a ternary predicate whose tuples read (cell, direction, cell)
 * with all directions recognizable, and lay the cells out by walking the
 * adjacency. Returns null when no such predicate exists or the walk is
 * inconsistent (different coordinates for one cell).
 */
export function detectGrid(state: StateJson): GridLayout | null {
  for (const [name, tuples] of Object.entries(state.predicates)) {
    if (!tuples.length || tuples.some((t) => t.length !== 3)) continue;
    if (tuples.some(([, d]) => directionOffset(d) === null)) continue;
    const cells = new Map<Elem, [number, number]>();
    const queue: Elem[] = [tuples[0][0]];
    cells.set(tuples[0][0], [0, 0]);
    let consistent = true;
    while (queue.length && consistent) {
      const cur = queue.shift()!;
      const [cx, cy] = cells.get(cur)!;
      for (const [from, dir, to] of tuples) {
        if (from !== cur) continue;
        const off = directionOffset(dir)!;
        const pos: [number, number] = [cx + off[0], cy + off[1]];
        const existing = cells.get(to);
        if (existing) {
          if (existing[0] !== pos[0] || existing[1] !== pos[1]) consistent = false;
        } else {
          cells.set(to, pos);
          queue.push(to);
        }
      }
    }
    if (!consistent || cells.size < 2) continue;
    // cover disconnected squares of the same sort by appending them below
    const sort = Object.entries(state.sorts).find(([, elems]) =>
      tuples.every(([a, , b]) => elems.includes(a) && elems.includes(b)));
    const xs = [...cells.values()].map((p) => p[0]);
    const ys = [...cells.values()].map((p) => p[1]);
    const minX = Math.min(...xs), minY = Math.min(...ys);
    for (const [elem, pos] of cells) cells.set(elem, [pos[0] - minX, pos[1] - minY]);
    let extraY = Math.max(...ys) - minY + 1;
    if (sort) {
      for (const elem of sort[1]) {
        if (!cells.has(elem)) cells.set(elem, [0, extraY++]);
      }
    }
    const width = Math.max(...[...cells.values()].map((p) => p[0])) + 1;
    const height = Math.max(...[...cells.values()].map((p) => p[1])) + 1;
    return { adjacency: name, cells, width, height };
  }
  return null;
}

/** Agents: functions into grid cells. Markers: unary predicates over cells. */
export function renderGrid(state: StateJson, layout: GridLayout): string {
  const occupants = new Map<string, string[]>();
  const put = (cell: Elem, text: string) => {
    const key = String(cell);
    if (!occupants.has(key)) occupants.set(key, []);
    occupants.get(key)!.push(text);
  };
  for (const [fname, entries] of Object.entries(state.functions)) {
    for (const [args, value] of entries) {
      if (layout.cells.has(value)) {
        put(value, `<span class="agent">${esc(args.length ? args.join(",") : fname)}</span>`);
      }
    }
  }
  for (const [pname, tuples] of Object.entries(state.predicates)) {
    if (pname === layout.adjacency) continue;
    for (const t of tuples) {
      if (t.length === 1 && layout.cells.has(t[0])) {
        put(t[0], `<span class="marker" title="${esc(pname)}">&bull;</span>`);
      }
    }
  }
  const grid: string[][] = Array.from({ length: layout.height }, () =>
    Array.from({ length: layout.width }, () => `<td class="void"></td>`));
  for (const [cell, [x, y]] of layout.cells) {
    const content = (occupants.get(String(cell)) ?? []).join("");
    grid[y][x] = `<td class="cell" data-cell="${esc(cell)}">` +
      `<div class="cell-name">${esc(cell)}</div>${content}</td>`;
  }
  const rows = grid.map((row) => `<tr>${row.join("")}</tr>`).join("");
  return `<table class="grid-view">${rows}</table>`;
}

// -- composite ----------------------------------------------------------------

export function renderState(state: StateJson, diff: StateDiff): string {
  const layout = detectGrid(state);
  const table = renderStateTable(state, diff);
  if (!layout) return table;
  return `${renderGrid(state, layout)}<details open><summary>tables</summary>${table}</details>`;
}

export function renderTimeline(count: number, current: number): string {
  const items = Array.from({ length: count }, (_, k) => {
    const cls = k === current ? "timeline-item current" : "timeline-item";
    return `<button class="${cls}" data-rollback="${k}">${k}</button>`;
  });
  return items.join("");
}

export function renderActions(labels: string[], disabled: boolean): string {
  return labels
    .map((label, i) =>
      `<button class="action" data-choice="${i}"${disabled ? " disabled" : ""}>` +
      `${esc(label)}</button>`)
    .join("");
}
