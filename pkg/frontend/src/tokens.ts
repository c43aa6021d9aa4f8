/**
 * Client-side reading of the marking text notation, for display only.
 * Legality of anything always comes from the server.
 *
 * Markings arrive as whitespace-separated `t@place` / `t@place*k`
 * atoms, `~` when empty. The compiler sidecar maps emitted ASCII place
 * ids back to source-style names (pp1 -> p'_1) for token labels.
 */

export interface TokenGroup {
  place: string;
  stamp: number;
  count: number;
}

export interface Sidecar {
  places: Record<string, string>;
  labels: Record<string, string>;
  rules: Record<string, { family: string; side: string | null; instr: number | null; counter: number | null }>;
}

const ATOM = /^(\d+)@([A-Za-z][A-Za-z0-9_]*)(?:\*(\d+))?$/;

export function parseMarking(text: string): TokenGroup[] {
  const trimmed = text.trim();
  if (trimmed === "~" || trimmed === "") return [];
  const groups = new Map<string, TokenGroup>();
  for (const atom of trimmed.split(/\s+/)) {
    const m = ATOM.exec(atom);
    if (!m) throw new Error(`unreadable token ${JSON.stringify(atom)}`);
    const stamp = Number(m[1]);
    const place = m[2]!;
    const count = m[3] ? Number(m[3]) : 1;
    const key = `${stamp}@${place}`;
    const existing = groups.get(key);
    if (existing) existing.count += count;
    else groups.set(key, { place, stamp, count });
  }
  return [...groups.values()].sort(
    (a, b) => a.stamp - b.stamp || a.place.localeCompare(b.place),
  );
}

/** Invert the sidecar place table once; raw ids label themselves. */
export function placeNamer(sidecar?: Sidecar): (place: string) => string {
  if (!sidecar) return (place) => place;
  const inverse = new Map<string, string>();
  for (const [sourceName, id] of Object.entries(sidecar.places)) {
    inverse.set(id, sourceName);
  }
  return (place) => inverse.get(place) ?? place;
}

export interface StampRow {
  stamp: number;
  tokens: Array<{ place: string; label: string; count: number; dead: number }>;
}

/**
 * Group one side's tokens by stamp and mark how many of each kind are
 * dead, from the server's dead-token sub-marking.
 */
export function stampRows(
  markingText: string,
  deadText: string | undefined,
  name: (place: string) => string,
): StampRow[] {
  const dead = new Map<string, number>();
  if (deadText !== undefined) {
    for (const g of parseMarking(deadText)) {
      dead.set(`${g.stamp}@${g.place}`, g.count);
    }
  }
  const rows = new Map<number, StampRow>();
  for (const g of parseMarking(markingText)) {
    let row = rows.get(g.stamp);
    if (!row) {
      row = { stamp: g.stamp, tokens: [] };
      rows.set(g.stamp, row);
    }
    row.tokens.push({
      place: g.place,
      label: name(g.place),
      count: g.count,
      dead: Math.min(g.count, dead.get(`${g.stamp}@${g.place}`) ?? 0),
    });
  }
  return [...rows.values()].sort((a, b) => a.stamp - b.stamp);
}
