/**
 * Pure view-model construction: the board renders exactly the last
 * state message, reshaped for display. No game logic lives here.
 */

import { StateMessage, MoveDescriptor, TranscriptRecord } from "./protocol";
import { Sidecar, StampRow, placeNamer, stampRows } from "./tokens";

export interface MoveView extends MoveDescriptor {
  /** "(action, t)" pair the game is actually about */
  caption: string;
  /** tokens to highlight on hover: distinguishes equal-label moves */
  consumedTokens: string;
}

export interface HistoryEntry {
  index: number;
  side: "left" | "right";
  caption: string;
  rule: string;
  offScript: boolean;
}

export interface BoardViewModel {
  raw: StateMessage;
  left: StampRow[];
  right: StampRow[];
  awaiting: "move" | "response" | "none";
  role: string;
  round: number;
  badge: string;
  equimarking: { left: number | null; right: number | null } | null;
  pending: MoveView | null;
  moves: MoveView[];
  history: HistoryEntry[];
  result: string | null;
}

function caption(move: { action: string; time: number }): string {
  return `(${move.action}, ${move.time})`;
}

export function badgeFor(state: StateMessage): string {
  if (state.off_script) return "off-script";
  const notes = state.annotations;
  if (!notes) return "";
  if (notes.equal) return "equal";
  if (notes.shape === "equal-mod-dead") return "equal mod dead";
  if (notes.cheat_point) return "conforming: faked zero test";
  if (notes.conforming) return "conforming";
  return notes.shape ?? "";
}

export function buildBoard(state: StateMessage, sidecar?: Sidecar): BoardViewModel {
  const name = placeNamer(sidecar);
  const dead = state.annotations?.dead;
  const describe = (move: MoveDescriptor): MoveView => ({
    ...move,
    caption: caption(move),
    consumedTokens: move.consumed,
  });
  return {
    raw: state,
    left: stampRows(state.position.left, dead?.left, name),
    right: stampRows(state.position.right, dead?.right, name),
    awaiting: state.awaiting,
    role: state.role,
    round: state.round,
    badge: badgeFor(state),
    equimarking: state.annotations?.equimarking ?? null,
    pending: state.pending_move
      ? { ...state.pending_move, index: -1, caption: caption(state.pending_move), consumedTokens: state.pending_move.consumed }
      : null,
    moves: state.moves.map(describe),
    history: state.transcript.map(historyEntry),
    result: state.result ? state.result.result : null,
  };
}

function historyEntry(record: TranscriptRecord, index: number): HistoryEntry {
  return {
    index,
    side: record.side,
    caption: caption(record),
    rule: record.rule,
    offScript: record.off_script === true,
  };
}
