/**
 * DOM wiring: connect to a play server, create a session, render the
 * board from each server reply, and forward clicks as protocol
 * requests. One request in flight at a time; the board is always the
 * last server message, never an optimistic guess.
 */

import { BoardViewModel, MoveView, buildBoard } from "./board";
import {
  PlayClient,
  ServerMessage,
  SessionConfig,
  StateMessage,
  stateOf,
  transcriptLines,
} from "./protocol";
import { Sidecar, StampRow } from "./tokens";

const $ = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
};

let client: PlayClient | null = null;
let lastState: StateMessage | null = null;
let sidecar: Sidecar | undefined;
let hintIndex: number | null = null;
let busy = false;

function setBanner(text: string | null): void {
  const banner = $("banner");
  banner.textContent = text ?? "";
  banner.classList.toggle("hidden", text === null);
}

async function request(action: () => Promise<ServerMessage>): Promise<void> {
  if (busy) return;
  busy = true;
  try {
    const message = await action();
    if (message.type === "error") {
      setBanner(message.message);
    } else if (message.type === "hint") {
      hintIndex = message.move.index;
      setBanner(`engine suggests ${message.move.rule} at t=${message.move.time}`);
    } else {
      const state = stateOf(message);
      if (state) {
        lastState = state;
        hintIndex = null;
        setBanner(null);
      }
    }
  } catch (error) {
    setBanner(String(error));
  } finally {
    busy = false;
    render();
  }
}

function tokenChip(token: StampRow["tokens"][number]): HTMLElement {
  const chip = document.createElement("span");
  chip.className = "token" + (token.dead >= token.count ? " dead" : "");
  chip.textContent = token.count > 1 ? `${token.label} ×${token.count}` : token.label;
  if (token.dead > 0 && token.dead < token.count) {
    chip.textContent += ` (${token.dead} dead)`;
    chip.classList.add("part-dead");
  }
  chip.dataset.place = token.place;
  return chip;
}

function renderPanel(target: HTMLElement, rows: StampRow[], equi: number | null): void {
  target.replaceChildren();
  if (rows.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "~";
    target.appendChild(empty);
    return;
  }
  for (const row of rows) {
    const line = document.createElement("div");
    line.className = "stamp-row";
    const stamp = document.createElement("span");
    stamp.className = "stamp" + (row.stamp === equi ? " equi" : "");
    stamp.textContent = `t=${row.stamp}`;
    line.appendChild(stamp);
    for (const token of row.tokens) line.appendChild(tokenChip(token));
    target.appendChild(line);
  }
}

function highlightConsumed(move: MoveView | null): void {
  for (const chip of document.querySelectorAll<HTMLElement>(".token")) {
    chip.classList.remove("consumed");
  }
  if (!move) return;
  const panel = $(move.side === "left" ? "left-panel" : "right-panel");
  for (const atom of move.consumedTokens.split(/\s+/)) {
    const placePart = atom.split("@")[1];
    if (!placePart) continue;
    const place = placePart.split("*")[0];
    for (const chip of panel.querySelectorAll<HTMLElement>(".token")) {
      if (chip.dataset.place === place) chip.classList.add("consumed");
    }
  }
}

function renderMoves(board: BoardViewModel): void {
  const list = $("moves");
  list.replaceChildren();
  for (const move of board.moves) {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.textContent = `${move.caption} ${move.rule} on ${move.side}`;
    button.className = move.index === hintIndex ? "hinted" : "";
    button.disabled = board.result !== null;
    button.addEventListener("mouseenter", () => highlightConsumed(move));
    button.addEventListener("mouseleave", () => highlightConsumed(null));
    button.addEventListener("click", () => {
      void request(() =>
        client!.send({
          type: board.awaiting === "response" ? "response" : "move",
          index: move.index,
        }),
      );
    });
    item.appendChild(button);
    list.appendChild(item);
  }
}

function renderHistory(board: BoardViewModel): void {
  const list = $("history");
  list.replaceChildren();
  for (const entry of board.history) {
    const item = document.createElement("li");
    item.textContent =
      `${entry.index + 1}. ${entry.side}: ${entry.caption} ${entry.rule}` +
      (entry.offScript ? " [off-script]" : "");
    list.appendChild(item);
  }
  list.scrollTop = list.scrollHeight;
}

function render(): void {
  if (!lastState) return;
  const board = buildBoard(lastState, sidecar);
  renderPanel($("left-panel"), board.left, board.equimarking?.left ?? null);
  renderPanel($("right-panel"), board.right, board.equimarking?.right ?? null);
  $("badge").textContent = board.badge;
  $("round").textContent = `round ${board.round}`;
  $("status").textContent = board.result
    ? `game over: ${board.result.replace("_", " ")}`
    : board.awaiting === "response"
      ? `answer ${board.pending?.caption ?? ""} ${board.pending?.rule ?? ""}`
      : board.awaiting === "move"
        ? "your move"
        : "";
  renderMoves(board);
  renderHistory(board);
}

function exportTranscript(): void {
  if (!lastState) return;
  const blob = new Blob([transcriptLines(lastState)], { type: "application/jsonl" });
  const anchor = document.createElement("a");
  anchor.href = URL.createObjectURL(blob);
  anchor.download = `game-${lastState.session}.jsonl`;
  anchor.click();
  URL.revokeObjectURL(anchor.href);
}

async function connect(): Promise<void> {
  const base = ($("server") as HTMLInputElement).value.replace(/\/$/, "");
  client = new PlayClient(base);
  sidecar = undefined;
  const sidecarText = ($("sidecar") as HTMLTextAreaElement).value.trim();
  if (sidecarText) {
    try {
      sidecar = JSON.parse(sidecarText) as Sidecar;
    } catch (error) {
      setBanner(`sidecar ignored: ${String(error)}`);
    }
  }
  const config: SessionConfig = {
    as: ($("role") as HTMLSelectElement).value as SessionConfig["as"],
    engine: ($("engine") as HTMLSelectElement).value as SessionConfig["engine"],
  };
  await request(async () => await client!.createSession(config));
  $("game").classList.remove("hidden");
}

export function start(): void {
  $("connect").addEventListener("click", () => void connect());
  $("hint").addEventListener("click", () => void request(() => client!.send({ type: "hint" })));
  $("undo").addEventListener("click", () => void request(() => client!.send({ type: "undo" })));
  $("resign").addEventListener("click", () => void request(() => client!.send({ type: "resign" })));
  $("export").addEventListener("click", exportTranscript);
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", start);
}
