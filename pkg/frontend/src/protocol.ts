/**
 * Message types of the play protocol and a thin fetch client.
 *
 * The client never derives game state on its own: whatever the last
 * server message said *is* the session state, and at most one request
 * is in flight per session.
 */

export interface MoveDescriptor {
  index: number;
  side: "left" | "right";
  action: string;
  time: number;
  rule: string;
  consumed: string;
}

export interface TranscriptRecord {
  side: "left" | "right";
  action: string;
  time: number;
  rule: string;
  successor_left: string;
  successor_right?: string;
  off_script?: boolean;
}

export interface Annotations {
  equal: boolean;
  conforming: boolean;
  dead: { left: string; right: string };
  equimarking: { left: number | null; right: number | null };
  shape?: string;
  cheat_point?: boolean;
  engine_mode?: string;
}

export interface StateMessage {
  type: "state";
  session: string;
  sem: string;
  role: "spoiler" | "duplicator";
  engine: string;
  awaiting: "move" | "response" | "none";
  position: { left: string; right: string };
  pending_move: Omit<MoveDescriptor, "index"> | null;
  moves: MoveDescriptor[];
  round: number;
  off_script: boolean;
  annotations: Annotations | null;
  transcript: TranscriptRecord[];
  result: ResultBody | null;
}

export interface ResultBody {
  result: string;
  rounds: number;
  winner?: string;
}

export interface ResultMessage extends ResultBody {
  type: "result";
  state: StateMessage;
}

export interface HintMessage {
  type: "hint";
  move: MoveDescriptor;
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type ServerMessage = StateMessage | ResultMessage | HintMessage | ErrorMessage;

export type ClientRequest =
  | { type: "state" }
  | { type: "move"; index: number }
  | { type: "response"; index: number }
  | { type: "hint" }
  | { type: "undo" }
  | { type: "resign" };

export interface SessionConfig {
  machine_text?: string;
  net_text?: string;
  left?: string;
  right?: string;
  sem?: string;
  as?: "spoiler" | "duplicator";
  engine?: "strategy" | "search" | "manual";
  depth?: number;
  seed?: number;
}

export function parseServerMessage(payload: unknown): ServerMessage {
  if (typeof payload !== "object" || payload === null) {
    throw new Error("server message is not an object");
  }
  const message = payload as { type?: unknown };
  switch (message.type) {
    case "state": {
      const state = payload as StateMessage;
      if (!state.position || !Array.isArray(state.moves)) {
        throw new Error("malformed state message");
      }
      return state;
    }
    case "result": {
      const result = payload as ResultMessage;
      if (typeof result.result !== "string" || !result.state) {
        throw new Error("malformed result message");
      }
      return result;
    }
    case "hint": {
      const hint = payload as HintMessage;
      if (typeof hint.move?.index !== "number") {
        throw new Error("malformed hint message");
      }
      return hint;
    }
    case "error": {
      const error = payload as ErrorMessage;
      if (typeof error.message !== "string") {
        throw new Error("malformed error message");
      }
      return error;
    }
    default:
      throw new Error(`unknown server message type ${String(message.type)}`);
  }
}

/** The state embedded in any non-error reply, if there is one. */
export function stateOf(message: ServerMessage): StateMessage | null {
  if (message.type === "state") return message;
  if (message.type === "result") return message.state;
  return null;
}

export function transcriptLines(state: StateMessage): string {
  return state.transcript.map((record) => JSON.stringify(record)).join("\n") + "\n";
}

export class PlayClient {
  private sessionPath: string | null = null;

  constructor(readonly base: string) {}

  private async post(path: string, body: unknown): Promise<ServerMessage> {
    const response = await fetch(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return parseServerMessage(await response.json());
  }

  async createSession(config: SessionConfig): Promise<StateMessage> {
    const message = await this.post("/sessions", config);
    if (message.type === "error") throw new Error(message.message);
    const state = stateOf(message);
    if (!state) throw new Error(`expected a state reply, got ${message.type}`);
    this.sessionPath = `/sessions/${state.session}`;
    return state;
  }

  async send(request: ClientRequest): Promise<ServerMessage> {
    if (!this.sessionPath) throw new Error("no session yet");
    return this.post(this.sessionPath, request);
  }

  async refresh(): Promise<StateMessage> {
    if (!this.sessionPath) throw new Error("no session yet");
    const response = await fetch(this.base + this.sessionPath);
    const message = parseServerMessage(await response.json());
    if (message.type !== "state") throw new Error("expected a state message");
    return message;
  }
}
