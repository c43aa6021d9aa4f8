import { describe, expect, it } from "vitest";

import { badgeFor, buildBoard } from "../src/board";
import { StateMessage } from "../src/protocol";

function stateFixture(overrides: Partial<StateMessage> = {}): StateMessage {
  return {
    type: "state",
    session: "s1",
    sem: "gi",
    role: "spoiler",
    engine: "strategy",
    awaiting: "move",
    position: { left: "0@p1", right: "0@q1" },
    pending_move: null,
    moves: [
      { index: 0, side: "left", action: "i", time: 0, rule: "I.p.1", consumed: "0@p1" },
    ],
    round: 0,
    off_script: false,
    annotations: {
      equal: false,
      conforming: true,
      dead: { left: "~", right: "~" },
      equimarking: { left: 0, right: 0 },
      shape: "conforming",
      cheat_point: false,
      engine_mode: "mirror",
    },
    transcript: [],
    result: null,
    ...overrides,
  };
}

describe("buildBoard", () => {
  it("keeps the raw message verbatim", () => {
    const state = stateFixture();
    expect(buildBoard(state).raw).toBe(state);
  });

  it("captions moves with the (action, time) pair", () => {
    const board = buildBoard(stateFixture());
    expect(board.moves[0]!.caption).toBe("(i, 0)");
    expect(board.moves[0]!.consumedTokens).toBe("0@p1");
  });

  it("splits both panels by stamp", () => {
    const board = buildBoard(stateFixture({
      position: { left: "0@c0a 1@p1", right: "0@c0a 1@q1" },
      annotations: null,
    }));
    expect(board.left.map((row) => row.stamp)).toEqual([0, 1]);
    expect(board.right[1]!.tokens[0]!.place).toBe("q1");
  });

  it("turns the transcript into the history timeline", () => {
    const board = buildBoard(stateFixture({
      transcript: [
        { side: "left", action: "i", time: 0, rule: "I.p.1",
          successor_left: "1@p1 1@c0a 1@c0b", successor_right: "0@q1" },
        { side: "right", action: "i", time: 0, rule: "I.q.1",
          successor_left: "1@p1 1@c0a 1@c0b",
          successor_right: "1@q1 1@c0a 1@c0b", off_script: true },
      ],
    }));
    expect(board.history).toHaveLength(2);
    expect(board.history[1]).toMatchObject({ side: "right", offScript: true });
  });
});

describe("badgeFor", () => {
  it("prefers off-script over everything", () => {
    expect(badgeFor(stateFixture({ off_script: true }))).toBe("off-script");
  });

  it("labels conforming and cheat states", () => {
    expect(badgeFor(stateFixture())).toBe("conforming");
    const cheat = stateFixture();
    cheat.annotations!.cheat_point = true;
    expect(badgeFor(cheat)).toBe("conforming: faked zero test");
  });

  it("labels equal-mod-dead via the shape", () => {
    const state = stateFixture();
    state.annotations!.conforming = false;
    state.annotations!.shape = "equal-mod-dead";
    expect(badgeFor(state)).toBe("equal mod dead");
  });

  it("is empty without annotations", () => {
    expect(badgeFor(stateFixture({ annotations: null }))).toBe("");
  });
});
