"""Game sessions behind the JSON play protocol.

One protocol serves two transports (stdio lines and HTTP POST): a
session holds the net, the chosen semantics, the human's role and the
engine kind, and a stack of snapshots so `undo` restores the previous
user decision point exactly. Every client action yields exactly one
reply message: `state`, `result`, `hint`, or `error`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional

from .game import (
    GameMove,
    GamePosition,
    NoMoves,
    pending_responses,
    search_strategy,
    spoiler_moves,
)
from .minsky import CompiledMachine
from .net import GLOBAL_IMPATIENT, Net, Semantics, dead_tokens, fire
from .strategies import (
    CorrectSimulation,
    OffScript,
    ProofDuplicator,
    classify_pair,
    is_conforming,
    is_significant_cheat,
)

SPOILER, DUPLICATOR = "spoiler", "duplicator"


@dataclass(frozen=True)
class Snapshot:
    """One user-visible instant of the play."""

    position: GamePosition
    pending: Optional[GameMove]
    transcript: tuple
    rounds: int
    off_script: bool
    result: Optional[dict]


class Session:
    """A single play-through; not thread-safe, callers serialize access."""

    def __init__(self, net: Net, sem: Semantics, position: GamePosition, *,
                 role: str = SPOILER, engine: str = "search",
                 compiled: Optional[CompiledMachine] = None,
                 depth: int = 8, seed: int = 0, session_id: str = "local"):
        if engine == "strategy" and compiled is None:
            raise ValueError("the strategy engine needs a compiled machine")
        self.net = net
        self.sem = sem
        self.role = role
        self.engine = engine
        self.compiled = compiled
        self.depth = depth
        self.seed = seed
        self.session_id = session_id
        self._search_spoiler = None
        self._search_duplicator = None
        self._proof_spoiler = CorrectSimulation(compiled) if compiled else None
        self._proof_duplicator = ProofDuplicator(compiled) if compiled else None
        first = Snapshot(position, None, (), 0, False, None)
        self.stack = [self._engine_turns(first)]

    # -- engine plumbing ----------------------------------------------------

    def _searcher(self, role: str):
        if role == SPOILER:
            if self._search_spoiler is None:
                self._search_spoiler = search_strategy(
                    self.net, self.sem, SPOILER, self.depth, self.seed)
            return self._search_spoiler
        if self._search_duplicator is None:
            self._search_duplicator = search_strategy(
                self.net, self.sem, DUPLICATOR, self.depth, self.seed)
        return self._search_duplicator

    def _engine_move(self, snap: Snapshot):
        """(move, went_off_script) for the engine playing Spoiler."""
        if self.engine == "strategy":
            try:
                return self._proof_spoiler.move(snap.position), snap.off_script
            except OffScript:
                pass
            return self._searcher(SPOILER)(snap.position), True
        return self._searcher(SPOILER)(snap.position), snap.off_script

    def _pre_position(self, snap: Snapshot) -> GamePosition:
        """The position before the pending half-move was applied; the
        strategies reason about full rounds."""
        move = snap.pending
        marking = snap.position.side(move.side)
        original = marking.sub(move.instance.produced()).add(move.instance.submarking)
        return snap.position.with_side(move.side, original)

    def _engine_response(self, snap: Snapshot):
        pre = self._pre_position(snap)
        if self.engine == "strategy":
            try:
                response = self._proof_duplicator.respond(pre, snap.pending)
                return response, snap.off_script
            except OffScript:
                pass
            try:
                return self._searcher(DUPLICATOR)(pre, snap.pending), True
            except NoMoves:
                return None, True
        try:
            return self._searcher(DUPLICATOR)(pre, snap.pending), snap.off_script
        except NoMoves:
            return None, snap.off_script

    def _engine_turns(self, snap: Snapshot) -> Snapshot:
        """Let the engine act until it is the human's turn or the game ends."""
        if self.engine == "manual":
            return self._settle(snap)
        while snap.result is None:
            snap = self._settle(snap)
            if snap.result is not None:
                break
            if snap.pending is None:
                if self.role == SPOILER:
                    break
                move, off = self._engine_move(snap)
                snap = self._half_move(snap, move, off)
            else:
                if self.role == DUPLICATOR:
                    break
                response, off = self._engine_response(snap)
                if response is None:
                    snap = replace(snap, off_script=off, result={
                        "result": "spoiler_wins", "rounds": snap.rounds + 1})
                    break
                snap = self._respond(snap, response, off)
        return snap

    def _settle(self, snap: Snapshot) -> Snapshot:
        """Attach a result when the side to act has no option."""
        if snap.result is not None:
            return snap
        if snap.pending is None:
            if not spoiler_moves(self.net, self.sem, snap.position):
                return replace(snap, result={
                    "result": "duplicator_wins", "rounds": snap.rounds})
        elif not pending_responses(self.net, self.sem, snap.position, snap.pending):
            return replace(snap, result={
                "result": "spoiler_wins", "rounds": snap.rounds + 1})
        return snap

    def _half_move(self, snap: Snapshot, move: GameMove, off: bool) -> Snapshot:
        after = snap.position.with_side(
            move.side, fire(snap.position.side(move.side), move.instance))
        record = self._record(move, after, off)
        return Snapshot(after, move, snap.transcript + (record,),
                        snap.rounds, off, None)

    def _respond(self, snap: Snapshot, response: GameMove, off: bool) -> Snapshot:
        after = snap.position.with_side(
            response.side, fire(snap.position.side(response.side), response.instance))
        record = self._record(response, after, off)
        return Snapshot(after, None, snap.transcript + (record,),
                        snap.rounds + 1, off, None)

    def _record(self, move: GameMove, after: GamePosition, off: bool) -> dict:
        record = {
            "side": move.side,
            "action": move.action,
            "time": move.time_label,
            "rule": move.instance.rule.id,
            "successor_left": str(after.left),
            "successor_right": str(after.right),
        }
        if off:
            record["off_script"] = True
        return record

    # -- protocol entry points ----------------------------------------------

    @property
    def snap(self) -> Snapshot:
        return self.stack[-1]

    def options(self, snap: Optional[Snapshot] = None) -> list[GameMove]:
        snap = snap or self.snap
        if snap.result is not None:
            return []
        if snap.pending is None:
            return spoiler_moves(self.net, self.sem, snap.position)
        return pending_responses(self.net, self.sem, snap.position, snap.pending)

    def handle(self, request: dict) -> dict:
        kind = request.get("type")
        if kind == "state":
            return self.state_message()
        if kind in ("move", "response"):
            return self._play(request)
        if kind == "hint":
            return self._hint()
        if kind == "undo":
            if len(self.stack) == 1:
                return self._error("nothing to undo")
            self.stack.pop()
            return self.state_message()
        if kind == "resign":
            winner = "duplicator_wins" if self.role == SPOILER else "spoiler_wins"
            snap = replace(self.snap, result={
                "result": "resigned", "winner": winner, "rounds": self.snap.rounds})
            self.stack.append(snap)
            return self._result_message(snap)
        return self._error(f"unknown request type {kind!r}")

    def _play(self, request: dict) -> dict:
        snap = self.snap
        if snap.result is not None:
            return self._error("the game is over")
        options = self.options(snap)
        index = request.get("index")
        if not isinstance(index, int) or not 0 <= index < len(options):
            return self._error(f"index must name one of the {len(options)} options")
        chosen = options[index]
        if snap.pending is None:
            nxt = self._half_move(snap, chosen, snap.off_script)
        else:
            nxt = self._respond(snap, chosen, snap.off_script)
        nxt = self._engine_turns(nxt)
        self.stack.append(nxt)
        if nxt.result is not None:
            return self._result_message(nxt)
        return self.state_message()

    def _hint(self) -> dict:
        snap = self.snap
        options = self.options(snap)
        if not options:
            return self._error("no options to hint about")
        pre = self._pre_position(snap) if snap.pending else snap.position
        suggestion = None
        if self.compiled is not None:
            try:
                if snap.pending is None:
                    suggestion = self._proof_spoiler.move(pre)
                else:
                    suggestion = self._proof_duplicator.respond(pre, snap.pending)
            except OffScript:
                suggestion = None
        if suggestion is None:
            try:
                if snap.pending is None:
                    suggestion = self._searcher(SPOILER)(pre)
                else:
                    suggestion = self._searcher(DUPLICATOR)(pre, snap.pending)
            except NoMoves:
                return self._error("no legal option to suggest")
        for i, option in enumerate(options):
            if option.instance.successor == suggestion.instance.successor \
                    and option.side == suggestion.side:
                return {"type": "hint", "move": {**option.describe(), "index": i}}
        return self._error("hint engine produced an unlisted move")

    # -- message building -----------------------------------------------------

    def annotations(self) -> Optional[dict]:
        if self.sem != GLOBAL_IMPATIENT:
            return None
        pos = self.snap.position
        out = {
            "equal": pos.left == pos.right,
            "conforming": is_conforming(pos),
            "dead": {
                "left": str(dead_tokens(self.net, self.sem, pos.left)),
                "right": str(dead_tokens(self.net, self.sem, pos.right)),
            },
            "equimarking": {
                "left": self._equimarking_time(pos.left),
                "right": self._equimarking_time(pos.right),
            },
        }
        if self.compiled is not None:
            out["shape"] = classify_pair(self.net, pos).value
            out["cheat_point"] = is_significant_cheat(pos)
            if self._proof_duplicator is not None:
                out["engine_mode"] = self._proof_duplicator.mode.value
        return out

    def _equimarking_time(self, marking) -> Optional[int]:
        live = marking - dead_tokens(self.net, self.sem, marking)
        stamps = live.stamps()
        if len(stamps) == 1:
            return stamps.pop()
        if not stamps and marking:
            return marking.max_stamp()  # deadlocked: vacuous at any time
        return None

    def state_message(self) -> dict:
        snap = self.snap
        options = self.options(snap)
        return {
            "type": "state",
            "session": self.session_id,
            "sem": self.sem.short,
            "role": self.role,
            "engine": self.engine,
            "awaiting": "none" if snap.result is not None
                        else ("response" if snap.pending else "move"),
            "position": {"left": str(snap.position.left),
                         "right": str(snap.position.right)},
            "pending_move": snap.pending.describe() if snap.pending else None,
            "moves": [{**m.describe(), "index": i} for i, m in enumerate(options)],
            "round": snap.rounds,
            "off_script": snap.off_script,
            "annotations": self.annotations(),
            "transcript": list(snap.transcript),
            "result": snap.result,
        }

    def _result_message(self, snap: Snapshot) -> dict:
        return {"type": "result", **snap.result, "state": self.state_message()}

    @staticmethod
    def _error(message: str) -> dict:
        return {"type": "error", "message": message}


def session_from_config(config: dict, *, session_id: str = "local",
                        defaults: Optional[dict] = None) -> Session:
    """Build a session from a protocol configuration object.

    `defaults` carries preloaded net/machine texts from the CLI; the
    request may override them with its own `net_text`/`machine_text`.
    """
    from .minsky import compile_machine
    from .textio import parse_machine, parse_marking, parse_net

    merged = dict(defaults or {})
    merged.update({k: v for k, v in config.items() if v is not None})
    sem = Semantics.parse(merged.get("sem", "gi"))
    compiled = None
    if merged.get("machine_text"):
        compiled = compile_machine(parse_machine(merged["machine_text"]))
        net = compiled.net
        left = parse_marking(merged["left"]) if merged.get("left") else compiled.left_init
        right = parse_marking(merged["right"]) if merged.get("right") else compiled.right_init
    elif merged.get("net_text"):
        net = parse_net(merged["net_text"])
        left = parse_marking(merged["left"])
        right = parse_marking(merged["right"])
    else:
        raise ValueError("config needs machine_text or net_text")
    engine = merged.get("engine") or ("strategy" if compiled else "search")
    return Session(
        net, sem, GamePosition(left, right),
        role=merged.get("as", SPOILER),
        engine=engine,
        compiled=compiled,
        depth=int(merged.get("depth", 8)),
        seed=int(merged.get("seed", 0)),
        session_id=session_id,
    )


def replay_transcript(net: Net, sem: Semantics, records: list,
                      left, right=None):
    """Re-apply transcript records; returns the final marking pair (or
    single marking when `right` is None and records are one-sided)."""
    position = GamePosition(left, right) if right is not None else None
    marking = left if right is None else None
    for lineno, record in enumerate(records, start=1):
        side = record.get("side", "left")
        target = marking if position is None else position.side(side)
        chosen = None
        for inst in _enabled_for(net, sem, target):
            if inst.rule.id != record["rule"] or inst.time_label != record["time"]:
                continue
            succ_text = str(inst.successor)
            wanted = record.get(
                "successor_left" if side == "left" else "successor_right")
            if position is None:
                wanted = record.get("successor_left", succ_text)
            if succ_text == wanted:
                chosen = inst
                break
        if chosen is None:
            raise ValueError(f"transcript step {lineno} does not apply: {record}")
        if position is None:
            marking = chosen.successor
        else:
            position = position.with_side(side, chosen.successor)
    return marking if position is None else position


def _enabled_for(net, sem, marking):
    from .net import enabled

    return enabled(net, sem, marking)


def encode(message: dict) -> str:
    return json.dumps(message)
