"""The bisimulation game over durational labels (action, time).

Spoiler picks a side and fires an enabled instance; Duplicator must
answer on the other side with an instance carrying the same action and
the same time label. A player with no legal move loses; an infinite
play is a Duplicator win.

`solve_bounded` decides forced Spoiler wins up to a round budget and,
when the reachable position closure is finite, certifies bisimilarity
by a greatest-fixpoint check over that closure.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Union

from .multiset import DurationalMarking
from .net import (
    FireableInstance,
    Net,
    Semantics,
    canonicalize_pair,
    enabled,
    fire,
)


class IllegalMove(ValueError):
    """A move or response that is not currently legal."""


class ResourceBudgetExceeded(RuntimeError):
    """The solver touched more distinct positions than allowed."""


LEFT, RIGHT = "left", "right"


def other_side(side: str) -> str:
    return RIGHT if side == LEFT else LEFT


@dataclass(frozen=True)
class GamePosition:
    left: DurationalMarking
    right: DurationalMarking

    def side(self, side: str) -> DurationalMarking:
        return self.left if side == LEFT else self.right

    def with_side(self, side: str, marking: DurationalMarking) -> "GamePosition":
        if side == LEFT:
            return GamePosition(marking, self.right)
        return GamePosition(self.left, marking)

    def canonical(self) -> tuple["GamePosition", int]:
        m1, m2, delta = canonicalize_pair(self.left, self.right)
        return GamePosition(m1, m2), delta

    def key(self):
        return (self.left.key(), self.right.key())

    def __str__(self) -> str:
        return f"({self.left}, {self.right})"


@dataclass(frozen=True)
class GameMove:
    side: str
    instance: FireableInstance

    @property
    def action(self) -> str:
        return self.instance.action

    @property
    def time_label(self) -> int:
        return self.instance.time_label

    def describe(self) -> dict:
        return {
            "side": self.side,
            "action": self.action,
            "time": self.time_label,
            "rule": self.instance.rule.id,
            "consumed": str(self.instance.submarking),
        }


@dataclass(frozen=True)
class SpoilerWins:
    rounds: int


@dataclass(frozen=True)
class Bisimilar:
    relation: tuple[GamePosition, ...] = ()


@dataclass(frozen=True)
class Unknown:
    depth: int


Verdict = Union[SpoilerWins, Bisimilar, Unknown]


def verdict_json(verdict: Verdict) -> dict:
    if isinstance(verdict, SpoilerWins):
        return {"verdict": "spoiler", "rounds": verdict.rounds}
    if isinstance(verdict, Bisimilar):
        return {"verdict": "bisimilar"}
    return {"verdict": "unknown", "depth": verdict.depth}


def spoiler_moves(net: Net, sem: Semantics, pos: GamePosition) -> list[GameMove]:
    """Every enabled instance of either side, tagged with its side."""
    return [GameMove(LEFT, inst) for inst in enabled(net, sem, pos.left)] + [
        GameMove(RIGHT, inst) for inst in enabled(net, sem, pos.right)
    ]


def _matching_moves(net: Net, sem: Semantics, marking, side: str,
                    action: str, time_label: int) -> list[GameMove]:
    seen = set()
    moves = []
    for inst in enabled(net, sem, marking):
        if inst.action != action or inst.time_label != time_label:
            continue
        if inst.successor.key() in seen:
            continue
        seen.add(inst.successor.key())
        moves.append(GameMove(side, inst))
    return moves


def duplicator_responses(net: Net, sem: Semantics, pos: GamePosition,
                         move: GameMove) -> list[GameMove]:
    """Opposite-side instances matching the move's (action, time) pair.

    Responses whose successor markings coincide are reported once. An
    empty list means Duplicator loses the round.
    """
    if move.instance not in enabled(net, sem, pos.side(move.side)):
        raise IllegalMove(f"move {move.describe()} is not enabled")
    side = other_side(move.side)
    return _matching_moves(net, sem, pos.side(side), side,
                           move.action, move.time_label)


def pending_responses(net: Net, sem: Semantics, pos_after_move: GamePosition,
                      move: GameMove) -> list[GameMove]:
    """Legal responses once the move's own side has already advanced;
    the responder's marking is untouched by the half-move."""
    side = other_side(move.side)
    return _matching_moves(net, sem, pos_after_move.side(side), side,
                           move.action, move.time_label)


def play_round(pos: GamePosition, move: GameMove, response: GameMove) -> GamePosition:
    """The position after a full round (both successors applied)."""
    after_move = pos.with_side(move.side, fire(pos.side(move.side), move.instance))
    return after_move.with_side(
        response.side, fire(after_move.side(response.side), response.instance)
    )


# ---------------------------------------------------------------------------
# bounded solver
# ---------------------------------------------------------------------------

_INF = float("inf")


class BoundedSolver:
    """Depth-bounded AND-OR search plus a finite-closure certificate.

    Positions are memoized under stamp-shift canonicalization; with
    `swap_collapse` the left/right order is additionally normalized
    (sound because the rules are shared, kept off by default).
    """

    def __init__(self, net: Net, sem: Semantics, *, max_positions: int = 10 ** 6,
                 certificate_cap: int = 20_000, swap_collapse: bool = False):
        self.net = net
        self.sem = sem
        self.max_positions = max_positions
        self.certificate_cap = min(certificate_cap, max_positions)
        self.swap_collapse = swap_collapse
        self._positions: dict = {}       # key -> canonical GamePosition
        self._children: dict = {}        # key -> tuple of tuples of child keys
        self._win_at: dict = {}          # key -> least r with a forced win <= r
        self._safe_at: dict = {}         # key -> greatest r checked without win

    def _intern(self, pos: GamePosition):
        canon, _ = pos.canonical()
        key = canon.key()
        if self.swap_collapse:
            swapped = (key[1], key[0])
            if swapped < key:
                key = swapped
                canon = GamePosition(canon.right, canon.left)
        if key not in self._positions:
            if len(self._positions) >= self.max_positions:
                raise ResourceBudgetExceeded(
                    f"more than {self.max_positions} distinct positions explored"
                )
            self._positions[key] = canon
        return key

    def _expand(self, key):
        children = self._children.get(key)
        if children is None:
            pos = self._positions[key]
            per_move = []
            for move in spoiler_moves(self.net, self.sem, pos):
                kids = sorted(
                    {self._intern(play_round(pos, move, resp))
                     for resp in duplicator_responses(self.net, self.sem, pos, move)}
                )
                per_move.append(tuple(kids))
            # identical AND-branches are interchangeable for solving
            children = tuple(sorted(set(per_move)))
            self._children[key] = children
            if any(not kids for kids in children):
                self._win_at[key] = 1
            if not children:
                self._safe_at[key] = _INF  # both sides stuck: trivially bisimilar
        return children

    def win_within(self, key, rounds: int) -> bool:
        if rounds <= 0:
            return False
        if self._win_at.get(key, _INF) <= rounds:
            return True
        if self._safe_at.get(key, -1) >= rounds:
            return False
        result = False
        for kids in self._expand(key):
            if not kids:
                result = True
                break
            if rounds > 1 and all(self.win_within(kid, rounds - 1) for kid in kids):
                result = True
                break
        if result:
            self._win_at[key] = min(self._win_at.get(key, _INF), rounds)
        else:
            self._safe_at[key] = max(self._safe_at.get(key, -1), rounds)
        return result

    def minimal_win(self, pos: GamePosition, depth: int) -> Optional[int]:
        """Least number of rounds in which Spoiler can force a win, if
        that number is <= depth."""
        key = self._intern(pos)
        for r in range(1, depth + 1):
            if self.win_within(key, r):
                return r
        return None

    def closure(self, pos: GamePosition, max_levels: int = 10 ** 9) -> Optional[list]:
        """All positions reachable in the game, or None when the search
        exceeds the position cap or the level budget without closing."""
        root = self._intern(pos)
        seen = {root}
        frontier = [root]
        for _ in range(max_levels):
            if not frontier:
                return sorted(seen)
            nxt = []
            for key in frontier:
                for kids in self._expand(key):
                    for kid in kids:
                        if kid not in seen:
                            if len(seen) >= self.certificate_cap:
                                return None
                            seen.add(kid)
                            nxt.append(kid)
            frontier = nxt
        return None if frontier else sorted(seen)

    def certify(self, closure_keys: list) -> set:
        """Greatest fixpoint: the non-losing subset of a closed position set.

        A position survives iff for every Spoiler move some response
        leads back into the surviving set.
        """
        alive = set(closure_keys)
        changed = True
        while changed:
            changed = False
            for key in closure_keys:
                if key not in alive:
                    continue
                for kids in self._children[key]:
                    if all(kid not in alive for kid in kids):
                        alive.discard(key)
                        changed = True
                        break
        return alive

    def solve(self, pos: GamePosition, depth: int) -> Verdict:
        if depth < 0:
            raise ValueError("depth must be >= 0")
        rounds = self.minimal_win(pos, depth)
        if rounds is not None:
            return SpoilerWins(rounds)
        # Certificate attempt: markings grow without bound in open-ended
        # games, so the closure search is budgeted in levels as well.
        closure_keys = self.closure(pos, max_levels=max(4 * depth, 64))
        if closure_keys is not None:
            alive = self.certify(closure_keys)
            root = self._intern(pos)
            if root in alive:
                relation = tuple(self._positions[k] for k in sorted(alive))
                return Bisimilar(relation)
        return Unknown(depth)


def solve_bounded(net: Net, sem: Semantics, pos: GamePosition, depth: int, *,
                  max_positions: int = 10 ** 6, certificate_cap: int = 20_000,
                  swap_collapse: bool = False) -> Verdict:
    """Bounded game solve: SpoilerWins{n} for the least forced n <= depth,
    Bisimilar when the finite closure certifies it, Unknown otherwise."""
    solver = BoundedSolver(net, sem, max_positions=max_positions,
                           certificate_cap=certificate_cap,
                           swap_collapse=swap_collapse)
    return solver.solve(pos, depth)


# ---------------------------------------------------------------------------
# interactive sessions
# ---------------------------------------------------------------------------

class GameSession:
    """One play-through; history is a stack so undo is exact."""

    def __init__(self, net: Net, sem: Semantics, position: GamePosition):
        self.net = net
        self.sem = sem
        self.history: list[tuple[GamePosition, Optional[GameMove]]] = [(position, None)]
        self.rounds = 0

    @property
    def position(self) -> GamePosition:
        return self.history[-1][0]

    @property
    def pending_move(self) -> Optional[GameMove]:
        return self.history[-1][1]

    def legal_moves(self) -> list[GameMove]:
        if self.pending_move is not None:
            return []
        return spoiler_moves(self.net, self.sem, self.position)

    def legal_responses(self) -> list[GameMove]:
        if self.pending_move is None:
            return []
        return duplicator_responses(self.net, self.sem, self.position,
                                    self.pending_move)

    def play_move(self, move: GameMove) -> None:
        if self.pending_move is not None:
            raise IllegalMove("a response is pending")
        if move not in self.legal_moves():
            raise IllegalMove(f"move {move.describe()} is not enabled")
        self.history.append((self.position, move))

    def play_response(self, response: GameMove) -> GamePosition:
        move = self.pending_move
        if move is None:
            raise IllegalMove("no move to respond to")
        if response not in self.legal_responses():
            raise IllegalMove(f"response {response.describe()} is not legal")
        pos, _ = self.history.pop()
        nxt = play_round(pos, move, response)
        self.history.append((nxt, None))
        self.rounds += 1
        return nxt

    def apply_move(self, move: GameMove, response: GameMove) -> GamePosition:
        """One full round; equivalent to play_move then play_response."""
        self.play_move(move)
        try:
            return self.play_response(response)
        except IllegalMove:
            self.undo()
            raise

    def undo(self) -> None:
        """Pop one half-move; at a fresh move this retracts the move,
        otherwise it retracts the whole previous round."""
        if len(self.history) == 1:
            raise IllegalMove("nothing to undo")
        if self.history[-1][1] is None:
            self.rounds -= 1
        self.history.pop()


# ---------------------------------------------------------------------------
# engine strategies backed by the bounded solver
# ---------------------------------------------------------------------------

class NoMoves(RuntimeError):
    """The strategy's role has no legal move at this position."""


def search_strategy(net: Net, sem: Semantics, role: str, depth: int,
                    seed: int = 0):
    """A playing function for `role` ('spoiler' or 'duplicator').

    Spoiler picks the fastest proven win when one exists within `depth`,
    otherwise the move that keeps Duplicator under the most pressure.
    Duplicator picks a response not proven lost within the remaining
    depth when possible. Deterministic for a fixed seed.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    solver = BoundedSolver(net, sem)
    rng = random.Random(seed)

    def move_rank(pos: GamePosition, move: GameMove):
        responses = duplicator_responses(net, sem, pos, move)
        if not responses:
            return (0, 0.0)
        kids = [solver._intern(play_round(pos, move, resp)) for resp in responses]
        worst = 0
        for kid in kids:
            n = next((r for r in range(1, depth) if solver.win_within(kid, r)), None)
            if n is None:
                return (2, -sum(solver.win_within(k, depth - 1) for k in kids) / len(kids))
            worst = max(worst, n)
        return (1, worst)

    def spoiler(pos: GamePosition) -> GameMove:
        moves = spoiler_moves(net, sem, pos)
        if not moves:
            raise NoMoves("spoiler is stuck")
        ranked = sorted(
            ((move_rank(pos, m), i) for i, m in enumerate(moves)),
            key=lambda pair: (pair[0][0], pair[0][1], pair[1]),
        )
        best_rank = ranked[0][0]
        tied = [moves[i] for rank, i in ranked if rank == best_rank]
        return tied[rng.randrange(len(tied))] if len(tied) > 1 else tied[0]

    def duplicator(pos: GamePosition, move: GameMove) -> GameMove:
        responses = duplicator_responses(net, sem, pos, move)
        if not responses:
            raise NoMoves("duplicator is stuck")
        safe = []
        for resp in responses:
            kid = solver._intern(play_round(pos, move, resp))
            if not any(solver.win_within(kid, r) for r in range(1, depth)):
                safe.append(resp)
        pool = safe or responses
        return pool[rng.randrange(len(pool))] if len(pool) > 1 else pool[0]

    return spoiler if role == "spoiler" else duplicator
