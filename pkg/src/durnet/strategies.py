"""Executable Spoiler and Duplicator strategies for compiled machine nets.

Spoiler's side drives a faithful simulation of the machine run on the
left marking: one instruction per one or two large steps, finishing each
step with the default completion (tick counter 0 pairs, then counter 1
pairs). If the machine halts, the halting rule has no answer and
Duplicator is stuck.

Duplicator's side keeps the pair of markings in one of a few shapes.
While the position is conforming she mirrors; when Spoiler fakes a zero
test she answers with the crossing zero-test rules so that the next
completed large step leaves both markings equal (possibly modulo dead
tokens), after which she copies Spoiler verbatim. Both strategies are
positional: everything they need is recovered from the current pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .game import LEFT, GameMove, GamePosition, duplicator_responses, other_side
from .minsky import (
    CompiledMachine,
    Halt,
    Inc,
    JzDec,
    ShapeError,
    counter_places,
    extract_state,
    parse_control_place,
    zero_places,
)
from .multiset import DurationalMarking
from .net import GLOBAL_IMPATIENT, dead_tokens, enabled


class OffScript(RuntimeError):
    """The position is not reachable under this strategy's own play."""


class ImpossibleResponse(RuntimeError):
    """The strategy's invariant held but its intended response is not
    legal; this indicates a bug, not a lost game."""


class PairShape(Enum):
    EQUAL = "equal"
    EQUAL_MOD_DEAD = "equal-mod-dead"
    CONFORMING = "conforming"
    ASYM_Z = "asym-z"            # control swap plus one zero-witness swap
    Z_SWAP = "z-swap"            # controls equal, one zero-witness swap
    OFF_PATH = "off-path"


class Mode(Enum):
    MIRROR = "mirror"
    CHEAT = "cheat"
    COPY = "copy"


def _diff(left: DurationalMarking, right: DurationalMarking):
    """(left-only, right-only) token kinds with signed counts."""
    extra_l, extra_r = {}, {}
    keys = {k for k, _ in left.items()} | {k for k, _ in right.items()}
    for key in keys:
        d = left[key] - right[key]
        if d > 0:
            extra_l[key] = d
        elif d < 0:
            extra_r[key] = -d
    return extra_l, extra_r


def _single(extra):
    if len(extra) == 1:
        ((key, count),) = extra.items()
        if count == 1:
            return key
    return None


def _is_control_swap(key_l, key_r) -> bool:
    (place_l, stamp_l), (place_r, stamp_r) = key_l, key_r
    if stamp_l != stamp_r:
        return False
    ctl_l = parse_control_place(place_l)
    ctl_r = parse_control_place(place_r)
    if not ctl_l or not ctl_r:
        return False
    side_l, idx_l, primed_l = ctl_l
    side_r, idx_r, primed_r = ctl_r
    return side_l != side_r and idx_l == idx_r and primed_l == primed_r


def _z_kin(place: str) -> Optional[int]:
    """The counter index when the place is a zero witness or the second
    counter half (the three tokens a tau-b rule may pair with b')."""
    for b in (0, 1):
        if place in (f"z{b}a", f"z{b}b", f"c{b}b"):
            return b
    return None


def _is_z_swap(key_l, key_r) -> bool:
    (place_l, stamp_l), (place_r, stamp_r) = key_l, key_r
    if stamp_l != stamp_r or place_l == place_r:
        return False
    b_l, b_r = _z_kin(place_l), _z_kin(place_r)
    return b_l is not None and b_l == b_r


def classify_pair(net, pos: GamePosition) -> PairShape:
    """Which of the strategy's position shapes the pair is in.

    Equality of the live parts wins over the structural patterns: once
    every differing token is dead, verbatim copying is sound forever.
    """
    if pos.left == pos.right:
        return PairShape.EQUAL
    live_l = pos.left - dead_tokens(net, GLOBAL_IMPATIENT, pos.left)
    live_r = pos.right - dead_tokens(net, GLOBAL_IMPATIENT, pos.right)
    if live_l == live_r:
        return PairShape.EQUAL_MOD_DEAD
    extra_l, extra_r = _diff(pos.left, pos.right)
    if len(extra_l) == len(extra_r) and sum(extra_l.values()) == sum(extra_r.values()):
        if sum(extra_l.values()) == 1:
            key_l, key_r = _single(extra_l), _single(extra_r)
            if _is_control_swap(key_l, key_r):
                return PairShape.CONFORMING
            if _is_z_swap(key_l, key_r):
                return PairShape.Z_SWAP
        elif sum(extra_l.values()) == 2 and len(extra_l) == 2 and len(extra_r) == 2:
            if _match_two(extra_l, extra_r) is not None:
                return PairShape.ASYM_Z
    return PairShape.OFF_PATH


def _match_two(extra_l, extra_r):
    """Match two single-token differences as one control swap plus one
    zero-witness swap; None when they do not pair up that way."""
    keys_l = sorted(extra_l)
    for key_r1 in extra_r:
        key_r2 = next(k for k in extra_r if k != key_r1)
        if (_is_control_swap(keys_l[0], key_r1) and _is_z_swap(keys_l[1], key_r2)) or (
            _is_z_swap(keys_l[0], key_r1) and _is_control_swap(keys_l[1], key_r2)
        ):
            return (key_r1, key_r2)
    return None


def is_conforming(pos: GamePosition) -> bool:
    """Strictly conforming: equal up to one control-token swap.

    Exactly equal pairs are reported separately (copy mode), so this
    returns False for them."""
    if pos.left == pos.right:
        return False
    extra_l, extra_r = _diff(pos.left, pos.right)
    key_l, key_r = _single(extra_l), _single(extra_r)
    return key_l is not None and key_r is not None and _is_control_swap(key_l, key_r)


def cheat_point(marking: DurationalMarking):
    """(counter, time) when the marking shows a faked zero test: a primed
    control next to a full zero-witness pair while counter pairs remain."""
    for (place, stamp), _ in marking.items():
        parsed = parse_control_place(place)
        if not parsed or not parsed[2]:
            continue
        for b in (0, 1):
            za, zb_ = zero_places(b)
            if marking[(za, stamp)] and marking[(zb_, stamp)] \
                    and _live_pairs(marking, b, stamp) >= 1:
                return b, stamp
    return None


def is_significant_cheat(pos: GamePosition) -> bool:
    """A conforming pair sitting at a faked zero test."""
    return is_conforming(pos) and cheat_point(pos.left) is not None


# ---------------------------------------------------------------------------
# Spoiler: the correct simulation
# ---------------------------------------------------------------------------

@dataclass
class CorrectSimulation:
    """Plays the machine's run on the left-hand side."""

    compiled: CompiledMachine

    def move(self, pos: GamePosition) -> GameMove:
        cm = self.compiled
        marking = pos.left
        try:
            view = extract_state(marking)
        except ShapeError as exc:
            raise OffScript(str(exc)) from exc
        if view.side != "p":
            raise OffScript("correct simulation keeps the p control on the left")
        instances = enabled(cm.net, GLOBAL_IMPATIENT, marking)
        if not instances:
            raise OffScript("left marking is deadlocked")
        t = instances[0].time_label
        control_stamp = next(
            stamp for (place, stamp), _ in marking.items()
            if parse_control_place(place)
        )

        if control_stamp > t:
            # mid large step: default completion, counter 0 ticks first
            for b in (0, 1):
                inst = self._find(instances, f"TI.{b}", t)
                if inst:
                    return GameMove(LEFT, inst)
            raise OffScript("no completion tick available below the control stamp")

        if view.primed:
            rule_id = f"ZI.p.{view.pc}"
        else:
            instr = cm.machine[view.pc]
            if isinstance(instr, Halt):
                rule_id = f"O.{view.pc}"
            elif isinstance(instr, Inc):
                rule_id = f"I.p.{view.pc}"
            else:
                value = _live_pairs(marking, instr.counter, t)
                rule_id = (f"Z.p.{view.pc}" if value == 0 else f"D.p.{view.pc}")
        inst = self._find(instances, rule_id, t)
        if inst is None:
            raise OffScript(f"expected {rule_id} at time {t} to be enabled")
        return GameMove(LEFT, inst)

    @staticmethod
    def _find(instances, rule_id: str, t: int):
        for inst in instances:
            if inst.rule.id == rule_id and inst.time_label == t:
                return inst
        return None


def _live_pairs(marking: DurationalMarking, b: int, t: int) -> int:
    ca, cb = counter_places(b)
    return min(marking[(ca, t)], marking[(cb, t)])


def simulation_move_bound(compiled: CompiledMachine, fuel: int) -> Optional[int]:
    """Total rounds the correct simulation needs to beat Duplicator, from
    the machine's own run: completions per instruction plus the final
    halting move. None when the machine does not halt within `fuel`."""
    from .minsky import Halted, run_machine, run_trace

    result = run_machine(compiled.machine, fuel)
    if not isinstance(result, Halted):
        return None
    total = 0
    for config in run_trace(compiled.machine, fuel):
        instr = compiled.machine[config.pc]
        pairs = config.c0 + config.c1
        if isinstance(instr, Inc):
            total += 1 + pairs
        elif isinstance(instr, JzDec):
            value = (config.c0, config.c1)[instr.counter]
            if value == 0:
                total += 2 * (1 + pairs)
            else:
                total += 1 + (pairs - 1)
        else:
            total += 1
    return total


# ---------------------------------------------------------------------------
# Duplicator: mirror, equalize after a significant cheat, then copy
# ---------------------------------------------------------------------------

@dataclass
class ProofDuplicator:
    """Implements the reduction proof's response tables.

    `mode` records the shape the last answered position was in; the
    choice itself is recomputed from the position, so the strategy can
    be consulted at any reachable pair.
    """

    compiled: CompiledMachine
    mode: Mode = Mode.MIRROR

    def respond(self, pos: GamePosition, move: GameMove) -> Optional[GameMove]:
        """The strategy's response, or None when Duplicator is stuck."""
        cm = self.compiled
        responses = duplicator_responses(cm.net, GLOBAL_IMPATIENT, pos, move)
        if not responses:
            return None
        shape = classify_pair(cm.net, pos)
        responder = other_side(move.side)
        marking = pos.side(responder)
        t = move.time_label

        if shape in (PairShape.EQUAL, PairShape.EQUAL_MOD_DEAD):
            self.mode = Mode.COPY
            return self._pick(responses, marking, move.instance.rule.id,
                              move.instance.submarking)

        if shape is PairShape.CONFORMING:
            return self._conforming_response(pos, move, responses, marking, t)

        if shape in (PairShape.ASYM_Z, PairShape.Z_SWAP):
            return self._post_cheat_response(move, responses, marking, t)

        raise OffScript(f"position {pos} is not covered by the proof strategy")

    # -- conforming positions ---------------------------------------------

    def _conforming_response(self, pos, move, responses, marking, t):
        cm = self.compiled
        info = cm.info(move.instance.rule.id)
        family = info.family
        b = info.counter

        if family in ("ZI", "ZII", "ZIII") and _live_pairs(marking, b, t) >= 1:
            # a faked zero test: answer across the witness pair so both
            # controls land on the same side
            self.mode = Mode.CHEAT
            target = {"ZI": "ZIII", "ZII": "ZIII", "ZIII": "ZII"}[family]
            return self._build(responses, marking, target, t, info)

        if family == "TI" and cheat_point(marking) == (b, t) \
                and _live_pairs(marking, b, t) == 1:
            self.mode = Mode.CHEAT
            return self._build(responses, marking, "TIII", t, info)

        if family in ("TII", "TIII"):
            self.mode = Mode.CHEAT
            target = "TIII" if family == "TII" else "TII"
            return self._build(responses, marking, target, t, info)

        # plain mirroring: the sibling rule on the swapped control token
        self.mode = Mode.MIRROR
        sibling = cm.sibling(move.instance.rule.id)
        swapped = DurationalMarking(
            {(_swap_control(place), stamp): count
             for (place, stamp), count in move.instance.submarking.items()}
        )
        return self._pick(responses, marking, sibling, swapped)

    # -- after the cheating round ------------------------------------------

    def _post_cheat_response(self, move, responses, marking, t):
        cm = self.compiled
        info = cm.info(move.instance.rule.id)
        family = info.family
        b = info.counter
        self.mode = Mode.CHEAT

        if family in ("ZI", "ZII", "ZIII"):
            target = self._z_variant(marking, b, t, control=True)
        elif family == "TI" and _live_pairs(marking, b, t) >= 1:
            target = "TI"
        elif family in ("TI", "TII", "TIII"):
            target = self._z_variant(marking, b, t, control=False)
        else:
            raise OffScript(f"unexpected {family} move in a post-cheat position")
        if target is None:
            raise ImpossibleResponse(
                f"no matching zero-witness response for {family} at {t}")
        return self._build(responses, marking, target, t, info)

    @staticmethod
    def _z_variant(marking, b: int, t: int, control: bool) -> Optional[str]:
        """Which rule consumes the zero witness this side holds."""
        za, zb_ = zero_places(b)
        if marking[(za, t)] and marking[(zb_, t)] and control:
            return "ZI"
        if marking[(za, t)]:
            return "ZII" if control else "TIII"
        if marking[(zb_, t)]:
            return "ZIII" if control else "TII"
        return "TI" if not control and _live_pairs(marking, b, t) else None

    # -- response construction ---------------------------------------------

    def _build(self, responses, marking, family, t, info):
        cm = self.compiled
        if family in ("TI", "TII", "TIII"):
            rule_id = cm.family_rule(family, None, counter=info.counter)
        else:
            side = self._control_side(marking)
            rule_id = cm.family_rule(family, side, instr=info.instr,
                                     counter=info.counter)
        rule = cm.net.rule(rule_id)
        submarking = DurationalMarking.at(t, rule.pre)
        return self._pick(responses, marking, rule_id, submarking)

    @staticmethod
    def _control_side(marking) -> str:
        for (place, _), _count in marking.items():
            parsed = parse_control_place(place)
            if parsed:
                return parsed[0]
        raise OffScript("responder marking has no control token")

    @staticmethod
    def _pick(responses, marking, rule_id, submarking):
        """Locate the intended response; responses are deduplicated by
        successor, so matching the successor marking is the robust key."""
        rule = next(
            (r.instance.rule for r in responses if r.instance.rule.id == rule_id),
            None,
        )
        expected = None
        if rule is not None and submarking <= marking:
            produced_at = submarking.stamps()
            t = max(produced_at) if produced_at else 0
            expected = (marking - submarking).add(
                DurationalMarking.at(t + rule.duration, rule.post))
        for response in responses:
            if response.instance.successor == expected:
                return response
        raise ImpossibleResponse(
            f"intended response {rule_id} consuming {submarking} is not available")


def _swap_control(place: str) -> str:
    parsed = parse_control_place(place)
    if not parsed:
        return place
    side, index, primed = parsed
    flipped = "q" if side == "p" else "p"
    return f"{flipped * 2 if primed else flipped}{index}"
