"""Minsky 2-counter machines and their compilation to durational nets.

The compiler emits, for a machine M, the net whose performance
(in)equivalence between the two singleton initial markings decides
whether M halts. Place names follow a fixed ASCII scheme:

=============  =====================  =========================
source name    emitted id             meaning
=============  =====================  =========================
p_i / q_i      p<i> / q<i>            control, instruction i
p'_i / q'_i    pp<i> / qq<i>          control, mid zero-test
b' / b''       c<b>a / c<b>b          one unit of counter b
Z'_b / Z''_b   z<b>a / z<b>b          zero-test witness pair
=============  =====================  =========================

Labels: i d z zb t0 t1 w  (zb for the barred z, t<b> for the silent
counter ticks, w for the halting omega).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .multiset import DurationalMarking, PlaceMultiset
from .net import Net, TransitionRule


class ShapeError(ValueError):
    """A marking does not encode a machine state."""


# ---------------------------------------------------------------------------
# machine model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Inc:
    counter: int
    goto: int


@dataclass(frozen=True)
class JzDec:
    counter: int
    zero_goto: int
    dec_goto: int


@dataclass(frozen=True)
class Halt:
    pass


Instruction = Union[Inc, JzDec, Halt]


@dataclass(frozen=True)
class MinskyMachine:
    """A 1-indexed instruction list whose last entry is the only halt."""

    instructions: tuple[Instruction, ...]

    def __post_init__(self):
        n = len(self.instructions)
        if n == 0 or not isinstance(self.instructions[-1], Halt):
            raise ValueError("machine must end in a halt instruction")
        for idx, instr in enumerate(self.instructions, start=1):
            if isinstance(instr, Halt):
                if idx != n:
                    raise ValueError(f"halt at {idx} is not the last instruction")
                continue
            targets = ((instr.goto,) if isinstance(instr, Inc)
                       else (instr.zero_goto, instr.dec_goto))
            if instr.counter not in (0, 1):
                raise ValueError(f"instruction {idx}: counter must be 0 or 1")
            for t in targets:
                if not 1 <= t <= n:
                    raise ValueError(f"instruction {idx}: target {t} out of range 1..{n}")

    def __len__(self):
        return len(self.instructions)

    def __getitem__(self, index: int) -> Instruction:
        """1-indexed access, matching the source syntax."""
        return self.instructions[index - 1]


@dataclass(frozen=True)
class MachineConfig:
    pc: int
    c0: int
    c1: int


@dataclass(frozen=True)
class Halted:
    steps: int
    config: MachineConfig


@dataclass(frozen=True)
class OutOfFuel:
    config: MachineConfig


RunResult = Union[Halted, OutOfFuel]


def step_machine(machine: MinskyMachine, config: MachineConfig) -> Optional[MachineConfig]:
    """One deterministic step; None when the configuration is at halt."""
    instr = machine[config.pc]
    if isinstance(instr, Halt):
        return None
    if isinstance(instr, Inc):
        counters = [config.c0, config.c1]
        counters[instr.counter] += 1
        return MachineConfig(instr.goto, *counters)
    counters = [config.c0, config.c1]
    if counters[instr.counter] == 0:
        return MachineConfig(instr.zero_goto, *counters)
    counters[instr.counter] -= 1
    return MachineConfig(instr.dec_goto, *counters)


def run_machine(machine: MinskyMachine, fuel: int) -> RunResult:
    """Run from (pc=1, c0=c1=0) for at most `fuel` steps."""
    config = MachineConfig(1, 0, 0)
    for steps in range(fuel + 1):
        nxt = step_machine(machine, config)
        if nxt is None:
            return Halted(steps, config)
        if steps == fuel:
            break
        config = nxt
    return OutOfFuel(config)


def run_trace(machine: MinskyMachine, fuel: int) -> list[MachineConfig]:
    """Configurations visited, starting configuration first."""
    config = MachineConfig(1, 0, 0)
    trace = [config]
    for _ in range(fuel):
        nxt = step_machine(machine, config)
        if nxt is None:
            break
        config = nxt
        trace.append(config)
    return trace


# ---------------------------------------------------------------------------
# compilation
# ---------------------------------------------------------------------------

def control_place(side: str, index: int, primed: bool = False) -> str:
    return f"{side * 2 if primed else side}{index}"


def counter_places(b: int) -> tuple[str, str]:
    return f"c{b}a", f"c{b}b"


def zero_places(b: int) -> tuple[str, str]:
    return f"z{b}a", f"z{b}b"


_CONTROL_RE = re.compile(r"^(pp|qq|p|q)([0-9]+)$")


def parse_control_place(place: str):
    """(side, index, primed) for a control place id, else None."""
    m = _CONTROL_RE.match(place)
    if not m:
        return None
    tag, index = m.group(1), int(m.group(2))
    return tag[0], index, len(tag) == 2


@dataclass(frozen=True)
class RuleInfo:
    """What a compiled rule means: family, board side, instruction, counter."""

    family: str                  # I D Z ZI ZII ZIII O TI TII TIII
    side: Optional[str]          # p or q; None for the shared tick rules
    instr: Optional[int]
    counter: Optional[int]


@dataclass(frozen=True)
class CompiledMachine:
    machine: MinskyMachine
    net: Net
    left_init: DurationalMarking
    right_init: DurationalMarking
    rule_info: dict

    def info(self, rule_id: str) -> RuleInfo:
        return self.rule_info[rule_id]

    def sibling(self, rule_id: str) -> str:
        """The same-family rule on the opposite side (self for shared rules)."""
        info = self.rule_info[rule_id]
        if info.side is None:
            return rule_id
        other = "q" if info.side == "p" else "p"
        return f"{info.family}.{other}.{info.instr}"

    def family_rule(self, family: str, side: Optional[str],
                    instr: Optional[int] = None, counter: Optional[int] = None) -> str:
        if family == "O":
            return f"O.{instr}"
        if family in ("TI", "TII", "TIII"):
            return f"{family}.{counter}"
        return f"{family}.{side}.{instr}"

    def sidecar(self) -> dict:
        """Source-notation display names for every emitted place, label and rule."""
        places = {}
        for i in range(1, len(self.machine) + 1):
            places[f"p_{i}"] = f"p{i}"
            places[f"q_{i}"] = f"q{i}"
            places[f"p'_{i}"] = f"pp{i}"
            places[f"q'_{i}"] = f"qq{i}"
        for b in (0, 1):
            places[f"{b}'"] = f"c{b}a"
            places[f"{b}''"] = f"c{b}b"
            places[f"Z'_{b}"] = f"z{b}a"
            places[f"Z''_{b}"] = f"z{b}b"
        labels = {"i": "i", "d": "d", "z": "z", "z̄": "zb",
                  "τ0": "t0", "τ1": "t1", "ω": "w"}
        rules = {
            rule_id: {"family": info.family, "side": info.side,
                      "instr": info.instr, "counter": info.counter}
            for rule_id, info in self.rule_info.items()
        }
        return {"places": places, "labels": labels, "rules": rules}


def compile_machine(machine: MinskyMachine) -> CompiledMachine:
    """Emit the reduction net: per-instruction rules plus the shared ticks.

    Every rule has duration 1. The initial markings are the two singleton
    tokens 0@p1 and 0@q1.
    """
    rules: list[TransitionRule] = []
    info: dict[str, RuleInfo] = {}

    def emit(rule_id, label, pre, post, meta):
        rules.append(TransitionRule(rule_id, label,
                                    PlaceMultiset.of(*pre), PlaceMultiset.of(*post)))
        info[rule_id] = meta

    for i, instr in enumerate(machine.instructions, start=1):
        if isinstance(instr, Inc):
            b, j = instr.counter, instr.goto
            ca, cb = counter_places(b)
            for side in "pq":
                emit(f"I.{side}.{i}", "i",
                     [control_place(side, i)],
                     [control_place(side, j), ca, cb],
                     RuleInfo("I", side, i, b))
        elif isinstance(instr, JzDec):
            b, k, j = instr.counter, instr.zero_goto, instr.dec_goto
            ca, cb = counter_places(b)
            za, zb_ = zero_places(b)
            for side in "pq":
                ctrl, primed = control_place(side, i), control_place(side, i, True)
                other = "q" if side == "p" else "p"
                emit(f"D.{side}.{i}", "d", [ctrl, ca, cb],
                     [control_place(side, j)], RuleInfo("D", side, i, b))
                emit(f"Z.{side}.{i}", "z", [ctrl], [primed, za, zb_],
                     RuleInfo("Z", side, i, b))
                emit(f"ZI.{side}.{i}", "zb", [primed, za, zb_],
                     [control_place(side, k)], RuleInfo("ZI", side, i, b))
                emit(f"ZII.{side}.{i}", "zb", [primed, cb, za],
                     [control_place(side, k)], RuleInfo("ZII", side, i, b))
                emit(f"ZIII.{side}.{i}", "zb", [primed, cb, zb_],
                     [control_place(other, k)], RuleInfo("ZIII", side, i, b))
        else:
            emit(f"O.{i}", "w", [control_place("p", i)], [],
                 RuleInfo("O", "p", i, None))

    for b in (0, 1):
        ca, cb = counter_places(b)
        za, zb_ = zero_places(b)
        emit(f"TI.{b}", f"t{b}", [ca, cb], [ca, cb], RuleInfo("TI", None, None, b))
        emit(f"TII.{b}", f"t{b}", [ca, zb_], [ca, cb], RuleInfo("TII", None, None, b))
        emit(f"TIII.{b}", f"t{b}", [ca, za], [ca, cb], RuleInfo("TIII", None, None, b))

    all_places = [
        control_place(side, i, primed)
        for side in "pq"
        for i in range(1, len(machine) + 1)
        for primed in (False, True)
    ] + [place for b in (0, 1) for place in counter_places(b) + zero_places(b)]
    net = Net.from_rules(rules, extra_places=all_places)
    return CompiledMachine(
        machine=machine,
        net=net,
        left_init=DurationalMarking.of(("p1", 0)),
        right_init=DurationalMarking.of(("q1", 0)),
        rule_info=info,
    )


# ---------------------------------------------------------------------------
# reading machine state off a marking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MachineView:
    """Machine state encoded by a marking's maximal canonical sub-marking.

    Counter values are the number of complete (b', b'') pairs; tokens
    outside the canonical pattern (unmatched halves, zero-test
    witnesses, dead leftovers) land in `residue`.
    """

    pc: int
    primed: bool
    side: str
    c0: int
    c1: int
    canonical: DurationalMarking
    residue: DurationalMarking


def extract_state(marking: DurationalMarking) -> MachineView:
    """Decode the control token and counter pairs; raises ShapeError
    unless exactly one control token is present."""
    controls = []
    for (place, stamp), count in marking.items():
        parsed = parse_control_place(place)
        if parsed:
            controls.extend([(place, stamp, parsed)] * count)
    if len(controls) != 1:
        raise ShapeError(
            f"expected exactly one control token, found {len(controls)} in {marking}"
        )
    place, stamp, (side, pc, primed) = controls[0]
    canonical = {(place, stamp): 1}

    counters = []
    for b in (0, 1):
        ca, cb = counter_places(b)
        pairs = None
        for half in (ca, cb):
            total = sum(count for (p, _), count in marking.items() if p == half)
            pairs = total if pairs is None else min(pairs, total)
        counters.append(pairs)
        # keep the latest-stamped tokens of each half; older surplus is residue
        for half in (ca, cb):
            remaining = pairs
            stamped = sorted(
                ((s, count) for (p, s), count in marking.items() if p == half),
                reverse=True,
            )
            for s, count in stamped:
                if remaining == 0:
                    break
                take = min(count, remaining)
                canonical[(half, s)] = take
                remaining -= take

    canonical_m = DurationalMarking(canonical)
    return MachineView(
        pc=pc,
        primed=primed,
        side=side,
        c0=counters[0],
        c1=counters[1],
        canonical=canonical_m,
        residue=marking - canonical_m,
    )
