"""Parsers and renderers for the three text formats and game transcripts.

All three grammars are line-oriented, whitespace-insensitive between
tokens, with ``#`` comments running to end of line. Every parse error
carries a :class:`SourceSpan`; no partial values are ever returned.

Formats (canonical renderings round-trip byte-exactly):

* markings     ``0@p 3@p*2 2@q`` durational, ``p*2 q`` ordinary, ``~`` empty
* nets         ``rule [id] label dur=N : pre -> post``, optional
  ``place a b c`` lines for places no rule mentions
* machines     ``1: inc c0 goto 2`` / ``2: jzdec c1 zero 4 else 3`` / ``4: halt``
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .minsky import Halt, Inc, JzDec, MinskyMachine
from .multiset import DurationalMarking, PlaceMultiset
from .net import Net, TransitionRule


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    col_start: int
    col_end: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col_start}-{self.col_end}"


class ParseError(ValueError):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


_PLACE = r"[A-Za-z][A-Za-z0-9_]*"
_TOKEN_RE = re.compile(rf"(?:(\d+)@)?({_PLACE})(?:\*(\d+))?$")
_WORD_RE = re.compile(r"\S+")


def _words(text: str, line: int, file: str):
    """Non-space chunks of one line with their column spans."""
    return [
        (m.group(0), SourceSpan(file, line, m.start() + 1, m.end()))
        for m in _WORD_RE.finditer(text)
    ]


def _strip_comment(line: str) -> str:
    cut = line.find("#")
    return line if cut < 0 else line[:cut]


def _parse_atoms(text: str, durational: bool, file: str, line: int = 1):
    entries: dict = {}
    words = _words(_strip_comment(text), line, file)
    if [w for w, _ in words] == ["~"]:
        return entries
    for word, span in words:
        m = _TOKEN_RE.match(word)
        if not m:
            raise ParseError(f"bad token {word!r}", span)
        stamp, place, count = m.group(1), m.group(2), m.group(3)
        count = int(count) if count is not None else 1
        if count < 1:
            raise ParseError(f"count must be positive in {word!r}", span)
        if durational:
            if stamp is None:
                raise ParseError(f"missing time-stamp in {word!r}", span)
            key = (place, int(stamp))
        else:
            if stamp is not None:
                raise ParseError(f"unexpected time-stamp in {word!r}", span)
            key = place
        entries[key] = entries.get(key, 0) + count
    if not entries:
        raise ParseError("empty input; write ~ for the empty multiset",
                         SourceSpan(file, line, 1, max(1, len(text))))
    return entries


def parse_marking(text: str, file: str = "<marking>") -> DurationalMarking:
    return DurationalMarking(_parse_atoms(text, True, file))


def parse_multiset(text: str, file: str = "<multiset>") -> PlaceMultiset:
    return PlaceMultiset(_parse_atoms(text, False, file))


def render_marking(marking: DurationalMarking) -> str:
    return str(marking)


def render_multiset(places: PlaceMultiset) -> str:
    return str(places)


# ---------------------------------------------------------------------------
# nets
# ---------------------------------------------------------------------------

_RULE_RE = re.compile(
    rf"^\s*rule\s+(?:({_PLACE}(?:\.{_PLACE}|\.\d+)*)\s+)?({_PLACE})\s+dur=(\d+)\s*:"
    r"(.*?)->(.*)$"
)


def parse_net(text: str, file: str = "<net>") -> Net:
    """Parse the line-oriented rule format; places are implicitly declared.

    Rules without an explicit id get the positional id ``r<k>``.
    """
    rules = []
    extra_places = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        words = _words(line, lineno, file)
        head = words[0][0]
        if head == "place":
            for word, span in words[1:]:
                if not re.fullmatch(_PLACE, word):
                    raise ParseError(f"bad place name {word!r}", span)
                extra_places.append(word)
            if len(words) == 1:
                raise ParseError("place line needs at least one name", words[0][1])
            continue
        if head != "rule":
            raise ParseError(f"expected 'rule' or 'place', got {head!r}", words[0][1])
        m = _RULE_RE.match(line)
        if not m:
            raise ParseError(
                "malformed rule; expected 'rule [id] label dur=N : pre -> post'",
                SourceSpan(file, lineno, 1, len(line.rstrip())),
            )
        rule_id, label, dur, pre_text, post_text = m.groups()
        if rule_id is None:
            rule_id = f"r{len(rules) + 1}"
        if int(dur) < 1:
            raise ParseError(f"rule {rule_id}: duration must be positive",
                             _word_span(line, "dur=" + dur, lineno, file))
        pre = _parse_atoms(pre_text, False, file, lineno)
        if not pre:
            raise ParseError(f"rule {rule_id}: empty pre-set",
                             SourceSpan(file, lineno, 1, len(line.rstrip())))
        post = _parse_atoms(post_text, False, file, lineno)
        rules.append(TransitionRule(rule_id, label, PlaceMultiset(pre),
                                    PlaceMultiset(post), int(dur)))
    return Net.from_rules(rules, extra_places=extra_places)


def _word_span(line: str, word: str, lineno: int, file: str) -> SourceSpan:
    at = line.find(word)
    if at < 0:
        return SourceSpan(file, lineno, 1, len(line))
    return SourceSpan(file, lineno, at + 1, at + len(word))


def render_net(net: Net) -> str:
    """Canonical text for a net; inverse of parse_net on all values."""
    lines = []
    mentioned = set()
    for rule in net.rules:
        mentioned.update(rule.pre.support())
        mentioned.update(rule.post.support())
    loose = sorted(net.places - mentioned)
    if loose:
        lines.append("place " + " ".join(loose))
    for k, rule in enumerate(net.rules, start=1):
        name = "" if rule.id == f"r{k}" else f"{rule.id} "
        lines.append(
            f"rule {name}{rule.label} dur={rule.duration} : {rule.pre} -> {rule.post}"
        )
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# machines
# ---------------------------------------------------------------------------

_INSTR_RE = re.compile(
    r"^\s*(\d+)\s*:\s*(?:"
    r"(?P<halt>halt)"
    r"|inc\s+c(?P<inc_b>[01])\s+goto\s+(?P<inc_j>\d+)"
    r"|jzdec\s+c(?P<jz_b>[01])\s+zero\s+(?P<jz_k>\d+)\s+else\s+(?P<jz_j>\d+)"
    r")\s*$"
)


def parse_machine(text: str, file: str = "<machine>") -> MinskyMachine:
    numbered = {}
    spans = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        span = SourceSpan(file, lineno, 1, len(line.rstrip()))
        m = _INSTR_RE.match(line)
        if not m:
            raise ParseError("malformed instruction", span)
        index = int(m.group(1))
        if index in numbered:
            raise ParseError(f"duplicate instruction number {index}", span)
        if m.group("halt"):
            instr = Halt()
        elif m.group("inc_b") is not None:
            instr = Inc(int(m.group("inc_b")), int(m.group("inc_j")))
        else:
            instr = JzDec(int(m.group("jz_b")), int(m.group("jz_k")),
                          int(m.group("jz_j")))
        numbered[index] = instr
        spans[index] = span

    if not numbered:
        raise ParseError("empty machine", SourceSpan(file, 1, 1, 1))
    n = max(numbered)
    whole = SourceSpan(file, max(spans[i].line for i in numbered), 1, 1)
    for i in range(1, n + 1):
        if i not in numbered:
            raise ParseError(f"missing instruction {i}", whole)
    for i in range(1, n + 1):
        instr = numbered[i]
        if isinstance(instr, Halt):
            if i != n:
                raise ParseError("halt must be the last instruction", spans[i])
            continue
        targets = ((instr.goto,) if isinstance(instr, Inc)
                   else (instr.zero_goto, instr.dec_goto))
        for t in targets:
            if not 1 <= t <= n:
                raise ParseError(f"target {t} out of range 1..{n}", spans[i])
    if not isinstance(numbered[n], Halt):
        raise ParseError("machine must end with a halt instruction", spans[n])
    return MinskyMachine(tuple(numbered[i] for i in range(1, n + 1)))


def render_machine(machine: MinskyMachine) -> str:
    lines = []
    for i, instr in enumerate(machine.instructions, start=1):
        if isinstance(instr, Halt):
            lines.append(f"{i}: halt")
        elif isinstance(instr, Inc):
            lines.append(f"{i}: inc c{instr.counter} goto {instr.goto}")
        else:
            lines.append(
                f"{i}: jzdec c{instr.counter} zero {instr.zero_goto} else {instr.dec_goto}"
            )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# transcripts (JSON lines)
# ---------------------------------------------------------------------------

def transcript_line(side: str, action: str, time: int, rule: str,
                    left: DurationalMarking,
                    right: DurationalMarking = None) -> str:
    """One half-move as a JSON object; `right` is omitted for
    single-sided execution traces."""
    record = {
        "side": side,
        "action": action,
        "time": time,
        "rule": rule,
        "successor_left": str(left),
    }
    if right is not None:
        record["successor_right"] = str(right)
    return json.dumps(record)


def parse_transcript(text: str):
    """Decode a JSON-lines transcript into a list of dicts."""
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad transcript line: {exc}",
                             SourceSpan("<transcript>", lineno, 1, len(line))) from exc
    return records
