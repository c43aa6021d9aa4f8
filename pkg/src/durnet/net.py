"""Durational labelled Petri nets and their four firing semantics.

A transition rule consumes a multiset of places and produces another,
takes a positive whole number of time units, and fires *due to* a
durational submarking: a concrete choice of time-stamped tokens covering
the rule's pre-set. The four semantics differ on two independent axes:

* patience: patient rules fire at the *latest* stamp among the consumed
  tokens (earlier tokens wait); impatient rules require all consumed
  tokens to share one stamp.
* clock: local-time allows any admissible time label; global-time
  restricts firing to the smallest admissible label over every rule and
  submarking choice.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

from .multiset import DurationalMarking, MultisetUnderflow, PlaceMultiset


class StaleInstance(ValueError):
    """A fireable instance was applied to a marking it does not fit."""


class UnsupportedSemantics(ValueError):
    """The operation is only defined for a specific semantics variant."""


class NameCollision(ValueError):
    """A freshly introduced place name is already taken."""


class Patience(Enum):
    PATIENT = "patient"
    IMPATIENT = "impatient"


class Clock(Enum):
    GLOBAL = "global-time"
    LOCAL = "local-time"


@dataclass(frozen=True)
class Semantics:
    """One of the four durational semantics, as a (clock, patience) pair."""

    clock: Clock
    patience: Patience

    SHORT_NAMES = None  # filled in below

    @property
    def is_global(self) -> bool:
        return self.clock is Clock.GLOBAL

    @property
    def is_patient(self) -> bool:
        return self.patience is Patience.PATIENT

    @property
    def short(self) -> str:
        return ("g" if self.is_global else "l") + ("p" if self.is_patient else "i")

    @classmethod
    def parse(cls, name: str) -> "Semantics":
        try:
            return cls.SHORT_NAMES[name]
        except KeyError:
            raise ValueError(
                f"unknown semantics {name!r}; expected one of gp, gi, lp, li"
            ) from None

    def __str__(self) -> str:
        return self.short


GLOBAL_PATIENT = Semantics(Clock.GLOBAL, Patience.PATIENT)
GLOBAL_IMPATIENT = Semantics(Clock.GLOBAL, Patience.IMPATIENT)
LOCAL_PATIENT = Semantics(Clock.LOCAL, Patience.PATIENT)
LOCAL_IMPATIENT = Semantics(Clock.LOCAL, Patience.IMPATIENT)
Semantics.SHORT_NAMES = {
    "gp": GLOBAL_PATIENT,
    "gi": GLOBAL_IMPATIENT,
    "lp": LOCAL_PATIENT,
    "li": LOCAL_IMPATIENT,
}
ALL_SEMANTICS = (GLOBAL_PATIENT, GLOBAL_IMPATIENT, LOCAL_PATIENT, LOCAL_IMPATIENT)


@dataclass(frozen=True)
class TransitionRule:
    """A labelled rewrite rule ``pre -> post`` with a positive duration.

    The pre-set must be nonempty; the post-set may be empty (needed for
    halting-style rules that only consume).
    """

    id: str
    label: str
    pre: PlaceMultiset
    post: PlaceMultiset
    duration: int = 1

    def __post_init__(self):
        if not isinstance(self.duration, int) or self.duration < 1:
            raise ValueError(f"rule {self.id}: duration must be a positive int")
        if not self.pre:
            raise ValueError(f"rule {self.id}: empty pre-set")


@dataclass(frozen=True)
class Net:
    """A finite set of places and labelled durational transition rules."""

    places: frozenset[str]
    labels: frozenset[str]
    rules: tuple[TransitionRule, ...]
    _by_id: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        by_id = {}
        for rule in self.rules:
            if rule.id in by_id:
                raise ValueError(f"duplicate rule id {rule.id!r}")
            by_id[rule.id] = rule
            for place in itertools.chain(rule.pre.support(), rule.post.support()):
                if place not in self.places:
                    raise ValueError(
                        f"rule {rule.id}: place {place!r} not declared"
                    )
            if rule.label not in self.labels:
                raise ValueError(f"rule {rule.id}: label {rule.label!r} not declared")
        object.__setattr__(self, "_by_id", by_id)

    @classmethod
    def from_rules(cls, rules, extra_places=()) -> "Net":
        """Build a net declaring exactly the names the rules mention."""
        rules = tuple(rules)
        places = set(extra_places)
        labels = set()
        for rule in rules:
            places.update(rule.pre.support())
            places.update(rule.post.support())
            labels.add(rule.label)
        return cls(frozenset(places), frozenset(labels), rules)

    def rule(self, rule_id: str) -> TransitionRule:
        return self._by_id[rule_id]

    def __hash__(self):
        return hash((self.places, self.labels, self.rules))


@dataclass(frozen=True)
class FireableInstance:
    """One admissible firing: a rule, the consumed tokens, and the result.

    ``successor`` is precomputed against the marking the instance was
    enumerated from; ``fire`` revalidates before trusting it.
    """

    rule: TransitionRule
    submarking: DurationalMarking
    time_label: int
    successor: DurationalMarking

    @property
    def action(self) -> str:
        return self.rule.label

    def produced(self) -> DurationalMarking:
        return DurationalMarking.at(self.time_label + self.rule.duration, self.rule.post)


def _stamp_combinations(available: list[tuple[int, int]], need: int):
    """All multisets of `need` stamps drawn from (stamp, count) supplies."""
    if need == 0:
        yield ()
        return
    if not available:
        return
    (stamp, count), rest = available[0], available[1:]
    for take in range(min(count, need), -1, -1):
        for tail in _stamp_combinations(rest, need - take):
            yield ((stamp, take),) + tail if take else tail


def _patient_submarkings(marking: DurationalMarking, pre: PlaceMultiset):
    """Every durational submarking of `marking` that untimes to `pre`."""
    per_place = []
    for place, need in pre.items():
        available = [
            (stamp, count)
            for (p, stamp), count in marking.items()
            if p == place
        ]
        if sum(count for _, count in available) < need:
            return
        per_place.append(
            [
                {(place, stamp): take for stamp, take in combo}
                for combo in _stamp_combinations(available, need)
            ]
        )
    for parts in itertools.product(*per_place):
        entries = {}
        for part in parts:
            entries.update(part)
        yield DurationalMarking(entries)


def locally_enabled(net: Net, patience: Patience,
                    marking: DurationalMarking) -> list[FireableInstance]:
    """All instances admissible under the local-time clock.

    Patient: any covering submarking, fired at its greatest stamp.
    Impatient: the consumed tokens must share a single stamp, which is
    the time label; the submarking is then determined by the rule.
    """
    instances = []
    if patience is Patience.IMPATIENT:
        slices = marking.by_stamp()
        for rule in net.rules:
            for t, piece in slices.items():
                if rule.pre <= piece:
                    sub = DurationalMarking.at(t, rule.pre)
                    instances.append(_instance(marking, rule, sub, t))
    else:
        for rule in net.rules:
            for sub in _patient_submarkings(marking, rule.pre):
                instances.append(_instance(marking, rule, sub, sub.max_stamp()))
    return instances


def _instance(marking, rule, submarking, t):
    successor = marking.sub(submarking).add(
        DurationalMarking.at(t + rule.duration, rule.post)
    )
    return FireableInstance(rule, submarking, t, successor)


def enabled(net: Net, sem: Semantics,
            marking: DurationalMarking) -> list[FireableInstance]:
    """Instances fireable under the chosen semantics variant.

    Global-time keeps only the instances achieving the smallest time
    label over all rule and submarking choices; ties all stay enabled.
    """
    local = locally_enabled(net, sem.patience, marking)
    if not sem.is_global or not local:
        return local
    t_min = min(inst.time_label for inst in local)
    return [inst for inst in local if inst.time_label == t_min]


def fire(marking: DurationalMarking, instance: FireableInstance) -> DurationalMarking:
    """Apply an instance to a marking, recomputing the successor.

    Raises StaleInstance when the instance's submarking no longer fits.
    """
    try:
        rest = marking.sub(instance.submarking)
    except MultisetUnderflow as exc:
        raise StaleInstance(
            f"instance of rule {instance.rule.id} does not fit marking {marking}"
        ) from exc
    return rest.add(instance.produced())


def dead_tokens(net: Net, sem: Semantics,
                marking: DurationalMarking) -> DurationalMarking:
    """Tokens that can never engage in a transition again.

    Defined for the global-time impatient variant only: a token is dead
    when some instance is fireable with a time label above the token's
    stamp. In a deadlocked marking every token is dead.
    """
    if sem != GLOBAL_IMPATIENT:
        raise UnsupportedSemantics(
            f"dead tokens are defined under global-time impatient semantics, not {sem}"
        )
    live = enabled(net, sem, marking)
    if not live:
        return marking
    t_min = live[0].time_label
    return DurationalMarking(
        {(place, stamp): count
         for (place, stamp), count in marking.items() if stamp < t_min}
    )


def is_equimarking(net: Net, sem: Semantics,
                   marking: DurationalMarking, t: int) -> bool:
    """True when every non-dead token carries stamp exactly `t`."""
    dead = dead_tokens(net, sem, marking)
    return marking.sub(dead).stamps() <= {t}


def patient_lift(ordinary_rules, durations, pacemaker: str = "pace"):
    """Embed an ordinary net into patient semantics via a pacemaker place.

    Every rule gains the pacemaker place on both sides, so each firing
    observes the latest stamp. `ordinary_rules` is a list of
    (label, pre, post) triples over PlaceMultiset; `durations` is either
    one positive int for all rules or a per-rule list.

    Returns (net, lift) where lift maps a marking into the lifted net:
    a PlaceMultiset is stamped at 0, a DurationalMarking keeps its
    stamps; either way one pacemaker token at the maximal stamp is added.
    """
    ordinary_rules = list(ordinary_rules)
    if isinstance(durations, int):
        durations = [durations] * len(ordinary_rules)
    if len(durations) != len(ordinary_rules):
        raise ValueError("need one duration per rule")
    used = set()
    for _, pre, post in ordinary_rules:
        used.update(pre.support())
        used.update(post.support())
    if pacemaker in used:
        raise NameCollision(f"pacemaker place {pacemaker!r} already used by a rule")

    beat = PlaceMultiset.of(pacemaker)
    rules = tuple(
        TransitionRule(f"r{i + 1}", label, pre + beat, post + beat, dur)
        for i, ((label, pre, post), dur) in enumerate(zip(ordinary_rules, durations))
    )
    net = Net.from_rules(rules, extra_places=(pacemaker,))

    def lift(marking) -> DurationalMarking:
        if isinstance(marking, PlaceMultiset):
            marking = DurationalMarking.at(0, marking)
        return marking + DurationalMarking.of((pacemaker, marking.max_stamp()))

    return net, lift


def canonicalize_pair(m1: DurationalMarking, m2: DurationalMarking):
    """Shift both markings so the smallest stamp present becomes 0.

    Returns (m1', m2', delta) with delta the amount subtracted; the
    bounded game's winner is invariant under this normalization.
    """
    stamps = m1.stamps() | m2.stamps()
    delta = min(stamps) if stamps else 0
    return m1.shift(-delta), m2.shift(-delta), delta


def split_by_stamp(marking: DurationalMarking, t: int):
    """Partition into tokens stamped <= t and tokens stamped > t."""
    low, high = {}, {}
    for (place, stamp), count in marking.items():
        (low if stamp <= t else high)[(place, stamp)] = count
    return DurationalMarking(low), DurationalMarking(high)
