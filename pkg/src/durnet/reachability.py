"""Reachability for durational nets.

Durational targets are decidable: a token stamped above the target's
greatest stamp can neither belong to the target nor be consumed on the
way there (consuming it would mint strictly larger stamps, durations
being >= 1), so the search prunes any marking carrying one and the
remaining sub-LTS is finite.

Caveat: that argument needs nonempty post-sets. Rules with empty posts
(legal here for halting-style constructions) can swallow an over-stamped
token outright, so on such nets a NotReachable answer certifies only
the searched stamp-bounded fragment.

Untimed targets get a budgeted breadth-first semi-decision; a negative
answer only means no witness was found within the budget.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .multiset import DurationalMarking, PlaceMultiset
from .net import FireableInstance, Net, Semantics, enabled, fire


class SearchLimit(RuntimeError):
    """The pruned state space did not fit in the marking budget."""


@dataclass(frozen=True)
class Found:
    path: tuple[FireableInstance, ...]


@dataclass(frozen=True)
class NotReachable:
    """Definitive: the pruned sub-LTS was exhausted."""


@dataclass(frozen=True)
class NotWithinBudget:
    explored: int


def reach_durational(net: Net, sem: Semantics, source: DurationalMarking,
                     target: DurationalMarking, *,
                     max_markings: int = 10 ** 6):
    """Exhaustive search for an exact durational marking.

    Returns Found with a shortest witness path, or NotReachable; the
    negative answer is definitive. Raises SearchLimit when the pruned
    space exceeds `max_markings`.
    """
    bound = target.max_stamp()
    if source.max_stamp() > bound:
        return NotReachable()
    queue = deque([(source, ())])
    seen = {source.key()}
    while queue:
        marking, path = queue.popleft()
        if marking == target:
            return Found(path)
        for inst in enabled(net, sem, marking):
            succ = inst.successor
            if succ.max_stamp() > bound:
                continue
            key = succ.key()
            if key in seen:
                continue
            if len(seen) >= max_markings:
                raise SearchLimit(
                    f"more than {max_markings} markings within the stamp bound")
            seen.add(key)
            queue.append((succ, path + (inst,)))
    return NotReachable()


def reach_untimed_bounded(net: Net, sem: Semantics, source: DurationalMarking,
                          target: PlaceMultiset, budget: int):
    """Breadth-first hunt for any marking untiming to `target`, visiting
    at most `budget` distinct markings. NotWithinBudget is not a proof
    of unreachability.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    queue = deque([(source, ())])
    seen = {source.key()}
    while queue:
        marking, path = queue.popleft()
        if marking.untime() == target:
            return Found(path)
        for inst in enabled(net, sem, marking):
            succ = inst.successor
            key = succ.key()
            if key in seen:
                continue
            if len(seen) >= budget:
                continue
            seen.add(key)
            queue.append((succ, path + (inst,)))
    return NotWithinBudget(explored=len(seen))


def replay(source: DurationalMarking, path) -> DurationalMarking:
    """Apply a witness path with `fire`, returning the final marking."""
    marking = source
    for inst in path:
        marking = fire(marking, inst)
    return marking
