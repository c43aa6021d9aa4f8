"""Shared generators and play harnesses for the test suite."""

import random

from durnet.game import GamePosition, play_round, spoiler_moves
from durnet.minsky import Halt, Inc, JzDec, MinskyMachine, compile_machine
from durnet.multiset import DurationalMarking, PlaceMultiset
from durnet.net import GLOBAL_IMPATIENT, Net, TransitionRule, dead_tokens
from durnet.strategies import PairShape, ProofDuplicator, classify_pair
from durnet.textio import parse_machine

PLACE_POOL = ["p", "q", "r", "s", "u", "v"]
LABEL_POOL = ["a", "b", "c"]


def random_multiset(rng, places, max_size=3, allow_empty=True):
    size = rng.randint(0 if allow_empty else 1, max_size)
    return PlaceMultiset.of(*(rng.choice(places) for _ in range(size)))


def random_net(rng, max_places=4, max_rules=5, max_dur=3, allow_empty_post=True):
    places = PLACE_POOL[: rng.randint(1, max_places)]
    rules = []
    for k in range(rng.randint(1, max_rules)):
        pre = random_multiset(rng, places, allow_empty=False)
        post = random_multiset(rng, places, allow_empty=allow_empty_post)
        rules.append(
            TransitionRule(f"r{k + 1}", rng.choice(LABEL_POOL), pre, post,
                           rng.randint(1, max_dur))
        )
    return Net.from_rules(rules, extra_places=places)


def random_marking_for(rng, net, max_tokens=5, max_stamp=3):
    places = sorted(net.places)
    tokens = [
        (rng.choice(places), rng.randint(0, max_stamp))
        for _ in range(rng.randint(0, max_tokens))
    ]
    return DurationalMarking.of(*tokens)


def random_machine(rng, max_len=5):
    n = rng.randint(1, max_len)
    instructions = []
    for _ in range(n):
        if rng.random() < 0.5:
            instructions.append(Inc(rng.randint(0, 1), rng.randint(1, n + 1)))
        else:
            instructions.append(
                JzDec(rng.randint(0, 1), rng.randint(1, n + 1), rng.randint(1, n + 1))
            )
    instructions.append(Halt())
    return MinskyMachine(tuple(instructions))


def machine(text):
    return parse_machine(text)


def compiled(text):
    return compile_machine(parse_machine(text))


# Halting machines for the reduction's positive direction.
# Runs stay small so exhaustive game search is cheap.
HALTING_MACHINES = [
    "1: halt",
    "1: jzdec c0 zero 2 else 2\n2: halt",
    "1: inc c0 goto 2\n2: jzdec c0 zero 4 else 3\n3: jzdec c0 zero 4 else 2\n4: halt",
    "1: inc c0 goto 2\n2: inc c0 goto 3\n3: jzdec c0 zero 5 else 4\n"
    "4: jzdec c0 zero 5 else 3\n5: halt",
    "1: inc c0 goto 2\n2: inc c1 goto 3\n3: jzdec c0 zero 4 else 3\n"
    "4: jzdec c1 zero 6 else 5\n5: inc c0 goto 4\n6: halt",
]

# Non-halting machines whose counters keep growing, so the game closure
# never becomes finite. (A pure zero-test loop would instead certify
# bisimilarity outright; see the dedicated solver test.)
NONHALTING_MACHINES = [
    "1: inc c0 goto 1\n2: halt",
    "1: inc c1 goto 2\n2: jzdec c0 zero 1 else 1\n3: halt",
    "1: inc c0 goto 2\n2: jzdec c0 zero 1 else 2\n3: halt",
    "1: inc c1 goto 2\n2: inc c0 goto 1\n3: halt",
    "1: jzdec c1 zero 2 else 3\n2: inc c0 goto 1\n3: halt",
]

GOOD_BOUNDARY_SHAPES = (
    PairShape.CONFORMING, PairShape.EQUAL, PairShape.EQUAL_MOD_DEAD)


def is_step_boundary(net, position):
    """Both markings are equimarkings for one common stamp; a fully
    dead side satisfies that vacuously."""
    stamps = set()
    for m in (position.left, position.right):
        live = m - dead_tokens(net, GLOBAL_IMPATIENT, m)
        s = live.stamps()
        if len(s) > 1:
            return False
        stamps |= s
    return len(stamps) <= 1


def drive(cm, choose_move, max_rounds, check_boundaries=True):
    """Chooser-vs-proof-duplicator play from the compiled initial pair;
    returns (outcome, rounds, boundary positions)."""
    duplicator = ProofDuplicator(cm)
    position = GamePosition(cm.left_init, cm.right_init)
    boundaries = []
    for rounds in range(1, max_rounds + 1):
        move = choose_move(position)
        if move is None:
            return "spoiler-stuck", rounds - 1, boundaries
        response = duplicator.respond(position, move)
        if response is None:
            return "duplicator-stuck", rounds, boundaries
        position = play_round(position, move, response)
        if is_step_boundary(cm.net, position):
            if check_boundaries:
                shape = classify_pair(cm.net, position)
                assert shape in GOOD_BOUNDARY_SHAPES, \
                    f"boundary violated at round {rounds}: {position}"
            boundaries.append(position)
    return "survived", max_rounds, boundaries


def exhaustive_survival(cm, position, depth, memo):
    """Walk every Spoiler move; Duplicator answers with the proof
    strategy. Asserts she is never stuck and boundary shapes hold."""
    canon, _ = position.canonical()
    key = canon.key()
    if memo.get(key, -1) >= depth:
        return
    memo[key] = depth
    if depth == 0:
        return
    duplicator = ProofDuplicator(cm)
    for move in spoiler_moves(cm.net, GLOBAL_IMPATIENT, position):
        response = duplicator.respond(position, move)
        assert response is not None, f"stuck at {position} on {move.describe()}"
        nxt = play_round(position, move, response)
        if is_step_boundary(cm.net, nxt):
            assert classify_pair(cm.net, nxt) in GOOD_BOUNDARY_SHAPES
        exhaustive_survival(cm, nxt, depth - 1, memo)
