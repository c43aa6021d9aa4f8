"""Independent brute-force oracles the implementation is checked against.

These deliberately avoid the solver/search machinery under test: plain
recursion on raw markings, no memoization, no canonicalization.
"""

from durnet.net import enabled, fire


def naive_min_win(net, sem, left, right, depth):
    """Minimal number of rounds in which Spoiler can force Duplicator to
    be stuck, if that is <= depth; None otherwise. Direct game recursion."""
    if depth == 0:
        return None
    best = None
    for mover_is_left in (True, False):
        mine, other = (left, right) if mover_is_left else (right, left)
        for inst in enabled(net, sem, mine):
            mine2 = fire(mine, inst)
            worst = 0
            for resp in enabled(net, sem, other):
                if resp.action != inst.action or resp.time_label != inst.time_label:
                    continue
                other2 = fire(other, resp)
                l2, r2 = (mine2, other2) if mover_is_left else (other2, mine2)
                n = naive_min_win(net, sem, l2, r2, depth - 1)
                if n is None:
                    worst = None
                    break
                worst = max(worst, n)
            if worst is not None:
                rounds = worst + 1
                best = rounds if best is None else min(best, rounds)
    return best


def ordinary_successors(rules, marking):
    """Untimed firing: [(label, successor)] for ordinary rules
    given as (label, pre, post) triples over PlaceMultiset."""
    out = []
    for label, pre, post in rules:
        if pre <= marking:
            out.append((label, marking - pre + post))
    return out


def ordinary_bisim_depth(rules, m1, m2, depth, memo=None):
    """Depth-bounded ordinary bisimilarity by exhaustive recursion.

    Depth-k bisimilarity is symmetric, so the recursive argument order
    is irrelevant. `memo` (optional dict) only dedupes repeated pairs."""
    if depth == 0:
        return True
    if memo is not None:
        key = (m1.key(), m2.key(), depth)
        if key in memo:
            return memo[key]
    result = True
    for a, b in ((m1, m2), (m2, m1)):
        for label, a2 in ordinary_successors(rules, a):
            if not any(
                ordinary_bisim_depth(rules, a2, b2, depth - 1, memo)
                for lab2, b2 in ordinary_successors(rules, b)
                if lab2 == label
            ):
                result = False
                break
        if not result:
            break
    if memo is not None:
        memo[key] = result
    return result


def label_bounded_reachable(net, sem, source, target):
    """Exhaustive BFS allowing only transitions with time label <= the
    target's greatest stamp; no marking-level pruning. Returns a witness
    instance path or None."""
    bound = target.max_stamp()
    seen = {source.key()}
    frontier = [(source, [])]
    while frontier:
        nxt = []
        for marking, path in frontier:
            if marking == target:
                return path
            for inst in enabled(net, sem, marking):
                if inst.time_label > bound:
                    continue
                succ = fire(marking, inst)
                if succ.key() in seen:
                    continue
                seen.add(succ.key())
                nxt.append((succ, path + [inst]))
        frontier = nxt
    return None
