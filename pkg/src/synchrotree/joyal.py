"""Folding the cycles of a one-letter view into a marked tree, and back.

The forward map deletes the edge closing each cycle at its label minimum
and chains the cycles together in decreasing label order, leaving a tree
whose marked thread retraces the chain. The inverse reads the branch lower
records of the marked thread and re-closes the cycles. Both directions
return the rewiring plan actually applied; automata are never mutated.
"""

from dataclasses import dataclass

from .core import Automaton, is_w_tree, thread
from .records import (
    DoubleLabeled,
    FIRST_THEN_SECOND,
    Labeled,
    MarkedLabeled,
    SECOND_THEN_FIRST,
    branch_collisions,
    branch_records,
    cycle_collisions,
    cycle_minima,
    find_collisions,
)


class CollisionError(ValueError):
    """A good-event precondition failed; carries the witness arrival."""

    def __init__(self, witness):
        super().__init__(
            "collision: thread of source %d under word %d reaches target %d "
            "at congruence %d" % (witness.p, witness.ihj[1], witness.q, witness.s)
        )
        self.witness = witness


@dataclass(frozen=True)
class RewiringPlan:
    """The edge substitutions one direction of the bijection performs.

    edges holds (source, letter, old_target, new_target) rows; sources and
    letters form distinct slots, so applying them in any order agrees.
    direction uses the wire names "phi" (fold) and "psi" (unfold).
    """

    direction: str
    edges: tuple

    def apply(self, A):
        rows = [list(row) for row in A.rows]
        slots = set()
        for src, letter, old, new in self.edges:
            if (src, letter) in slots:
                raise ValueError("duplicate slot in plan")
            slots.add((src, letter))
            if rows[letter][src] != old:
                raise ValueError("plan does not match the automaton")
            rows[letter][src] = new
        return Automaton(rows)

    def inverse(self):
        flipped = tuple((s, l, new, old) for s, l, old, new in self.edges)
        return RewiringPlan("psi" if self.direction == "phi" else "phi", flipped)

    def to_json_dict(self):
        return {
            "dir": self.direction,
            "edges": [
                {"src": s, "letter": l, "old": o, "new": t}
                for s, l, o, t in self.edges
            ],
        }


def fold_cycles(x, word, check=True):
    """Rewire each cycle's closing edge onto the next minimum, marking the
    highest-label minimum; defined on cycle-good configurations.

    Returns the marked tree and the plan. With check, a violated good event
    raises CollisionError with the offending arrival.
    """
    if check:
        hits = cycle_collisions(x, word, first_only=True)
        if hits:
            raise CollisionError(hits[0])
    A = x.automaton
    k = len(word)
    rs = cycle_minima(x, word)
    beta = rs.vertices
    edges = []
    for p in range(rs.count):
        th = thread(A, beta[p], 0, word)
        assert th.is_cyclic
        alpha = th.entries[-1][0]
        edges.append((alpha, word.letters[k - 1], beta[p], beta[p + 1]))
    plan = RewiringPlan("phi", tuple(edges))
    return MarkedLabeled(plan.apply(A), beta[0], x.sigma), plan


def unfold_branch(y, word, check=True):
    """Re-cut the marked thread at its branch records, restoring one cycle
    per record; inverse of fold_cycles on its image.

    Each record's first congruence-0 arrival edge moves back one record;
    the thread's closing edge moves onto the last record.
    """
    A = y.automaton
    k = len(word)
    if check:
        if not is_w_tree(A, word):
            raise ValueError("not a tree under the word")
        if thread(A, y.mark, 0, word).cut_time % k != 0:
            raise ValueError("marked thread closes off congruence 0")
        hits = branch_collisions(y, word, first_only=True)
        if hits:
            raise CollisionError(hits[0])
    th = thread(A, y.mark, 0, word)
    rs = branch_records(y, word)
    b = rs.vertices
    edges = []
    for pp in range(1, rs.count + 1):
        pos = rs.positions[pp] if pp < rs.count else th.cut_time
        src = th.entries[pos - 1][0]
        letter = word.letters[(pos - 1) % k]
        edges.append((src, letter, b[pp], b[pp - 1]))
    plan = RewiringPlan("psi", tuple(edges))
    return Labeled(plan.apply(A), y.sigma), plan


def unfold_pair(x, w1, w2, order=(1, 2), check=True):
    """Unfold both coordinates of a doubly-marked configuration, first the
    named one; legal when the corresponding collision triples are empty.

    With check, asserts afterwards that the coordinate unfolded second kept
    its records: its branch records on the input equal its cycle minima on
    the output.
    """
    order = tuple(order)
    if order not in ((1, 2), (2, 1)):
        raise ValueError("order must be (1, 2) or (2, 1)")
    A = x.automaton
    marks = {1: x.mark1, 2: x.mark2}
    sigmas = {1: x.sigma1, 2: x.sigma2}
    words = {1: w1, 2: w2}
    first, second = order
    if check:
        for i in (1, 2):
            if not is_w_tree(A, words[i]):
                raise ValueError("coordinate %d is not a tree under its word" % i)
            if thread(A, marks[i], 0, words[i]).cut_time % len(words[i]) != 0:
                raise ValueError("coordinate %d closes off congruence 0" % i)
        triples = FIRST_THEN_SECOND if order == (1, 2) else SECOND_THEN_FIRST
        hits = find_collisions(x, w1, w2, triples, first_only=True)
        if hits:
            raise CollisionError(hits[0])
        before = branch_records(
            MarkedLabeled(A, marks[second], sigmas[second]), words[second]
        )
    y1, plan_a = unfold_branch(
        MarkedLabeled(A, marks[first], sigmas[first]), words[first], check=check
    )
    y2, plan_b = unfold_branch(
        MarkedLabeled(y1.automaton, marks[second], sigmas[second]),
        words[second],
        check=check,
    )
    out = DoubleLabeled(y2.automaton, x.sigma1, x.sigma2)
    if check:
        after = cycle_minima(Labeled(out.automaton, sigmas[second]), words[second])
        if before.count != after.count or before.vertices != after.vertices:
            raise AssertionError("second coordinate records drifted while unfolding")
    return out, (plan_a, plan_b)
