"""Cycle minima, branch lower records, and collisions between them.

A labeling sigma is a permutation of the states, read as a priority order.
Record sets collect the distinguished vertices where the rewiring bijection
deletes and reattaches edges; the good events rule out thread arrivals that
would make those rewirings ambiguous.
"""

from dataclasses import dataclass

from .core import (
    Word,
    are_conjugate,
    cycles,
    is_self_conjugate,
    is_w_tree,
    one_letter_view,
    thread,
)


def _check_sigma(sigma, n):
    sigma = tuple(int(x) for x in sigma)
    if sorted(sigma) != list(range(n)):
        raise ValueError("sigma must be a permutation of the states")
    return sigma


def random_labeling(n, rng):
    return tuple(int(v) for v in rng.permutation(n))


@dataclass(frozen=True)
class Labeled:
    """An automaton with a priority labeling of its states."""

    automaton: object
    sigma: tuple

    def __post_init__(self):
        object.__setattr__(self, "sigma", _check_sigma(self.sigma, self.automaton.n))


@dataclass(frozen=True)
class MarkedLabeled:
    """A labeled automaton with one marked state."""

    automaton: object
    mark: int
    sigma: tuple

    def __post_init__(self):
        object.__setattr__(self, "sigma", _check_sigma(self.sigma, self.automaton.n))
        if not 0 <= self.mark < self.automaton.n:
            raise ValueError("mark out of range")


@dataclass(frozen=True)
class DoubleMarked:
    """Two independent marks and labelings on one automaton."""

    automaton: object
    mark1: int
    mark2: int
    sigma1: tuple
    sigma2: tuple

    def __post_init__(self):
        n = self.automaton.n
        object.__setattr__(self, "sigma1", _check_sigma(self.sigma1, n))
        object.__setattr__(self, "sigma2", _check_sigma(self.sigma2, n))
        if not (0 <= self.mark1 < n and 0 <= self.mark2 < n):
            raise ValueError("mark out of range")


@dataclass(frozen=True)
class DoubleLabeled:
    automaton: object
    sigma1: tuple
    sigma2: tuple

    def __post_init__(self):
        n = self.automaton.n
        object.__setattr__(self, "sigma1", _check_sigma(self.sigma1, n))
        object.__setattr__(self, "sigma2", _check_sigma(self.sigma2, n))


@dataclass(frozen=True)
class RecordSet:
    """count distinguished vertices plus one closing companion.

    kind "cycle": vertices are the per-cycle label minima sorted by
    decreasing label, then the predecessor of the last minimum on its own
    cycle; positions give each vertex's distance along its cycle from that
    cycle's minimum (so 0 for the minima themselves).

    kind "branch": vertices are the label lower records at congruence-0
    times on the marked thread's pre-periodic part, then the vertex where
    the thread closes; positions are the thread times.
    """

    kind: str
    vertices: tuple
    positions: tuple
    count: int


@dataclass(frozen=True)
class CollisionWitness:
    """One thread arrival that breaks a good event.

    The thread of (source vertex p, congruence r) under word h arrived at
    target vertex q of set j at congruence s. path lists the (vertex,
    congruence) pairs from the source up to and including the arrival.
    """

    ihj: tuple
    p: int
    q: int
    r: int
    s: int
    path: tuple

    def to_json_dict(self):
        return {
            "ihj": list(self.ihj),
            "p": self.p,
            "q": self.q,
            "r": self.r,
            "s": self.s,
            "len": len(self.path) - 1,
        }


def cycle_minima(x, word):
    """Label minima of the cycles of the one-letter view, one per cycle,
    sorted by decreasing label, plus the predecessor of the last one."""
    A = x.automaton
    sigma = x.sigma
    cycs = cycles(one_letter_view(A, word))
    mins = []
    for cyc in cycs:
        v = min(cyc, key=lambda u: sigma[u])
        mins.append((sigma[v], v, cyc))
    mins.sort(key=lambda m: -m[0])
    vertices = [m[1] for m in mins]
    positions = [0] * len(mins)
    last_cycle = mins[-1][2]
    i = last_cycle.index(vertices[-1])
    vertices.append(last_cycle[(i - 1) % len(last_cycle)])
    positions.append((len(last_cycle) - 1) % len(last_cycle))
    return RecordSet("cycle", tuple(vertices), tuple(positions), len(mins))


def branch_records(y, word):
    """Strictly decreasing label records at congruence-0 times along the
    marked thread before it closes, plus the closing vertex."""
    A = y.automaton
    sigma = y.sigma
    k = len(word)
    th = thread(A, y.mark, 0, word)
    vertices = []
    positions = []
    best = None
    for i in range(th.twin_time // k + 1):
        v = th.entries[k * i][0]
        if best is None or sigma[v] < best:
            best = sigma[v]
            vertices.append(v)
            positions.append(k * i)
    count = len(vertices)
    vertices.append(th.entries[th.twin_time][0])
    positions.append(th.twin_time)
    return RecordSet("branch", tuple(vertices), tuple(positions), count)


def _indexed(vertices):
    # first 1-based index for each distinct vertex; duplicates walk once
    out = {}
    for i, v in enumerate(vertices):
        if v not in out:
            out[v] = i + 1
    return out


def _scan_collisions(A, walk_word, source_index, target_index, skip_zero, ihj, first_only):
    """Arrivals of source threads on target vertices.

    The start pair itself is not an arrival; with skip_zero the unavoidable
    congruence-0 returns are ignored too.
    """
    k = len(walk_word)
    rows = A.rows
    letters = walk_word.letters
    out = []
    for v, p in sorted(source_index.items(), key=lambda kv: kv[1]):
        for r in range(k):
            u, c = v, r
            seen = {u * k + c}
            path = [(u, c)]
            while True:
                u = rows[letters[c]][u]
                c += 1
                if c == k:
                    c = 0
                key = u * k + c
                if key in seen:
                    break
                seen.add(key)
                path.append((u, c))
                q = target_index.get(u)
                if q is not None and not (skip_zero and c == 0):
                    out.append(CollisionWitness(ihj, p, q, r, c, tuple(path)))
                    if first_only:
                        return out
    return out


def cycle_collisions(x, word, first_only=False):
    idx = _indexed(cycle_minima(x, word).vertices)
    return _scan_collisions(x.automaton, word, idx, idx, True, (1, 1, 1), first_only)


def is_cycle_good(x, word):
    """No cycle-minimum thread ever arrives at a cycle minimum off
    congruence 0."""
    return not cycle_collisions(x, word, first_only=True)


def branch_collisions(y, word, first_only=False):
    idx = _indexed(branch_records(y, word).vertices)
    return _scan_collisions(y.automaton, word, idx, idx, True, (1, 1, 1), first_only)


def is_branch_good(y, word):
    """No branch-record thread ever arrives at a branch record off
    congruence 0."""
    return not branch_collisions(y, word, first_only=True)


def is_good_marked_tree(y, word):
    """Tree under the word, thread of the mark closing at congruence 0,
    and branch-good: the image set of the cycle-folding map."""
    A = y.automaton
    if not is_w_tree(A, word):
        return False
    if thread(A, y.mark, 0, word).cut_time % len(word) != 0:
        return False
    return is_branch_good(y, word)


def _check_word_pair(w1, w2):
    if len(w1) != len(w2):
        raise ValueError("the two words must have equal length")
    if is_self_conjugate(w1) or is_self_conjugate(w2):
        raise ValueError("words must not be self-conjugate")
    if are_conjugate(w1, w2):
        raise ValueError("words must not be conjugate")


def find_collisions(x, w1, w2, which, first_only=False):
    """Witnesses for the given (i, h, j) triples on a doubly-marked
    configuration: threads start at coordinate i's branch records, walk
    under word h, and arrivals on coordinate j's records count unless
    j == h and the arrival congruence is 0.

    Scan order is the given triple order, then source index, then
    congruence, then time, so the first witness is deterministic.
    """
    _check_word_pair(w1, w2)
    A = x.automaton
    words = {1: w1, 2: w2}
    idx = {
        1: _indexed(branch_records(MarkedLabeled(A, x.mark1, x.sigma1), w1).vertices),
        2: _indexed(branch_records(MarkedLabeled(A, x.mark2, x.sigma2), w2).vertices),
    }
    out = []
    for ihj in which:
        i, h, j = ihj
        hits = _scan_collisions(
            A, words[h], idx[i], idx[j], j == h, (i, h, j), first_only
        )
        out.extend(hits)
        if first_only and out:
            return out
    return out


ALL_TRIPLES = tuple((i, h, j) for i in (1, 2) for h in (1, 2) for j in (1, 2))

# triples whose absence lets coordinate 1 unfold first, then coordinate 2
FIRST_THEN_SECOND = ((1, 1, 1), (2, 2, 2), (1, 2, 1), (1, 2, 2), (2, 2, 1))
# and the mirror set for unfolding coordinate 2 first
SECOND_THEN_FIRST = ((1, 1, 1), (2, 2, 2), (2, 1, 2), (2, 1, 1), (1, 1, 2))


def has_minima_collision(A, sigma1, sigma2, w1, w2):
    """Cycle-minima analog of find_collisions over all eight triples.

    True when some minima thread of either coordinate, walked under either
    word, arrives on a recorded minimum apart from the unavoidable
    same-word congruence-0 returns.
    """
    _check_word_pair(w1, w2)
    k = len(w1)
    beta = {
        1: _indexed(cycle_minima(Labeled(A, sigma1), w1).vertices),
        2: _indexed(cycle_minima(Labeled(A, sigma2), w2).vertices),
    }
    words = {1: w1, 2: w2}
    rows = A.rows
    t1, t2 = beta[1], beta[2]
    for i in (1, 2):
        for h in (1, 2):
            letters = words[h].letters
            for v in beta[i]:
                for r in range(k):
                    u, c = v, r
                    seen = {u * k + c}
                    while True:
                        u = rows[letters[c]][u]
                        c += 1
                        if c == k:
                            c = 0
                        key = u * k + c
                        if key in seen:
                            break
                        seen.add(key)
                        if c != 0:
                            if u in t1 or u in t2:
                                return True
                        elif (h == 2 and u in t1) or (h == 1 and u in t2):
                            return True
    return False
