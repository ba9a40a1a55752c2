"""Synchronizing words via repeated tree words, plus exact and polynomial
oracles to validate them.

The fast route: find a word w whose one-letter view is a loop-rooted tree,
measure its height H, and emit w^H, which drags every state into the root.
The oracles: a power-set BFS for exact shortest words on tiny automata, a
pair-merging check for synchronizability, and a cubic greedy fallback.
"""

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .core import (
    Automaton,
    Word,
    apply_word_all,
    enumerate_nc_words,
    format_word,
    is_self_conjugate,
    rng_from_seed,
)


@dataclass(frozen=True)
class SyncCertificate:
    """A synchronizing word together with how it was obtained.

    verified is set only after the word was re-applied to every state and
    collapsed them to sink.
    """

    word: Word
    sink: int
    method: str
    tree_word: Word = None
    height: int = None
    verified: bool = False

    def to_json_dict(self, emit_word=False):
        doc = {"method": self.method}
        if self.tree_word is not None:
            doc["tree_word"] = format_word(self.tree_word)
        if self.height is not None:
            doc["H"] = self.height
        doc["sink"] = self.sink
        doc["word_len"] = len(self.word)
        doc["verified"] = self.verified
        if emit_word:
            doc["word"] = format_word(self.word)
        return doc


def is_synchronizing(A, word):
    """The common image state if the word resets A, else None."""
    images = apply_word_all(A, word)
    first = int(images[0])
    if (images == first).all():
        return first
    return None


def _word_map(A, word):
    # successor array of the one-letter view, built with k gathers
    f = np.arange(A.n, dtype=np.int64)
    for l in word.letters:
        f = A.delta[l][f]
    return f


def _tree_root(f, n):
    # iterate the map past n steps; a tree leaves a single value standing
    g = f
    m = 1
    while m < n:
        g = g[g]
        m <<= 1
    roots = np.unique(g)
    if roots.size != 1:
        return None
    return int(roots[0])


def _tree_height(f, root):
    # longest distance to the root, computed over predecessor lists
    n = len(f)
    preds = [[] for _ in range(n)]
    for v in range(n):
        if v != root:
            preds[int(f[v])].append(v)
    best = 0
    stack = [(root, 0)]
    while stack:
        v, depth = stack.pop()
        if depth > best:
            best = depth
        for u in preds[v]:
            stack.append((u, depth + 1))
    return best


def _candidate_words(A, k, mode, seed, allow_self_conjugate):
    if mode == "exhaustive":
        if allow_self_conjugate:
            return (Word(p) for p in product(range(A.r), repeat=k))
        return enumerate_nc_words(k, A.r)
    if mode == "sampled":
        def draw():
            rng = rng_from_seed(seed)
            seen = set()
            while True:
                letters = tuple(int(x) for x in rng.integers(0, A.r, size=k))
                if letters in seen:
                    continue
                seen.add(letters)
                w = Word(letters)
                if allow_self_conjugate or not is_self_conjugate(w):
                    yield w
        return draw()
    raise ValueError("mode must be exhaustive or sampled")


def find_tree_word(A, k, budget=None, mode="exhaustive", seed=0,
                   allow_self_conjugate=False):
    """First word of length k whose one-letter view is a loop-rooted tree.

    Exhaustive mode scans non-self-conjugate words in lexicographic order;
    sampled mode draws them uniformly without replacement. budget caps the
    number of words examined. Returns (word, height, root) or None.
    """
    if k < 1:
        raise ValueError("word length must be positive")
    if mode == "sampled" and budget is None:
        raise ValueError("sampled mode needs a budget")
    examined = 0
    for w in _candidate_words(A, k, mode, seed, allow_self_conjugate):
        if budget is not None and examined >= budget:
            return None
        examined += 1
        f = _word_map(A, w)
        root = _tree_root(f, A.n)
        if root is not None:
            return w, _tree_height(f, root), root
    return None


def pick_tree_length(n, epsilon=0.2):
    """Word length for the tree search: ceil((1+epsilon) log2 n), floored
    at 1 and capped at ceil(2 log2 n)."""
    k = math.ceil((1 + epsilon) * math.log2(n))
    return max(1, min(k, math.ceil(2 * math.log2(n))))


def tree_sync_word(A, epsilon=0.2, budget=None, seed=0, mode="exhaustive"):
    """Synchronize by repeating a tree word height-many times.

    Returns a verified certificate, or None when no tree word of the
    picked length exists within the budget; no automatic fallback.
    """
    if A.n < 2:
        raise ValueError("need at least two states")
    k = pick_tree_length(A.n, epsilon)
    found = find_tree_word(A, k, budget=budget, mode=mode, seed=seed)
    if found is None:
        return None
    w, H, root = found
    word = w.repeat(H)
    sink = is_synchronizing(A, word)
    assert sink == root, "tree word repeated height times failed to reset"
    return SyncCertificate(
        word=word, sink=root, method="tree", tree_word=w, height=H,
        verified=True,
    )


def _pair_merge_tables(A):
    """Shortest merge data for unordered state pairs.

    Returns (dist, step) keyed by p*n+q with p <= q; step holds the first
    letter of one shortest merging word. BFS runs backward from the
    diagonal over preimages.
    """
    n = A.n
    rows = A.rows
    pre = [[[] for _ in range(n)] for _ in range(A.r)]
    for l in range(A.r):
        row = rows[l]
        for u in range(n):
            pre[l][row[u]].append(u)
    dist = {}
    step = {}
    queue = []
    for v in range(n):
        key = v * n + v
        dist[key] = 0
        queue.append((v, v))
    head = 0
    while head < len(queue):
        p, q = queue[head]
        head += 1
        d = dist[p * n + q]
        for l in range(A.r):
            for pp in pre[l][p]:
                for qq in pre[l][q]:
                    a, b = (pp, qq) if pp <= qq else (qq, pp)
                    key = a * n + b
                    if key not in dist:
                        dist[key] = d + 1
                        step[key] = l
                        queue.append((a, b))
    return dist, step


def is_synchronizable(A):
    """True iff every state pair can be merged by some word."""
    dist, _ = _pair_merge_tables(A)
    return len(dist) == A.n * (A.n + 1) // 2


def greedy_fallback(A):
    """Merge the image set one pair at a time, shortest pair word first.

    Total length stays under n^3. Returns a verified certificate, or None
    exactly when the automaton is not synchronizable.
    """
    n = A.n
    if n == 1:
        # empty words are not representable; one letter resets one state
        return SyncCertificate(
            word=Word((0,)), sink=0, method="greedy", verified=True,
        )
    dist, step = _pair_merge_tables(A)
    if len(dist) < n * (n + 1) // 2:
        return None
    rows = A.rows
    current = set(range(n))
    letters = []
    while len(current) > 1:
        states = sorted(current)
        best = None
        for i in range(len(states)):
            for j in range(i + 1, len(states)):
                key = states[i] * n + states[j]
                if best is None or dist[key] < dist[best]:
                    best = key
        p, q = divmod(best, n)
        while p != q:
            l = step[p * n + q if p <= q else q * n + p]
            letters.append(l)
            current = {rows[l][s] for s in current}
            p, q = rows[l][p], rows[l][q]
            if p > q:
                p, q = q, p
    word = Word(letters)
    sink = is_synchronizing(A, word)
    assert sink is not None and {sink} == current, "greedy word failed to reset"
    return SyncCertificate(
        word=word, sink=sink, method="greedy", verified=True,
    )


def shortest_sync_word_exact(A):
    """Shortest synchronizing word by BFS over image subsets.

    Guarded at 20 states; the frontier is the set of masks reachable from
    the full state set. Returns None when no singleton is reachable.
    """
    n = A.n
    if n > 20:
        raise ValueError("state powerset search capped at 20 states")
    if n == 1:
        # empty words are not representable; one letter resets one state
        return Word((0,))
    bits = [[1 << A.rows[l][i] for i in range(n)] for l in range(A.r)]
    full = (1 << n) - 1
    parent = {full: None}
    queue = [full]
    head = 0
    while head < len(queue):
        mask = queue[head]
        head += 1
        for l in range(A.r):
            img = 0
            m = mask
            blk = bits[l]
            while m:
                low = m & -m
                img |= blk[low.bit_length() - 1]
                m ^= low
            if img not in parent:
                parent[img] = (mask, l)
                if img & (img - 1) == 0:
                    letters = []
                    cur = img
                    while parent[cur] is not None:
                        prev, letter = parent[cur]
                        letters.append(letter)
                        cur = prev
                    return Word(reversed(letters))
                queue.append(img)
    return None


def cerny_automaton(n):
    """The classical slow-synchronizing fixture: a cycles, b collapses the
    top state onto 0."""
    if n < 2:
        raise ValueError("need at least two states")
    a = [(i + 1) % n for i in range(n)]
    b = list(range(n))
    b[n - 1] = 0
    return Automaton([a, b])
