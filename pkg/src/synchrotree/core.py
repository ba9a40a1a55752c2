"""Deterministic automata, word threads, and one-letter views.

States are 0-indexed ints. A word over an r-letter alphabet is a tuple of
letter indices; for r=2 the letters print as 'a' and 'b'. Applying a word
reads it left to right: the image of u under "ab" is b(a(u)).
"""

import itertools
import string

import numpy as np

FORMAT_TAG = "synchrotree-automaton-v1"
MASK64 = (1 << 64) - 1


class SchemaError(ValueError):
    """Raised when serialized input does not match the expected schema."""


def splitmix64(x):
    """One avalanche round of splitmix64, a stable 64-bit integer hash."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def rng_from_seed(seed):
    """A PCG64 generator; one seed gives one stream on every platform."""
    return np.random.Generator(np.random.PCG64(int(seed) & MASK64))


def trial_seed(seed, trial):
    """Stream seed for one trial: the master seed xor a hash of the index."""
    return (int(seed) ^ splitmix64(int(trial))) & MASK64


def _text_to_letters(text):
    if "," in text or any(ch.isdigit() for ch in text):
        return tuple(int(part) for part in text.split(","))
    try:
        return tuple(string.ascii_lowercase.index(ch) for ch in text)
    except ValueError:
        raise ValueError("unreadable word text %r" % text) from None


class Word:
    """An immutable sequence of letter indices, at least one letter long."""

    __slots__ = ("letters",)

    def __init__(self, letters):
        if isinstance(letters, str):
            letters = _text_to_letters(letters)
        letters = tuple(int(l) for l in letters)
        if not letters:
            raise ValueError("a word needs at least one letter")
        if any(l < 0 for l in letters):
            raise ValueError("letter indices must be nonnegative")
        self.letters = letters

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def __eq__(self, other):
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __repr__(self):
        return "Word(%r)" % (self.text,)

    @property
    def text(self):
        if max(self.letters) < len(string.ascii_lowercase):
            return "".join(string.ascii_lowercase[l] for l in self.letters)
        return ",".join(str(l) for l in self.letters)

    def rotate(self, m):
        """The word read from position m onward, wrapping around."""
        m %= len(self.letters)
        return Word(self.letters[m:] + self.letters[:m])

    def repeat(self, times):
        return Word(self.letters * int(times))


def parse_word(text):
    return Word(text)


def format_word(word, r=2):
    """Render a word for r=2 as an 'ab' string, otherwise as comma ints."""
    if r == 2:
        return word.text
    return ",".join(str(l) for l in word.letters)


def _proper_divisors(k):
    return [d for d in range(1, k) if k % d == 0]


def is_self_conjugate(word):
    """True when some nontrivial rotation reproduces the word.

    Equivalent to being a power of a strictly shorter word, so only
    rotations by proper divisors of the length need checking.
    """
    k = len(word)
    return any(word.rotate(d) == word for d in _proper_divisors(k))


def are_conjugate(w1, w2):
    """True when the two words differ by a rotation."""
    if len(w1) != len(w2):
        return False
    return any(w1.rotate(m) == w2 for m in range(len(w1)))


def enumerate_nc_words(k, r=2):
    """All non-self-conjugate words of length k, in lexicographic order."""
    if k < 1:
        raise ValueError("word length must be positive")
    for letters in itertools.product(range(r), repeat=k):
        w = Word(letters)
        if not is_self_conjugate(w):
            yield w


def count_nc_words(k, r=2):
    return sum(1 for _ in enumerate_nc_words(k, r))


def random_nc_word(k, r, rng):
    """Uniform draw from the non-self-conjugate words of length k."""
    while True:
        w = Word(rng.integers(0, r, size=k).tolist())
        if not is_self_conjugate(w):
            return w


class Automaton:
    """A complete deterministic transition table over an r-letter alphabet.

    delta[letter][state] is the successor state. No initial or accepting
    states are distinguished. Instances are treated as immutable; rewiring
    always builds a new table.
    """

    __slots__ = ("n", "r", "delta", "rows", "_hash")

    def __init__(self, delta):
        arr = np.array(delta, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("delta must be a 2d table, one row per letter")
        r, n = arr.shape
        if n < 1:
            raise ValueError("need at least one state")
        if r < 2:
            raise ValueError("need at least two letters")
        if arr.min() < 0 or arr.max() >= n:
            raise ValueError("transition target out of range")
        arr.setflags(write=False)
        self.delta = arr
        self.n = n
        self.r = r
        self.rows = tuple(tuple(int(x) for x in row) for row in arr)
        self._hash = None

    def __eq__(self, other):
        return (
            isinstance(other, Automaton)
            and self.n == other.n
            and self.r == other.r
            and self.rows == other.rows
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, self.r, self.rows))
        return self._hash

    def __repr__(self):
        return "Automaton(n=%d, r=%d)" % (self.n, self.r)

    def to_json_dict(self):
        return {
            "format": FORMAT_TAG,
            "n": self.n,
            "alphabet": self.r,
            "delta": [list(row) for row in self.rows],
        }


def automaton_from_json(doc):
    """Validate a parsed JSON document and build the automaton.

    Raises SchemaError naming the offending field.
    """
    if not isinstance(doc, dict):
        raise SchemaError("automaton document must be a JSON object")
    if doc.get("format") != FORMAT_TAG:
        raise SchemaError("format: expected %r" % FORMAT_TAG)
    n = doc.get("n")
    if not isinstance(n, int) or n < 1:
        raise SchemaError("n: expected a positive integer")
    r = doc.get("alphabet")
    if not isinstance(r, int) or r < 2:
        raise SchemaError("alphabet: expected an integer of at least 2")
    delta = doc.get("delta")
    if not isinstance(delta, list) or len(delta) != r:
        raise SchemaError("delta: expected %d rows" % r)
    for i, row in enumerate(delta):
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError("delta[%d]: expected %d entries" % (i, n))
        for j, x in enumerate(row):
            if not isinstance(x, int) or not 0 <= x < n:
                raise SchemaError("delta[%d][%d]: state out of range" % (i, j))
    return Automaton(delta)


def random_automaton(n, r=2, seed=0):
    """Uniform automaton: every transition target drawn independently."""
    if n < 1:
        raise ValueError("need at least one state")
    if r < 2:
        raise ValueError("need at least two letters")
    rng = rng_from_seed(seed)
    return Automaton(rng.integers(0, n, size=(r, n), dtype=np.int64))


def _check_word(A, word):
    if max(word.letters) >= A.r:
        raise ValueError("word uses letter outside the alphabet")


def apply_word(A, state, word):
    """The image of one state under the word, read left to right."""
    _check_word(A, word)
    if not 0 <= state < A.n:
        raise ValueError("state out of range")
    rows = A.rows
    for l in word.letters:
        state = rows[l][state]
    return state


def apply_word_all(A, word, states=None):
    """Images of every state (or a given array of states) under the word."""
    _check_word(A, word)
    if states is None:
        states = np.arange(A.n, dtype=np.int64)
    else:
        states = np.asarray(states, dtype=np.int64)
    for l in word.letters:
        states = A.delta[l, states]
    return states


class Thread:
    """The walk of a (state, congruence) pair under rotating letters.

    entries[t] is the (vertex, congruence) pair at time t, for times
    0..cut_time-1; the pair reached at cut_time repeats the one seen at
    twin_time. period counts whole word applications in the loop.
    """

    __slots__ = ("start", "word", "entries", "cut_time", "twin_time")

    def __init__(self, start, word, entries, cut_time, twin_time):
        self.start = start
        self.word = word
        self.entries = entries
        self.cut_time = cut_time
        self.twin_time = twin_time

    @property
    def period(self):
        return (self.cut_time - self.twin_time) // len(self.word)

    @property
    def is_cyclic(self):
        return self.twin_time == 0

    def vertex(self, t):
        return self.entries[t][0]

    def __repr__(self):
        return "Thread(start=%r, cut_time=%d, twin_time=%d)" % (
            self.start,
            self.cut_time,
            self.twin_time,
        )


def thread(A, u, r, word):
    """Walk letters word[r], word[r+1], ... from u, cutting at the first
    repeated (vertex, congruence) pair.

    The congruence advances mod k each step, so cut_time - twin_time is
    always a multiple of k.
    """
    _check_word(A, word)
    k = len(word)
    if not 0 <= u < A.n:
        raise ValueError("state out of range")
    if not 0 <= r < k:
        raise ValueError("congruence out of range")
    rows = A.rows
    letters = word.letters
    seen = {}
    entries = []
    v, c = u, r
    key = v * k + c
    t = 0
    while key not in seen:
        seen[key] = t
        entries.append((v, c))
        v = rows[letters[c]][v]
        c += 1
        if c == k:
            c = 0
        key = v * k + c
        t += 1
    return Thread((u, r), word, tuple(entries), t, seen[key])


class FunctionalGraph:
    """succ[v] is the unique out-neighbor of v; word records where the map
    came from when it is a one-letter view."""

    __slots__ = ("n", "succ", "word")

    def __init__(self, succ, word=None):
        arr = np.asarray(succ, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("succ must be one-dimensional")
        n = arr.shape[0]
        if n < 1:
            raise ValueError("need at least one vertex")
        if arr.min() < 0 or arr.max() >= n:
            raise ValueError("successor out of range")
        arr.setflags(write=False)
        self.succ = arr
        self.n = n
        self.word = word

    def __repr__(self):
        return "FunctionalGraph(%r)" % (self.succ.tolist(),)


def one_letter_view(A, word):
    """The map state -> apply_word(state, word), as a functional graph."""
    return FunctionalGraph(apply_word_all(A, word), word=word)


def cycles(F):
    """All cycles of the graph, each listed in successor order."""
    succ = F.succ.tolist()
    state = [0] * F.n  # 0 fresh, 1 on the active path, 2 finished
    out = []
    for s in range(F.n):
        if state[s]:
            continue
        path = []
        v = s
        while state[v] == 0:
            state[v] = 1
            path.append(v)
            v = succ[v]
        if state[v] == 1:
            out.append(tuple(path[path.index(v):]))
        for u in path:
            state[u] = 2
    return tuple(out)


def cyclic_points(F):
    """Vertices lying on some cycle of the graph."""
    return frozenset(v for cyc in cycles(F) for v in cyc)


def height(F):
    """Length of the longest vertex-repetition-free chain of transitions.

    Per start vertex the chain is forced, so this is distance-to-cycle plus
    cycle length minus one, maximized over vertices. For a loop-rooted tree
    it is the maximum distance to the root.
    """
    succ = F.succ.tolist()
    n = F.n
    on_cycle = [False] * n
    clen = [0] * n
    best = 0
    for cyc in cycles(F):
        for v in cyc:
            on_cycle[v] = True
            clen[v] = len(cyc)
        best = max(best, len(cyc) - 1)
    preds = [[] for _ in range(n)]
    for v in range(n):
        preds[succ[v]].append(v)
    depth = [0] * n
    stack = [v for v in range(n) if on_cycle[v]]
    while stack:
        v = stack.pop()
        for u in preds[v]:
            if on_cycle[u]:
                continue
            depth[u] = depth[v] + 1
            clen[u] = clen[v]
            if depth[u] + clen[u] - 1 > best:
                best = depth[u] + clen[u] - 1
            stack.append(u)
    return best


def is_w_tree(A, word):
    """True when the one-letter view has a single cyclic point."""
    return len(cyclic_points(one_letter_view(A, word))) == 1


def tree_root(A, word):
    """The unique cyclic point of a w-tree."""
    pts = cyclic_points(one_letter_view(A, word))
    if len(pts) != 1:
        raise ValueError("not a tree under this word")
    return next(iter(pts))


def shift(A, v, word):
    """cut_time mod k for the thread of (v, 0); defined on w-trees only."""
    if not is_w_tree(A, word):
        raise ValueError("shift is defined only on trees")
    return thread(A, v, 0, word).cut_time % len(word)
