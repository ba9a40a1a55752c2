"""Sequential thread exposure over a batch of inputs, with the bookkeeping
needed to audit its combinatorial claims.

Each input (state, congruence, word) walks its thread, exposing one labeled
edge per time step, and closes as soon as the next (vertex, congruence,
word) triple has been seen before. A step is exploring when its labeled
edge was never traversed earlier, following otherwise; an exploring step
whose head vertex was already visited is a hit. The revealed partial
automaton collects every traversed (state, letter) assignment, closing
steps included, which keeps it independent of the input order.
"""

from dataclasses import dataclass

from .core import thread


@dataclass(frozen=True)
class InputSpec:
    """The ordered inputs of one exploration; words must share one length."""

    entries: tuple

    def __post_init__(self):
        entries = tuple((int(u), int(r), w) for u, r, w in self.entries)
        if not entries:
            raise ValueError("need at least one entry")
        k = len(entries[0][2])
        for u, r, w in entries:
            if len(w) != k:
                raise ValueError("all words must have the same length")
            if not 0 <= r < k:
                raise ValueError("congruence out of range")
        object.__setattr__(self, "entries", entries)

    @property
    def d(self):
        return len(self.entries)

    @property
    def k(self):
        return len(self.entries[0][2])


class ExplorationTrace:
    """Everything one exploration run exposed, in order.

    events[t] is the (vertex, congruence, word id) triple visited at time t;
    steps are stored as parallel lists over the same times. boundaries[j] is
    the start time of thread j, with boundaries[d] the final time.
    """

    def __init__(self, automaton, spec, words, word_ids, events, boundaries,
                 step_src, step_letter, step_dst, step_explores, step_hits,
                 step_closes, closings, revealed):
        self.automaton = automaton
        self.spec = spec
        self.words = words
        self.word_ids = word_ids
        self.events = events
        self.boundaries = boundaries
        self.step_src = step_src
        self.step_letter = step_letter
        self.step_dst = step_dst
        self.step_explores = step_explores
        self.step_hits = step_hits
        self.step_closes = step_closes
        self.closings = closings
        self.revealed = revealed

    @property
    def n(self):
        return self.automaton.n

    @property
    def k(self):
        return self.spec.k

    @property
    def d(self):
        return self.spec.d

    @property
    def final_time(self):
        return len(self.events)

    def spans(self):
        b = self.boundaries
        return tuple(b[j + 1] - b[j] for j in range(self.d))

    def revealed_map(self, t=None):
        """Labeled edges exposed by the first t steps, as slot -> target."""
        if t is None or t >= self.final_time:
            return {slot: dst for slot, (dst, _) in self.revealed.items()}
        return {
            slot: dst
            for slot, (dst, first) in self.revealed.items()
            if first < t
        }


def explore(A, spec):
    """Run the exposure walk for every entry of the spec, in order."""
    k = spec.k
    words = []
    word_index = {}
    entry_ids = []
    for u, r, w in spec.entries:
        if not 0 <= u < A.n:
            raise ValueError("entry state out of range")
        if max(w.letters) >= A.r:
            raise ValueError("entry word uses letter outside the alphabet")
        if w not in word_index:
            word_index[w] = len(words)
            words.append(w)
        entry_ids.append((u, r, word_index[w]))
    nwords = len(words)
    rows = A.rows
    events = []
    eset = set()
    revealed = {}
    step_src = []
    step_letter = []
    step_dst = []
    step_explores = []
    step_hits = []
    step_closes = []
    visited = bytearray(A.n)
    boundaries = [0]
    closings = []
    for u, r, wid in entry_ids:
        letters = words[wid].letters
        x, y = u, r
        key = (x * k + y) * nwords + wid
        while key not in eset:
            eset.add(key)
            events.append((x, y, wid))
            visited[x] = 1
            letter = letters[y]
            slot = (x, letter)
            known = revealed.get(slot)
            if known is None:
                dst = rows[letter][x]
                revealed[slot] = (dst, len(events) - 1)
                step_explores.append(True)
                step_hits.append(visited[dst] == 1)
            else:
                dst = known[0]
                step_explores.append(False)
                step_hits.append(False)
            step_src.append(x)
            step_letter.append(letter)
            step_dst.append(dst)
            step_closes.append(False)
            x = dst
            y += 1
            if y == k:
                y = 0
            key = (x * k + y) * nwords + wid
        if boundaries[-1] < len(events):
            step_closes[-1] = True
        closings.append((x, y, wid))
        boundaries.append(len(events))
    return ExplorationTrace(
        A, spec, tuple(words), tuple(wid for _, _, wid in entry_ids),
        events, tuple(boundaries), step_src, step_letter, step_dst,
        step_explores, step_hits, step_closes, tuple(closings), revealed,
    )


def classify(trace):
    """Per-time tags for the visited events: start, exploring, following,
    or hitting, the latter three describing the arriving step."""
    starts = set()
    for j in range(trace.d):
        if trace.boundaries[j] < trace.boundaries[j + 1]:
            starts.add(trace.boundaries[j])
    tags = []
    for t in range(trace.final_time):
        if t in starts:
            tags.append("start")
        elif trace.step_hits[t - 1]:
            tags.append("hitting")
        elif trace.step_explores[t - 1]:
            tags.append("exploring")
        else:
            tags.append("following")
    return tags


def hit_counts(trace):
    """Cumulative hits h_t, one entry per time step, inclusive."""
    out = []
    h = 0
    for flag in trace.step_hits:
        h += flag
        out.append(h)
    return out


def _adjacency(trace, t=None):
    out_adj = {}
    in_adj = {}
    for (src, letter), (dst, first) in trace.revealed.items():
        if t is not None and first >= t:
            continue
        out_adj.setdefault(src, []).append(dst)
        in_adj.setdefault(dst, []).append(src)
    return out_adj, in_adj


def _bfs(adj, u, radius):
    seen = {u}
    frontier = [u]
    for _ in range(radius):
        if not frontier:
            break
        nxt = []
        for v in frontier:
            for w in adj.get(v, ()):
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return seen


def ball(trace, u, radius, direction="both", t=None):
    """Vertices within the radius of u in the revealed graph at prefix t.

    direction "out" follows edges forward, "in" backward, "both" unions.
    """
    out_adj, in_adj = _adjacency(trace, t)
    if direction == "out":
        return frozenset(_bfs(out_adj, u, radius))
    if direction == "in":
        return frozenset(_bfs(in_adj, u, radius))
    if direction == "both":
        return frozenset(_bfs(out_adj, u, radius) | _bfs(in_adj, u, radius))
    raise ValueError("direction must be in, out, or both")


def check_equi(trace):
    """Congruence-class occupancy stays within d per word, every prefix."""
    k = trace.k
    d = trace.d
    counts = [[0] * k for _ in trace.words]
    for x, y, wid in trace.events:
        row = counts[wid]
        row[y] += 1
        if max(row) - min(row) > d:
            return False
    return True


def check_degree_sums(trace):
    """Both branching-degree sums stay at or below twice the hits, every
    prefix; only exploring steps add edges."""
    n = trace.n
    indeg = [0] * n
    outdeg = [0] * n
    in_sum = 0
    out_sum = 0
    h = 0
    for t in range(trace.final_time):
        if trace.step_explores[t]:
            src = trace.step_src[t]
            dst = trace.step_dst[t]
            outdeg[src] += 1
            if outdeg[src] == 2:
                out_sum += 2
            elif outdeg[src] > 2:
                out_sum += 1
            indeg[dst] += 1
            if indeg[dst] == 2:
                in_sum += 2
            elif indeg[dst] > 2:
                in_sum += 1
        h += trace.step_hits[t]
        if in_sum > 2 * h or out_sum > 2 * h:
            return False
    return True


def check_following_counts(trace):
    """Following times up to each prefix stay at or below 4dk^2 h_t^2."""
    d = trace.d
    k = trace.k
    h = 0
    f = 0
    for t in range(trace.final_time):
        h += trace.step_hits[t]
        f += not trace.step_explores[t]
        if f > 4 * d * k * k * h * h:
            return False
    return True


def check_ball_growth(trace, prefixes=None, sample_vertices=None):
    """In- and out-balls grow at most like 2*l*(h_t + 1).

    Checks every revealed vertex at the final prefix and any extra given
    prefixes, over radii 1..2k.
    """
    k = trace.k
    hseq = hit_counts(trace)
    times = [trace.final_time]
    if prefixes:
        times.extend(prefixes)
    for t in sorted(set(times)):
        h = hseq[t - 1] if t > 0 else 0
        out_adj, in_adj = _adjacency(trace, t)
        verts = set(out_adj) | set(in_adj)
        if sample_vertices is not None:
            verts &= set(sample_vertices)
        for u in verts:
            for adj in (out_adj, in_adj):
                seen = {u}
                frontier = [u]
                for radius in range(1, 2 * k + 1):
                    nxt = []
                    for v in frontier:
                        for w in adj.get(v, ()):
                            if w not in seen:
                                seen.add(w)
                                nxt.append(w)
                    frontier = nxt
                    if len(seen) > 2 * radius * (h + 1):
                        return False
                    if not frontier:
                        break
    return True


def _labeled_degrees(trace, t=None):
    out_deg = {}
    in_deg = {}
    for (src, letter), (dst, first) in trace.revealed.items():
        if t is not None and first >= t:
            continue
        out_deg[src] = out_deg.get(src, 0) + 1
        in_deg[dst] = in_deg.get(dst, 0) + 1
    return out_deg, in_deg


def _cycle_survivors(out_adj, in_adj):
    # peel vertices that cannot lie on a directed cycle
    verts = set(out_adj) | set(in_adj)
    out_count = {v: len(out_adj.get(v, ())) for v in verts}
    in_count = {v: len(in_adj.get(v, ())) for v in verts}
    queue = [v for v in verts if out_count[v] == 0 or in_count[v] == 0]
    dead = set()
    while queue:
        v = queue.pop()
        if v in dead:
            continue
        dead.add(v)
        for u in in_adj.get(v, ()):
            if u not in dead:
                out_count[u] -= 1
                if out_count[u] <= 0:
                    queue.append(u)
        for w in out_adj.get(v, ()):
            if w not in dead:
                in_count[w] -= 1
                if in_count[w] <= 0:
                    queue.append(w)
    return verts - dead


def _is_directed_path(vertices, edges):
    # a simple chain: one fewer edge than vertices, degrees at most one
    if len(edges) != len(vertices) - 1:
        return False
    ins = {}
    outs = {}
    for src, dst in edges:
        ins[dst] = ins.get(dst, 0) + 1
        outs[src] = outs.get(src, 0) + 1
        if ins[dst] > 1 or outs[src] > 1:
            return False
    starts = [v for v in vertices if v not in ins]
    if len(vertices) == 1:
        return True
    if len(starts) != 1:
        return False
    v = starts[0]
    chain = {v}
    nxt = {src: dst for src, dst in edges}
    while v in nxt:
        v = nxt[v]
        if v in chain:
            return False
        chain.add(v)
    return chain == set(vertices)


def path_exception_count(trace, radius=None, t=None):
    """Vertices whose combined ball is not a directed path.

    Only vertices near a branching vertex, a merging vertex, or a cycle can
    fail, so the scan visits the balls of those defects first.
    """
    k = radius if radius is not None else trace.k
    out_adj, in_adj = _adjacency(trace, t)
    out_deg, in_deg = _labeled_degrees(trace, t)
    defects = {v for v, c in out_deg.items() if c >= 2}
    defects |= {v for v, c in in_deg.items() if c >= 2}
    defects |= _cycle_survivors(out_adj, in_adj)
    candidates = set()
    for v in defects:
        candidates |= _bfs(out_adj, v, k)
        candidates |= _bfs(in_adj, v, k)
    edges = []
    for (src, letter), (dst, first) in trace.revealed.items():
        if t is not None and first >= t:
            continue
        edges.append((src, dst))
    count = 0
    for u in candidates:
        verts = _bfs(out_adj, u, k) | _bfs(in_adj, u, k)
        induced = [(s, d) for s, d in edges if s in verts and d in verts]
        if not _is_directed_path(verts, induced):
            count += 1
    return count


def check_path_exceptions(trace):
    """At the final prefix, ball-not-a-path vertices stay at or below
    10k h^2 for the trace's own hit count."""
    h = hit_counts(trace)[-1] if trace.final_time else 0
    return path_exception_count(trace) <= 10 * trace.k * h * h


def thread_edge_runs(trace):
    """Per thread, the labeled edge sequence it traversed."""
    runs = []
    for j in range(trace.d):
        a, b = trace.boundaries[j], trace.boundaries[j + 1]
        runs.append(
            [
                (trace.step_src[t], trace.step_letter[t], trace.step_dst[t])
                for t in range(a, b)
            ]
        )
    return runs


def check_trajectory_overlaps(trace):
    """Any k consecutive labeled edges shared by two thread trajectories
    force the same word and aligned congruences."""
    k = trace.k
    runs = thread_edge_runs(trace)
    seen = {}
    for j, run in enumerate(runs):
        wid = trace.word_ids[j]
        r = trace.spec.entries[j][1]
        for a in range(len(run) - k + 1):
            window = tuple(run[a:a + k])
            phase = (r + a) % k
            prior = seen.get(window)
            if prior is None:
                seen[window] = (wid, phase)
            elif prior != (wid, phase):
                return False
    return True


@dataclass(frozen=True)
class TypicalityReport:
    """The typical-event audit of one trace, with the constants used."""

    n: int
    k: int
    d: int
    t_max: float
    h_max: float
    entry_thread_lengths: tuple
    hits_total: int
    longest_following_run: int
    path_exceptions: object
    ball_checked: bool
    e_len: bool
    e_hit: bool
    e_ball: bool
    e_path: bool
    e_foll: bool

    @property
    def typical(self):
        return self.e_len and self.e_hit and self.e_ball and self.e_path and self.e_foll


def longest_following_run(trace):
    best = 0
    run = 0
    for flag in trace.step_explores:
        if flag:
            run = 0
        else:
            run += 1
            if run > best:
                best = run
    return best


def check_typicality(trace, d=None, k=None, n=None):
    """Audit one trace against the typical-event bounds.

    t_max = 5k sqrt(n) caps each entry's standalone thread length; h_max =
    100(dk)^2 caps hits; balls must stay under 4*l*(h_max+1); at most
    10k h_max^2 vertices may have a non-path ball; no following run may
    pass 4dk^2 h_max^2. Ball and path checks short-circuit when the bound
    already exceeds everything the trace revealed.
    """
    d = trace.d if d is None else d
    k = trace.k if k is None else k
    n = trace.n if n is None else n
    t_max = 5 * k * (n ** 0.5)
    h_max = 100 * (d * k) ** 2
    A = trace.automaton
    lengths = tuple(
        thread(A, u, r, w).cut_time for u, r, w in trace.spec.entries
    )
    e_len = all(L <= t_max for L in lengths)
    hits = sum(trace.step_hits)
    e_hit = hits <= h_max
    nverts = len({s for s, _ in trace.revealed} | {v for v, _ in trace.revealed.values()})
    ball_checked = nverts > 4 * (h_max + 1)
    if ball_checked:
        out_adj, in_adj = _adjacency(trace)
        e_ball = True
        for u in set(out_adj) | set(in_adj):
            seen_out = {u}
            seen_in = {u}
            fo, fi = [u], [u]
            radius = 0
            while fo or fi:
                radius += 1
                nxt = []
                for v in fo:
                    for w in out_adj.get(v, ()):
                        if w not in seen_out:
                            seen_out.add(w)
                            nxt.append(w)
                fo = nxt
                nxt = []
                for v in fi:
                    for w in in_adj.get(v, ()):
                        if w not in seen_in:
                            seen_in.add(w)
                            nxt.append(w)
                fi = nxt
                if len(seen_out | seen_in) > 4 * radius * (h_max + 1):
                    e_ball = False
                    break
            if not e_ball:
                break
    else:
        e_ball = True
    path_bound = 10 * k * h_max * h_max
    if n <= path_bound:
        exceptions = None
        e_path = True
    else:
        exceptions = path_exception_count(trace)
        e_path = exceptions <= path_bound
    run = longest_following_run(trace)
    e_foll = run <= 4 * d * k * k * h_max * h_max
    return TypicalityReport(
        n=n, k=k, d=d, t_max=t_max, h_max=h_max,
        entry_thread_lengths=lengths, hits_total=hits,
        longest_following_run=run, path_exceptions=exceptions,
        ball_checked=ball_checked, e_len=e_len, e_hit=e_hit,
        e_ball=e_ball, e_path=e_path, e_foll=e_foll,
    )


def dump_lines(trace):
    """One dict per visited triple plus each thread's closing arrival,
    ready for JSON lines output."""
    tags = classify(trace)
    out = []
    r = trace.automaton.r
    for j in range(trace.d):
        a, b = trace.boundaries[j], trace.boundaries[j + 1]
        for t in range(a, b):
            x, y, wid = trace.events[t]
            out.append(
                {
                    "t": t,
                    "x": x,
                    "y": y,
                    "z": trace.words[wid].text if r == 2 else ",".join(
                        str(l) for l in trace.words[wid].letters
                    ),
                    "tag": tags[t],
                }
            )
        x, y, wid = trace.closings[j]
        if a == b:
            tag = "start"
        elif trace.step_hits[b - 1]:
            tag = "hitting"
        elif not trace.step_explores[b - 1]:
            tag = "following"
        else:
            tag = "exploring"
        out.append(
            {
                "t": b,
                "x": x,
                "y": y,
                "z": trace.words[wid].text if r == 2 else ",".join(
                    str(l) for l in trace.words[wid].letters
                ),
                "tag": tag,
            }
        )
    return out
