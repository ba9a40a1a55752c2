import itertools

import pytest

from synchrotree.core import (
    Automaton,
    Word,
    are_conjugate,
    random_automaton,
    random_nc_word,
    rng_from_seed,
    thread,
    trial_seed,
)
from synchrotree.exploration import (
    ExplorationTrace,
    InputSpec,
    ball,
    check_ball_growth,
    check_degree_sums,
    check_equi,
    check_following_counts,
    check_path_exceptions,
    check_trajectory_overlaps,
    check_typicality,
    classify,
    dump_lines,
    explore,
    hit_counts,
    longest_following_run,
    path_exception_count,
    thread_edge_runs,
)

A3 = Automaton([[1, 2, 0], [0, 0, 0]])
AB = Word("ab")


def _nc_word_set(k, d, rng):
    # distinct words, no two conjugate, as the walk inputs assume
    words = []
    guard = 0
    while len(words) < d:
        w = random_nc_word(k, 2, rng)
        if all(not are_conjugate(w, v) for v in words):
            words.append(w)
        guard += 1
        if guard > 200:
            words.append(words[-1] if words else w)
    return words


def _random_trace(seed, n_lo=15, n_hi=60, d_max=4, k_max=4):
    rng = rng_from_seed(seed)
    n = int(rng.integers(n_lo, n_hi))
    A = random_automaton(n, 2, seed=seed)
    k = int(rng.integers(3, k_max + 1))
    d = int(rng.integers(1, d_max + 1))
    words = _nc_word_set(k, d, rng)
    entries = []
    for w in words:
        entries.append((int(rng.integers(n)), int(rng.integers(k)), w))
    return A, explore(A, InputSpec(tuple(entries)))


def test_trace_frozen_small():
    tr = explore(A3, InputSpec(((0, 0, AB), (1, 1, AB))))
    assert tr.events == [(0, 0, 0), (1, 1, 0)]
    assert tr.boundaries == (0, 2, 2)
    assert tr.spans() == (2, 0)
    assert tr.closings == ((0, 0, 0), (1, 1, 0))
    assert tr.step_explores == [True, True]
    assert tr.step_hits == [False, True]
    assert tr.step_closes == [False, True]
    assert tr.final_time == 2
    assert tr.revealed == {(0, 0): (1, 0), (1, 1): (0, 1)}
    assert tr.revealed_map() == {(0, 0): 1, (1, 1): 0}
    assert classify(tr) == ["start", "exploring"]
    assert hit_counts(tr) == [0, 1]


def test_dump_lines_frozen():
    tr = explore(A3, InputSpec(((0, 0, AB), (1, 1, AB))))
    assert dump_lines(tr) == [
        {"t": 0, "x": 0, "y": 0, "z": "ab", "tag": "start"},
        {"t": 1, "x": 1, "y": 1, "z": "ab", "tag": "exploring"},
        {"t": 2, "x": 0, "y": 0, "z": "ab", "tag": "hitting"},
        {"t": 2, "x": 1, "y": 1, "z": "ab", "tag": "start"},
    ]


def test_single_entry_matches_thread():
    th = thread(A3, 2, 0, AB)
    tr = explore(A3, InputSpec(((2, 0, AB),)))
    assert tr.events == [(u, c, 0) for u, c in th.entries]
    assert tr.spans() == (th.cut_time,)
    assert tr.closings[0][:2] == th.entries[th.twin_time]


def test_ball_directions_and_prefixes():
    tr = explore(A3, InputSpec(((0, 0, AB),)))
    assert ball(tr, 0, 1, "in") == frozenset({0, 1})
    assert ball(tr, 0, 1, "out") == frozenset({0, 1})
    assert ball(tr, 0, 0, "both") == frozenset({0})
    # only the first edge is revealed before time 1
    assert ball(tr, 0, 1, "out", t=1) == frozenset({0, 1})
    assert ball(tr, 0, 1, "in", t=1) == frozenset({0})
    with pytest.raises(ValueError):
        ball(tr, 0, 1, "sideways")


def test_duplicate_entry_has_zero_span():
    tr = explore(A3, InputSpec(((0, 0, AB), (0, 0, AB))))
    assert tr.spans() == (2, 0)
    lines = dump_lines(tr)
    assert lines[-1]["tag"] == "start"
    assert lines[-1]["t"] == 2


def test_revealed_map_is_order_independent():
    for i in range(40):
        seed = trial_seed(41, i)
        rng = rng_from_seed(seed)
        n = int(rng.integers(8, 30))
        A = random_automaton(n, 2, seed=seed)
        k = int(rng.integers(2, 4))
        entries = []
        for _ in range(3):
            w = random_nc_word(k, 2, rng)
            entries.append((int(rng.integers(n)), int(rng.integers(k)), w))
        maps = set()
        for perm in itertools.permutations(entries):
            tr = explore(A, InputSpec(perm))
            maps.add(tuple(sorted(tr.revealed_map().items())))
        assert len(maps) == 1


def test_revealed_agrees_with_automaton():
    for i in range(30):
        _, tr = _random_trace(trial_seed(42, i))
        A = tr.automaton
        for (src, letter), dst in tr.revealed_map().items():
            assert A.rows[letter][src] == dst


def test_events_never_repeat_per_word():
    for i in range(30):
        _, tr = _random_trace(trial_seed(43, i))
        assert len(set(tr.events)) == len(tr.events)


def test_classify_structure():
    for i in range(30):
        _, tr = _random_trace(trial_seed(44, i))
        tags = classify(tr)
        assert len(tags) == tr.final_time
        for j in range(tr.d):
            a, b = tr.boundaries[j], tr.boundaries[j + 1]
            if a < b:
                assert tags[a] == "start"
        for t, tag in enumerate(tags):
            if tag == "hitting":
                assert tr.step_hits[t - 1]
            elif tag == "following":
                assert not tr.step_explores[t - 1]


def test_hit_counts_monotone():
    for i in range(20):
        _, tr = _random_trace(trial_seed(45, i))
        counts = hit_counts(tr)
        assert counts == sorted(counts)
        assert (counts[-1] if counts else 0) == sum(tr.step_hits)


def test_thread_edge_runs_split_steps():
    for i in range(20):
        _, tr = _random_trace(trial_seed(46, i))
        runs = thread_edge_runs(tr)
        flat = [e for run in runs for e in run]
        expect = list(zip(tr.step_src, tr.step_letter, tr.step_dst))
        assert flat == expect


def test_claim_checkers_hold_on_random_traces():
    """The per-prefix claims are combinatorial facts about any exposure
    walk, so every random trace must satisfy all of them."""
    for i in range(150):
        _, tr = _random_trace(trial_seed(47, i))
        assert check_equi(tr)
        assert check_degree_sums(tr)
        assert check_following_counts(tr)
        assert check_ball_growth(tr)
        assert check_trajectory_overlaps(tr)
        assert check_path_exceptions(tr)


def test_path_exception_count_small():
    # the two revealed edges close a directed 2-cycle, so both endpoints
    # fail the path condition
    tr = explore(A3, InputSpec(((0, 0, AB),)))
    assert path_exception_count(tr, radius=1) == 2
    assert longest_following_run(tr) == 0
    # a prefix of a pure chain has no exceptions at all
    n = 8
    succ = [min(i + 1, n - 1) for i in range(n)]
    tr = explore(Automaton([succ, succ]), InputSpec(((0, 0, AB),)))
    assert path_exception_count(tr, radius=2, t=3) == 0


def test_typicality_report_fields():
    A, tr = _random_trace(trial_seed(48, 3), n_lo=40, n_hi=41)
    rep = check_typicality(tr)
    assert rep.n == A.n and rep.k == tr.k and rep.d == tr.d
    assert rep.t_max == 5 * tr.k * (A.n ** 0.5)
    assert rep.h_max == 100 * (tr.d * tr.k) ** 2
    assert len(rep.entry_thread_lengths) == tr.d
    assert rep.hits_total == sum(tr.step_hits)
    assert rep.typical == (
        rep.e_len and rep.e_hit and rep.e_ball and rep.e_path and rep.e_foll
    )
    # n is far below the path bound here, so that check is vacuous
    assert rep.path_exceptions is None and rep.e_path


def test_typicality_flags_oversized_threads():
    # a chain of 128 states walks about n steps, past 5k sqrt(n)
    n = 128
    succ = [(i + 1) % n for i in range(n)]
    A = Automaton([succ, succ])
    tr = explore(A, InputSpec(((0, 0, Word("ab")),)))
    rep = check_typicality(tr)
    assert rep.entry_thread_lengths[0] > rep.t_max
    assert not rep.e_len
    assert not rep.typical


def test_input_spec_validation():
    with pytest.raises(ValueError):
        InputSpec(())
    with pytest.raises(ValueError):
        InputSpec(((0, 0, Word("ab")), (0, 0, Word("aab"))))
    with pytest.raises(ValueError):
        InputSpec(((0, 2, Word("ab")),))
    spec = InputSpec(((5, 0, Word("ab")),))
    with pytest.raises(ValueError):
        explore(A3, spec)
    with pytest.raises(ValueError):
        explore(A3, InputSpec(((0, 0, Word((0, 2))),)))


def test_spec_properties():
    spec = InputSpec(((0, 0, Word("aab")), (1, 2, Word("abb"))))
    assert spec.d == 2
    assert spec.k == 3


def test_dump_lines_wide_alphabet():
    A = Automaton([[1, 0], [0, 1], [1, 1]])
    tr = explore(A, InputSpec(((0, 0, Word((0, 2))),)))
    lines = dump_lines(tr)
    assert all(line["z"] == "0,2" for line in lines)
