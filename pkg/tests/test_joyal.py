import itertools
import math

import pytest

from synchrotree.core import (
    Automaton,
    Word,
    is_w_tree,
    random_automaton,
    rng_from_seed,
    trial_seed,
)
from synchrotree.joyal import CollisionError, RewiringPlan, fold_cycles, unfold_branch, unfold_pair
from synchrotree.records import (
    ALL_TRIPLES,
    DoubleMarked,
    Labeled,
    MarkedLabeled,
    cycle_collisions,
    cycle_minima,
    find_collisions,
    has_minima_collision,
    is_good_marked_tree,
    random_labeling,
)

WA = Word("a")
W1, W2 = Word("aab"), Word("abb")


def test_fold_two_cycle_hand_example():
    A = Automaton([[1, 0], [0, 1]])
    y, plan = fold_cycles(Labeled(A, (0, 1)), WA)
    assert y.automaton.rows == ((1, 1), (0, 1))
    assert y.mark == 0
    assert y.sigma == (0, 1)
    assert plan.to_json_dict() == {
        "dir": "phi",
        "edges": [{"src": 1, "letter": 0, "old": 0, "new": 1}],
    }
    x, back = unfold_branch(y, WA)
    assert x.automaton.rows == A.rows
    assert back == plan.inverse()


def test_fold_two_fixed_points_hand_example():
    A = Automaton([[0, 1], [0, 1]])
    y, plan = fold_cycles(Labeled(A, (0, 1)), WA)
    assert y.automaton.rows[0] == (0, 0)
    assert y.mark == 1
    # the lowest minimum re-closes onto itself, a no-op edge
    assert plan.edges == ((1, 0, 1, 0), (0, 0, 0, 0))
    x, back = unfold_branch(y, WA)
    assert x.automaton.rows == A.rows
    assert back.direction == "psi"


def test_plan_apply_validates():
    A = Automaton([[1, 0], [0, 1]])
    good = RewiringPlan("phi", ((0, 0, 1, 0),))
    assert good.apply(A).rows == ((0, 0), (0, 1))
    with pytest.raises(ValueError):
        RewiringPlan("phi", ((0, 0, 0, 1),)).apply(A)
    with pytest.raises(ValueError):
        RewiringPlan("phi", ((0, 0, 1, 0), (0, 0, 1, 1))).apply(A)


def test_plan_inverse_round_trip():
    plan = RewiringPlan("phi", ((2, 1, 0, 3), (4, 0, 1, 1)))
    inv = plan.inverse()
    assert inv.direction == "psi"
    assert inv.edges == ((2, 1, 3, 0), (4, 0, 1, 1))
    assert inv.inverse() == plan
    d = plan.to_json_dict()
    assert d["dir"] == "phi"
    assert d["edges"][0] == {"src": 2, "letter": 1, "old": 0, "new": 3}


def test_fold_rejects_collisions():
    A = random_automaton(4, 2, seed=1)
    x = Labeled(A, (0, 1, 2, 3))
    w = Word("ab")
    with pytest.raises(CollisionError) as err:
        fold_cycles(x, w)
    assert err.value.witness.to_json_dict() == {
        "ihj": [1, 1, 1],
        "p": 1,
        "q": 1,
        "r": 0,
        "s": 1,
        "len": 1,
    }
    # unchecked folding still rewires
    y, plan = fold_cycles(x, w, check=False)
    assert plan.direction == "phi"
    assert is_w_tree(y.automaton, w)


def test_unfold_rejects_bad_inputs():
    w = Word("ab")
    not_tree = Automaton([[1, 2, 0], [1, 2, 0]])
    assert not is_w_tree(not_tree, w)
    with pytest.raises(ValueError):
        unfold_branch(MarkedLabeled(not_tree, 0, (0, 1, 2)), w)
    # constant automaton: the thread of state 1 closes at an odd time
    const = Automaton([[0, 0, 0], [0, 0, 0]])
    assert is_w_tree(const, w)
    with pytest.raises(ValueError):
        unfold_branch(MarkedLabeled(const, 1, (0, 1, 2)), w)
    A3 = Automaton([[1, 2, 0], [0, 0, 0]])
    with pytest.raises(CollisionError):
        unfold_branch(MarkedLabeled(A3, 2, (0, 1, 2)), w)


def test_round_trip_exhaustive_small():
    """Fold then unfold is the identity wherever fold is defined, and the
    two sides have matching cardinalities."""
    for n, word in ((2, Word("a")), (2, Word("ab")), (3, Word("ab"))):
        sigmas = list(itertools.permutations(range(n)))
        folded = 0
        image = set()
        good_targets = set()
        for rows in itertools.product(
            itertools.product(range(n), repeat=n), repeat=2
        ):
            A = Automaton(rows)
            for sigma in sigmas:
                x = Labeled(A, sigma)
                if cycle_collisions(x, word, first_only=True):
                    continue
                y, plan = fold_cycles(x, word)
                assert is_good_marked_tree(y, word)
                x2, back = unfold_branch(y, word)
                assert x2.automaton.rows == A.rows
                assert x2.sigma == sigma
                assert back == plan.inverse()
                folded += 1
                image.add((y.automaton.rows, y.mark, y.sigma))
            for mark in range(n):
                for sigma in sigmas:
                    yy = MarkedLabeled(A, mark, sigma)
                    if is_good_marked_tree(yy, word):
                        good_targets.add((rows, mark, sigma))
        assert folded == len(image)
        assert image == good_targets


def test_unfold_then_fold_identity():
    word = Word("ab")
    n = 3
    sigmas = list(itertools.permutations(range(n)))
    checked = 0
    for rows in itertools.product(itertools.product(range(n), repeat=n), repeat=2):
        A = Automaton(rows)
        for mark in range(n):
            for sigma in sigmas:
                y = MarkedLabeled(A, mark, sigma)
                if not is_good_marked_tree(y, word):
                    continue
                x, _ = unfold_branch(y, word)
                y2, _ = fold_cycles(x, word)
                assert y2 == y
                checked += 1
    assert checked > 100


def test_one_letter_fold_counts():
    """With a one-letter word every map folds, and the image is exactly
    the marked trees: n^n maps against n^(n-1) trees times n marks."""
    for n in (3, 4):
        sigma = tuple(range(n))
        brow = tuple([0] * n)
        image = set()
        for amap in itertools.product(range(n), repeat=n):
            A = Automaton([amap, brow])
            y, _ = fold_cycles(Labeled(A, sigma), WA)
            assert y.automaton.rows[1] == brow
            assert is_w_tree(y.automaton, WA)
            image.add((y.automaton.rows[0], y.mark))
            x, _ = unfold_branch(y, WA)
            assert x.automaton.rows[0] == amap
        assert len(image) == n ** n
        trees = sum(
            1
            for amap in itertools.product(range(n), repeat=n)
            if is_w_tree(Automaton([amap, brow]), WA)
        )
        assert trees == n ** (n - 1)
        assert len(image) == trees * n


def test_pair_unfold_frozen_round_trip():
    """Fold both coordinates of a collision-free double labeling, then
    unfold in either order; both recover the original automaton."""
    for seed in (9565, 9798, 11434, 13830, 17380):
        A = random_automaton(40, 2, seed=seed)
        rng = rng_from_seed(seed ^ 0xABCDEF)
        s1 = random_labeling(40, rng)
        s2 = random_labeling(40, rng)
        assert not has_minima_collision(A, s1, s2, W1, W2)
        y1, _ = fold_cycles(Labeled(A, s1), W1)
        y2, _ = fold_cycles(Labeled(y1.automaton, s2), W2)
        C = y2.automaton
        assert is_w_tree(C, W1) and is_w_tree(C, W2)
        x = DoubleMarked(C, y1.mark, y2.mark, s1, s2)
        assert not find_collisions(x, W1, W2, ALL_TRIPLES, first_only=True)
        out12, plans12 = unfold_pair(x, W1, W2, order=(1, 2))
        out21, plans21 = unfold_pair(x, W1, W2, order=(2, 1))
        assert out12 == out21
        assert out12.automaton.rows == A.rows
        assert out12.sigma1 == s1 and out12.sigma2 == s2
        assert len(plans12) == 2 and len(plans21) == 2


def test_pair_fold_of_colliding_labeling_leaves_image():
    # coordinates fold fine one at a time, but the cross collision
    # survives into the folded configuration
    A = random_automaton(40, 2, seed=0)
    rng = rng_from_seed(0 ^ 0xABCDEF)
    s1 = random_labeling(40, rng)
    s2 = random_labeling(40, rng)
    assert not cycle_collisions(Labeled(A, s1), W1, first_only=True)
    assert not cycle_collisions(Labeled(A, s2), W2, first_only=True)
    assert has_minima_collision(A, s1, s2, W1, W2)
    y1, _ = fold_cycles(Labeled(A, s1), W1)
    y2, _ = fold_cycles(Labeled(y1.automaton, s2), W2)
    x = DoubleMarked(y2.automaton, y1.mark, y2.mark, s1, s2)
    assert find_collisions(x, W1, W2, ALL_TRIPLES, first_only=True)
    with pytest.raises(CollisionError):
        unfold_pair(x, W1, W2, order=(1, 2))


def test_pair_unfold_validation():
    x = DoubleMarked(Automaton([[0, 0], [0, 0]]), 0, 0, (0, 1), (0, 1))
    with pytest.raises(ValueError):
        unfold_pair(x, W1, W2, order=(1, 3))
    # not a tree under either word
    loop = Automaton([[1, 0], [1, 0]])
    with pytest.raises(ValueError):
        unfold_pair(DoubleMarked(loop, 0, 0, (0, 1), (0, 1)), W1, W2)


def test_fold_chain_length_matches_map_statistics():
    """The fold rewires one edge per cycle, and a uniform map has about
    half log n cycles, so plans should shrink only logarithmically."""
    n = 10000
    word = WA
    sizes = []
    for i in range(120):
        seed = trial_seed(78, i)
        A = random_automaton(n, 2, seed=seed)
        sigma = random_labeling(n, rng_from_seed(seed))
        _, plan = fold_cycles(Labeled(A, sigma), word, check=False)
        sizes.append(len(plan.edges))
        rs = cycle_minima(Labeled(A, sigma), word)
        assert len(plan.edges) == rs.count
    mean = sum(sizes) / len(sizes)
    assert abs(mean - 0.5 * math.log(n)) < 0.3 * 0.5 * math.log(n)
