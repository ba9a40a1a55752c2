"""Seeded Monte Carlo experiments over random automata, with CSV output.

Every experiment is driven by an ExperimentConfig and produces an
ExperimentRecord holding one row per trial plus aggregates recomputable
from the rows. Trials derive their own seeds from the master seed, so
serial and parallel runs write byte-identical CSVs.
"""

import csv
import json
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import permutations, product

from .core import (
    Automaton,
    Word,
    automaton_from_json,
    count_nc_words,
    enumerate_nc_words,
    are_conjugate,
    is_w_tree,
    height,
    one_letter_view,
    parse_word,
    random_nc_word,
    rng_from_seed,
    trial_seed,
)
from .records import (
    ALL_TRIPLES,
    DoubleMarked,
    Labeled,
    MarkedLabeled,
    find_collisions,
    has_minima_collision,
    is_cycle_good,
    is_good_marked_tree,
)
from .joyal import fold_cycles, unfold_branch, unfold_pair
from .sync import pick_tree_length, tree_sync_word


EXPERIMENTS = (
    "tree_probability",
    "moment_estimate",
    "scaling",
    "goodness",
    "height",
    "bijection_audit",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """What to run: sizes, trial count, seeding, and the k rule.

    k_rule is ("explicit", k), ("log2", epsilon) for ceil((1+eps) log2 n)
    clamped to [1, ceil(2 log2 n)], or ("ln", factor) for
    ceil(factor ln n). word is only used by tree_probability.
    """

    experiment: str
    sizes: tuple
    trials: int = 100
    seed: int = 0
    k_rule: tuple = ("log2", 0.2)
    epsilon: float = 0.2
    budget: int = None
    word: str = None
    out: str = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError("unknown experiment: %s" % (self.experiment,))
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        if self.trials < 1:
            raise ValueError("trials: need at least one")
        if any(n < 1 for n in self.sizes):
            raise ValueError("sizes: states must be positive")
        rule = tuple(self.k_rule)
        if rule[0] not in ("explicit", "log2", "ln") or len(rule) != 2:
            raise ValueError("k_rule: expected (explicit|log2|ln, value)")
        object.__setattr__(self, "k_rule", (rule[0], float(rule[1])))

    def to_json_dict(self):
        kind, value = self.k_rule
        key = {"explicit": "value", "log2": "epsilon", "ln": "factor"}[kind]
        return {
            "experiment": self.experiment,
            "sizes": list(self.sizes),
            "trials": self.trials,
            "seed": self.seed,
            "k_rule": {"type": kind, key: value},
            "epsilon": self.epsilon,
            "budget": self.budget,
            "word": self.word,
            "out": self.out,
        }


def config_from_json(doc):
    if not isinstance(doc, dict):
        raise ValueError("config: expected an object")
    if "experiment" not in doc:
        raise ValueError("experiment: missing")
    if "sizes" not in doc or not isinstance(doc["sizes"], list):
        raise ValueError("sizes: expected a list")
    rule = ("log2", 0.2)
    if "k_rule" in doc and doc["k_rule"] is not None:
        kr = doc["k_rule"]
        if not isinstance(kr, dict) or "type" not in kr:
            raise ValueError("k_rule: expected an object with a type")
        kind = kr["type"]
        key = {"explicit": "value", "log2": "epsilon", "ln": "factor"}.get(kind)
        if key is None:
            raise ValueError("k_rule.type: expected explicit, log2, or ln")
        if key not in kr:
            raise ValueError("k_rule.%s: missing" % key)
        rule = (kind, kr[key])
    return ExperimentConfig(
        experiment=doc["experiment"],
        sizes=doc["sizes"],
        trials=doc.get("trials", 100),
        seed=doc.get("seed", 0),
        k_rule=rule,
        epsilon=doc.get("epsilon", 0.2),
        budget=doc.get("budget"),
        word=doc.get("word"),
        out=doc.get("out"),
    )


def resolve_k(rule, n):
    kind, value = rule
    if kind == "explicit":
        return max(1, int(value))
    if kind == "log2":
        return pick_tree_length(n, value)
    return max(1, math.ceil(value * math.log(n)))


@dataclass(frozen=True)
class ExperimentRecord:
    config: ExperimentConfig
    columns: tuple
    rows: tuple
    aggregates: dict

    @property
    def experiment(self):
        return self.config.experiment


def save_automaton(A, path):
    with open(path, "w") as f:
        json.dump(A.to_json_dict(), f, indent=1)
        f.write("\n")


def load_automaton(path):
    with open(path) as f:
        return automaton_from_json(json.load(f))


def _uniform_automaton(rng, n, r=2):
    return Automaton(rng.integers(0, n, size=(r, n)))


def _uniform_sigma(rng, n):
    return tuple(int(v) for v in rng.permutation(n))


# one row per trial; module level so process pools can pick them up

def _row_tree_probability(cfg, n, k, trial, seed):
    rng = rng_from_seed(seed)
    A = _uniform_automaton(rng, n)
    w = parse_word(cfg.word)
    return (n, trial, int(is_w_tree(A, w)))


def _row_moment_estimate(cfg, n, k, trial, seed):
    rng = rng_from_seed(seed)
    A = _uniform_automaton(rng, n)
    v = int(rng.integers(0, n))
    sigma = _uniform_sigma(rng, n)
    w = random_nc_word(k, A.r, rng)
    hit = is_good_marked_tree(MarkedLabeled(A, v, sigma), w)
    return (n, trial, int(hit))


def _row_scaling(cfg, n, k, trial, seed):
    rng = rng_from_seed(seed)
    A = _uniform_automaton(rng, n)
    cert = tree_sync_word(A, epsilon=cfg.epsilon, budget=cfg.budget)
    if cert is None:
        return (n, trial, 0, k, None, None)
    assert cert.verified
    return (n, trial, 1, k, cert.height, len(cert.word))


def _nc_word_pair(k):
    """The first two lexicographic non-self-conjugate words of length k
    that are not conjugates of each other."""
    first = None
    for w in enumerate_nc_words(k):
        if first is None:
            first = w
        elif not are_conjugate(first, w):
            return first, w
    raise ValueError("no mutually non-conjugate word pair at this length")


def _row_goodness(cfg, n, k, trial, seed):
    rng = rng_from_seed(seed)
    w1, w2 = _nc_word_pair(k)
    A = _uniform_automaton(rng, n)
    sigma1 = _uniform_sigma(rng, n)
    sigma2 = _uniform_sigma(rng, n)
    cycle_bad = not is_cycle_good(Labeled(A, sigma1), w1)
    collision = has_minima_collision(A, sigma1, sigma2, w1, w2)
    return (n, trial, k, int(cycle_bad), int(collision))


def _row_height(cfg, n, k, trial, seed):
    rng = rng_from_seed(seed)
    A = _uniform_automaton(rng, n)
    w = Word(rng.integers(0, A.r, size=k).tolist())
    h = height(one_letter_view(A, w))
    return (n, trial, k, h, int(h > 5 * math.sqrt(n)))


_ROWS = {
    "tree_probability": _row_tree_probability,
    "moment_estimate": _row_moment_estimate,
    "scaling": _row_scaling,
    "goodness": _row_goodness,
    "height": _row_height,
}

_COLUMNS = {
    "tree_probability": ("n", "trial", "is_tree"),
    "moment_estimate": ("n", "trial", "hit"),
    "scaling": ("n", "trial", "success", "k", "height", "word_len"),
    "goodness": ("n", "trial", "k", "cycle_bad", "minima_collision"),
    "height": ("n", "trial", "k", "height", "exceeds"),
    "bijection_audit": (
        "n", "k", "word", "cycle_good", "good_trees", "round_trips",
        "failures",
    ),
}


def _freq(values):
    return sum(values) / len(values)


def _binom_se(p, trials):
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


def _per_n(cfg, rows):
    groups = {}
    for row in rows:
        groups.setdefault(row[0], []).append(row)
    return [(n, groups[n]) for n in cfg.sizes]


def _agg_tree_probability(cfg, rows):
    p = _freq([r[2] for r in rows])
    return {"p_hat": p, "stderr": _binom_se(p, len(rows))}


def _agg_moment_estimate(cfg, rows):
    per = []
    for n, grp in _per_n(cfg, rows):
        k = resolve_k(cfg.k_rule, n)
        a_k = count_nc_words(k)
        p = _freq([r[2] for r in grp])
        se = _binom_se(p, len(grp))
        per.append(
            {
                "n": n,
                "k": k,
                "a_k": a_k,
                "p_hat": p,
                "estimate": n * a_k * p,
                "estimate_stderr": n * a_k * se,
                "target": float(2 ** k),
            }
        )
    return {"per_n": per}


def _fit_slope(points):
    # least squares slope of y on x
    xs = [x for x, _ in points]
    ys = [y for _, y in points]
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / sxx


def _agg_scaling(cfg, rows):
    per = []
    points = []
    bound_ok = True
    for n, grp in _per_n(cfg, rows):
        lens = [r[5] for r in grp if r[2]]
        rate = _freq([r[2] for r in grp])
        med = statistics.median(lens) if lens else None
        per.append({"n": n, "success_rate": rate, "median_len": med})
        if med:
            points.append((math.log(n), math.log(med)))
        for L in lens:
            if L > 10 * math.sqrt(n) * math.log2(n):
                bound_ok = False
    slope = _fit_slope(points) if len(points) >= 2 else None
    return {"per_n": per, "slope": slope, "bound_factor": 10.0,
            "bound_ok": bound_ok}


def _agg_goodness(cfg, rows):
    per = []
    for n, grp in _per_n(cfg, rows):
        per.append(
            {
                "n": n,
                "k": grp[0][2],
                "cycle_bad_freq": _freq([r[3] for r in grp]),
                "minima_collision_freq": _freq([r[4] for r in grp]),
            }
        )
    def dec(key):
        return all(per[i][key] > per[i + 1][key] for i in range(len(per) - 1))

    return {
        "per_n": per,
        "cycle_bad_decreasing": dec("cycle_bad_freq"),
        "minima_collision_decreasing": dec("minima_collision_freq"),
    }


def _agg_height(cfg, rows):
    per = []
    for n, grp in _per_n(cfg, rows):
        per.append(
            {
                "n": n,
                "bound": 5 * math.sqrt(n),
                "max_height": max(r[3] for r in grp),
                "exceedances": sum(r[4] for r in grp),
            }
        )
    return {"per_n": per, "exceedances": sum(p["exceedances"] for p in per)}


_AGGS = {
    "tree_probability": _agg_tree_probability,
    "moment_estimate": _agg_moment_estimate,
    "scaling": _agg_scaling,
    "goodness": _agg_goodness,
    "height": _agg_height,
}


def _job(args):
    cfg, n, k, trial, seed = args
    return _ROWS[cfg.experiment](cfg, n, k, trial, seed)


def run(config, workers=None):
    """Execute the experiment and return its record.

    workers > 1 runs trials in a process pool; the rows, aggregates, and
    any files written are identical either way. With config.out set, the
    rows land in a CSV and the config in a .config.json sidecar.
    """
    if config.experiment == "bijection_audit":
        record = _run_bijection_audit(config)
    else:
        if any(n < 2 for n in config.sizes):
            raise ValueError("sizes: experiments need at least two states")
        if config.experiment == "tree_probability" and not config.word:
            raise ValueError("word: required for tree_probability")
        jobs = []
        for si, n in enumerate(config.sizes):
            k = resolve_k(config.k_rule, n)
            if config.experiment == "tree_probability":
                k = len(parse_word(config.word))
            for trial in range(config.trials):
                index = si * config.trials + trial
                jobs.append((config, n, k, trial, trial_seed(config.seed, index)))
        if workers and workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(_job, jobs, chunksize=64))
        else:
            rows = [_job(args) for args in jobs]
        rows = tuple(rows)
        aggregates = _AGGS[config.experiment](config, rows)
        record = ExperimentRecord(
            config=config, columns=_COLUMNS[config.experiment], rows=rows,
            aggregates=aggregates,
        )
    if config.out:
        write_record_csv(record, config.out)
    return record


def recompute_aggregates(record):
    """Aggregates rebuilt from the rows alone; must match the stored ones."""
    cfg = record.config
    if cfg.experiment == "bijection_audit":
        return _audit_aggregates(record.rows, record.aggregates)
    return _AGGS[cfg.experiment](cfg, record.rows)


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def write_record_csv(record, path):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\r\n")
        writer.writerow(record.columns)
        for row in record.rows:
            writer.writerow([_cell(x) for x in row])
    sidecar = os.path.splitext(path)[0] + ".config.json"
    with open(sidecar, "w") as f:
        json.dump(record.config.to_json_dict(), f, indent=1, sort_keys=True)
        f.write("\n")


# exhaustive bijection audit; sizes are hard capped so this stays exact

def _all_automata(n, r=2):
    autos = []
    for table in product(range(n), repeat=r * n):
        autos.append(Automaton([table[l * n:(l + 1) * n] for l in range(r)]))
    return autos


def _audit_pair(A, sigmas, w):
    """Round trips in both directions for one automaton and word; returns
    (cycle_good, good_trees, round_trips, failures)."""
    n = A.n
    cgood = bgood = trips = fails = 0
    for sigma in sigmas:
        x = Labeled(A, sigma)
        if not is_cycle_good(x, w):
            continue
        cgood += 1
        trips += 1
        try:
            y, _ = fold_cycles(x, w)
            back, _ = unfold_branch(y, w)
            if back != x or not is_good_marked_tree(y, w):
                fails += 1
        except ValueError:
            fails += 1
    if is_w_tree(A, w):
        for mark in range(n):
            for sigma in sigmas:
                y = MarkedLabeled(A, mark, sigma)
                if not is_good_marked_tree(y, w):
                    continue
                bgood += 1
                trips += 1
                try:
                    x, _ = unfold_branch(y, w)
                    forward, _ = fold_cycles(x, w)
                    if forward != y:
                        fails += 1
                except ValueError:
                    fails += 1
    return cgood, bgood, trips, fails


def _commutation_audit(n, w1, w2):
    """Unfold in both orders on every collision-free doubly marked pair of
    trees; the results must coincide."""
    checked = failures = 0
    sigmas = list(permutations(range(n)))
    for A in _all_automata(n):
        if not (is_w_tree(A, w1) and is_w_tree(A, w2)):
            continue
        for v1 in range(n):
            for sigma1 in sigmas:
                if not is_good_marked_tree(MarkedLabeled(A, v1, sigma1), w1):
                    continue
                for v2 in range(n):
                    for sigma2 in sigmas:
                        if not is_good_marked_tree(
                            MarkedLabeled(A, v2, sigma2), w2
                        ):
                            continue
                        x = DoubleMarked(A, v1, v2, sigma1, sigma2)
                        if find_collisions(x, w1, w2, ALL_TRIPLES,
                                           first_only=True):
                            continue
                        y12, _ = unfold_pair(x, w1, w2, order=(1, 2))
                        y21, _ = unfold_pair(x, w1, w2, order=(2, 1))
                        checked += 1
                        if y12 != y21:
                            failures += 1
    return checked, failures


def _audit_aggregates(rows, previous):
    agg = {
        "total_round_trips": sum(r[5] for r in rows),
        "total_failures": sum(r[6] for r in rows),
        "cardinalities_match": all(r[3] == r[4] for r in rows),
    }
    for key in ("commute_checked", "commute_failures"):
        if key in previous:
            agg[key] = previous[key]
    return agg


def _run_bijection_audit(config):
    n_max = max(config.sizes)
    k_max = resolve_k(config.k_rule, n_max)
    if n_max > 3 or k_max > 3:
        raise ValueError("audit is exhaustive; capped at n=3, k=3")
    rows = []
    for n in range(2, n_max + 1):
        sigmas = list(permutations(range(n)))
        autos = _all_automata(n)
        for k in range(1, k_max + 1):
            for w in enumerate_nc_words(k):
                totals = [0, 0, 0, 0]
                for A in autos:
                    out = _audit_pair(A, sigmas, w)
                    for i in range(4):
                        totals[i] += out[i]
                rows.append((n, k, w.text) + tuple(totals))
    aggregates = {
        "total_round_trips": sum(r[5] for r in rows),
        "total_failures": sum(r[6] for r in rows),
        "cardinalities_match": all(r[3] == r[4] for r in rows),
    }
    if n_max >= 3 and k_max >= 3:
        checked, failures = _commutation_audit(3, Word("aab"), Word("abb"))
        aggregates["commute_checked"] = checked
        aggregates["commute_failures"] = failures
    record = ExperimentRecord(
        config=config, columns=_COLUMNS["bijection_audit"],
        rows=tuple(rows), aggregates=aggregates,
    )
    return record


# spec-level entry points with explicit arguments

def exp_tree_probability(n, k, w, trials, seed=0, workers=None):
    """Frequency of the tree event for one fixed word."""
    word = w if isinstance(w, str) else w.text
    if len(parse_word(word)) != k:
        raise ValueError("word length disagrees with k")
    cfg = ExperimentConfig(
        experiment="tree_probability", sizes=(n,), trials=trials, seed=seed,
        k_rule=("explicit", k), word=word,
    )
    return run(cfg, workers=workers)


def exp_moment_estimate(n, k, trials, seed=0, workers=None):
    """Estimate of the mean count of good marked tree triples, scaled.

    Sampling (A, v, sigma, w) uniformly is exact in expectation: the mean
    count over automata, divided by n!, equals n times the number of
    admissible words times the probability of the good-marked-tree event
    at a uniform sample point.
    """
    cfg = ExperimentConfig(
        experiment="moment_estimate", sizes=(n,), trials=trials, seed=seed,
        k_rule=("explicit", k),
    )
    return run(cfg, workers=workers)


def exp_scaling(sizes, epsilon=0.2, trials=100, seed=0, budget=None, workers=None):
    """Length distribution of the tree-method word across sizes, with a
    fitted log-log slope of the median."""
    cfg = ExperimentConfig(
        experiment="scaling", sizes=tuple(sizes), trials=trials, seed=seed,
        k_rule=("log2", epsilon), epsilon=epsilon, budget=budget,
    )
    return run(cfg, workers=workers)


def exp_goodness(sizes, k_rule=("log2", 0.2), trials=1000, seed=0, workers=None):
    """Failure frequencies of the cycle-good event and of the cross-word
    minima collision, across sizes."""
    cfg = ExperimentConfig(
        experiment="goodness", sizes=tuple(sizes), trials=trials, seed=seed,
        k_rule=k_rule,
    )
    return run(cfg, workers=workers)


def exp_height(n, k=None, samples=50, seed=0, workers=None):
    """Height survey of one-letter views of random words."""
    rule = ("explicit", k) if k is not None else ("ln", 1.0)
    cfg = ExperimentConfig(
        experiment="height", sizes=(n,), trials=samples, seed=seed,
        k_rule=rule,
    )
    return run(cfg, workers=workers)


def exp_bijection_audit(n_max=3, k_max=3):
    """Exhaustive fold/unfold verification on every tiny instance."""
    cfg = ExperimentConfig(
        experiment="bijection_audit", sizes=(n_max,), trials=1,
        k_rule=("explicit", k_max),
    )
    return run(cfg)
