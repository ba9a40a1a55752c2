"""Synchronizing random automata through word-induced trees."""

from .core import (
    Automaton,
    FunctionalGraph,
    SchemaError,
    Thread,
    Word,
    apply_word,
    apply_word_all,
    are_conjugate,
    automaton_from_json,
    count_nc_words,
    cycles,
    cyclic_points,
    enumerate_nc_words,
    format_word,
    height,
    is_self_conjugate,
    is_w_tree,
    one_letter_view,
    parse_word,
    random_automaton,
    random_nc_word,
    shift,
    thread,
    tree_root,
)
from .exploration import (
    ExplorationTrace,
    InputSpec,
    TypicalityReport,
    ball,
    check_typicality,
    classify,
    dump_lines,
    explore,
)
from .joyal import CollisionError, RewiringPlan, fold_cycles, unfold_branch, unfold_pair
from .records import (
    CollisionWitness,
    DoubleLabeled,
    DoubleMarked,
    Labeled,
    MarkedLabeled,
    branch_records,
    cycle_minima,
    find_collisions,
    has_minima_collision,
    is_branch_good,
    is_cycle_good,
    is_good_marked_tree,
)
from .sync import (
    SyncCertificate,
    cerny_automaton,
    find_tree_word,
    greedy_fallback,
    is_synchronizable,
    is_synchronizing,
    pick_tree_length,
    shortest_sync_word_exact,
    tree_sync_word,
)
from .lab import (
    ExperimentConfig,
    ExperimentRecord,
    config_from_json,
    exp_bijection_audit,
    exp_goodness,
    exp_height,
    exp_moment_estimate,
    exp_scaling,
    exp_tree_probability,
    load_automaton,
    run,
    save_automaton,
)

__all__ = [
    "Automaton",
    "CollisionError",
    "CollisionWitness",
    "DoubleLabeled",
    "DoubleMarked",
    "ExperimentConfig",
    "ExperimentRecord",
    "ExplorationTrace",
    "FunctionalGraph",
    "InputSpec",
    "Labeled",
    "MarkedLabeled",
    "RewiringPlan",
    "SchemaError",
    "SyncCertificate",
    "Thread",
    "TypicalityReport",
    "Word",
    "apply_word",
    "apply_word_all",
    "are_conjugate",
    "automaton_from_json",
    "ball",
    "branch_records",
    "cerny_automaton",
    "check_typicality",
    "classify",
    "config_from_json",
    "count_nc_words",
    "cycle_minima",
    "cycles",
    "cyclic_points",
    "dump_lines",
    "enumerate_nc_words",
    "exp_bijection_audit",
    "exp_goodness",
    "exp_height",
    "exp_moment_estimate",
    "exp_scaling",
    "exp_tree_probability",
    "explore",
    "find_collisions",
    "find_tree_word",
    "fold_cycles",
    "format_word",
    "greedy_fallback",
    "has_minima_collision",
    "height",
    "is_branch_good",
    "is_cycle_good",
    "is_good_marked_tree",
    "is_self_conjugate",
    "is_synchronizable",
    "is_synchronizing",
    "is_w_tree",
    "load_automaton",
    "one_letter_view",
    "parse_word",
    "pick_tree_length",
    "random_automaton",
    "random_nc_word",
    "run",
    "save_automaton",
    "shift",
    "shortest_sync_word_exact",
    "thread",
    "tree_root",
    "tree_sync_word",
    "unfold_branch",
    "unfold_pair",
]

__version__ = "0.1.0"
