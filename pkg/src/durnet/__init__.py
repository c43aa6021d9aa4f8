"""durnet: a workbench for durational labelled Petri nets.

Simulation under all four durational semantics, bounded performance
equivalence via the Spoiler/Duplicator game, compilation of 2-counter
machines into reduction nets with executable proof strategies, and
reachability search.
"""

from .multiset import (
    DurationalMarking,
    MultisetUnderflow,
    NegativeStamp,
    PlaceMultiset,
)
from .net import (
    ALL_SEMANTICS,
    GLOBAL_IMPATIENT,
    GLOBAL_PATIENT,
    LOCAL_IMPATIENT,
    LOCAL_PATIENT,
    FireableInstance,
    Net,
    Semantics,
    TransitionRule,
    canonicalize_pair,
    dead_tokens,
    enabled,
    fire,
    is_equimarking,
    locally_enabled,
    patient_lift,
    split_by_stamp,
)
from .game import (
    Bisimilar,
    GameMove,
    GamePosition,
    GameSession,
    SpoilerWins,
    Unknown,
    duplicator_responses,
    play_round,
    search_strategy,
    solve_bounded,
    spoiler_moves,
)
from .minsky import (
    CompiledMachine,
    Halt,
    Halted,
    Inc,
    JzDec,
    MachineConfig,
    MachineView,
    MinskyMachine,
    OutOfFuel,
    compile_machine,
    extract_state,
    run_machine,
)
from .reachability import (
    Found,
    NotReachable,
    NotWithinBudget,
    reach_durational,
    reach_untimed_bounded,
)
from .strategies import (
    CorrectSimulation,
    ProofDuplicator,
    classify_pair,
    is_conforming,
    simulation_move_bound,
)
from .textio import (
    ParseError,
    parse_machine,
    parse_marking,
    parse_multiset,
    parse_net,
    render_machine,
    render_marking,
    render_net,
)

__version__ = "0.1.0"
